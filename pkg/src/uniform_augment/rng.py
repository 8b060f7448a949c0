"""Deterministic random streams.

Every image in every epoch gets its own stream, derived from
``(master_seed, epoch, image_index)``.  Streams are never shared, so the
order in which workers pick up images cannot change any draw.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """Single-owner pseudorandom stream (PCG64 under a SeedSequence).

    ``trace`` is a human-readable label of the derivation input, carried
    into provenance records.
    """

    __slots__ = ("_gen", "trace")

    def __init__(self, entropy, trace: str | None = None):
        seq = np.random.SeedSequence(entropy)
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self.trace = trace if trace is not None else f"entropy={entropy!r}"

    def uniform(self) -> float:
        """One real uniform on [0, 1)."""
        return float(self._gen.random())

    def integer(self, n: int) -> int:
        """One integer uniform on ``0 .. n-1``."""
        if n <= 0:
            raise ValueError(f"integer range must be positive, got {n}")
        return int(self._gen.integers(n))

    def raw64(self) -> int:
        """Next raw 64-bit output of the underlying bit generator."""
        return int(self._gen.bit_generator.random_raw())

    def __repr__(self):
        return f"RngStream({self.trace})"


def stream_from_seed(seed: int) -> RngStream:
    """A stream keyed by a single 64-bit seed."""
    return RngStream([int(seed) & _MASK64], trace=f"seed={int(seed) & _MASK64}")


def derive_stream(master_seed: int, epoch: int, image_index: int) -> RngStream:
    """Stream for one image in one epoch.

    The three inputs are hashed together by SeedSequence; any change to any
    of them gives an unrelated stream.
    """
    seed = int(master_seed) & _MASK64
    entropy = [seed, 0x5541, int(epoch), int(image_index)]
    return RngStream(entropy, trace=f"seed={seed}/epoch={epoch}/index={image_index}")
