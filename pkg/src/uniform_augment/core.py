"""Augmentation space, uniform op sampling, and chain application.

One call of :func:`sample_ops` followed by :func:`apply_chain` augments one
image.  Each of the ``num_ops`` ops draws a transform uniformly from the
space, then an application probability ``p`` and a magnitude ``lambda``,
both uniform on [0, 1).  During application each op draws one more
uniform ``u`` and is applied iff ``u < p``.  All draws come from a single
stream in the fixed order (index, p, lambda) per op, followed by
(u, transform draws) per op, so a seed reproduces the result exactly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import transforms as K
from .errors import ConfigError, ContractError
from .rng import RngStream

DEFAULT_NUM_OPS = 2


class TransformId(enum.Enum):
    SHEAR_X = "ShearX"
    SHEAR_Y = "ShearY"
    TRANSLATE_X = "TranslateX"
    TRANSLATE_Y = "TranslateY"
    ROTATE = "Rotate"
    AUTO_CONTRAST = "AutoContrast"
    INVERT = "Invert"
    EQUALIZE = "Equalize"
    SOLARIZE = "Solarize"
    POSTERIZE = "Posterize"
    CONTRAST = "Contrast"
    COLOR = "Color"
    BRIGHTNESS = "Brightness"
    SHARPNESS = "Sharpness"
    CUTOUT = "Cutout"

    @classmethod
    def from_name(cls, name: str) -> "TransformId":
        try:
            return cls(name)
        except ValueError:
            known = ", ".join(t.value for t in cls)
            raise ConfigError(f"unknown transform {name!r}; known: {known}") from None


BINARY_TRANSFORMS = frozenset(
    {TransformId.AUTO_CONTRAST, TransformId.INVERT, TransformId.EQUALIZE}
)
INTEGER_TRANSFORMS = frozenset({TransformId.SOLARIZE, TransformId.POSTERIZE})

# native parameter domain each kernel accepts; None means unbounded
_DOMAINS = {
    TransformId.SOLARIZE: (0, 256),
    TransformId.POSTERIZE: (1, 8),
    TransformId.CUTOUT: (0, 1),
    TransformId.CONTRAST: (0, None),
    TransformId.COLOR: (0, None),
    TransformId.BRIGHTNESS: (0, None),
    TransformId.SHARPNESS: (0, None),
}


@dataclass(frozen=True)
class TransformSpec:
    id: TransformId
    lo: float = 0.0
    hi: float = 0.0
    binary: bool = False

    @property
    def name(self) -> str:
        return self.id.value


@dataclass(frozen=True)
class AugmentationSpace:
    transforms: tuple[TransformSpec, ...]
    num_ops: int = DEFAULT_NUM_OPS

    def __post_init__(self):
        object.__setattr__(self, "transforms", tuple(self.transforms))

    def with_num_ops(self, num_ops: int) -> "AugmentationSpace":
        return replace(self, num_ops=int(num_ops))

    def spec(self, transform_id: TransformId) -> TransformSpec:
        for t in self.transforms:
            if t.id is transform_id:
                return t
        raise KeyError(transform_id)


@dataclass(frozen=True)
class SampledOp:
    transform_index: int
    p: float
    lam: float


@dataclass(frozen=True)
class AppliedOp:
    op: SampledOp
    transform: str
    applied: bool
    param: float | None


@dataclass(frozen=True)
class AppliedRecord:
    ops: tuple[AppliedOp, ...]
    seed_trace: str

    @property
    def num_applied(self) -> int:
        return sum(o.applied for o in self.ops)

    def to_dict(self) -> dict:
        return {
            "seed_trace": self.seed_trace,
            "ops": [
                {
                    "transform": o.transform,
                    "index": o.op.transform_index,
                    "p": o.op.p,
                    "lambda": o.op.lam,
                    "applied": o.applied,
                    "param": o.param,
                }
                for o in self.ops
            ],
        }


# ---------------------------------------------------------------------------
# presets

# (narrow, default, wide) ranges; ShearX/Y and TranslateX/Y share a row
_PRESET_ROWS = [
    ((TransformId.SHEAR_X, TransformId.SHEAR_Y), (-0.15, 0.15), (-0.3, 0.3), (-0.9, 0.9)),
    ((TransformId.TRANSLATE_X, TransformId.TRANSLATE_Y), (-0.225, 0.225), (-0.45, 0.45), (-1.0, 1.0)),
    ((TransformId.ROTATE,), (-15.0, 15.0), (-30.0, 30.0), (-90.0, 90.0)),
    ((TransformId.AUTO_CONTRAST,), None, None, None),
    ((TransformId.INVERT,), None, None, None),
    ((TransformId.EQUALIZE,), None, None, None),
    ((TransformId.SOLARIZE,), (0.0, 256.0), (0.0, 256.0), (0.0, 256.0)),
    ((TransformId.POSTERIZE,), (6.0, 8.0), (4.0, 8.0), (2.0, 8.0)),
    ((TransformId.CONTRAST,), (0.5, 1.5), (0.1, 1.9), (0.01, 2.0)),
    ((TransformId.COLOR,), (0.5, 1.5), (0.1, 1.9), (0.01, 2.0)),
    ((TransformId.BRIGHTNESS,), (0.5, 1.5), (0.1, 1.9), (0.01, 2.0)),
    ((TransformId.SHARPNESS,), (0.5, 1.5), (0.1, 1.9), (0.01, 2.0)),
    ((TransformId.CUTOUT,), (0.0, 0.1), (0.0, 0.2), (0.0, 0.6)),
]

PRESET_NAMES = ("narrow", "default", "wide")


def preset(name: str) -> AugmentationSpace:
    """The 15-transform space for ``narrow``, ``default`` or ``wide`` ranges, NumOps 2."""
    try:
        column = PRESET_NAMES.index(name)
    except ValueError:
        raise ConfigError(
            f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}"
        ) from None
    specs = []
    for ids, *ranges in _PRESET_ROWS:
        rng = ranges[column]
        for tid in ids:
            if rng is None:
                specs.append(TransformSpec(tid, binary=True))
            else:
                specs.append(TransformSpec(tid, lo=rng[0], hi=rng[1]))
    return AugmentationSpace(tuple(specs), DEFAULT_NUM_OPS)


# ---------------------------------------------------------------------------
# validation and config files


def validate_space(space: AugmentationSpace) -> list[str]:
    """All invariant violations of ``space``; an empty list means it is valid."""
    problems = []
    if not isinstance(space.num_ops, int) or isinstance(space.num_ops, bool):
        problems.append(f"num_ops must be an integer, got {space.num_ops!r}")
    elif space.num_ops < 0:
        problems.append(f"num_ops < 0: {space.num_ops}")
    if not space.transforms and isinstance(space.num_ops, int) and space.num_ops > 0:
        problems.append("no transforms to sample from but num_ops > 0")

    seen = set()
    for pos, t in enumerate(space.transforms):
        label = f"transform {pos} ({t.name})"
        if t.id in seen:
            problems.append(f"{label}: duplicate transform id")
        seen.add(t.id)
        should_be_binary = t.id in BINARY_TRANSFORMS
        if t.binary != should_be_binary:
            problems.append(
                f"{label}: binary flag is {t.binary} but {t.name} "
                f"{'takes no' if should_be_binary else 'takes a'} magnitude"
            )
        if t.binary:
            continue
        if not (math.isfinite(t.lo) and math.isfinite(t.hi)):
            problems.append(f"{label}: non-finite bound [{t.lo}, {t.hi}]")
            continue
        if t.lo > t.hi:
            problems.append(f"{label}: lo > hi ({t.lo} > {t.hi})")
        dom = _DOMAINS.get(t.id)
        if dom is not None:
            dlo, dhi = dom
            if min(t.lo, t.hi) < dlo or (dhi is not None and max(t.lo, t.hi) > dhi):
                upper = "inf" if dhi is None else dhi
                problems.append(
                    f"{label}: range [{t.lo}, {t.hi}] outside native domain [{dlo}, {upper}]"
                )
    return problems


def ensure_valid(space: AugmentationSpace) -> AugmentationSpace:
    problems = validate_space(space)
    if problems:
        raise ConfigError("invalid augmentation space:\n  " + "\n  ".join(problems))
    return space


def space_to_dict(space: AugmentationSpace) -> dict:
    return {
        "num_ops": space.num_ops,
        "transforms": [
            {"name": t.name, "low": t.lo, "high": t.hi, "binary": t.binary}
            for t in space.transforms
        ],
    }


def space_from_dict(data) -> AugmentationSpace:
    """Build a space from the JSON config layout; structural errors raise ConfigError.

    The result is not validated; call :func:`ensure_valid` for that.
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - {"num_ops", "transforms"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "transforms" not in data or not isinstance(data["transforms"], list):
        raise ConfigError("config needs a 'transforms' array")
    num_ops = data.get("num_ops", DEFAULT_NUM_OPS)
    if not isinstance(num_ops, int) or isinstance(num_ops, bool):
        raise ConfigError(f"num_ops must be an integer, got {num_ops!r}")
    specs = []
    for i, entry in enumerate(data["transforms"]):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"transforms[{i}] must be an object with a 'name'")
        tid = TransformId.from_name(entry["name"])
        binary = entry.get("binary", tid in BINARY_TRANSFORMS)
        if not isinstance(binary, bool):
            raise ConfigError(f"transforms[{i}].binary must be a boolean")
        bounds = []
        for key in ("low", "high"):
            value = entry.get(key, 0.0)
            if value is None and binary:
                value = 0.0
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"transforms[{i}].{key} must be a number, got {value!r}")
            bounds.append(float(value))
        specs.append(TransformSpec(tid, bounds[0], bounds[1], binary))
    return AugmentationSpace(tuple(specs), num_ops)


def load_space(path) -> AugmentationSpace:
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ensure_valid(space_from_dict(data))


# ---------------------------------------------------------------------------
# sampling and application


def map_magnitude(lam: float, spec: TransformSpec) -> float:
    """Map ``lam`` in [0, 1] linearly onto ``[spec.lo, spec.hi]``.

    Solarize and Posterize take integer parameters and are rounded half
    away from zero.
    """
    if spec.binary:
        raise ContractError(f"{spec.name} is binary and takes no magnitude")
    if not 0.0 <= lam <= 1.0:
        raise ContractError(f"magnitude must be in [0, 1], got {lam!r}")
    if lam == 1.0:
        value = spec.hi
    else:
        value = spec.lo + lam * (spec.hi - spec.lo)
    if spec.id in INTEGER_TRANSFORMS:
        return float(K.round_half_away(value))
    return value


def sample_ops(space: AugmentationSpace, rng: RngStream) -> list[SampledOp]:
    """Draw ``space.num_ops`` ops: transform index, then p, then lambda, per op."""
    k = len(space.transforms)
    ops = []
    for _ in range(space.num_ops):
        index = rng.integer(k)
        p = rng.uniform()
        lam = rng.uniform()
        ops.append(SampledOp(index, p, lam))
    return ops


def apply_transform(image: np.ndarray, tid: TransformId, param, rng: RngStream) -> np.ndarray:
    """Run one transform kernel with an already-mapped parameter."""
    if tid is TransformId.SHEAR_X:
        return K.shear(image, "x", param)
    if tid is TransformId.SHEAR_Y:
        return K.shear(image, "y", param)
    if tid is TransformId.TRANSLATE_X:
        return K.translate(image, "x", param)
    if tid is TransformId.TRANSLATE_Y:
        return K.translate(image, "y", param)
    if tid is TransformId.ROTATE:
        return K.rotate(image, param)
    if tid is TransformId.AUTO_CONTRAST:
        return K.autocontrast(image)
    if tid is TransformId.INVERT:
        return K.invert(image)
    if tid is TransformId.EQUALIZE:
        return K.equalize(image)
    if tid is TransformId.SOLARIZE:
        return K.solarize(image, int(param))
    if tid is TransformId.POSTERIZE:
        return K.posterize(image, int(param))
    if tid is TransformId.CUTOUT:
        return K.cutout(image, param, rng)
    return K.adjust(image, tid.value.lower(), param)


def apply_chain(
    image: np.ndarray,
    ops: Sequence[SampledOp],
    space: AugmentationSpace,
    rng: RngStream,
) -> tuple[np.ndarray, AppliedRecord]:
    """Apply ``ops`` in order, each gated by a fresh uniform draw ``u < p``.

    Returns the augmented image (a new array) and its provenance record.
    """
    K.check_image(image)
    out = image
    applied = []
    for op in ops:
        spec = space.transforms[op.transform_index]
        u = rng.uniform()
        if u < op.p:
            param = None if spec.binary else map_magnitude(op.lam, spec)
            out = apply_transform(out, spec.id, param, rng)
            applied.append(AppliedOp(op, spec.name, True, param))
        else:
            applied.append(AppliedOp(op, spec.name, False, None))
    if out is image:
        out = image.copy()
    return out, AppliedRecord(tuple(applied), rng.trace)


def augment(image: np.ndarray, space: AugmentationSpace, rng: RngStream):
    """Sample a chain from ``space`` and apply it: one full draw for one image."""
    return apply_chain(image, sample_ops(space, rng), space, rng)


def describe_ops(ops: Iterable[SampledOp], space: AugmentationSpace) -> list[dict]:
    """JSON-ready view of sampled ops with their mapped parameters."""
    rows = []
    for op in ops:
        spec = space.transforms[op.transform_index]
        rows.append(
            {
                "transform": spec.name,
                "index": op.transform_index,
                "p": op.p,
                "lambda": op.lam,
                "param": None if spec.binary else map_magnitude(op.lam, spec),
            }
        )
    return rows
