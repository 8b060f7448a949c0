"""Statistical checks on the sampler and corpus-shift reports for ablations.

The uniformity test draws a large batch of ops and compares transform
counts against the discrete uniform (chi-square) and the ``p`` / ``lambda``
draws against U(0, 1) (one-sample Kolmogorov-Smirnov).  Critical values
come from scipy's chi-square quantile and the asymptotic Kolmogorov
distribution.

Shift reports summarise how far an augmented corpus has drifted from its
source: channel mean/std deltas, normalized histogram L1 distances and the
change in the share of fill-colored pixels.  They are descriptive only.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special, stats

from .core import AugmentationSpace, SampledOp, ensure_valid, preset, sample_ops
from .errors import InputError
from .imageio import SUPPORTED_SUFFIXES, read_image
from .pipeline import augment_dataset, epoch_dir
from .rng import stream_from_seed
from .transforms import FILL_COLOR

ALPHA = 0.001


def chi_square_statistic(counts, expected=None) -> float:
    """Pearson chi-square of ``counts`` against ``expected`` (uniform if omitted)."""
    counts = np.asarray(counts, dtype=np.float64)
    if expected is None:
        expected = np.full(counts.shape, counts.sum() / counts.size)
    expected = np.asarray(expected, dtype=np.float64)
    return float(np.sum((counts - expected) ** 2 / expected))


def ks_uniform_statistic(samples) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and U(0, 1)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise InputError("KS statistic needs at least one sample")
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = np.max(i / n - x)
    d_minus = np.max(x - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def chi_square_critical(dof: int, alpha: float = ALPHA) -> float:
    return float(stats.chi2.isf(alpha, dof))


def ks_critical(n: int, alpha: float = ALPHA) -> float:
    """Asymptotic one-sample KS critical value ``K_alpha / sqrt(n)``."""
    return float(special.kolmogi(alpha) / math.sqrt(n))


@dataclass
class UniformityReport:
    transform_names: list[str]
    counts: list[int]
    n_draws: int
    chi_square: float
    dof: int
    chi_square_critical: float
    ks_lambda: float
    ks_p: float
    ks_critical: float
    alpha: float = ALPHA

    @property
    def chi_square_pass(self) -> bool:
        return self.chi_square < self.chi_square_critical

    @property
    def ks_lambda_pass(self) -> bool:
        return self.ks_lambda < self.ks_critical

    @property
    def ks_p_pass(self) -> bool:
        return self.ks_p < self.ks_critical

    @property
    def passed(self) -> bool:
        return self.chi_square_pass and self.ks_lambda_pass and self.ks_p_pass

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(
            chi_square_pass=self.chi_square_pass,
            ks_lambda_pass=self.ks_lambda_pass,
            ks_p_pass=self.ks_p_pass,
            passed=self.passed,
        )
        return d

    def format_table(self) -> str:
        expected = self.n_draws / len(self.counts)
        lines = [f"{'transform':<14}{'count':>10}{'expected':>12}"]
        for name, c in zip(self.transform_names, self.counts):
            lines.append(f"{name:<14}{c:>10d}{expected:>12.1f}")
        verdict = lambda ok: "pass" if ok else "FAIL"
        lines += [
            "",
            f"{'statistic':<14}{'value':>12}{'critical':>12}  result",
            f"{'chi-square':<14}{self.chi_square:>12.4f}{self.chi_square_critical:>12.4f}  "
            f"{verdict(self.chi_square_pass)}  (dof={self.dof})",
            f"{'KS lambda':<14}{self.ks_lambda:>12.6f}{self.ks_critical:>12.6f}  {verdict(self.ks_lambda_pass)}",
            f"{'KS p':<14}{self.ks_p:>12.6f}{self.ks_critical:>12.6f}  {verdict(self.ks_p_pass)}",
            f"n = {self.n_draws}, alpha = {self.alpha}: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines)


Sampler = Callable[[AugmentationSpace, object], Sequence[SampledOp]]


def uniformity_test(
    space: AugmentationSpace,
    master_seed: int = 0,
    n_draws: int = 150_000,
    sampler: Sampler = sample_ops,
    alpha: float = ALPHA,
) -> UniformityReport:
    """Draw ``n_draws`` ops with ``sampler`` and test them for uniformity."""
    ensure_valid(space)
    k = len(space.transforms)
    if k < 2:
        raise InputError("uniformity test needs at least two transforms")
    if n_draws < 10 * k:
        raise InputError(f"n_draws must be at least 10 * {k} = {10 * k}, got {n_draws}")
    rng = stream_from_seed(master_seed)
    ops = sampler(space.with_num_ops(n_draws), rng)
    index = np.fromiter((o.transform_index for o in ops), dtype=np.int64, count=len(ops))
    lam = np.fromiter((o.lam for o in ops), dtype=np.float64, count=len(ops))
    p = np.fromiter((o.p for o in ops), dtype=np.float64, count=len(ops))
    counts = np.bincount(index, minlength=k)
    return UniformityReport(
        transform_names=[t.name for t in space.transforms],
        counts=[int(c) for c in counts],
        n_draws=len(ops),
        chi_square=chi_square_statistic(counts),
        dof=k - 1,
        chi_square_critical=chi_square_critical(k - 1, alpha),
        ks_lambda=ks_uniform_statistic(lam),
        ks_p=ks_uniform_statistic(p),
        ks_critical=ks_critical(len(ops), alpha),
        alpha=alpha,
    )


# ---------------------------------------------------------------------------
# corpus statistics


@dataclass
class CorpusStats:
    """Additive per-channel sums over a set of images."""

    pixels: int = 0
    fill_pixels: int = 0
    sums: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.int64))
    sq_sums: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.int64))
    hist: np.ndarray = field(default_factory=lambda: np.zeros((3, 256), dtype=np.int64))

    @classmethod
    def of_image(cls, image: np.ndarray) -> "CorpusStats":
        flat = image.reshape(-1, 3).astype(np.int64)
        hist = np.stack([np.bincount(flat[:, c], minlength=256) for c in range(3)])
        fill = int(np.all(flat == np.array(FILL_COLOR), axis=1).sum())
        return cls(flat.shape[0], fill, flat.sum(axis=0), (flat * flat).sum(axis=0), hist)

    def __add__(self, other: "CorpusStats") -> "CorpusStats":
        return CorpusStats(
            self.pixels + other.pixels,
            self.fill_pixels + other.fill_pixels,
            self.sums + other.sums,
            self.sq_sums + other.sq_sums,
            self.hist + other.hist,
        )

    @property
    def mean(self) -> np.ndarray:
        return self.sums / self.pixels

    @property
    def std(self) -> np.ndarray:
        # exact integer numerator keeps identical corpora at exactly equal values
        n = self.pixels
        var_num = [n * int(q) - int(s) * int(s) for s, q in zip(self.sums, self.sq_sums)]
        return np.array([math.sqrt(v) / n for v in var_num])

    @property
    def fill_fraction(self) -> float:
        return self.fill_pixels / self.pixels


def image_files(root) -> list[Path]:
    root = Path(root)
    found = []
    for dirpath, _dirs, names in os.walk(root):
        for name in names:
            if name.lower().endswith(SUPPORTED_SUFFIXES):
                found.append(Path(dirpath, name))
    found.sort(key=lambda p: p.relative_to(root).as_posix().encode("utf-8", "surrogateescape"))
    return found


def _stats_of_file(path) -> CorpusStats:
    return CorpusStats.of_image(read_image(path))


def corpus_stats(root, workers: int = 1) -> CorpusStats:
    """Aggregate statistics over every image file under ``root``."""
    files = image_files(root)
    if not files:
        raise InputError(f"no images under {root}")
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_stats_of_file, files, chunksize=max(1, len(files) // (workers * 4))))
    else:
        parts = [_stats_of_file(f) for f in files]
    total = CorpusStats()
    for part in parts:
        total = total + part
    return total


@dataclass
class ShiftReport:
    mean_delta: list[float]
    std_delta: list[float]
    hist_l1: list[float]
    fill_fraction_delta: float
    original_pixels: int
    augmented_pixels: int

    @property
    def mean_hist_l1(self) -> float:
        return float(np.mean(self.hist_l1))

    def is_zero(self) -> bool:
        return (
            all(v == 0 for v in self.mean_delta + self.std_delta + self.hist_l1)
            and self.fill_fraction_delta == 0
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean_hist_l1"] = self.mean_hist_l1
        return d


def shift_report(original: CorpusStats, augmented: CorpusStats) -> ShiftReport:
    """Channel statistics of ``augmented`` relative to ``original``."""
    p = original.hist / original.pixels
    q = augmented.hist / augmented.pixels
    return ShiftReport(
        mean_delta=[float(v) for v in augmented.mean - original.mean],
        std_delta=[float(v) for v in augmented.std - original.std],
        hist_l1=[float(v) for v in np.abs(q - p).sum(axis=1)],
        fill_fraction_delta=float(augmented.fill_fraction - original.fill_fraction),
        original_pixels=original.pixels,
        augmented_pixels=augmented.pixels,
    )


def compare_corpora(original_root, augmented_root, workers: int = 1) -> ShiftReport:
    return shift_report(corpus_stats(original_root, workers), corpus_stats(augmented_root, workers))


# ---------------------------------------------------------------------------
# ablation harnesses


@dataclass
class AblationRun:
    label: str
    output_root: Path
    report: ShiftReport
    num_failed: int = 0

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "output_root": str(self.output_root),
            "num_failed": self.num_failed,
            **self.report.to_dict(),
        }


def _run_one(dataset, output_root, space, master_seed, workers, label, baseline):
    manifest = augment_dataset(dataset, output_root, space, master_seed, epochs=1, workers=workers)
    report = shift_report(baseline, corpus_stats(epoch_dir(output_root, 0), workers))
    return AblationRun(label, Path(output_root), report, manifest.num_failed)


def range_ablation(
    dataset, output_root, master_seed: int = 0, workers: int = 1, num_ops: int | None = None
) -> list[AblationRun]:
    """One augmented epoch and shift report per range preset (narrow, default, wide)."""
    baseline = corpus_stats(dataset.root, workers)
    runs = []
    for name in ("narrow", "default", "wide"):
        space = preset(name)
        if num_ops is not None:
            space = space.with_num_ops(num_ops)
        runs.append(
            _run_one(dataset, Path(output_root, name), space, master_seed, workers, name, baseline)
        )
    return runs


def numops_sweep(
    dataset,
    output_root,
    num_ops_values: Sequence[int],
    master_seed: int = 0,
    space: AugmentationSpace | None = None,
    workers: int = 1,
) -> list[AblationRun]:
    """One augmented epoch and shift report per NumOps value.

    Trees go to ``<output_root>/numops_<k>/epoch_0``.
    """
    values = [int(v) for v in num_ops_values]
    if not values:
        raise InputError("num_ops_values is empty")
    if any(v < 0 for v in values):
        raise InputError(f"NumOps values must be >= 0, got {values}")
    base_space = space if space is not None else preset("default")
    baseline = corpus_stats(dataset.root, workers)
    return [
        _run_one(
            dataset,
            Path(output_root, f"numops_{k}"),
            base_space.with_num_ops(k),
            master_seed,
            workers,
            f"numops={k}",
            baseline,
        )
        for k in values
    ]


def is_nondecreasing(values: Sequence[float]) -> bool:
    return all(a <= b for a, b in zip(values, values[1:]))


def format_shift_table(runs: Sequence[AblationRun]) -> str:
    header = f"{'run':<12}{'hist L1':>10}{'mean dR':>10}{'mean dG':>10}{'mean dB':>10}{'std dR':>9}{'fill d':>10}"
    lines = [header]
    for r in runs:
        rep = r.report
        lines.append(
            f"{r.label:<12}{rep.mean_hist_l1:>10.4f}"
            + "".join(f"{v:>10.3f}" for v in rep.mean_delta)
            + f"{rep.std_delta[0]:>9.3f}{rep.fill_fraction_delta:>10.5f}"
        )
    return "\n".join(lines)
