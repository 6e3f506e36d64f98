"""Distances, correlations, and uncertainty estimates for evaluation.

Model predictions live on the 5-point grid; human guesses are kept at raw
resolution. Wasserstein comparisons therefore accept either a Distribution
or an EmpiricalSample on each side. Guesses are snapped to the grid only
when a grid histogram is explicitly requested (entropy comparisons).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import wasserstein_distance

from .errors import DegenerateVariance, EmptySample, LengthMismatch
from .rsa import Distribution, StateGrid

MIN_BOOTSTRAP_RESAMPLES = 1000


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Raw human guesses for one problem, each within [0, 100]."""

    values: np.ndarray
    problem_id: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise EmptySample(f"no observations for problem {self.problem_id!r}")
        if np.any(values < 0) or np.any(values > 100):
            raise ValueError("guesses must lie within [0, 100]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        return float(self.values.mean())


def abs_diff(prediction: float, target: float) -> float:
    """Absolute error on the scale."""
    return float(abs(prediction - target))


def _as_values_weights(side):
    if isinstance(side, Distribution):
        return np.asarray(side.support, float), np.asarray(side.probs, float)
    if isinstance(side, EmpiricalSample):
        return np.asarray(side.values, float), None
    raise TypeError(f"expected Distribution or EmpiricalSample, got {type(side).__name__}")


def wasserstein1(a, b) -> float:
    """Earth-mover distance between two one-dimensional masses.

    Either side may be a Distribution (explicit probabilities) or an
    EmpiricalSample (equally weighted raw observations).
    """
    va, wa = _as_values_weights(a)
    vb, wb = _as_values_weights(b)
    return float(wasserstein_distance(va, vb, u_weights=wa, v_weights=wb))


def pearson(xs, ys) -> float:
    """Pearson correlation of two equal-length sequences."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"paired sequences of equal length required, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise LengthMismatch("need at least two pairs")
    sx = x - x.mean()
    sy = y - y.mean()
    denom = np.sqrt(np.sum(sx * sx) * np.sum(sy * sy))
    if denom == 0:
        raise DegenerateVariance("correlation undefined when a side has zero variance")
    return float(np.sum(sx * sy) / denom)


def rmse(xs, ys) -> float:
    """Root mean squared difference between paired sequences."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise LengthMismatch("paired non-empty sequences of equal length required")
    return float(np.sqrt(np.mean((x - y) ** 2)))


def standard_error(values) -> float | None:
    """Sample standard deviation over sqrt(n); None for fewer than two values."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return None
    return float(v.std(ddof=1) / np.sqrt(v.size))


def bootstrap_ci(values, resamples: int = 2000, seed: int = 0,
                 level: float = 0.95) -> tuple:
    """Seeded percentile bootstrap CI for the mean of `values`."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptySample("cannot bootstrap an empty sample")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, v.size, size=(resamples, v.size))
    means = v[idx].mean(axis=1)
    lo = (1.0 - level) / 2.0
    return (float(np.quantile(means, lo)), float(np.quantile(means, 1.0 - lo)))


@dataclass(frozen=True)
class BootstrapResult:
    """Paired-bootstrap comparison of two per-problem error sequences."""

    mean_diff: float
    p_value: float
    ci_low: float
    ci_high: float
    resamples: int
    seed: int


def paired_bootstrap(errors_a, errors_b, resamples: int = 10000,
                     seed: int = 0) -> BootstrapResult:
    """Two-sided paired bootstrap on mean(errors_a - errors_b).

    Resamples problem indices with replacement, seeded. The p-value uses
    add-one smoothing so it is never exactly zero; the CI is the 2.5/97.5
    percentile interval of the resampled mean difference.
    """
    a = np.asarray(errors_a, dtype=float)
    b = np.asarray(errors_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch("paired sequences of equal length required")
    if a.size == 0:
        raise EmptySample("cannot bootstrap empty sequences")
    if resamples < MIN_BOOTSTRAP_RESAMPLES:
        raise ValueError(f"resamples must be at least {MIN_BOOTSTRAP_RESAMPLES}")
    diffs = a - b
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, diffs.size, size=(resamples, diffs.size))
    means = diffs[idx].mean(axis=1)
    n_le = int(np.sum(means <= 0)) + 1
    n_ge = int(np.sum(means >= 0)) + 1
    p = min(1.0, 2.0 * min(n_le, n_ge) / (resamples + 1))
    return BootstrapResult(
        mean_diff=float(diffs.mean()),
        p_value=float(p),
        ci_low=float(np.quantile(means, 0.025)),
        ci_high=float(np.quantile(means, 0.975)),
        resamples=resamples,
        seed=seed,
    )


def grid_histogram(values, grid: StateGrid) -> Distribution:
    """Snap raw values to the grid and count-normalize into a Distribution."""
    v = np.atleast_1d(np.asarray(values, dtype=float))
    if v.size == 0:
        raise EmptySample("cannot histogram an empty sample")
    counts = np.zeros(len(grid))
    for x in v:
        counts[grid.index_of(grid.snap(float(x)))] += 1
    return Distribution(grid.values, counts / counts.sum())
