"""Proportional imputation of unobserved installations.

The observed installation times cut ``[0, T0]`` into intervals. For each
interval the probability that a unit is installed there and is still
working at ``T0`` is approximated by the trapezoid

    I = (S_T(T0 - a) + S_T(T0 - b)) / 2 * (F_X(b) - F_X(a)),

and the expected number of installed-but-unseen units,
``N F_X(T0) - C``, is spread over the intervals in proportion to ``I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import BatchDataset
from .distributions import DistributionSpec, sample_in_intervals

__all__ = [
    "BatchDataset",
    "ImputationPlan",
    "build_partition",
    "interval_mass",
    "interval_masses",
    "telescoped_total_mass",
    "build_plan",
    "draw_counts",
    "impute_installations",
]


@dataclass(frozen=True)
class ImputationPlan:
    boundaries: np.ndarray
    masses: np.ndarray
    alphas: np.ndarray
    target_total: float

    @property
    def n_intervals(self) -> int:
        return self.masses.size


def build_partition(dataset: BatchDataset) -> np.ndarray:
    """``0``, the distinct observed installation times in order, ``T0``.

    Tied installation times collapse into a single boundary.
    """
    return np.concatenate(([0.0], np.unique(dataset.x), [dataset.horizon]))


def interval_masses(dist_x: DistributionSpec, dist_t: DistributionSpec, t0: float, boundaries) -> np.ndarray:
    b = np.asarray(boundaries, dtype=float)
    surv = dist_t.sf(np.maximum(t0 - b, 0.0))
    return 0.5 * (surv[:-1] + surv[1:]) * np.diff(dist_x.cdf(b))


def interval_mass(dist_x: DistributionSpec, dist_t: DistributionSpec, t0: float, a: float, b: float) -> float:
    """Trapezoid approximation of P(a < X < b, T > t0 - X)."""
    if not 0 <= a <= b <= t0:
        raise ValueError("need 0 <= a <= b <= t0")
    return float(interval_masses(dist_x, dist_t, t0, [a, b])[0])


def telescoped_total_mass(dist_x: DistributionSpec, dist_t: DistributionSpec, t0: float, boundaries) -> float:
    """Sum of all interval masses, via summation by parts.

    With ``F_k = F_X(x_k)`` and ``s_k = S_T(T0 - x_k)`` over the boundaries
    ``x_0 < ... < x_{C+1}``, the sum of trapezoids collapses to

        sum_{k=1..C} F_k (s_{k-1} - s_{k+1}) / 2
            + F_{C+1} (s_C + s_{C+1}) / 2 - F_0 (s_0 + s_1) / 2.

    The last term vanishes when ``x_0 = 0``.
    """
    b = np.asarray(boundaries, dtype=float)
    F = dist_x.cdf(b)
    s = dist_t.sf(np.maximum(t0 - b, 0.0))
    inner = 0.5 * np.dot(F[1:-1], s[:-2] - s[2:])
    return float(inner + 0.5 * F[-1] * (s[-2] + s[-1]) - 0.5 * F[0] * (s[0] + s[1]))


def build_plan(dataset: BatchDataset, dist_x: DistributionSpec, dist_t: DistributionSpec) -> ImputationPlan:
    """Expected number of unseen installations in every interval."""
    boundaries = build_partition(dataset)
    masses = interval_masses(dist_x, dist_t, dataset.horizon, boundaries)
    raw = dataset.n_total * float(dist_x.cdf(dataset.horizon)) - dataset.n_observed
    target = max(0.0, raw)
    total = masses.sum()
    if target > 0 and total > 0:
        alphas = target * masses / total
    else:
        alphas = np.zeros_like(masses)
    return ImputationPlan(boundaries, masses, alphas, target)


def draw_counts(plan: ImputationPlan, rng: np.random.Generator) -> np.ndarray:
    """Integer part of each expected count plus a Bernoulli on the fraction."""
    whole = np.floor(plan.alphas)
    frac = plan.alphas - whole
    return (whole + (rng.random(whole.size) < frac)).astype(np.int64)


def impute_installations(plan: ImputationPlan, counts, dist_x: DistributionSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw ``counts[k]`` installation times from ``F_X`` restricted to interval ``k``."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != plan.masses.shape:
        raise ValueError("counts must have one entry per interval")
    lo = np.repeat(plan.boundaries[:-1], counts)
    hi = np.repeat(plan.boundaries[1:], counts)
    return sample_in_intervals(dist_x, lo, hi, rng)
