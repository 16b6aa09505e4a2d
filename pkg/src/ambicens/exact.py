"""Exact batch likelihood, its i.i.d. exponential MLE, and likelihood surfaces."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .data import BatchDataset
from .distributions import DistributionSpec, make_distribution, param_names
from .errors import DatasetError
from .numerics import find_root, integrate_interval


def unobserved_probability(dist_x: DistributionSpec, dist_t: DistributionSpec, t0: float) -> float:
    """P(X + T > t0) = S_X(t0) + int_0^t0 S_T(t0 - x) dF_X(x).

    The integral is taken over ``u = F_X(x)`` so the integrand stays bounded
    even where ``f_X`` is not.
    """
    upper = float(dist_x.cdf(t0))
    integrand = lambda u: float(dist_t.sf(max(t0 - float(dist_x.ppf(u)), 0.0)))
    return float(dist_x.sf(t0)) + integrate_interval(integrand, 0.0, upper)


def exact_loglik(dist_x: DistributionSpec, dist_t: DistributionSpec, dataset: BatchDataset) -> float:
    """Log of the full batch likelihood, up to an additive constant."""
    ll = float(np.sum(dist_x.logpdf(dataset.x)) + np.sum(dist_t.logpdf(dataset.t)))
    missing = dataset.n_total - dataset.n_observed
    if missing:
        ll += missing * math.log(unobserved_probability(dist_x, dist_t, dataset.horizon))
    return ll


def imputed_loglik(dist_x: DistributionSpec, dist_t: DistributionSpec, dataset: BatchDataset, imputed) -> float:
    """Log-likelihood once a set of installed-but-surviving units is filled in.

    Observed units contribute ``f_X(x) f_T(t)``, imputed units
    ``f_X(x) S_T(T0 - x)``, and every remaining unit ``S_X(T0)``.
    """
    g = np.asarray(imputed, dtype=float)
    rest = max(0, dataset.n_total - dataset.n_observed - g.size)
    return float(
        np.sum(dist_x.logpdf(dataset.x))
        + np.sum(dist_t.logpdf(dataset.t))
        + np.sum(dist_x.logpdf(g))
        + np.sum(dist_t.logsf(np.maximum(dataset.horizon - g, 0.0)))
        + rest * float(dist_x.logsf(dataset.horizon))
    )


def iid_exponential_loglik(rate: float, dataset: BatchDataset) -> float:
    """Exact log-likelihood when X and T share one exponential rate."""
    c, n, t0 = dataset.n_observed, dataset.n_total, dataset.horizon
    total = float(np.sum(dataset.x) + np.sum(dataset.t))
    return 2 * c * math.log(rate) - rate * total + (n - c) * (math.log1p(rate * t0) - rate * t0)


def iid_exponential_score(rate: float, dataset: BatchDataset) -> float:
    c, n, t0 = dataset.n_observed, dataset.n_total, dataset.horizon
    total = float(np.sum(dataset.x) + np.sum(dataset.t))
    return 2 * c / rate + t0 * (n - c) / (1 + rate * t0) - total - (n - c) * t0


def exact_mle_iid_exponential(dataset: BatchDataset) -> tuple[float, float]:
    """Exact MLE of a common exponential rate and its asymptotic sd.

    The sd is ``(-l''(rate))**-0.5`` with ``l''`` from a central difference
    of step ``rate * 1e-4``.
    """
    if dataset.n_observed < 1:
        raise DatasetError("exact MLE needs at least one observed unit")
    rate = find_root(lambda r: iid_exponential_score(r, dataset))
    h = rate * 1e-4
    ll = lambda r: iid_exponential_loglik(r, dataset)
    curvature = (ll(rate + h) - 2 * ll(rate) + ll(rate - h)) / h**2
    sd = math.sqrt(-1.0 / curvature) if curvature < 0 else float("nan")
    return rate, sd


@dataclass(frozen=True)
class SurfaceGrid:
    axis1_name: str
    axis1: np.ndarray
    axis2_name: str
    axis2: np.ndarray
    values: np.ndarray

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.nanargmax(self.values), self.values.shape)
        return float(self.axis1[i]), float(self.axis2[j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{self.axis1_name}/{self.axis2_name}"] + [repr(float(v)) for v in self.axis2])
        for a, row in zip(self.axis1, self.values):
            w.writerow([repr(float(a))] + [repr(float(v)) for v in row])
        return buf.getvalue()


def surface_parameters(family_x: str, family_t: str) -> list[str]:
    return [f"x.{n}" for n in param_names(family_x)] + [f"t.{n}" for n in param_names(family_t)]


def loglik_surface(dataset: BatchDataset, family_x: str, family_t: str, axis1, axis2,
                   fixed: dict | None = None, imputed=None) -> SurfaceGrid:
    """Evaluate the log-likelihood over a 2-D parameter grid.

    ``axis1`` and ``axis2`` are ``(name, values)`` pairs with names like
    ``"x.rate"`` or ``"t.shape"``; every other parameter must be given in
    ``fixed``. When ``imputed`` installation times are supplied the imputed
    likelihood is scanned instead of the exact one.
    """
    fixed = dict(fixed or {})
    (n1, v1), (n2, v2) = axis1, axis2
    v1 = np.atleast_1d(np.asarray(v1, dtype=float))
    v2 = np.atleast_1d(np.asarray(v2, dtype=float))
    names = surface_parameters(family_x, family_t)
    for n in (n1, n2, *fixed):
        if n not in names:
            raise ValueError(f"unknown parameter {n!r}; expected one of {names}")
    if n1 == n2:
        raise ValueError("the two axes must be different parameters")
    free = [n for n in names if n not in (n1, n2) and n not in fixed]
    if free:
        raise ValueError(f"parameters {free} are neither on an axis nor fixed")
    if np.any(v1 <= 0) or np.any(v2 <= 0):
        raise ValueError("grid values must be positive")

    def dists(p):
        dx = make_distribution(family_x, **{n[2:]: p[n] for n in names if n.startswith("x.")})
        dt = make_distribution(family_t, **{n[2:]: p[n] for n in names if n.startswith("t.")})
        return dx, dt

    out = np.empty((v1.size, v2.size))
    for i, a in enumerate(v1):
        for j, b in enumerate(v2):
            dx, dt = dists({**fixed, n1: a, n2: b})
            if imputed is None:
                out[i, j] = exact_loglik(dx, dt, dataset)
            else:
                out[i, j] = imputed_loglik(dx, dt, dataset, imputed)
    out[~np.isfinite(out)] = -np.inf
    return SurfaceGrid(n1, v1, n2, v2, out)
