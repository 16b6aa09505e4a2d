"""Lifetime distribution families and their maximum-likelihood fitters.

Two families are supported, `Exponential` and `Weibull`. Each is a frozen
value object exposing density, distribution, survival and quantile
functions that accept scalars or numpy arrays of nonnegative times.

The fitters cover the four likelihoods needed by the imputation chain:

* right-truncated samples (``0 < x < t0``), exponential and Weibull;
* right-censored samples given as ``(duration, event)`` pairs,
  exponential and Weibull.

All fitters return plain floats (``rate`` or ``(shape, scale)``) and raise
a subclass of `EstimationError` when the maximum likelihood estimate does
not exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .errors import (
    DegenerateIntervalError,
    MLENotFoundError,
    NoEventsError,
    NoRootError,
)
from .numerics import find_root

WEIBULL_SHAPE_BRACKET = (0.05, 50.0)


def _check_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("times must be nonnegative")
    return t


def _positive(name, value):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Exponential:
    rate: float

    family = "exponential"

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    @property
    def params(self) -> dict[str, float]:
        return {"rate": self.rate}

    def pdf(self, t):
        t = _check_times(t)
        return self.rate * np.exp(-self.rate * t)

    def logpdf(self, t):
        t = _check_times(t)
        return math.log(self.rate) - self.rate * t

    def cdf(self, t):
        t = _check_times(t)
        return -np.expm1(-self.rate * t)

    def sf(self, t):
        t = _check_times(t)
        return np.exp(-self.rate * t)

    def logsf(self, t):
        t = _check_times(t)
        return -self.rate * t

    def ppf(self, p):
        return -np.log1p(-np.asarray(p, dtype=float)) / self.rate

    def isf(self, s):
        return -np.log(np.asarray(s, dtype=float)) / self.rate

    def scale_time(self, factor: float) -> Exponential:
        """Distribution of ``factor * X``."""
        return Exponential(self.rate / factor)


@dataclass(frozen=True)
class Weibull:
    shape: float
    scale: float

    family = "weibull"

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive("shape", self.shape))
        object.__setattr__(self, "scale", _positive("scale", self.scale))

    @property
    def params(self) -> dict[str, float]:
        return {"shape": self.shape, "scale": self.scale}

    def _z(self, t):
        return (_check_times(t) / self.scale) ** self.shape

    def pdf(self, t):
        t = _check_times(t)
        z = t / self.scale
        with np.errstate(divide="ignore"):
            return self.shape / self.scale * z ** (self.shape - 1) * np.exp(-(z**self.shape))

    def logpdf(self, t):
        t = _check_times(t)
        with np.errstate(divide="ignore"):
            logz = np.log(t / self.scale)
        return (
            math.log(self.shape / self.scale)
            + (self.shape - 1) * logz
            - np.exp(self.shape * logz)
        )

    def cdf(self, t):
        return -np.expm1(-self._z(t))

    def sf(self, t):
        return np.exp(-self._z(t))

    def logsf(self, t):
        return -self._z(t)

    def ppf(self, p):
        return self.scale * (-np.log1p(-np.asarray(p, dtype=float))) ** (1.0 / self.shape)

    def isf(self, s):
        return self.scale * (-np.log(np.asarray(s, dtype=float))) ** (1.0 / self.shape)

    def scale_time(self, factor: float) -> Weibull:
        """Distribution of ``factor * X``."""
        return Weibull(self.shape, self.scale * factor)


DistributionSpec = Exponential | Weibull

FAMILIES = {"exponential": Exponential, "weibull": Weibull}
_ALIASES = {"exp": "exponential", "exponential": "exponential", "weibull": "weibull", "wei": "weibull"}


def family_name(name: str) -> str:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; expected one of {sorted(FAMILIES)}") from None


def make_distribution(family: str, *args, **params) -> DistributionSpec:
    """Build a distribution from a family name and its parameters.

    >>> make_distribution("exp", 0.2)
    Exponential(rate=0.2)
    >>> make_distribution("weibull", shape=2, scale=5)
    Weibull(shape=2.0, scale=5.0)
    """
    return FAMILIES[family_name(family)](*args, **params)


def param_names(family: str) -> tuple[str, ...]:
    return ("rate",) if family_name(family) == "exponential" else ("shape", "scale")


def evaluate(dist: DistributionSpec, t) -> dict[str, np.ndarray]:
    """Density, distribution function and survival at ``t``."""
    return {"pdf": dist.pdf(t), "cdf": dist.cdf(t), "survival": dist.sf(t)}


class CensoredSample(NamedTuple):
    duration: float
    event: bool


def censored_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """Split an iterable of `CensoredSample` into duration and event arrays."""
    samples = list(samples)
    durations = np.array([s[0] for s in samples], dtype=float)
    events = np.array([bool(s[1]) for s in samples], dtype=bool)
    return durations, events


# sampling ---------------------------------------------------------------


def sample_in_intervals(dist: DistributionSpec, a, b, rng: np.random.Generator) -> np.ndarray:
    """One draw of ``X | a < X < b`` per interval, by inverse transform.

    A uniform is mapped onto ``[F(a), F(b)]`` and inverted. Intervals in the
    upper tail are handled on the survival scale so that probabilities close
    to one keep their precision. Exactly one uniform is consumed per
    interval, including zero-width ones.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any(a < 0) or np.any(b < a):
        raise ValueError("intervals must satisfy 0 <= a <= b")
    u = rng.random(a.shape)
    out = a.copy()
    if a.size == 0:
        return out
    fa, fb = dist.cdf(a), dist.cdf(b)
    sa, sb = dist.sf(a), dist.sf(b)
    width = b > a
    lower = fa <= 0.5
    mass = np.where(lower, fb - fa, sa - sb)
    if np.any(width & (mass <= 0)):
        bad = np.flatnonzero(width & (mass <= 0))[0]
        raise DegenerateIntervalError(
            f"interval [{a[bad]:g}, {b[bad]:g}] has zero probability under {dist}"
        )
    lo = width & lower
    hi = width & ~lower
    out[lo] = dist.ppf(fa[lo] + u[lo] * (fb[lo] - fa[lo]))
    out[hi] = dist.isf(sa[hi] - u[hi] * (sa[hi] - sb[hi]))
    return np.clip(out, a, b)


def sample_in_interval(dist: DistributionSpec, a: float, b: float, rng: np.random.Generator) -> float:
    return float(sample_in_intervals(dist, [a], [b], rng)[0])


# log-likelihoods --------------------------------------------------------


def truncated_loglik(dist: DistributionSpec, samples, t0: float) -> float:
    """Log-likelihood of samples from ``dist`` right-truncated at ``t0``."""
    x = np.asarray(samples, dtype=float)
    return float(np.sum(dist.logpdf(x)) - x.size * math.log(dist.cdf(t0)))


def censored_loglik(dist: DistributionSpec, durations, events) -> float:
    """Log-likelihood of right-censored ``(duration, event)`` data."""
    t = np.asarray(durations, dtype=float)
    d = np.asarray(events, dtype=bool)
    return float(np.sum(dist.logpdf(t[d])) + np.sum(dist.logsf(t[~d])))


# exponential fitters ------------------------------------------------------


def _half_minus_tail(z):
    """``1/z - 1/expm1(z)``, accurate down to ``z -> 0``."""
    if z < 1e-4:
        return 0.5 - z / 12.0 + z**3 / 720.0
    return 1.0 / z - 1.0 / math.expm1(z) if z < 700 else 1.0 / z


def truncated_exponential_score(rate: float, xbar: float, t0: float) -> float:
    """Per-observation score of the right-truncated exponential likelihood.

    ``1/rate - t0 exp(-t0 rate) / (1 - exp(-t0 rate)) - xbar``, written so
    that it stays accurate as ``rate -> 0`` (where it tends to
    ``t0/2 - xbar``).
    """
    z = rate * t0
    return t0 * _half_minus_tail(z) - xbar


def _validate_truncated(samples, t0):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no samples")
    t0 = float(t0)
    if np.any(x <= 0) or np.any(x >= t0):
        raise ValueError("truncated samples must lie in (0, t0)")
    return x, t0


def fit_truncated_exponential(samples, t0: float) -> float:
    """Rate MLE for exponential samples right-truncated at ``t0``.

    The score has a positive root only when the sample mean is below
    ``t0 / 2``; otherwise `NoRootError` is raised and the caller picks a
    fallback.
    """
    x, t0 = _validate_truncated(samples, t0)
    xbar = float(x.mean())
    if xbar >= t0 / 2:
        raise NoRootError(
            f"truncated exponential: sample mean {xbar:g} >= t0/2 = {t0 / 2:g}, no positive root"
        )
    return find_root(lambda r: truncated_exponential_score(r, xbar, t0))


def fit_censored_exponential(durations, events) -> float:
    """Closed-form rate MLE under right censoring: events / total exposure."""
    t = np.asarray(durations, dtype=float)
    d = np.asarray(events, dtype=bool)
    if np.any(t < 0):
        raise ValueError("durations must be nonnegative")
    n_events = int(d.sum())
    if n_events == 0:
        raise NoEventsError("censored exponential: no observed failures")
    return n_events / float(t.sum())


# weibull fitters ----------------------------------------------------------


def truncated_weibull_profile(shape: float, logy: np.ndarray) -> float:
    """Profile score in the shape for Weibull data truncated at ``t0``.

    ``logy`` holds ``log(x / t0)``. Only defined for shapes where the
    implied ``(t0 / scale) ** shape`` is positive.
    """
    n = logy.size
    yb = np.exp(shape * logy)
    c = (n / shape + logy.sum()) / np.dot(yb, logy)
    return float(yb.mean() - _half_minus_tail(c))


def _truncated_weibull_c(shape, logy):
    yb = np.exp(shape * logy)
    return (logy.size / shape + logy.sum()) / np.dot(yb, logy)


def _bracket_roots(g, lo, hi, n=200):
    grid = np.geomspace(lo, hi, n)
    vals = np.array([g(b) for b in grid])
    out = []
    for i in range(n - 1):
        if vals[i] == 0:
            out.append((grid[i], grid[i]))
        elif np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0:
            out.append((grid[i], grid[i + 1]))
    return out


def fit_truncated_weibull(samples, t0: float) -> tuple[float, float]:
    """(shape, scale) MLE for Weibull samples right-truncated at ``t0``.

    The shape solves the profile equation over ``y = x / t0``; the scale
    follows in closed form. Every sign change of the profile equation in
    the shape bracket is solved and the root with the highest likelihood
    is returned. Raises `MLENotFoundError` when there is none.
    """
    x, t0 = _validate_truncated(samples, t0)
    if np.unique(x).size < 2:
        raise MLENotFoundError("truncated Weibull: needs at least two distinct samples")
    logy = np.log(x / t0)
    shape_min = logy.size / -logy.sum()
    lo = max(WEIBULL_SHAPE_BRACKET[0], shape_min * (1 + 1e-9))
    hi = WEIBULL_SHAPE_BRACKET[1]
    if lo >= hi:
        raise MLENotFoundError("truncated Weibull: admissible shape range is empty")
    g = lambda b: truncated_weibull_profile(b, logy)
    best = None
    for a, b in _bracket_roots(g, lo, hi):
        shape = a if a == b else optimize.brentq(g, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        c = _truncated_weibull_c(shape, logy)
        scale = t0 * c ** (-1.0 / shape)
        if not (math.isfinite(scale) and scale > 0):
            continue
        ll = truncated_loglik(Weibull(shape, scale), x, t0)
        if best is None or ll > best[0]:
            best = (ll, shape, scale)
    if best is None:
        raise MLENotFoundError(
            f"truncated Weibull: profile equation has no root for shape in [{lo:g}, {hi:g}]"
        )
    return float(best[1]), float(best[2])


def censored_weibull_shape_equation(shape: float, logt: np.ndarray, events: np.ndarray) -> float:
    """Shape score for right-censored Weibull data given ``log`` durations."""
    w = np.exp(shape * (logt - logt.max()))
    return float(1.0 / shape + logt[events].mean() - np.dot(w, logt) / w.sum())


def fit_censored_weibull(durations, events) -> tuple[float, float]:
    """(shape, scale) MLE for right-censored Weibull data."""
    t = np.asarray(durations, dtype=float)
    d = np.asarray(events, dtype=bool)
    n_events = int(d.sum())
    if n_events == 0:
        raise NoEventsError("censored Weibull: no observed failures")
    if np.any(t <= 0):
        raise ValueError("censored Weibull durations must be positive")
    logt = np.log(t)
    g = lambda b: censored_weibull_shape_equation(b, logt, d)
    lo, hi = WEIBULL_SHAPE_BRACKET
    if not g(lo) * g(hi) <= 0:
        raise MLENotFoundError(
            f"censored Weibull: shape equation has no root in [{lo:g}, {hi:g}]"
        )
    shape = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    m = logt.max()
    scale = math.exp(m + math.log(np.exp(shape * (logt - m)).sum() / n_events) / shape)
    return shape, scale
