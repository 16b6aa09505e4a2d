"""Iterative proportional-imputation estimator.

Starting from fits that treat the observed installation and failure times
as right-truncated at ``T0``, every iteration

1. allocates the expected number of installed-but-unseen units over the
   intervals between observed installations,
2. draws that many installation times from ``F_X`` restricted to each
   interval,
3. refits ``X`` with observed and imputed installations as events and the
   remaining units censored at ``T0``,
4. refits ``T`` with the observed failures as events and ``T0 - x`` as a
   censoring time for every imputed unit.

The chain is run for a fixed number of iterations; estimates are the
post-burn-in means and the spread is the post-burn-in standard deviation.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import BatchDataset
from .distributions import (
    DistributionSpec,
    fit_censored_exponential,
    fit_censored_weibull,
    fit_truncated_exponential,
    fit_truncated_weibull,
    family_name,
    make_distribution,
    param_names,
)
from .errors import DatasetError, EstimationError, NonConvergenceError
from .imputation import build_plan, draw_counts, impute_installations

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimatorConfig:
    iterations: int = 1000
    burn_in: int = 100
    p: int = 5
    epsilon: float = 0.0005
    seed: int = 0
    max_failure_fraction: float = 0.2

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.p < 1:
            raise ValueError("p must be a positive integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def to_dict(self):
        return asdict(self)


class IterationFailure(EstimationError):
    """One or both margins failed to refit during an iteration.

    ``dist_x`` and ``dist_t`` carry the margins that did refit, and the
    previous values for the ones that did not.
    """

    def __init__(self, message, dist_x, dist_t, n_imputed, causes):
        super().__init__(message)
        self.dist_x = dist_x
        self.dist_t = dist_t
        self.n_imputed = n_imputed
        self.causes = causes


def fit_censored(family: str, durations, events) -> DistributionSpec:
    """Right-censored MLE for ``family`` wrapped as a distribution."""
    if family_name(family) == "exponential":
        return make_distribution(family, fit_censored_exponential(durations, events))
    return make_distribution(family, *fit_censored_weibull(durations, events))


def fit_truncated(family: str, samples, t0: float) -> DistributionSpec:
    if family_name(family) == "exponential":
        return make_distribution(family, fit_truncated_exponential(samples, t0))
    return make_distribution(family, *fit_truncated_weibull(samples, t0))


def initial_estimates(dataset: BatchDataset, family_x: str, family_t: str, fallback: bool = False):
    """Truncated-distribution fits of both margins.

    With ``fallback=True`` a margin whose truncated fit does not exist is
    initialised from the plain (uncensored) MLE of the observed values,
    and the third return value lists the margins that fell back.
    """
    if dataset.n_observed < 2:
        raise DatasetError(f"need at least 2 observed units, got {dataset.n_observed}")
    out = []
    fell_back = []
    for margin, family, values in (("x", family_x, dataset.x), ("t", family_t, dataset.t)):
        try:
            out.append(fit_truncated(family, values, dataset.horizon))
        except EstimationError as exc:
            label = "installation" if margin == "x" else "failure"
            if not fallback:
                raise type(exc)(f"{label} margin: {exc}") from exc
            logger.info("%s margin truncated fit failed (%s); using uncensored MLE", label, exc)
            try:
                out.append(fit_censored(family, values, np.ones(values.size, dtype=bool)))
            except EstimationError as exc2:
                raise type(exc2)(f"{label} margin: {exc}; fallback: {exc2}") from exc2
            fell_back.append(margin)
    return out[0], out[1], fell_back


def installation_sample(dataset: BatchDataset, imputed):
    """Type-1 censored installation data: events, then units censored at ``T0``."""
    imputed = np.asarray(imputed, dtype=float)
    n_censored = max(0, dataset.n_total - dataset.n_observed - imputed.size)
    durations = np.concatenate((dataset.x, imputed, np.full(n_censored, dataset.horizon)))
    events = np.zeros(durations.size, dtype=bool)
    events[: dataset.n_observed + imputed.size] = True
    return durations, events


def failure_sample(dataset: BatchDataset, imputed):
    """Randomly censored failure data: observed failures, then ``T0 - x`` per imputed unit.

    Censoring times of exactly zero contribute ``log S(0) = 0`` to the
    likelihood and are dropped.
    """
    cens = dataset.horizon - np.asarray(imputed, dtype=float)
    cens = cens[cens > 0]
    durations = np.concatenate((dataset.t, cens))
    events = np.zeros(durations.size, dtype=bool)
    events[: dataset.n_observed] = True
    return durations, events


@dataclass
class Step:
    dist_x: DistributionSpec
    dist_t: DistributionSpec
    imputed: np.ndarray

    @property
    def n_imputed(self) -> int:
        return int(self.imputed.size)


def iterate_once(dataset: BatchDataset, dist_x: DistributionSpec, dist_t: DistributionSpec, rng) -> Step:
    plan = build_plan(dataset, dist_x, dist_t)
    counts = draw_counts(plan, rng)
    imputed = impute_installations(plan, counts, dist_x, rng)
    new = {}
    causes = {}
    for margin, dist, sample in (
        ("x", dist_x, installation_sample),
        ("t", dist_t, failure_sample),
    ):
        try:
            new[margin] = fit_censored(dist.family, *sample(dataset, imputed))
        except (EstimationError, ValueError) as exc:
            new[margin] = dist
            causes[margin] = exc
    if causes:
        detail = "; ".join(f"{m}: {e}" for m, e in causes.items())
        raise IterationFailure(
            f"refit failed with |imputed|={imputed.size}, x={dist_x}, t={dist_t}: {detail}",
            new["x"],
            new["t"],
            imputed.size,
            causes,
        )
    return Step(new["x"], new["t"], imputed)


def check_convergence(trajectories, p: int = 5, epsilon: float = 0.0005):
    """Iteration at which the relative-change rule first holds.

    For every series the first index ``j = i + p`` with
    ``|(mu[j] - mu[i]) / mu[j]| < epsilon`` is found; the result is the
    largest of these over all series, or ``None`` if some series never
    satisfies the rule. A zero ``mu[j]`` never satisfies it.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if isinstance(trajectories, dict):
        series = list(trajectories.values())
    else:
        arr = np.asarray(trajectories, dtype=float)
        series = [arr] if arr.ndim == 1 else list(arr)
    worst = 0
    for mu in series:
        mu = np.asarray(mu, dtype=float)
        if mu.size <= p:
            return None
        later, earlier = mu[p:], mu[:-p]
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs((later - earlier) / later)
        ok = (later != 0) & (rel < epsilon)
        if not ok.any():
            return None
        worst = max(worst, int(np.argmax(ok)) + p)
    return worst


@dataclass
class FitResult:
    family_x: str
    family_t: str
    config: EstimatorConfig
    initial_x: DistributionSpec
    initial_t: DistributionSpec
    trajectories: dict[str, np.ndarray]
    n_imputed: np.ndarray
    failed_iterations: int = 0
    initial_fallbacks: list[str] = field(default_factory=list)
    last_imputed: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def _kept(self, values):
        return np.asarray(values)[self.config.burn_in :]

    @property
    def means(self) -> dict[str, float]:
        return {k: float(self._kept(v).mean()) for k, v in self.trajectories.items()}

    @property
    def sds(self) -> dict[str, float]:
        """Post-burn-in sample standard deviation (``ddof=1``)."""
        return {k: float(self._kept(v).std(ddof=1)) if self._kept(v).size > 1 else float("nan")
                for k, v in self.trajectories.items()}

    @property
    def average_imputations(self) -> float:
        return float(self._kept(self.n_imputed).mean())

    @property
    def convergence_iteration(self):
        return check_convergence(self.trajectories, self.config.p, self.config.epsilon)

    def estimate(self, margin: str) -> DistributionSpec:
        """Distribution built from the post-burn-in mean parameters of a margin."""
        family = self.family_x if margin == "x" else self.family_t
        means = self.means
        return make_distribution(family, **{n: means[f"{margin}.{n}"] for n in param_names(family)})

    @property
    def dist_x(self) -> DistributionSpec:
        return self.estimate("x")

    @property
    def dist_t(self) -> DistributionSpec:
        return self.estimate("t")

    def scale_time(self, factor: float) -> FitResult:
        """The same chain expressed in time units multiplied by ``factor``."""
        traj = {}
        for k, v in self.trajectories.items():
            if k.endswith(".rate"):
                traj[k] = v / factor
            elif k.endswith(".scale"):
                traj[k] = v * factor
            else:
                traj[k] = v.copy()
        return replace(
            self,
            initial_x=self.initial_x.scale_time(factor),
            initial_t=self.initial_t.scale_time(factor),
            trajectories=traj,
            last_imputed=self.last_imputed * factor,
        )


def _params_row(dist_x, dist_t):
    row = {f"x.{k}": v for k, v in dist_x.params.items()}
    row.update({f"t.{k}": v for k, v in dist_t.params.items()})
    return row


def fit(dataset: BatchDataset, family_x: str = "exponential", family_t: str = "exponential",
        config: EstimatorConfig | None = None, initial=None) -> FitResult:
    """Run the imputation chain on ``dataset``.

    ``initial`` optionally overrides the truncated starting values with a
    ``(dist_x, dist_t)`` pair.
    """
    config = config or EstimatorConfig()
    family_x, family_t = family_name(family_x), family_name(family_t)
    init_x, init_t, fallbacks = initial_estimates(dataset, family_x, family_t, fallback=True)
    if initial is not None:
        init_x, init_t = initial
    rng = np.random.default_rng(config.seed)

    names = list(_params_row(init_x, init_t))
    traj = {k: np.empty(config.iterations) for k in names}
    n_imputed = np.empty(config.iterations, dtype=np.int64)
    failures = 0
    imputed = np.empty(0)
    dist_x, dist_t = init_x, init_t
    for i in range(config.iterations):
        try:
            step = iterate_once(dataset, dist_x, dist_t, rng)
            dist_x, dist_t, n_imp = step.dist_x, step.dist_t, step.n_imputed
            imputed = step.imputed
        except IterationFailure as exc:
            failures += 1
            logger.debug("iteration %d: %s", i, exc)
            dist_x, dist_t, n_imp = exc.dist_x, exc.dist_t, exc.n_imputed
            if failures > config.max_failure_fraction * config.iterations:
                raise NonConvergenceError(
                    f"{failures} of {i + 1} iterations failed to refit; last: {exc}"
                ) from exc
        for k, v in _params_row(dist_x, dist_t).items():
            traj[k][i] = v
        n_imputed[i] = n_imp
    return FitResult(family_x, family_t, config, init_x, init_t, traj, n_imputed, failures, fallbacks, imputed)
