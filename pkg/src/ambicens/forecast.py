"""Expected failure counts over calendar time, rolling refits and rescaling."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import BatchDataset
from .distributions import DistributionSpec
from .errors import DatasetError, EstimationError
from .estimator import EstimatorConfig, FitResult, fit, initial_estimates
from .numerics import integrate_interval

logger = logging.getLogger(__name__)

DEFAULT_STEP = 0.5


@dataclass(frozen=True)
class ForecastCurve:
    times: np.ndarray
    expected: np.ndarray
    label: str = ""


def _failed_by(dist_x: DistributionSpec, dist_t: DistributionSpec, t: float) -> float:
    # P(X + T <= t) = int_0^{F_X(t)} F_T(t - Q_X(u)) du
    if t <= 0:
        return 0.0
    upper = float(dist_x.cdf(t))
    f = lambda u: float(dist_t.cdf(max(t - float(dist_x.ppf(u)), 0.0)))
    return integrate_interval(f, 0.0, upper)


def expected_failures(dist_x: DistributionSpec, dist_t: DistributionSpec, n_total: int, times,
                      label: str = "") -> ForecastCurve:
    """Expected cumulative failures ``N P(X + T <= t)`` at each calendar time."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted")
    values = np.array([n_total * _failed_by(dist_x, dist_t, t) for t in times])
    # quadrature noise must not break monotonicity or the [0, N] bounds
    values = np.clip(np.maximum.accumulate(values), 0.0, n_total) if values.size else values
    return ForecastCurve(times, values, label)


def default_horizons(t0: float, step: float = DEFAULT_STEP, start: float | None = None) -> np.ndarray:
    """Evenly spaced refit times ending at ``t0``."""
    start = step if start is None else start
    n = int(np.floor((t0 - start) / step + 1e-9)) + 1
    return t0 - step * np.arange(n)[::-1]


@dataclass(frozen=True)
class HorizonForecast:
    horizon: float
    target_time: float
    n_observed: int
    observed_count: int
    imputed_expected: float
    truncated_expected: float
    imputed: FitResult = field(repr=False)
    truncated: tuple = field(repr=False)

    @property
    def imputed_error(self) -> float:
        return self.imputed_expected - self.observed_count

    @property
    def truncated_error(self) -> float:
        return self.truncated_expected - self.observed_count


@dataclass
class RollingForecast:
    records: list[HorizonForecast]
    warnings: list[str]


def rolling_refit_forecast(dataset: BatchDataset, family_x: str, family_t: str, horizons=None,
                           config: EstimatorConfig | None = None, lead: float = 0.0) -> RollingForecast:
    """Refit at each horizon and compare expected with realised failures.

    At horizon ``h`` only units with ``x + t <= h`` are visible. Both the
    imputation estimate and the truncated starting fit are used to predict
    the cumulative failures by ``h + lead``, which is compared with the
    count realised in ``dataset``. Horizons with fewer than two visible
    failures are skipped with a warning.
    """
    horizons = default_horizons(dataset.horizon) if horizons is None else np.asarray(horizons, float)
    if np.any(np.diff(horizons) <= 0):
        raise ValueError("horizons must be increasing")
    if np.any(horizons + lead > dataset.horizon):
        raise ValueError("forecast targets must not exceed the dataset horizon")
    config = config or EstimatorConfig()
    total = dataset.x + dataset.t
    records, warnings = [], []
    for h in horizons:
        sub = dataset.truncate(float(h))
        if sub.n_observed < 2:
            msg = f"horizon {h:g}: only {sub.n_observed} observed failures, skipped"
            logger.warning(msg)
            warnings.append(msg)
            continue
        try:
            result = fit(sub, family_x, family_t, config)
            trunc_x, trunc_t, _ = initial_estimates(sub, family_x, family_t, fallback=True)
        except EstimationError as exc:
            msg = f"horizon {h:g}: estimation failed ({exc}), skipped"
            logger.warning(msg)
            warnings.append(msg)
            continue
        target = float(h + lead)
        records.append(HorizonForecast(
            horizon=float(h),
            target_time=target,
            n_observed=sub.n_observed,
            observed_count=int(np.sum(total <= target)),
            imputed_expected=float(expected_failures(result.dist_x, result.dist_t, dataset.n_total, [target]).expected[0]),
            truncated_expected=float(expected_failures(trunc_x, trunc_t, dataset.n_total, [target]).expected[0]),
            imputed=result,
            truncated=(trunc_x, trunc_t),
        ))
    return RollingForecast(records, warnings)


@dataclass(frozen=True)
class TimeScale:
    """Common divisor applied to every time in a dataset.

    ``factor`` is the geometric mean of the sample standard deviations of
    the installation and failure times, which keeps the observation rule
    ``x + t <= T0`` intact after rescaling.
    """

    factor: float
    sd_x: float
    sd_t: float


def rescale_dataset(dataset: BatchDataset) -> tuple[BatchDataset, TimeScale]:
    if dataset.n_observed < 2:
        raise DatasetError("rescaling needs at least 2 observed units")
    sd_x = float(np.std(dataset.x, ddof=1))
    sd_t = float(np.std(dataset.t, ddof=1))
    if not (sd_x > 0 and sd_t > 0):
        raise DatasetError("cannot rescale: zero standard deviation")
    factor = float(np.sqrt(sd_x * sd_t))
    x, t = dataset.x / factor, dataset.t / factor
    # division can push x + t one ulp past the scaled horizon
    horizon = max(dataset.horizon / factor, float(np.max(x + t)))
    scaled = BatchDataset(dataset.n_total, horizon, x, t)
    return scaled, TimeScale(factor, sd_x, sd_t)


def back_transform(dist: DistributionSpec, scale: TimeScale | float) -> DistributionSpec:
    """Map a distribution fitted on rescaled data back to original units."""
    factor = scale.factor if isinstance(scale, TimeScale) else float(scale)
    return dist.scale_time(factor)


def fit_rescaled(dataset: BatchDataset, family_x: str, family_t: str,
                 config: EstimatorConfig | None = None) -> FitResult:
    """Fit on rescaled times and report everything in original units."""
    scaled, scale = rescale_dataset(dataset)
    return fit(scaled, family_x, family_t, config).scale_time(scale.factor)
