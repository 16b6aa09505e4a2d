"""Synthetic batches and replicated estimation experiments."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import BatchDataset
from .distributions import DistributionSpec, Exponential
from .errors import DatasetError, EstimationError
from .estimator import EstimatorConfig, fit
from .exact import exact_mle_iid_exponential

_SEED_MASK = (1 << 63) - 1


@dataclass(frozen=True)
class SimulatedBatch:
    dataset: BatchDataset
    x: np.ndarray
    t: np.ndarray

    @property
    def observed(self) -> np.ndarray:
        return self.x + self.t <= self.dataset.horizon

    @property
    def n_installed_working(self) -> int:
        """|D|: installed by the horizon but not yet failed."""
        return int(np.sum((self.x <= self.dataset.horizon) & ~self.observed))

    @property
    def n_not_installed(self) -> int:
        """|B|: not installed by the horizon."""
        return int(np.sum(self.x > self.dataset.horizon))


def simulate_batch(dist_x: DistributionSpec, dist_t: DistributionSpec, n_total: int,
                   horizon: float, seed: int) -> SimulatedBatch:
    """Draw installation and failure times for ``n_total`` units.

    Only units with ``x + t <= horizon`` enter the returned dataset; the
    full draws are kept alongside for bookkeeping.
    """
    if int(n_total) < 1:
        raise DatasetError(f"n_total must be >= 1, got {n_total}")
    rng = np.random.default_rng(seed)
    tiny = np.finfo(float).tiny
    x = dist_x.ppf(np.maximum(rng.random(n_total), tiny))
    t = dist_t.ppf(np.maximum(rng.random(n_total), tiny))
    seen = x + t <= horizon
    return SimulatedBatch(BatchDataset(n_total, horizon, x[seen], t[seen]), x, t)


def replication_seeds(seed: int, replications: int) -> list[tuple[int, int]]:
    """(data seed, chain seed) for each replication.

    ``SeedSequence(seed)`` is spawned into one child per replication and
    each child yields two 63-bit integers, so replication ``i`` sees the
    same streams regardless of how many replications run or in what order.
    """
    out = []
    for child in np.random.SeedSequence(seed).spawn(replications):
        a, b = child.generate_state(2, dtype=np.uint64)
        out.append((int(a) & _SEED_MASK, int(b) & _SEED_MASK))
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    dist_x: DistributionSpec
    dist_t: DistributionSpec
    n_total: int = 200
    horizon: float = 6.0
    replications: int = 20
    seed: int = 0
    config: EstimatorConfig = field(default_factory=EstimatorConfig)

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError("n_total must be >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")

    @property
    def iid_exponential(self) -> bool:
        return (isinstance(self.dist_x, Exponential) and isinstance(self.dist_t, Exponential)
                and self.dist_x.rate == self.dist_t.rate)

    def truth(self) -> dict[str, float]:
        row = {f"x.{k}": v for k, v in self.dist_x.params.items()}
        row.update({f"t.{k}": v for k, v in self.dist_t.params.items()})
        return row


@dataclass
class ReplicationRecord:
    index: int
    data_seed: int
    chain_seed: int
    n_observed: int
    n_installed_working: int
    n_not_installed: int
    initial: dict[str, float]
    means: dict[str, float]
    sds: dict[str, float]
    average_imputations: float
    convergence_iteration: int | None
    failed_iterations: int
    exact: dict[str, float] | None
    wall_time: float


def run_replication(spec: ExperimentSpec, index: int) -> ReplicationRecord:
    data_seed, chain_seed = replication_seeds(spec.seed, index + 1)[index]
    start = time.perf_counter()
    try:
        batch = simulate_batch(spec.dist_x, spec.dist_t, spec.n_total, spec.horizon, data_seed)
        result = fit(batch.dataset, spec.dist_x.family, spec.dist_t.family,
                     replace(spec.config, seed=chain_seed))
        exact = None
        if spec.iid_exponential:
            rate, sd = exact_mle_iid_exponential(batch.dataset)
            exact = {"rate": rate, "sd": sd}
    except (EstimationError, DatasetError) as exc:
        raise type(exc)(f"replication {index}: {exc}") from exc
    initial = {f"x.{k}": v for k, v in result.initial_x.params.items()}
    initial.update({f"t.{k}": v for k, v in result.initial_t.params.items()})
    return ReplicationRecord(
        index=index,
        data_seed=data_seed,
        chain_seed=chain_seed,
        n_observed=batch.dataset.n_observed,
        n_installed_working=batch.n_installed_working,
        n_not_installed=batch.n_not_installed,
        initial=initial,
        means=result.means,
        sds=result.sds,
        average_imputations=result.average_imputations,
        convergence_iteration=result.convergence_iteration,
        failed_iterations=result.failed_iterations,
        exact=exact,
        wall_time=time.perf_counter() - start,
    )


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    records: list[ReplicationRecord]

    def _column(self, attr, key):
        return np.array([getattr(r, attr)[key] for r in self.records])

    @property
    def mean_estimates(self) -> dict[str, float]:
        return {k: float(self._column("means", k).mean()) for k in self.spec.truth()}

    @property
    def mean_initial(self) -> dict[str, float]:
        return {k: float(self._column("initial", k).mean()) for k in self.spec.truth()}

    def mean_abs_error(self, which: str = "means") -> dict[str, float]:
        truth = self.spec.truth()
        return {k: float(np.mean(np.abs(self._column(which, k) - v))) for k, v in truth.items()}

    def to_dict(self) -> dict:
        s = self.spec
        return {
            "spec": {
                "family_x": s.dist_x.family,
                "params_x": s.dist_x.params,
                "family_t": s.dist_t.family,
                "params_t": s.dist_t.params,
                "n_total": s.n_total,
                "t0": s.horizon,
                "replications": s.replications,
                "seed": s.seed,
                "config": s.config.to_dict(),
            },
            "summary": {
                "mean_estimates": self.mean_estimates,
                "mean_initial_estimates": self.mean_initial,
                "mean_abs_error": self.mean_abs_error("means"),
                "mean_abs_error_initial": self.mean_abs_error("initial"),
            },
            "replications": [vars(r) for r in self.records],
        }


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Simulate and fit ``spec.replications`` independent batches.

    Results do not depend on ``workers``: every replication draws its
    streams from `replication_seeds`.
    """
    indices = range(spec.replications)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_replication, [spec] * spec.replications, indices))
    else:
        records = [run_replication(spec, i) for i in indices]
    return ExperimentReport(spec, records)
