from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetError


@dataclass(frozen=True)
class BatchDataset:
    """A batch of ``n_total`` units watched until calendar time ``horizon``.

    ``x`` and ``t`` hold the installation delays and failure durations of
    the units seen to fail, i.e. those with ``x + t <= horizon``. Nothing is
    known about the other ``n_total - n_observed`` units.
    """

    n_total: int
    horizon: float
    x: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        t = np.array(self.t, dtype=float).reshape(-1)
        if int(self.n_total) != self.n_total or self.n_total < 1:
            raise DatasetError(f"n_total must be a positive integer, got {self.n_total!r}")
        horizon = float(self.horizon)
        if not (np.isfinite(horizon) and horizon > 0):
            raise DatasetError(f"horizon must be positive, got {self.horizon!r}")
        if x.shape != t.shape:
            raise DatasetError("x and t must have the same length")
        if x.size > self.n_total:
            raise DatasetError(f"{x.size} observed units exceed n_total={self.n_total}")
        bad = ~(np.isfinite(x) & np.isfinite(t) & (x > 0) & (t > 0))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DatasetError(f"unit {i}: x and t must be positive (x={x[i]}, t={t[i]})")
        late = x + t > horizon
        if late.any():
            i = int(np.flatnonzero(late)[0])
            raise DatasetError(f"unit {i}: x + t = {x[i] + t[i]} exceeds horizon {horizon}")
        x.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "n_total", int(self.n_total))
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_pairs(cls, n_total, horizon, pairs) -> BatchDataset:
        pairs = list(pairs)
        x = [p[0] for p in pairs]
        t = [p[1] for p in pairs]
        return cls(n_total, horizon, x, t)

    @property
    def n_observed(self) -> int:
        return int(self.x.size)

    def truncate(self, horizon: float) -> BatchDataset:
        """The same batch as it looked at an earlier calendar time."""
        keep = self.x + self.t <= horizon
        return BatchDataset(self.n_total, horizon, self.x[keep], self.t[keep])

    def __eq__(self, other):
        if not isinstance(other, BatchDataset):
            return NotImplemented
        return (
            self.n_total == other.n_total
            and self.horizon == other.horizon
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.t, other.t)
        )

    __hash__ = None
