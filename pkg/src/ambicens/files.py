"""Dataset files and report serialisation.

A dataset is either a JSON manifest::

    {"n_total": 400, "t0": 7.0, "units": [{"x": 0.8, "t": 2.1}, ...]}

or a CSV file with an ``x,t`` header (matched case-insensitively), in
which case ``n_total`` and ``t0`` come from the caller.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .data import BatchDataset
from .errors import DatasetError
from .estimator import FitResult
from .distributions import param_names


def _check_rows(rows, n_total, t0):
    if n_total is None or t0 is None:
        raise DatasetError("n_total and t0 are required")
    try:
        n_total_int = int(n_total)
        t0 = float(t0)
    except (TypeError, ValueError):
        raise DatasetError("n_total must be an integer and t0 a number") from None
    if n_total_int != n_total or n_total_int < 1:
        raise DatasetError(f"n_total must be a positive integer, got {n_total!r}")
    if not (math.isfinite(t0) and t0 > 0):
        raise DatasetError(f"t0 must be positive, got {t0!r}")
    xs, ts = [], []
    for i, (x, t) in enumerate(rows, start=1):
        try:
            x, t = float(x), float(t)
        except (TypeError, ValueError):
            raise DatasetError(f"row {i}: x and t must be numbers") from None
        if not (math.isfinite(x) and math.isfinite(t) and x > 0 and t > 0):
            raise DatasetError(f"row {i}: x and t must be positive (x={x}, t={t})")
        if x + t > t0:
            raise DatasetError(f"row {i}: x + t = {x + t:g} exceeds t0 = {t0:g}")
        xs.append(x)
        ts.append(t)
    if len(xs) > n_total_int:
        raise DatasetError(f"{len(xs)} rows exceed n_total = {n_total_int}")
    return BatchDataset(n_total_int, t0, xs, ts)


def dataset_from_json(obj) -> BatchDataset:
    if not isinstance(obj, dict) or "units" not in obj:
        raise DatasetError("JSON dataset must be an object with n_total, t0 and units")
    units = obj["units"]
    if not isinstance(units, list):
        raise DatasetError("units must be an array")
    rows = []
    for i, u in enumerate(units, start=1):
        if not isinstance(u, dict) or "x" not in u or "t" not in u:
            raise DatasetError(f"row {i}: each unit needs keys 'x' and 't'")
        rows.append((u["x"], u["t"]))
    return _check_rows(rows, obj.get("n_total"), obj.get("t0"))


def dataset_from_csv(text: str, n_total, t0) -> BatchDataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise DatasetError("empty CSV file") from None
    try:
        ix, it = header.index("x"), header.index("t")
    except ValueError:
        raise DatasetError(f"CSV header must contain columns x and t, got {header}") from None
    rows = []
    for i, line in enumerate(reader, start=1):
        if not any(cell.strip() for cell in line):
            continue
        if len(line) <= max(ix, it):
            raise DatasetError(f"row {i}: missing columns")
        rows.append((line[ix], line[it]))
    return _check_rows(rows, n_total, t0)


def read_dataset(path, n_total=None, t0=None) -> BatchDataset:
    """Load a JSON manifest or an ``x,t`` CSV file.

    For JSON, ``n_total`` and ``t0`` override the manifest when given.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".csv" or not text.lstrip().startswith("{"):
        return dataset_from_csv(text, n_total, t0)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: invalid JSON ({exc})") from exc
    if n_total is not None:
        obj["n_total"] = n_total
    if t0 is not None:
        obj["t0"] = t0
    return dataset_from_json(obj)


def dataset_to_json(dataset: BatchDataset, **extra) -> dict:
    out = {
        "n_total": dataset.n_total,
        "t0": dataset.horizon,
        "units": [{"x": float(x), "t": float(t)} for x, t in zip(dataset.x, dataset.t)],
    }
    out.update(extra)
    return out


def fit_report(result: FitResult, dataset: BatchDataset, rescale=None) -> dict:
    """JSON-ready summary of a fit, mirroring the columns of the tables."""
    means, sds = result.means, result.sds
    estimates = {}
    initial = {}
    for margin, family, dist in (("x", result.family_x, result.initial_x), ("t", result.family_t, result.initial_t)):
        estimates[margin] = {n: {"mean": means[f"{margin}.{n}"], "sd": sds[f"{margin}.{n}"]}
                             for n in param_names(family)}
        initial[margin] = dict(dist.params)
    cfg = result.config
    report = {
        "families": {"x": result.family_x, "t": result.family_t},
        "n_total": dataset.n_total,
        "t0": dataset.horizon,
        "n_observed": dataset.n_observed,
        "initial_estimates": initial,
        "initial_fallbacks": list(result.initial_fallbacks),
        "estimates": estimates,
        "average_imputations": result.average_imputations,
        "convergence_iteration": result.convergence_iteration,
        "failed_iterations": result.failed_iterations,
        "config": {
            "family_x": result.family_x,
            "family_t": result.family_t,
            "iterations": cfg.iterations,
            "burn_in": cfg.burn_in,
            "p": cfg.p,
            "epsilon": cfg.epsilon,
            "seed": cfg.seed,
            "rescale": rescale is not None,
        },
    }
    if rescale is not None:
        report["rescale"] = {"factor": rescale.factor, "sd_x": rescale.sd_x, "sd_t": rescale.sd_t}
    return report


def trajectories_csv(result: FitResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(result.trajectories)
    w.writerow(["iteration", *names, "n_imputed"])
    cols = [result.trajectories[n] for n in names]
    for i in range(result.n_imputed.size):
        w.writerow([i, *(repr(float(c[i])) for c in cols), int(result.n_imputed[i])])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_default, allow_nan=True) + "\n"


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")
