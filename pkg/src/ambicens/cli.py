"""Command-line interface.

Subcommands: ``fit``, ``simulate``, ``exact`` and ``forecast``. Reports are
JSON, grids and curves are CSV. Exit status is 0 on success, 2 for bad
input and 3 when estimation fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from .distributions import family_name, make_distribution, param_names
from .errors import DatasetError, EstimationError
from .estimator import EstimatorConfig, fit, initial_estimates
from .exact import exact_mle_iid_exponential, loglik_surface
from .files import dataset_to_json, fit_report, read_dataset, to_json, trajectories_csv
from .forecast import (
    default_horizons,
    expected_failures,
    rescale_dataset,
    rolling_refit_forecast,
)
from .simulate import ExperimentSpec, run_experiment, simulate_batch

EXIT_INPUT = 2
EXIT_ESTIMATION = 3


class InputError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _dist(family, params):
    family = family_name(family)
    values = _floats(params)
    names = param_names(family)
    if len(values) != len(names):
        raise InputError(f"{family} needs {len(names)} parameter(s) ({', '.join(names)}), got {params!r}")
    return make_distribution(family, *values)


def parse_times(text):
    """``lo:hi:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"time range must be lo:hi:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise InputError(f"invalid time range {text!r}")
        n = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(n)
    return np.array(_floats(text))


def parse_grid(text):
    """``name=lo:hi:n,name=lo:hi:n`` into two ``(name, values)`` axes."""
    axes = []
    for part in text.split(","):
        try:
            name, rng = part.split("=")
            lo, hi, n = rng.split(":")
            axes.append((name.strip(), np.linspace(float(lo), float(hi), int(n))))
        except ValueError:
            raise InputError(f"grid axis must be name=lo:hi:n, got {part!r}") from None
    if len(axes) != 2:
        raise InputError("--grid needs exactly two axes")
    return axes


def _write(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args):
    return EstimatorConfig(iterations=args.iterations, burn_in=args.burn_in, p=args.p,
                           epsilon=args.epsilon, seed=args.seed)


def _load(args):
    return read_dataset(args.dataset, n_total=args.n_total, t0=args.t0)


def _run_fit(dataset, args):
    config = _config(args)
    scale = None
    if args.rescale:
        scaled, scale = rescale_dataset(dataset)
        result = fit(scaled, args.family_x, args.family_t, config).scale_time(scale.factor)
    else:
        result = fit(dataset, args.family_x, args.family_t, config)
    return result, fit_report(result, dataset, scale)


def cmd_fit(args):
    dataset = _load(args)
    result, report = _run_fit(dataset, args)
    if args.trajectories:
        Path(args.trajectories).write_text(trajectories_csv(result))
    _write(to_json(report), args.out)


def cmd_simulate(args):
    if args.n < 1:
        raise InputError(f"--n must be >= 1, got {args.n}")
    if not args.t0 > 0:
        raise InputError("--t0 must be positive")
    dist_x = _dist(args.family_x, args.params_x)
    dist_t = _dist(args.family_t, args.params_t)
    if args.replications:
        spec = ExperimentSpec(dist_x, dist_t, args.n, args.t0, args.replications, args.seed, _config(args))
        report = run_experiment(spec, workers=args.workers)
        _write(to_json(report.to_dict()), args.out)
        return
    batch = simulate_batch(dist_x, dist_t, args.n, args.t0, args.seed)
    meta = {"generator": {
        "family_x": dist_x.family, "params_x": dist_x.params,
        "family_t": dist_t.family, "params_t": dist_t.params,
        "seed": args.seed,
        "n_installed_working": batch.n_installed_working,
        "n_not_installed": batch.n_not_installed,
    }}
    data = dataset_to_json(batch.dataset, **meta)
    if not args.fit:
        _write(to_json(data), args.out)
        return
    args.family_x, args.family_t = dist_x.family, dist_t.family
    _, report = _run_fit(batch.dataset, args)
    if args.out:
        Path(args.out).write_text(to_json(data))
        sys.stdout.write(to_json(report))
    else:
        sys.stdout.write(to_json({"dataset": data, "report": report}))


def cmd_exact(args):
    dataset = _load(args)
    if args.surface:
        if not args.grid:
            raise InputError("--surface needs --grid")
        axis1, axis2 = parse_grid(args.grid)
        fixed = {}
        for item in args.fix or []:
            try:
                name, value = item.split("=")
                fixed[name.strip()] = float(value)
            except ValueError:
                raise InputError(f"--fix must be name=value, got {item!r}") from None
        imputed = None
        if args.imputed_iterations:
            chain = fit(dataset, args.family_x, args.family_t,
                        EstimatorConfig(iterations=args.imputed_iterations, burn_in=0, seed=args.seed))
            imputed = chain.last_imputed
        try:
            grid = loglik_surface(dataset, args.family_x, args.family_t, axis1, axis2, fixed, imputed)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        _write(grid.to_csv(), args.out)
        return
    rate, sd = exact_mle_iid_exponential(dataset)
    _write(f"rate,sd\n{rate:.6g},{sd:.6g}\n", args.out)


def cmd_forecast(args):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.dataset is None:
        if not (args.params_x and args.params_t and args.n_total):
            raise InputError("forecast needs a dataset, or --params-x, --params-t and --n-total")
        times = parse_times(args.times) if args.times else default_horizons(args.t0 or 7.0, start=0.0)
        curve = expected_failures(_dist(args.family_x, args.params_x), _dist(args.family_t, args.params_t),
                                  args.n_total, times)
        w.writerow(["time", "expected"])
        for t, v in zip(curve.times, curve.expected):
            w.writerow([repr(float(t)), repr(float(v))])
        _write(buf.getvalue(), args.out)
        return
    dataset = _load(args)
    config = _config(args)
    if args.rolling:
        horizons = parse_times(args.times) if args.times else None
        rolling = rolling_refit_forecast(dataset, args.family_x, args.family_t, horizons, config)
        for msg in rolling.warnings:
            print(f"warning: {msg}", file=sys.stderr)
        w.writerow(["horizon", "n_observed", "observed", "imputed", "truncated"])
        for r in rolling.records:
            w.writerow([repr(r.horizon), r.n_observed, r.observed_count,
                        repr(r.imputed_expected), repr(r.truncated_expected)])
        _write(buf.getvalue(), args.out)
        return
    times = parse_times(args.times) if args.times else default_horizons(dataset.horizon, start=0.0)
    columns = {}
    if args.baseline in ("imputed", "both"):
        result = fit(dataset, args.family_x, args.family_t, config)
        columns["imputed"] = expected_failures(result.dist_x, result.dist_t, dataset.n_total, times).expected
    if args.baseline in ("truncated", "both"):
        tx, tt, _ = initial_estimates(dataset, args.family_x, args.family_t, fallback=True)
        columns["truncated"] = expected_failures(tx, tt, dataset.n_total, times).expected
    w.writerow(["time", *columns])
    for i, t in enumerate(times):
        w.writerow([repr(float(t)), *(repr(float(c[i])) for c in columns.values())])
    _write(buf.getvalue(), args.out)


def _family(text):
    try:
        return family_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ambicens", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--family-x", type=_family, default="exponential")
    chain.add_argument("--family-t", type=_family, default="exponential")
    chain.add_argument("--iterations", type=int, default=1000)
    chain.add_argument("--burn-in", type=int, default=100)
    chain.add_argument("--p", type=int, default=5)
    chain.add_argument("--epsilon", type=float, default=0.0005)
    chain.add_argument("--seed", type=int, default=0)
    chain.add_argument("--out", help="output file (default: stdout)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--n-total", type=int, help="batch size (required for CSV input)")
    data.add_argument("--t0", type=float, help="observation horizon (required for CSV input)")

    p = sub.add_parser("fit", parents=[chain, data], help="run the imputation estimator on a dataset")
    p.add_argument("dataset")
    p.add_argument("--rescale", action="store_true", help="fit on sd-rescaled times")
    p.add_argument("--trajectories", help="write per-iteration estimates to this CSV file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", parents=[chain], help="generate a synthetic batch")
    p.add_argument("--params-x", required=True, help="comma-separated, e.g. 0.2 or 1.5,4")
    p.add_argument("--params-t", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--fit", action="store_true", help="also fit the simulated batch")
    p.add_argument("--rescale", action="store_true")
    p.add_argument("--replications", type=int, default=0,
                   help="run a replicated experiment and print its report")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", parents=[chain, data], help="exact-likelihood tools")
    p.add_argument("dataset")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--iid-exp", action="store_true", help="exact MLE of a common exponential rate (default)")
    mode.add_argument("--surface", action="store_true", help="log-likelihood grid as CSV")
    p.add_argument("--grid", help="name=lo:hi:n,name=lo:hi:n")
    p.add_argument("--fix", action="append", help="name=value for parameters off the grid")
    p.add_argument("--imputed-iterations", type=int, default=0,
                   help="scan the imputed likelihood using the imputations of this many chain iterations")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("forecast", parents=[chain, data], help="expected cumulative failures")
    p.add_argument("dataset", nargs="?")
    p.add_argument("--times", help="lo:hi:step or comma list (default: every 0.5 up to t0)")
    p.add_argument("--baseline", choices=["truncated", "imputed", "both"], default="both")
    p.add_argument("--rolling", action="store_true",
                   help="refit at each time in --times and compare with observed counts")
    p.add_argument("--params-x")
    p.add_argument("--params-t")
    p.set_defaults(func=cmd_forecast)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (InputError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
