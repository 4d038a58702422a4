"""Seeded, reproducible experiment runner.

Every subcommand takes a mandatory master seed, emits a CSV artifact with a
fixed header row (floats printed with 17 significant digits) and a JSON
sidecar recording the full effective configuration, the seed and the code
version.  Replicates are distributed over a worker pool; each replicate draws
from the stream keyed by (seed, replicate index), so results are independent
of the worker count and rows are emitted in replicate order.
"""

from __future__ import annotations

import argparse
import json
import math
import multiprocessing
import sys

from . import __version__
from .errors import ConfigError, DomainError, EqfieldError, InputError, NumericError
from .streams import Stream

_FLOAT_FMT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return _FLOAT_FMT % v
    return str(v)


def _write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_sidecar(path: str, config: dict) -> None:
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _marginal_from_args(args) -> "object":
    from .apps import MarginalSpec

    name = args.marginal
    if name == "standard_normal":
        return MarginalSpec.standard_normal()
    if name == "rademacher":
        return MarginalSpec.rademacher()
    if name == "uniform_mixture":
        if args.e is None:
            raise ConfigError("uniform_mixture requires --e")
        return MarginalSpec.uniform_mixture(args.e)
    if name == "three_point":
        if args.logp is None or args.lambda1 is None:
            raise ConfigError("three_point requires --logp and --lambda1")
        return MarginalSpec.three_point(args.logp, args.lambda1)
    raise ConfigError(f"unknown marginal {name!r}")


# ---------------------------------------------------------------------------
# replicate workers (top level for picklability)

def _field_max_rep(task):
    from .field import FieldParams, sample_max, standardize_value

    n, r, mode, seed, i = task
    value = sample_max(FieldParams(n=n, r=r), Stream(seed, (i,)))
    return i, value, standardize_value(value, n, mode)


def _limit_rep(task):
    from .limits import sample_limit_critical

    lam, eps, k, seed, i = task
    return i, sample_limit_critical(lam, eps, Stream(seed, (i,)), K=k)


def _interpoint_rep(task):
    from .apps import (PopulationSpec, generate_dataset, max_interpoint,
                       standardize_interpoint)

    n, p, marginal, mode, seed, i = task
    pop = PopulationSpec(n=n, p=p, rho=0.0, marginal=marginal)
    data = generate_dataset(pop, Stream(seed, (i,)))
    d2 = max_interpoint(data.T).d2
    return i, d2, standardize_interpoint(d2, n, p, marginal.kappa, mode)


def _corr_rep(task):
    from .apps import (PopulationSpec, generate_dataset, max_sample_corr,
                       max_sample_cov, standardize_Mn, standardize_Rn)

    n, p, rho, marginal, regime_rn, regime_mn, seed, i = task
    pop = PopulationSpec(n=n, p=p, rho=rho, marginal=marginal)
    data = generate_dataset(pop, Stream(seed, (i,)))
    rn = max_sample_cov(data)
    mn = max_sample_corr(data)
    kappa = marginal.kappa
    return (i, rn, mn,
            standardize_Rn(rn, n, p, rho, kappa, regime_rn),
            standardize_Mn(mn, n, p, rho, kappa, regime_mn))


def _run_pool(worker, tasks, workers: int):
    if workers <= 1:
        return [worker(t) for t in tasks]
    with multiprocessing.Pool(workers) as pool:
        return pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * workers)))


# ---------------------------------------------------------------------------
# subcommands

def _cmd_field_max(args) -> None:
    tasks = [(args.n, args.r, args.mode, args.seed, i) for i in range(args.reps)]
    rows = sorted(_run_pool(_field_max_rep, tasks, args.workers))
    _write_csv(args.out, ["replicate", "max", "standardized"], rows)


def _cmd_limit_sample(args) -> None:
    from .limits import truncation_budget

    if args.K is not None:
        k = args.K
    elif args.lam > 0.0:
        k = truncation_budget(args.epsilon, math.sqrt(2.0 * args.lam)).K_required
    else:
        k = None
    tasks = [(args.lam, args.epsilon, k, args.seed, i) for i in range(args.reps)]
    rows = sorted(_run_pool(_limit_rep, tasks, args.workers))
    _write_csv(args.out, ["replicate", "value"], rows)


def _cmd_chen_stein(args) -> None:
    from .chenstein import report

    rows = []
    for n in sorted({int(v) for v in args.n_grid.split(",")}):
        rep = report(n, args.r, args.y, args.slack)
        rows.append((rep.n, rep.r, rep.y, rep.p12, rep.mean, rep.b1,
                     rep.b2_exponent, rep.b2_bound_log,
                     rep.total_error_bound, rep.alpha, rep.L))
    _write_csv(args.out, ["n", "r", "y", "p12", "mean", "b1", "b2_exponent",
                          "b2_bound_log", "total_error_bound", "alpha", "L"],
               rows)


def _cmd_spectra_verify(args) -> None:
    from .spectra import PairMatrixSpec, verify_spectrum

    bs = [float(v) for v in args.b_list.split(",")]
    rows = []
    for p in range(args.p_min, args.p_max + 1):
        for b in bs:
            ok, dev = verify_spectrum(PairMatrixSpec(p=p, b=b), args.tol)
            rows.append((p, b, dev, ok))
    _write_csv(args.out, ["p", "b", "max_deviation", "ok"], rows)


def _cmd_app_interpoint(args) -> None:
    marginal = _marginal_from_args(args)
    tasks = [(args.n, args.p, marginal, args.mode, args.seed, i)
             for i in range(args.reps)]
    rows = sorted(_run_pool(_interpoint_rep, tasks, args.workers))
    _write_csv(args.out, ["replicate", "d2", "standardized"], rows)


def _cmd_app_corr(args) -> None:
    marginal = _marginal_from_args(args)
    tasks = [(args.n, args.p, args.rho, marginal, args.regime_rn,
              args.regime_mn, args.seed, i) for i in range(args.reps)]
    rows = sorted(_run_pool(_corr_rep, tasks, args.workers))
    _write_csv(args.out, ["replicate", "rn", "mn", "rn_std", "mn_std"], rows)


def _cmd_fwer(args) -> None:
    from .fwer import fwer_estimate

    rows = []
    for alpha in [float(v) for v in args.alphas.split(",")]:
        est = fwer_estimate(args.n, args.r, alpha, args.reps,
                            Stream(args.seed, (int(alpha * 1e9),)))
        rows.append((alpha, est.threshold.q_alpha, est.threshold.u,
                     est.rate, est.half_width))
    _write_csv(args.out, ["alpha", "q_alpha", "u", "rate", "half_width"], rows)


def _named_cdf(name: str):
    from scipy.special import ndtr

    from .normalizers import G1, STANDARD_GUMBEL, gumbel_cdf

    import numpy as np

    if name == "gumbel":
        return lambda x: np.exp(-STANDARD_GUMBEL.mass * np.exp(-np.asarray(x)))
    if name == "g1":
        return lambda x: np.exp(-G1.mass * np.exp(-np.asarray(x)))
    if name == "normal":
        return ndtr
    raise ConfigError(f"unknown cdf {name!r}; expected gumbel, g1 or normal")


def _read_sample(path: str):
    from .dataio import read_csv_matrix

    return read_csv_matrix(path)[:, -1]


def _cmd_ks(args) -> None:
    from .stats import ks_one_sample, ks_two_sample

    a = _read_sample(args.sample_a)
    if args.sample_b is not None:
        res = ks_two_sample(a, _read_sample(args.sample_b))
        n2 = res.n2
    elif args.cdf is not None:
        res = ks_one_sample(a, _named_cdf(args.cdf))
        n2 = -1
    else:
        raise ConfigError("ks needs either --sample-b or --cdf")
    _write_csv(args.out, ["statistic", "n1", "n2", "location"],
               [(res.statistic, res.n1, n2, res.location)])


# ---------------------------------------------------------------------------
# argument plumbing

def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Prepend key=value pairs from --config as defaults (flags override)."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise ConfigError("--config requires a path")
    extra: list[str] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, value = line.split("=", 1)
                extra.extend([f"--{key.strip().replace('_', '-')}", value.strip()])
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    rest = argv[:idx] + argv[idx + 2:]
    # config values first so explicit flags win on conflicts
    return [rest[0]] + extra + rest[1:] if rest else extra


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, required=True,
                    help="master seed (mandatory, no entropy default)")
    sp.add_argument("--out", type=str, required=True, help="output CSV path")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--config", type=str, help="key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqfield")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("field-max", help="draws of the field maximum")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--mode", choices=("gumbel", "critical"), default="gumbel")
    sp.add_argument("--reps", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_field_max)

    sp = sub.add_parser("limit-sample", help="draws of the critical limit law")
    sp.add_argument("--lam", type=float, required=True)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--K", type=int, default=None,
                    help="override the certified truncation count")
    sp.add_argument("--reps", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_limit_sample)

    sp = sub.add_parser("chen-stein", help="approximation report over an n-grid")
    sp.add_argument("--n-grid", type=str, required=True,
                    help="comma-separated field sizes")
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--slack", type=float, default=0.0)
    _add_common(sp)
    sp.set_defaults(func=_cmd_chen_stein)

    sp = sub.add_parser("spectra-verify", help="pair-covariance spectrum check")
    sp.add_argument("--p-min", type=int, default=4)
    sp.add_argument("--p-max", type=int, default=12)
    sp.add_argument("--b-list", type=str, default="0,0.1,0.25,0.4,0.49")
    sp.add_argument("--tol", type=float, default=1e-9)
    _add_common(sp)
    sp.set_defaults(func=_cmd_spectra_verify)

    sp = sub.add_parser("app-interpoint", help="maximum interpoint distance runs")
    sp.add_argument("--n", type=int, required=True, help="ambient dimension")
    sp.add_argument("--p", type=int, required=True, help="number of points")
    sp.add_argument("--marginal", type=str, default="standard_normal")
    sp.add_argument("--e", type=float, default=None)
    sp.add_argument("--logp", type=float, default=None)
    sp.add_argument("--lambda1", type=float, default=None)
    sp.add_argument("--mode", choices=("gumbel", "critical"), default="gumbel")
    sp.add_argument("--reps", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_app_interpoint)

    sp = sub.add_parser("app-corr", help="largest sample covariance/correlation runs")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--marginal", type=str, default="standard_normal")
    sp.add_argument("--e", type=float, default=None)
    sp.add_argument("--logp", type=float, default=None)
    sp.add_argument("--lambda1", type=float, default=None)
    sp.add_argument("--regime-rn", choices=("i", "ii", "iii", "new_i", "new_ii"),
                    default="i")
    sp.add_argument("--regime-mn", choices=("i", "ii", "iii"), default="i")
    sp.add_argument("--reps", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_app_corr)

    sp = sub.add_parser("fwer", help="threshold table and calibration")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--alphas", type=str, default="0.01,0.05,0.1")
    sp.add_argument("--reps", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_fwer)

    sp = sub.add_parser("ks", help="compare two sample files or one vs a named CDF")
    sp.add_argument("--sample-a", type=str, required=True)
    sp.add_argument("--sample-b", type=str, default=None)
    sp.add_argument("--cdf", type=str, default=None)
    _add_common(sp)
    sp.set_defaults(func=_cmd_ks)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        args.func(args)
        sidecar = {k: v for k, v in vars(args).items()
                   if k != "func" and not callable(v)}
        sidecar["version"] = __version__
        sidecar = {k: (repr(v) if not isinstance(v, (int, float, str, bool, type(None)))
                       else v) for k, v in sidecar.items()}
        _write_sidecar(args.out, sidecar)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (OSError, InputError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except EqfieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
