"""Command-line entry point: ``markov-xact {gaps,verify,estimate,bound,experiment}``.

Exit status 0 on success, 1 on invalid input, 2 when ``verify`` finds a
violated identity.  Failures print ``ERROR <code>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import bounds
from .core import (
    format_matrix,
    point_mass,
    read_distribution,
    read_matrix,
    stationary_distribution,
)
from .errors import InvalidInput, MarkovError, PathTooShort
from .estimators import mle_estimate, sce_estimate
from .experiments import (
    ExperimentConfig,
    ratio_summary,
    ratio_to_csv,
    records_to_csv,
    run_mse_experiment,
)
from .gaps import gap_report
from .path_space import verify_spectral_identities
from .sampling import MatrixOracle, RandomSource


class ConfigNotFound(MarkovError):
    code = "config_not_found"


class VerificationFailed(MarkovError):
    code = "verification_failed"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_matrix(path):
    try:
        return read_matrix(path)
    except FileNotFoundError:
        raise InvalidInput(f"matrix file not found: {path}") from None


def cmd_gaps(args) -> int:
    report = gap_report(_load_matrix(args.matrix), k_max=args.kmax)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    report = verify_spectral_identities(_load_matrix(args.matrix), tol=args.tol)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        raise VerificationFailed(f"identities violated: {names}")
    return 0


def _read_path(path) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            return np.array([int(x) for x in fh.read().split()], dtype=np.int64)
    except FileNotFoundError:
        raise InvalidInput(f"path file not found: {path}") from None
    except ValueError as exc:
        raise PathTooShort(f"{path}: {exc}") from None


def cmd_estimate(args) -> int:
    if args.method == "mle":
        if not args.path:
            raise InvalidInput("--method mle needs --path")
        est = mle_estimate(_read_path(args.path), d=args.dim)
    else:
        if not (args.matrix and args.n and args.seed is not None):
            raise InvalidInput("--method sce needs --matrix, --n and --seed")
        P = _load_matrix(args.matrix)
        if args.initial:
            nu = read_distribution(args.initial)
        elif args.start is not None:
            nu = point_mass(P.dim, args.start)
        else:
            nu = stationary_distribution(P)
        est = sce_estimate(MatrixOracle(P), nu, args.n, RandomSource(args.seed, args.stream))
    body = est.p_hat if args.write == "p_hat" else est.joint
    _emit(est.header() + "\n" + format_matrix(body), args.out)
    return 0


def cmd_bound(args) -> int:
    need = {
        "mle": ("n", "t", "gap", "sigma2"),
        "sce": ("n", "t", "gap", "d"),
        "scalar": ("n", "t", "gap", "sigma2", "M"),
        "matrix": ("n", "t", "gap", "sigma2", "M", "d"),
        "mle-mse": ("n", "gap"),
        "sce-mse": ("n", "gap"),
    }[args.method]
    missing = [f"--{k.replace('_', '-')}" for k in need if getattr(args, k) is None]
    if missing:
        raise InvalidInput(f"--method {args.method} needs {' '.join(missing)}")
    a = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", bounds.VacuousBoundWarning)
        value = {
            "mle": lambda: bounds.mle_tail_bound(a.n, a.t, a.gap, a.sigma2, a.nu_ratio),
            "sce": lambda: bounds.sce_tail_bound(a.n, a.t, a.gap, a.d, a.nu_ratio),
            "scalar": lambda: bounds.scalar_bernstein_bound(a.n, a.gap, a.sigma2, a.M, a.t, a.nu_ratio),
            "matrix": lambda: bounds.matrix_bernstein_bound(a.n, a.gap, a.sigma2, a.M, a.t, a.d, a.nu_ratio),
            "mle-mse": lambda: bounds.mle_mse_bound(a.n, a.gap, eta=a.gap, nu_ratio=a.nu_ratio),
            "sce-mse": lambda: bounds.sce_mse_bound(a.n, a.gap, a.nu_ratio),
        }[args.method]()
    _emit(f"{value:.5e}\n", args.out)
    return 0


def cmd_experiment(args) -> int:
    try:
        config = ExperimentConfig.from_json(args.config)
    except FileNotFoundError:
        raise ConfigNotFound(f"{args.config} does not exist") from None
    records = run_mse_experiment(config)
    if args.ratio:
        _emit(ratio_to_csv(ratio_summary(records)), args.out)
    else:
        _emit(records_to_csv(records), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markov-xact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gaps", help="print every gap of a chain as JSON")
    p.add_argument("matrix")
    p.add_argument("--kmax", type=int, default=32)
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("verify", help="check the path-space spectral identities")
    p.add_argument("matrix")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("estimate", help="estimate D_mu P by MLE or SCE")
    p.add_argument("--method", choices=["mle", "sce"], required=True)
    p.add_argument("--path", help="whitespace-separated state indices (mle)")
    p.add_argument("--dim", type=int, help="state count for mle (default: max state + 1)")
    p.add_argument("--matrix", help="transition matrix file (sce)")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--initial", help="distribution file for the start state (sce)")
    p.add_argument("--start", type=int, help="start from this state instead (sce)")
    p.add_argument("--write", choices=["joint", "p_hat"], default="joint")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bound", help="evaluate a tail or MSE bound")
    p.add_argument("--method", choices=["mle", "sce", "scalar", "matrix", "mle-mse", "sce-mse"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--gap", type=float)
    p.add_argument("--sigma2", type=float, help="variance proxy; mu(u)p(u,v) for --method mle")
    p.add_argument("--M", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--nu-ratio", type=float, default=1.0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("experiment", help="Monte Carlo MSE sweep, written as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--ratio", action="store_true", help="write MLE/SCE ratios instead")
    p.set_defaults(func=cmd_experiment)

    for p in sub.choices.values():
        p.add_argument("--out", help="write here instead of stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except MarkovError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR io_error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
