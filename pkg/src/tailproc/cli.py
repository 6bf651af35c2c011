"""Command-line interface: simulate, fit, cov, check, validate.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 on numerical
failure (for example when the moment equation has no root).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import asymptotics, montecarlo, second_order
from .estimator import ExcessSample, LmeSolverError, lme_fit, top_k_excesses
from .process import CoefficientSequence, InnovationModel, arma_to_ma, simulate

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

CONFIG_KEYS = {
    "coeffs", "ar", "ma", "alpha", "kind", "pi1", "pi2",
    "r", "n", "k", "theta", "reps", "seed", "workers", "sampling",
}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _coeffs_from_args(args) -> CoefficientSequence:
    if args.coeffs is not None and (args.ar is not None or args.ma is not None):
        raise UsageError("give either --coeffs or --ar/--ma, not both")
    if args.coeffs is not None:
        return CoefficientSequence(tuple(_parse_floats(args.coeffs)))
    if args.ar is not None or args.ma is not None:
        ar = _parse_floats(args.ar) if args.ar is not None else []
        ma = _parse_floats(args.ma) if args.ma is not None else []
        return arma_to_ma(ar, ma)
    raise UsageError("coefficients required: pass --coeffs or --ar/--ma")


def _model_from_args(args) -> InnovationModel:
    if getattr(args, "two_sided", False):
        pi1 = args.pi1 if args.pi1 is not None else 0.5
        return InnovationModel(kind="two_sided_pareto", alpha=args.alpha,
                               pi1=pi1, pi2=1.0 - pi1)
    return InnovationModel(kind="one_sided_pareto", alpha=args.alpha)


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if output:
        with open(output, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _read_column(path: str) -> np.ndarray:
    values = []
    with open(path) as handle:
        for line in handle:
            token = line.strip().split(",")[0]
            if not token:
                continue
            try:
                values.append(float(token))
            except ValueError:
                continue  # header or comment line
    if not values:
        raise UsageError(f"no numeric data found in {path}")
    return np.asarray(values)


def _cmd_simulate(args) -> int:
    coeffs = _coeffs_from_args(args)
    model = _model_from_args(args)
    path = simulate(coeffs, model, args.n, args.seed)
    if args.format == "json":
        _emit({"seed": path.seed, "fingerprint": path.fingerprint,
               "values": path.values.tolist()}, args.output)
    else:
        lines = "value\n" + "\n".join(repr(float(v)) for v in path.values) + "\n"
        if args.output:
            with open(args.output, "w") as handle:
                handle.write(lines)
        else:
            sys.stdout.write(lines)
    return EXIT_OK


def _cmd_fit(args) -> int:
    data = _read_column(args.input)
    if args.excesses:
        if args.k is not None and args.k != data.size:
            raise UsageError(f"--k {args.k} does not match the {data.size} excesses read")
        sample = ExcessSample.from_excesses(data)
    else:
        if args.k is None:
            raise UsageError("--k is required when fitting a raw series")
        sample = top_k_excesses(data, args.k)
    fit = lme_fit(sample, args.r)
    _emit({"gamma_hat": fit.gamma_hat, "sigma_hat": fit.sigma_hat,
           "b_hat": fit.b_hat, "residual": fit.residual,
           "iterations": fit.iterations, "r": fit.r,
           "k": sample.k, "threshold": sample.threshold}, args.output)
    return EXIT_OK


def _cmd_cov(args) -> int:
    coeffs = _coeffs_from_args(args)
    report = asymptotics.estimator_cov(args.gamma, args.r, coeffs)
    _emit(report.to_dict(), args.output)
    return EXIT_OK


def _cmd_check(args) -> int:
    coeffs = _coeffs_from_args(args)
    report = second_order.check_conditions(args.alpha, coeffs, xi=args.xi)
    _emit(report.to_dict(), args.output)
    return EXIT_OK


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("config file must hold a JSON object")
    for key in raw:
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown config key: {key!r}")
    return raw


def _cmd_validate(args) -> int:
    cfg = _load_config_file(args.config) if args.config else {}
    # Command-line flags override file values.
    overrides = {
        "coeffs": _parse_floats(args.coeffs) if args.coeffs is not None else None,
        "ar": _parse_floats(args.ar) if args.ar is not None else None,
        "ma": _parse_floats(args.ma) if args.ma is not None else None,
        "alpha": args.alpha, "r": args.r, "n": args.n, "k": args.k,
        "theta": args.theta, "reps": args.reps, "seed": args.seed,
        "workers": args.workers, "sampling": args.sampling,
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value

    if cfg.get("coeffs") is not None:
        coeffs = CoefficientSequence(tuple(float(v) for v in cfg["coeffs"]))
    elif cfg.get("ar") is not None or cfg.get("ma") is not None:
        coeffs = arma_to_ma(cfg.get("ar") or [], cfg.get("ma") or [])
    else:
        raise UsageError("missing config key: 'coeffs' (or 'ar'/'ma')")
    for key in ("alpha", "r", "n", "reps", "seed"):
        if cfg.get(key) is None:
            raise UsageError(f"missing config key: {key!r}")

    model = InnovationModel(kind=cfg.get("kind", "one_sided_pareto"),
                            alpha=float(cfg["alpha"]),
                            pi1=float(cfg.get("pi1", 0.5)),
                            pi2=float(cfg.get("pi2", 0.5)))
    config = montecarlo.ExperimentConfig.create(
        coeffs=coeffs, model=model, n=int(cfg["n"]), r=float(cfg["r"]),
        replications=int(cfg["reps"]), master_seed=int(cfg["seed"]),
        k=int(cfg["k"]) if cfg.get("k") is not None else None,
        theta=float(cfg.get("theta", 0.9)),
        worker_count_hint=montecarlo.resolve_workers(cfg.get("workers")),
        sampling=cfg.get("sampling", "series"))

    csv_path = json_path = None
    if args.output:
        csv_path = args.output + ".records.csv"
        json_path = args.output + ".report.json"
    report = montecarlo.run_experiment(config, csv_path=csv_path, json_path=json_path)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def _add_coeff_flags(parser) -> None:
    parser.add_argument("--coeffs", default=None,
                        help="comma-separated moving-average coefficients, e.g. 1,0.5")
    parser.add_argument("--ar", default=None,
                        help="comma-separated autoregressive coefficients")
    parser.add_argument("--ma", default=None,
                        help="comma-separated moving-average lag coefficients")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailproc",
                     description="Heavy-tailed linear processes, likelihood "
                                 "moment fitting, and limit validation.")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("simulate", formatter_class=fmt,
                       help="simulate a path and write it as a single column")
    _add_coeff_flags(p)
    p.add_argument("--alpha", type=float, default=3.0, help="innovation tail index")
    p.add_argument("--two-sided", action="store_true",
                   help="use the two-sided innovation model")
    p.add_argument("--pi1", type=float, default=None,
                   help="right tail weight of the two-sided model")
    p.add_argument("--n", type=int, default=1000, help="path length")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--output", default=None, help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", formatter_class=fmt,
                       help="fit the likelihood moment estimator")
    p.add_argument("--input", required=True,
                   help="single-column CSV holding a series (or excesses)")
    p.add_argument("--k", type=int, default=None, help="number of upper order statistics")
    p.add_argument("--r", type=float, default=-1.0, help="tuning exponent, negative")
    p.add_argument("--excesses", action="store_true",
                   help="treat the input column as pre-computed excesses")
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("cov", formatter_class=fmt,
                       help="closed-form covariance of the standardized estimator pair")
    _add_coeff_flags(p)
    p.add_argument("--gamma", type=float, required=True, help="tail index of the process")
    p.add_argument("--r", type=float, default=-1.0, help="tuning exponent, negative")
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_cov)

    p = sub.add_parser("check", formatter_class=fmt,
                       help="evaluate the regularity conditions for a coefficient sequence")
    _add_coeff_flags(p)
    p.add_argument("--alpha", type=float, required=True, help="innovation tail index")
    p.add_argument("--xi", type=float, default=0.9,
                   help="exponent fraction for the fractional power sum")
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("validate", formatter_class=fmt,
                       help="Monte Carlo validation of the normal limit")
    p.add_argument("--config", default=None, help="JSON config file")
    _add_coeff_flags(p)
    p.add_argument("--alpha", type=float, default=None, help="innovation tail index")
    p.add_argument("--r", type=float, default=None, help="tuning exponent, negative")
    p.add_argument("--n", type=int, default=None, help="path length per replication")
    p.add_argument("--k", type=int, default=None,
                   help="number of upper order statistics (growth rule if omitted)")
    p.add_argument("--theta", type=float, default=None,
                   help="growth rule exponent fraction in (0, 1)")
    p.add_argument("--reps", type=int, default=None, help="number of replications")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--workers", type=int, default=None,
                   help="process count (TAILPROC_WORKERS or CPU count if omitted)")
    p.add_argument("--sampling", choices=("series", "gpd_direct"), default=None,
                   help="replication sampling mode")
    p.add_argument("--output", default=None,
                   help="prefix for <prefix>.records.csv and <prefix>.report.json")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LmeSolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
