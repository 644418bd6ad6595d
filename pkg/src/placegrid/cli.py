"""Command line entry point: ``placegrid <subcommand> ...``.

Exit codes: 0 ok, 1 usage error, 2 invalid input, 3 failed bound or shape check.
"""
from __future__ import annotations

import argparse
import math
import sys

from . import analysis, codes, experiments, montecarlo
from .experiments import ConfigError, ExperimentConfig, dumps_report

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_CHECK = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _emit(obj, out: str | None = None) -> None:
    text = dumps_report(obj)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    with open(path) as fh:
        text = fh.read()
    try:
        return ExperimentConfig.from_json(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _code_from_args(args) -> codes.Code:
    mu = args.mu if args.mu is not None else codes.DEFAULT_MU
    if args.code:
        with open(args.code) as fh:
            return codes.loads(fh.read())
    if args.preset:
        return experiments.build_preset(args.preset[0], mu, args.code_seed)
    if args.family:
        spec = {"family": args.family, "n": args.n, "d": args.d, "m": args.m,
                "inner": args.inner, "seed": args.code_seed, "mu": mu}
        return experiments.build_code({k: v for k, v in spec.items() if v is not None}, mu)
    if args.config:
        cfg = _load_config(args.config)
        if cfg.code is None:
            raise ConfigError(f"{args.config}: no 'code' entry")
        return experiments.build_code(cfg.code, cfg.mu, cfg.code_seed)
    raise ConfigError("no code given: use --preset, --family, --code or --config")


def cmd_run_figure(args) -> int:
    cfg = _load_config(args.config)
    if args.preset:
        cfg.presets = list(args.preset)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    if args.alpha is not None:
        cfg.alpha = args.alpha
    if args.mu is not None:
        cfg.mu = args.mu
    cfg.validate()
    res = experiments.run_figure(cfg, args.out or cfg.output, fast=args.fast, svg=args.svg,
                                 workers=args.workers)
    _emit({"paths": res["paths"], "checks": res["checks"]})
    return EXIT_OK if all(c["passed"] for c in res["checks"]) else EXIT_CHECK


def cmd_verify_bounds(args) -> int:
    mu = args.mu if args.mu is not None else codes.DEFAULT_MU
    report = experiments.verify_bounds(seed=args.seed or 0, trials=args.trials or 10_000, mu=mu)
    failed = [c for c in report if not c["passed"]]
    _emit({"checks": len(report), "failed": len(failed), "failures": failed, "report": report},
          args.out)
    return EXIT_OK if not failed else EXIT_CHECK


def cmd_delta(args) -> int:
    code = _code_from_args(args)
    rep = codes.delta(code, args.s1, args.s2)
    _emit({"code_id": code.code_id, "delta": rep.delta, "only_in_1": rep.only_in_1,
           "only_in_2": rep.only_in_2, "per_module": list(rep.per_module)})
    return EXIT_OK


def cmd_tmin(args) -> int:
    code = _code_from_args(args)
    out = {"code_id": code.code_id, "t_min": analysis.t_min(code, args.s1, args.s2)}
    if args.empirical:
        trials = args.trials or (experiments.FAST_TRIALS if args.fast else 5000)
        tm = montecarlo.empirical_tmin(code, args.s1, args.s2, args.alpha or 0.05,
                                       experiments.default_t_grid(), trials, args.seed or 0,
                                       workers=args.workers)
        out["empirical_tmin"] = math.inf if tm is None else tm
    _emit(out)
    return EXIT_OK


def cmd_t_of_rho(args) -> int:
    code = _code_from_args(args)
    if args.sampled:
        value = analysis.t_of_rho_sampled(code, args.rho, anchor=args.anchor)
        mode = "sampled"
    else:
        value = analysis.t_of_rho_exact(code, args.rho, cell_budget=args.cell_budget)
        mode = "exact"
    _emit({"code_id": code.code_id, "rho": args.rho, "mode": mode, "T": value})
    return EXIT_OK


def cmd_gen_code(args) -> int:
    code = _code_from_args(args)
    text = codes.dumps(code) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--preset", metavar="NAME", action="append",
                        choices=experiments.FIGURE_PRESETS, help="named code (repeatable)")
    common.add_argument("--seed", type=_u64, help="master seed")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials per hypothesis")
    common.add_argument("--alpha", type=float, help="target error level")
    common.add_argument("--mu", type=float, help="high firing rate")
    common.add_argument("--out", metavar="PATH", help="output directory or file")
    common.add_argument("--fast", action="store_true", help="500 trials, 3x wider tolerances")
    common.add_argument("--svg", action="store_true", help="also render SVG charts")
    common.add_argument("--workers", type=int, default=1, help="parallel workers")
    common.add_argument("--cell-budget", type=int, default=analysis.DEFAULT_CELL_BUDGET)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="sampled", action="store_false", default=False)
    mode.add_argument("--sampled", dest="sampled", action="store_true")
    src = common.add_argument_group("code")
    src.add_argument("--code", metavar="PATH", help="code JSON file")
    src.add_argument("--family", choices=["uniform-place", "adaptive-place", "random-place",
                                          "balanced-grid", "extreme-dyadic"])
    src.add_argument("--n", type=int)
    src.add_argument("--d", type=int)
    src.add_argument("--m", type=int)
    src.add_argument("--inner", choices=["adaptive", "random"])
    src.add_argument("--code-seed", type=int, default=0)

    parser = _Parser(prog="placegrid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("run-figure", parents=[common], help="discrimination-time figure data")
    p.set_defaults(func=cmd_run_figure)
    p = sub.add_parser("verify-bounds", parents=[common], help="check all closed-form bounds")
    p.set_defaults(func=cmd_verify_bounds)
    for name, func in (("delta", cmd_delta), ("tmin", cmd_tmin)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--s1", type=float, required=True)
        p.add_argument("--s2", type=float, required=True)
        if name == "tmin":
            p.add_argument("--empirical", action="store_true",
                           help="also search the smallest time with error <= alpha")
        p.set_defaults(func=func)
    p = sub.add_parser("t-of-rho", parents=[common], help="worst-case time at distance rho")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--anchor", type=float, default=1 / 3)
    p.set_defaults(func=cmd_t_of_rho)
    p = sub.add_parser("gen-code", parents=[common], help="write a code as JSON")
    p.set_defaults(func=cmd_gen_code)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"placegrid: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
