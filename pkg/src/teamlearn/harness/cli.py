"""Batch command line: simulate, montecarlo, scenario, check, sweep.

Exit codes: 0 success, 1 a run ended in failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from typing import List, Optional

from ..core import ConfigError, DomainError
from ..integrate import EIGENVECTOR_FAILED, POSITIVITY_LOST
from . import io
from .config import ExperimentConfig, check, tomllib
from .montecarlo import montecarlo_positivity
from .run import run_experiment
from .scenarios import DESCRIPTIONS, SCENARIOS, scenario

FAILED = (POSITIVITY_LOST, EIGENVECTOR_FAILED)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def _globals(p, top=False):
    d = None if top else argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=d, help="override the config seed")
    p.add_argument("--out", default=d, help="output root (default $TEAMLEARN_OUT or ./out)")
    p.add_argument("--quiet", action="store_true", default=False if top else argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="teamlearn", description="Team task-assignment and appraisal simulations.")
    _globals(p, top=True)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one config and write its artifacts")
    s.add_argument("config")
    _globals(s)

    s = sub.add_parser("montecarlo", help="estimate how often appraisals stay positive")
    s.add_argument("config")
    s.add_argument("--n", type=int, required=True, dest="N")
    s.add_argument("--certified", nargs=2, type=float, metavar=("EPS", "XI"),
                   help="require N to meet the Chernoff bound for EPS, XI")
    s.add_argument("--horizon", type=float)
    s.add_argument("--workers", type=int, default=1)
    _globals(s)

    s = sub.add_parser("scenario", help="run a built-in scenario",
                       epilog="; ".join(f"{k}: {v}" for k, v in DESCRIPTIONS.items()))
    s.add_argument("name", choices=sorted(SCENARIOS))
    _globals(s)

    s = sub.add_parser("check", help="validate a config against its declared hypotheses")
    s.add_argument("config")
    _globals(s)

    s = sub.add_parser("sweep", help="run a config over a grid of parameter values")
    s.add_argument("config")
    s.add_argument("--param", action="append", required=True, metavar="PATH=V1,V2,...")
    _globals(s)
    return p


def _value(token: str):
    try:
        return tomllib.loads(f"v = {token}")["v"]
    except tomllib.TOMLDecodeError:
        return token


def _grid(specs: List[str]):
    axes = []
    for spec in specs:
        path, eq, values = spec.partition("=")
        if not eq or not values:
            raise ConfigError(f"--param needs PATH=V1,V2,..., got {spec!r}")
        axes.append([(path, _value(v)) for v in values.split(",")])
    return itertools.product(*axes)


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    return cfg if args.seed is None else cfg.with_seed(args.seed)


def _report(args, res) -> int:
    s = res.summary
    if not args.quiet:
        print(f"{s['name']} seed={s['seed']}: {s['status']} at t={s['t_final']:.6g}, "
              f"H1={s['terminal_H1']:.3e} -> {res.out_dir}")
    return 1 if s["status"] in FAILED else 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s")
        return _dispatch(args)
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help
        return int(e.code or 0)


def _dispatch(args) -> int:
    if args.command == "scenario":
        return _report(args, run_experiment(scenario(args.name, args.seed), args.out))
    if args.command == "simulate":
        return _report(args, run_experiment(_load(args), args.out))
    if args.command == "check":
        cfg = _load(args)
        ok, bad = check(cfg)
        if not args.quiet:
            print(f"{cfg.name}: model {cfg.kind}")
            print("  satisfies: " + (", ".join(ok) or "-"))
            print("  violates (declared): " + (", ".join(bad) or "-"))
        return 0
    if args.command == "montecarlo":
        cfg = _load(args)
        eps, xi = args.certified if args.certified else (None, None)
        rep = montecarlo_positivity(cfg, args.N, horizon=args.horizon, epsilon=eps, xi=xi,
                                    certified=args.certified is not None, workers=args.workers)
        out = cfg.out_dir(args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_json(out / "montecarlo.json", rep.to_dict())
        d = rep.to_dict()
        d.pop("statuses")
        d.pop("min_entry_ratio")
        print(json.dumps(io.jsonable(d), indent=2, sort_keys=True))
        return 0
    if args.command == "sweep":
        base = _load(args)
        rows, code = [], 0
        for point in _grid(args.param):
            tag = "-".join(f"{p.rsplit('.', 1)[-1]}{v}" for p, v in point)
            cfg = base.with_overrides({"name": f"{base.name}-{tag}", **dict(point)})
            res = run_experiment(cfg, args.out)
            code = max(code, _report(args, res))
            rows.append({**{p: v for p, v in point}, "status": res.summary["status"],
                         "terminal_H1": res.summary["terminal_H1"], "out": str(res.out_dir)})
        root = base.out_dir(args.out).parent
        root.mkdir(parents=True, exist_ok=True)
        io.write_json(root / f"{base.name}-sweep-seed{base.seed}.json", rows)
        return code
    raise ConfigError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
