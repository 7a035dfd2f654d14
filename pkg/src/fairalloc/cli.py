"""Command line entry point: ``fairalloc gen|simulate|solve|verify``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config, normalize
from .instance import load_csv
from .solver import PreconditionError
from .welfare import WelfareSpec


def _common(sp, config_required=True):
    sp.add_argument("--config", required=config_required, help="JSON experiment config")
    sp.add_argument("--out", help="output directory (overrides outputs.dir)")
    sp.add_argument("--seed", type=int, help="base seed (overrides base_seed)")
    sp.add_argument("--replications", type=int, help="number of replications")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fairalloc", description="Online fair allocation experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write pools (and optionally traces) to CSV")
    _common(g)
    g.add_argument("--traces", action="store_true", help="also write every replication's sequences")

    s = sub.add_parser("simulate", help="run algorithms over replications, write regret.csv")
    _common(s)

    v = sub.add_parser("verify", help="run the lemma checks, write lemma_checks.csv")
    _common(v)

    o = sub.add_parser("solve", help="solve the hindsight program of a CSV instance")
    o.add_argument("csv", help="instance CSV (t,a0,a1,...)")
    o.add_argument("--config", help="take the welfare block from this config")
    o.add_argument("--p", type=float, default=None, help="CES exponent (default 0)")
    o.add_argument("--weights", default=None, help="'symmetric' or comma-separated positive weights")
    o.add_argument("--vbar", type=float, default=None)
    o.add_argument("--tol", type=float, default=1e-8)
    o.add_argument("--plan-out", help="write the optimal allocation plan here")
    return ap


def _load(args):
    cfg = load_config(args.config)
    changed = False
    if args.seed is not None:
        cfg["base_seed"] = args.seed
        changed = True
    if args.replications is not None:
        cfg["replications"] = args.replications
        changed = True
    if args.out is not None:
        cfg["outputs"]["dir"] = args.out
    if changed:
        cfg = normalize(cfg)
    if args.jobs < 1:
        raise ConfigError("--jobs", "must be at least 1")
    return cfg


def _solve(args) -> int:
    from .harness import solve_sequence, write_csv

    seq = load_csv(args.csv, args.vbar)
    p, weights = 0.0, "symmetric"
    if args.config:
        w = load_config(args.config)["welfare"]
        p, weights = w["p"], w["weights"]
    if args.p is not None:
        p = args.p
    if args.weights is not None:
        weights = args.weights if args.weights == "symmetric" else [float(x) for x in args.weights.split(",")]
    spec = WelfareSpec.symmetric(seq.n, p) if weights == "symmetric" else WelfareSpec(p, weights)
    if spec.n != seq.n:
        raise ValueError(f"{spec.n} weights for {seq.n} agents")
    out, res = solve_sequence(spec, seq, args.tol)
    if args.plan_out:
        write_csv(args.plan_out, ["t", *seq.agent_names], ([t, *row] for t, row in enumerate(res.plan.x)))
    print(json.dumps(out))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            return _solve(args)
        from . import harness

        cfg = _load(args)
        out = cfg["outputs"]["dir"]
        if args.command == "gen":
            for path in harness.cmd_gen(cfg, out, args.traces):
                logging.info("wrote %s", path)
            return 0
        if args.command == "simulate":
            res = harness.cmd_simulate(cfg, out, args.jobs)
            print(f"{len(res['rows'])} regret rows, {len(res['failures'])} failures -> {out}")
            return 0
        records, status = harness.cmd_verify(cfg, out, args.jobs)
        bad = sum(1 for r in records if not r.passed and not r.monitor)
        print(f"{len(records)} checks, {bad} failed -> {out}")
        return status
    except (ConfigError, PreconditionError, ValueError, OSError) as e:
        print(f"fairalloc: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
