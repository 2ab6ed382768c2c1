"""Command line entry point: ``robustmatch {gen,run,verify,sweep}``.

Exit codes: 0 success, 1 assertion failure, 2 usage error, 3 IO error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import edgelist
from .edgelist import EdgeListFormatError
from .edcs import ParameterError
from .harness import (
    ConfigError,
    ExperimentConfig,
    build_instance,
    dumps_report,
    load_config,
    run_experiment,
    sweep_experiment,
    verify_experiment,
)

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

FAMILIES = ["three-layer", "four-layer", "gnp", "bipartite-gnp", "planted-matching"]


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--m", type=int, help="group size for layered families")
    p.add_argument("--n", type=int, help="vertex count for random families")
    p.add_argument("--density", type=float)
    p.add_argument("--instance-seed", type=int)
    p.add_argument("--instance-file", help="edge-list file to use as the instance")


def _protocol_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--beta", type=int)
    p.add_argument("--mode", choices=["practical", "theory"])
    p.add_argument("--fallback-threshold", type=int, dest="fallback_edge_threshold")
    p.add_argument("--t", type=int, help="peeling iterations for verifiers")
    p.add_argument("--inject-adversarial-h", action="store_true", default=None)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write an instance as edge list plus JSON sidecar")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--m", type=int, default=3)
    gen.add_argument("--n", type=int, default=100)
    gen.add_argument("--density", type=float, default=0.05)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="edge-list path; sidecar goes to OUT.json")

    run = sub.add_parser("run", help="run the protocol over many seeds")
    _instance_args(run)
    _protocol_args(run)
    run.add_argument("--expect-ratio", type=float, nargs=2, metavar=("LO", "HI"))

    ver = sub.add_parser("verify", help="run the oracle suites")
    _instance_args(ver)
    _protocol_args(ver)
    ver.add_argument("--verifiers", nargs="+")

    sw = sub.add_parser("sweep", help="communication sweep over graph sizes")
    _protocol_args(sw)
    sw.add_argument("--sizes", type=int, nargs="*", help="vertex counts")
    sw.add_argument("--avg-degree", type=float)
    sw.add_argument("--expect-exponent", type=float, nargs=2, metavar=("LO", "HI"))
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ["seed", "trials", "k", "epsilon", "lam", "beta", "mode", "fallback_edge_threshold",
            "t", "inject_adversarial_h", "workers", "out", "verifiers"]
    over = {k: getattr(args, k, None) for k in keys}
    inst = {}
    if getattr(args, "instance_file", None):
        inst = {"family": "file", "path": args.instance_file}
    elif getattr(args, "family", None):
        inst = {"family": args.family}
        for k in ("m", "n", "density"):
            if getattr(args, k) is not None:
                inst[k] = getattr(args, k)
        if args.instance_seed is not None:
            inst["seed"] = args.instance_seed
    if inst:
        over["instance"] = inst
    return over


def _config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config, _overrides(args))
    if getattr(args, "expect_ratio", None):
        cfg.expect["mean_ratio"] = list(args.expect_ratio)
    if getattr(args, "expect_exponent", None):
        cfg.expect["exponent"] = list(args.expect_exponent)
    if args.command == "sweep":
        if args.sizes is not None:
            cfg.sweep["n"] = args.sizes
        if args.avg_degree is not None:
            cfg.sweep["avg_degree"] = args.avg_degree
    return cfg


def _gen(args: argparse.Namespace) -> int:
    spec = {"family": args.family, "m": args.m, "n": args.n, "density": args.density, "seed": args.seed}
    g, layered = build_instance(spec)
    edgelist.save(g, args.out)
    if layered is not None:
        side = layered.to_dict()
    else:
        side = {"family": args.family, "n": args.n, "density": args.density, "seed": args.seed}
    side.update({"num_vertices": g.num_vertices, "num_edges": g.num_edges})
    with open(args.out + ".json", "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} ({g.num_vertices} vertices, {g.num_edges} edges)")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _gen(args)
        cfg = _config(args)
        if args.command == "run":
            report = run_experiment(cfg)
        elif args.command == "verify":
            report = verify_experiment(cfg)
        else:
            report = sweep_experiment(cfg)
    except EdgeListFormatError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ParameterError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not cfg.out:
        sys.stdout.write(dumps_report(report))
    for a in report.get("assertions", []):
        mark = "PASS" if a["passed"] else "FAIL"
        print(f"{mark} {a['name']} {a.get('detail', '')}".rstrip(), file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
