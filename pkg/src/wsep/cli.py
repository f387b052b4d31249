"""``wsep`` command line.  Exit status: 0 success, 1 target not met, 2 usage error."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .campaign import ORACLE_LIMIT, campaign, parse_config, write_outputs
from .emo import ALGORITHMS, FITNESSES, StopSpec, approx_event, run
from .generators import ConfigError
from .graph import GraphFormatError, load_graph
from .lp import lp_dump, lp_value
from .reducible import (
    ReduciblePair,
    crown_reduce,
    degree_reduce,
    kernel_size_check,
    packing_after_deletion,
    packing_from_pair,
    reducible_sequence,
    verify_reducible_pair,
)
from .separator import Instance, SearchPoint, brute_force_opt, is_w_separator
from .verify import SCOPES, verify_suite


class UsageError(Exception):
    pass


def _w(text: str) -> int:
    try:
        w = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"W must be an integer, got {text!r}") from None
    if w < 1:
        raise argparse.ArgumentTypeError(f"W must be >= 1, got {w}")
    return w


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("value must be non-negative")
    return v


def _fraction(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("epsilon must be non-negative")
    return v


def _vertices(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _instance(args) -> Instance:
    try:
        return Instance(load_graph(Path(args.graph).read_text()), args.w)
    except OSError as exc:
        raise UsageError(f"cannot read graph file: {exc}") from None
    except GraphFormatError as exc:
        raise UsageError(str(exc)) from None


def _emit(record: dict, out: str | None) -> None:
    text = json.dumps(record, indent=2)
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def _point_record(inst: Instance, x: SearchPoint) -> dict:
    return {
        "separator": sorted(x.ones),
        "size": len(x.ones),
        "feasible": is_w_separator(inst, x),
        "witness": str(x),
    }


def cmd_solve(args) -> int:
    inst = _instance(args)
    record: dict = {"n": inst.n, "w": inst.w, "mode": args.mode}
    if args.mode == "oracle":
        res = brute_force_opt(inst)
        record.update(_point_record(inst, res.witness), opt=res.opt)
        _emit(record, args.out)
        return 0
    opt = brute_force_opt(inst).opt if inst.n <= ORACLE_LIMIT else None
    until: tuple[str, ...] = ()
    ratios = ()
    if args.epsilon is not None:
        ratio = 1 + args.epsilon * (Fraction(3, 2) * inst.w - Fraction(1, 2))
        ratios = (ratio,)
        if opt is not None:
            until = (approx_event(ratio),)
        record["target_ratio"] = str(ratio)
    elif opt is not None:
        until = ("optimum",)
    trace = run(inst, args.fitness, args.mode, args.seed, StopSpec(args.budget, until), opt=opt, approx=ratios)
    record.update(fitness=args.fitness, seed=args.seed, iterations=trace.iterations, opt=opt)
    best = trace.best_feasible()
    if best is not None:
        record.update(_point_record(inst, best))
    reached = all(trace.hit(e) is not None for e in until) if until else best is not None
    record["target_met"] = reached
    _emit(record, args.out)
    return 0 if reached else 1


def cmd_lp(args) -> int:
    inst = _instance(args)
    restrict = _vertices(args.restrict) if args.restrict else None
    if restrict is not None and any(not 0 <= v < inst.n for v in restrict):
        raise UsageError("--restrict names a vertex outside the graph")
    if args.dump:
        print(lp_dump(inst, restrict))
        return 0
    res = lp_value(inst, restrict)
    _emit(
        {
            "value": str(res.value),
            "constraints": res.constraint_count,
            "solution": {str(v): str(y) for v, y in sorted(res.solution.values.items())},
        },
        args.out,
    )
    return 0


def cmd_reduce(args) -> int:
    inst = _instance(args)
    deg = degree_reduce(inst, args.k)
    record: dict = {
        "degree_rule": {
            "forced": sorted(deg.forced),
            "k_residual": deg.k,
            "no_instance": deg.no_instance,
        }
    }
    if deg.no_instance:
        _emit(record, args.out)
        return 0
    record["degree_rule"]["kernel_bound_ok"] = kernel_size_check(deg.instance, deg.k)
    current, k, labels = deg.instance, deg.k, deg.labels
    pairs = []
    # one pair at a time: ids shift after every reduction
    while True:
        seq = reducible_sequence(current)
        if not seq:
            break
        pair = seq[0]
        red = crown_reduce(current, k, pair)
        pairs.append({"original_ids": {
            "head": sorted(labels[v] for v in pair.head),
            "crown": sorted(labels[v] for v in pair.crown),
        }, **pair.to_json()})
        current, k, labels = red.instance, red.k, tuple(labels[v] for v in red.labels)
    record["crown_rule"] = {
        "pairs": pairs,
        "k_residual": k,
        "no_instance": k < 0,
        "remaining_vertices": list(labels),
    }
    _emit(record, args.out)
    return 0


def cmd_pack(args) -> int:
    inst = _instance(args)
    try:
        data = json.loads(Path(args.pair).read_text())
        given = ReduciblePair.from_json(data)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read pair certificate: {exc}") from None
    pair = verify_reducible_pair(inst, given.head, given.crown)
    if pair is None:
        print("pair does not verify in this graph", file=sys.stderr)
        return 1
    try:
        if args.delete:
            packing = packing_after_deletion(inst, pair, _vertices(args.delete))
        else:
            packing = packing_from_pair(inst, pair)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit({"size": len(packing), "parts": [sorted(p) for p in packing.parts]}, args.out)
    return 0


def cmd_evolve(args) -> int:
    inst = _instance(args)
    opt = brute_force_opt(inst).opt if inst.n <= ORACLE_LIMIT else None
    heads = None
    if "heads_point" in args.until:
        heads = set().union(*(p.head for p in reducible_sequence(inst)))
    try:
        trace = run(inst, args.fitness, args.algorithm, args.seed, StopSpec(args.budget, tuple(args.until)),
                    opt=opt, heads=heads, track=args.track)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    record = trace.to_json()
    record["opt"] = opt
    _emit(record, args.out)
    return 0 if all(trace.hit(e) is not None for e in args.until) else 1


def cmd_bench(args) -> int:
    try:
        config = parse_config(Path(args.config).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    result = campaign(config, workers=args.workers)
    write_outputs(config, result, Path(args.config).resolve().parent)
    if not config.rows_path and not config.json_path:
        print(result.to_json())
    else:
        for a in result.aggregates:
            print(f"{dict(a.group[1])} {a.group[2]}/{a.group[3]} {a.event}: "
                  f"{a.hits}/{a.trials} hit, median {a.median}")
    return 0 if all(a.hits == a.trials for a in result.aggregates) else 1


def cmd_verify(args) -> int:
    try:
        report = verify_suite(args.scope, args.size_limit, labeled=args.labeled, ws=args.w)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(report.format())
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsep", description="W-separator solvers, reductions and experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_args(p):
        p.add_argument("--graph", required=True, help="edge-list file: 'n m' header, then m lines 'u v'")
        p.add_argument("--w", type=_w, required=True)
        p.add_argument("--out", help="also write the JSON record here")

    p = sub.add_parser("solve", help="exact or evolutionary W-separator")
    graph_args(p)
    p.add_argument("--mode", choices=("oracle",) + ALGORITHMS, default="oracle")
    p.add_argument("--fitness", choices=FITNESSES, default="f2")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--budget", type=_nonneg, default=1_000_000)
    p.add_argument("--epsilon", type=_fraction)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lp", help="exact fractional W-separator")
    graph_args(p)
    p.add_argument("--restrict", help="comma-separated vertex subset")
    p.add_argument("--dump", action="store_true", help="print the full audit record")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("reduce", help="degree rule followed by crown reductions")
    graph_args(p)
    p.add_argument("--k", type=_nonneg, required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("pack", help="packing from a reducible pair certificate")
    graph_args(p)
    p.add_argument("--pair", required=True, help="JSON pair certificate (as printed by reduce)")
    p.add_argument("--delete", help="comma-separated vertices S to delete first")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("evolve", help="single traced run")
    graph_args(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="semo-alt")
    p.add_argument("--fitness", choices=FITNESSES, default="f2")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--budget", type=_nonneg, default=100_000)
    p.add_argument("--until", nargs="*", default=[])
    p.add_argument("--track", nargs="*", default=[])
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("bench", help="run a campaign from an INI config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="exhaustive property suites")
    p.add_argument("--scope", choices=SCOPES, default="all")
    p.add_argument("--size-limit", type=int, default=5)
    p.add_argument("--labeled", action="store_true", help="all labeled graphs instead of one per isomorphism class")
    p.add_argument("--w", type=lambda s: [_w(t) for t in s.split(",")], default=[1, 2])
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"wsep {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
