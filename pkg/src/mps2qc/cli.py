"""Command-line interface: target generation, decomposition, benchmarks."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    BenchmarkPlan,
    default_plan,
    estimate_cost,
    load_plan,
    run_benchmark,
    save_plan,
)
from .circuit import export_gate_list, save_circuit
from .protocols import PROTOCOL_KINDS, ProtocolSpec, run_protocol
from .targets import TargetDescriptor, build_target, load_target, save_target


def _add_targets_parser(sub):
    p = sub.add_parser("targets", help="generate and persist benchmark target states")
    p.add_argument("--which", default="all",
                   choices=["all", "heisenberg", "bas", "random"])
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--num-sites", type=int, default=12)
    p.add_argument("--max-chi", type=int, default=64)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output directory")


def _add_decompose_parser(sub):
    p = sub.add_parser("decompose", help="decompose one target MPS file into a circuit")
    p.add_argument("--target", required=True, help="MPS file (.npz)")
    p.add_argument("--protocol", required=True, choices=list(PROTOCOL_KINDS))
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--sweeps", type=int, default=100)
    p.add_argument("--learning-rate", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-match", action="store_true")
    p.add_argument("--out", required=True, help="circuit file to write (.npz)")
    p.add_argument("--gate-list", default=None, help="also export a text gate list")
    p.add_argument("--report", default=None, help="also write the JSON report")


def _add_bench_parser(sub):
    p = sub.add_parser("bench", help="run a benchmark plan")
    p.add_argument("--plan", default=None, help="plan JSON (omit for the default grid)")
    p.add_argument("--write-default-plan", default=None, metavar="PATH",
                   help="write the default plan JSON and exit")
    p.add_argument("--seed", type=int, default=0, help="seed for the default plan")
    p.add_argument("--out", default="bench_out", help="output directory")
    p.add_argument("--threads", type=int, default=1)


def _add_estimate_parser(sub):
    p = sub.add_parser("estimate", help="print cost scaling estimates")
    p.add_argument("--num-sites", type=int, required=True)
    p.add_argument("--max-chi", type=int, required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--sweeps", type=int, required=True)
    p.add_argument("--budget-match", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mps2qc",
        description="Decompose matrix product states into shallow staircase circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_targets_parser(sub)
    _add_decompose_parser(sub)
    _add_bench_parser(sub)
    _add_estimate_parser(sub)
    return parser


def _cmd_targets(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    descs = []
    if args.which in ("all", "heisenberg"):
        descs.append(TargetDescriptor(
            kind="heisenberg_gs",
            rows=args.rows or 4, cols=args.cols or 3, max_chi=args.max_chi))
    if args.which in ("all", "bas"):
        descs.append(TargetDescriptor(
            kind="bas_superposition",
            rows=args.rows or 6, cols=args.cols or 2, max_chi=args.max_chi))
    if args.which in ("all", "random"):
        descs.append(TargetDescriptor(
            kind="random_mps",
            num_sites=args.num_sites, max_chi=args.max_chi, seed=args.seed))
    for desc in descs:
        state, prov = build_target(desc)
        path = out / f"{desc.target_id}.npz"
        save_target(path, state, desc, prov)
        print(f"wrote {path} (max bond {state.max_bond})")
    return 0


def _cmd_decompose(args) -> int:
    target, meta = load_target(args.target)
    spec = ProtocolSpec(
        kind=args.protocol,
        num_layers=args.layers,
        sweeps_per_stage=args.sweeps,
        learning_rate=args.learning_rate,
        seed=args.seed,
        budget_matching=args.budget_match,
    )
    target_id = meta.get("target_id", Path(args.target).stem)
    report = run_protocol(target, spec, target_id=target_id)
    save_circuit(report.final_circuit, args.out)
    final = report.rows[-1]
    print(f"wrote {args.out}: K={final.depth} infidelity={final.infidelity:.6g} "
          f"updates={final.updates}")
    if args.gate_list:
        export_gate_list(report.final_circuit, args.gate_list)
        print(f"wrote {args.gate_list}")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=1)
        print(f"wrote {args.report}")
    return 0


def _cmd_bench(args) -> int:
    if args.write_default_plan:
        save_plan(default_plan(seed=args.seed), args.write_default_plan)
        print(f"wrote {args.write_default_plan}")
        return 0
    plan: BenchmarkPlan = load_plan(args.plan) if args.plan else default_plan(seed=args.seed)
    rows = run_benchmark(plan, args.out, threads=args.threads)
    print(f"wrote {Path(args.out) / 'summary.csv'} ({len(rows)} rows)")
    return 0


def _cmd_estimate(args) -> int:
    est = estimate_cost(
        args.num_sites, args.max_chi, args.layers, args.sweeps,
        budget_match=args.budget_match,
    )
    print(f"decomposition cost      ~ {est.decomposition_cost:.3e}")
    print(f"flat optimization cost  ~ {est.optimization_cost:.3e}")
    print(f"sequential optimization ~ {est.sequential_optimization_cost:.3e}")
    print(f"minimum depth for exact encoding ~ {est.min_layers}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "targets": _cmd_targets,
        "decompose": _cmd_decompose,
        "bench": _cmd_bench,
        "estimate": _cmd_estimate,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
