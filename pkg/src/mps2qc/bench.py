"""Benchmark harness: protocol x target x sweep-budget grids.

Runs every cell of a plan, records infidelity versus circuit depth together
with the optimization traces, and writes JSON reports, persisted circuits, a
merged CSV and plot-ready long-format tables. Cells are independent, so they
can fan out over a process pool; all results are deterministic given the
plan's seeds (wall-clock columns excepted).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .circuit import save_circuit
from .protocols import (
    FLAT_OPTIMIZING_KINDS,
    PROTOCOL_KINDS,
    DecompositionReport,
    ProtocolSpec,
    run_protocol,
)
from .targets import TargetDescriptor, build_target, load_target, save_target

__all__ = [
    "BenchmarkPlan",
    "CostEstimate",
    "default_plan",
    "load_plan",
    "save_plan",
    "estimate_cost",
    "run_benchmark",
    "emit_plot_data",
]

CSV_HEADER = "target,kind,K,T,infidelity,updates,seconds"

# protocols whose per-depth rows come from one run at full depth
SEQUENTIAL_KINDS = ("D_all", "Iter_Di_Oi", "Iter_Ii_Oall", "Iter_Di_Oall")


@dataclass
class BenchmarkPlan:
    targets: list[TargetDescriptor]
    kinds: list[str] = field(default_factory=lambda: list(PROTOCOL_KINDS))
    k_min: int = 1
    k_max: int = 6
    sweep_counts: list[int] = field(default_factory=lambda: [10, 100])
    learning_rate: float = 0.6
    seed: int = 0
    budget_matching: bool = True

    def __post_init__(self):
        if not self.targets or not self.kinds:
            raise ValueError("plan needs at least one target and one protocol kind")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("invalid depth range")
        for kind in self.kinds:
            if kind not in PROTOCOL_KINDS:
                raise ValueError(f"unknown protocol kind {kind!r}")


def default_plan(seed: int = 0) -> BenchmarkPlan:
    """The full benchmark grid: three 12-qubit chi<=64 targets, six
    protocols, depths 1..6, sweep budgets 10 and 100."""
    return BenchmarkPlan(
        targets=[
            TargetDescriptor(kind="heisenberg_gs", rows=4, cols=3, max_chi=64),
            TargetDescriptor(kind="bas_superposition", rows=6, cols=2, max_chi=64),
            TargetDescriptor(kind="random_mps", num_sites=12, max_chi=64, seed=42),
        ],
        seed=seed,
    )


def save_plan(plan: BenchmarkPlan, path) -> None:
    data = asdict(plan)
    data["targets"] = [asdict(t) for t in plan.targets]
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)


def load_plan(path) -> BenchmarkPlan:
    with open(path) as fh:
        data = json.load(fh)
    data["targets"] = [TargetDescriptor(**t) for t in data["targets"]]
    return BenchmarkPlan(**data)


# ----------------------------------------------------------------------
# cost model
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CostEstimate:
    """Abstract operation counts (units of one canonicalization pass)."""

    decomposition_cost: int
    optimization_cost: int
    sequential_optimization_cost: int
    min_layers: int


def estimate_cost(
    num_sites: int,
    max_chi: int,
    num_layers: int,
    sweeps: int,
    budget_match: bool = False,
) -> CostEstimate:
    """Scaling estimates for depth-K decompositions.

    decomposition: N chi^3 K; flat optimization: N chi^3 K T' (T' is the
    budget-matched sweep count when requested); sequential optimization:
    N chi^3 T K(K+1)/2. min_layers = ceil(log2 chi) is the depth below which
    exact encoding of a generic state is impossible.
    """
    if min(num_sites, max_chi, num_layers, sweeps) < 1:
        raise ValueError("all arguments must be positive")
    from .protocols import matched_budget

    base = num_sites * max_chi**3
    t_flat = matched_budget(num_layers, sweeps, num_sites) if budget_match else sweeps
    return CostEstimate(
        decomposition_cost=base * num_layers,
        optimization_cost=base * num_layers * t_flat,
        sequential_optimization_cost=base * sweeps * num_layers * (num_layers + 1) // 2,
        min_layers=math.ceil(math.log2(max_chi)),
    )


# ----------------------------------------------------------------------
# grid execution
# ----------------------------------------------------------------------

def _cell_seed(plan_seed: int, target_idx: int, kind: str, sweeps: int, depth: int) -> int:
    ss = np.random.SeedSequence(
        [plan_seed, target_idx, PROTOCOL_KINDS.index(kind), sweeps, depth]
    )
    return int(ss.generate_state(1)[0])


def _run_cell(args) -> list[dict]:
    """One (target, kind, T) cell; executed in a worker process.

    Returns CSV-ready row dicts and writes the cell's reports and circuits.
    """
    (target_path, target_idx, target_id, kind, sweeps, plan_dict, out_dir) = args
    plan_seed = plan_dict["seed"]
    k_min, k_max = plan_dict["k_min"], plan_dict["k_max"]
    lr = plan_dict["learning_rate"]
    budget = plan_dict["budget_matching"]
    out = Path(out_dir)
    target, _ = load_target(target_path)

    reports: list[DecompositionReport] = []
    if kind in SEQUENTIAL_KINDS:
        spec = ProtocolSpec(
            kind=kind,
            num_layers=k_max,
            sweeps_per_stage=sweeps,
            learning_rate=lr,
            seed=_cell_seed(plan_seed, target_idx, kind, sweeps, 0),
            budget_matching=budget,
        )
        reports.append(run_protocol(target, spec, target_id=target_id, keep_stage_circuits=True))
    else:
        for depth in range(k_min, k_max + 1):
            spec = ProtocolSpec(
                kind=kind,
                num_layers=depth,
                sweeps_per_stage=sweeps,
                learning_rate=lr,
                seed=_cell_seed(plan_seed, target_idx, kind, sweeps, depth),
                budget_matching=budget,
            )
            reports.append(run_protocol(target, spec, target_id=target_id))

    rows = []
    cell_tag = f"{target_id}__{kind}__T{sweeps}"
    merged = {"target_id": target_id, "kind": kind, "T": sweeps, "rows": []}
    for report in reports:
        for i, rec in enumerate(report.rows):
            if not k_min <= rec.depth <= k_max:
                continue
            rows.append(
                {
                    "target": target_id,
                    "kind": kind,
                    "K": rec.depth,
                    "T": sweeps,
                    "infidelity": rec.infidelity,
                    "updates": rec.updates,
                    "seconds": rec.seconds,
                    "sweep_fidelities": rec.sweep_fidelities,
                }
            )
            circ = (
                report.stage_circuits[i]
                if report.stage_circuits is not None
                else report.final_circuit
            )
            save_circuit(circ, out / "circuits" / f"{cell_tag}__K{rec.depth}.npz")
        merged["rows"].extend(report.to_json_dict()["rows"])
    with open(out / "reports" / f"{cell_tag}.json", "w") as fh:
        json.dump(merged, fh, indent=1)
    return rows


def run_benchmark(plan: BenchmarkPlan, out_dir, threads: int = 1) -> list[dict]:
    """Run every (target, kind, T) cell of the plan and write all outputs.

    Produces out_dir/targets/*.npz (+provenance), reports/*.json,
    circuits/*.npz, summary.csv and plots/*.csv. Failed cells are recorded
    in failures.json and do not abort the run. Returns the summary rows.
    """
    out = Path(out_dir)
    for sub in ("targets", "reports", "circuits", "plots"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    failures = []
    target_paths = {}
    for ti, desc in enumerate(plan.targets):
        path = out / "targets" / f"{desc.target_id}.npz"
        try:
            state, prov = build_target(desc)
            save_target(path, state, desc, prov)
            target_paths[ti] = path
        except Exception as exc:  # noqa: BLE001 - record and continue
            failures.append(
                {"cell": [desc.target_id, "*", "*"], "error": f"{type(exc).__name__}: {exc}"}
            )

    plan_dict = {
        "seed": plan.seed,
        "k_min": plan.k_min,
        "k_max": plan.k_max,
        "learning_rate": plan.learning_rate,
        "budget_matching": plan.budget_matching,
    }
    cells = [
        (str(target_paths[ti]), ti, desc.target_id, kind, sweeps, plan_dict, str(out))
        for ti, desc in enumerate(plan.targets)
        if ti in target_paths
        for kind in plan.kinds
        for sweeps in plan.sweep_counts
    ]

    rows: list[dict] = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for cell, result in zip(cells, pool.map(_run_cell_safe, cells)):
                if isinstance(result, str):
                    failures.append({"cell": cell[2:5], "error": result})
                else:
                    rows.extend(result)
    else:
        for cell in cells:
            result = _run_cell_safe(cell)
            if isinstance(result, str):
                failures.append({"cell": cell[2:5], "error": result})
            else:
                rows.extend(result)

    rows.sort(key=lambda r: (r["target"], r["kind"], r["T"], r["K"]))
    with open(out / "summary.csv", "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r['target']},{r['kind']},{r['K']},{r['T']},"
                f"{r['infidelity']:.12g},{r['updates']},{r['seconds']:.6g}\n"
            )
    if failures:
        with open(out / "failures.json", "w") as fh:
            json.dump(failures, fh, indent=2)
    if rows:
        emit_plot_data(rows, out / "plots")
    return rows


def _run_cell_safe(args):
    try:
        return _run_cell(args)
    except Exception as exc:  # noqa: BLE001 - cell failures must not kill the run
        return f"{type(exc).__name__}: {exc}"


def emit_plot_data(rows: list[dict], out_dir) -> list[Path]:
    """Long-format (kind, K, position, infidelity) tables, one per (target, T).

    Optimization traces are interpolated between depth K-1 and K so the last
    trace point lands on the depth-K data point; kinds without sweeps
    contribute single points only.
    """
    if not rows:
        raise ValueError("no benchmark rows to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    groups: dict[tuple[str, int], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["target"], r["T"]), []).append(r)
    for (target, sweeps), group in sorted(groups.items()):
        path = out / f"{target}__T{sweeps}.csv"
        with open(path, "w") as fh:
            fh.write("# infidelity versus depth; plot with a log-scale infidelity axis\n")
            fh.write("kind,K,position,infidelity\n")
            for r in sorted(group, key=lambda x: (x["kind"], x["K"])):
                trace = r.get("sweep_fidelities") or []
                for i, f in enumerate(trace):
                    pos = r["K"] - 1 + (i + 1) / len(trace)
                    fh.write(f"{r['kind']},{r['K']},{pos:.6g},{1.0 - f:.12g}\n")
                fh.write(
                    f"{r['kind']},{r['K']},{r['K']},{r['infidelity']:.12g}\n"
                )
        paths.append(path)
    return paths
