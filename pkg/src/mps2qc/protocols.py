"""Decomposition protocols combining analytic disentangling and sweeps.

Six protocols are supported, named by their building blocks: "D" for the
analytic disentangling step, "I" for growth by identity layers, "O" for
sweep optimization; the subscript "i" means only the newest layer is built
or optimized at a stage, "all" means the full depth. The Iter[...] kinds
grow the circuit one layer per stage and reuse the previous stage's result.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .analytic import analytic_decompose, disentangle_step
from .circuit import (
    LinearLayer,
    StaircaseCircuit,
    apply_layer,
    circuit_fidelity,
    identity_layer,
    random_layer,
)
from .mps import MPS, fidelity, zero_state
from .sweep import SweepConfig, sweep_optimize

__all__ = [
    "PROTOCOL_KINDS",
    "ProtocolSpec",
    "StageRecord",
    "DecompositionReport",
    "matched_budget",
    "run_protocol",
]

PROTOCOL_KINDS = (
    "D_all",
    "Iter_Di_Oi",
    "O_all",
    "Dall_Oall",
    "Iter_Ii_Oall",
    "Iter_Di_Oall",
)

FLAT_OPTIMIZING_KINDS = ("O_all", "Dall_Oall")

CLEANUP_SV_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ProtocolSpec:
    """Parameters of one protocol run."""

    kind: str
    num_layers: int
    sweeps_per_stage: int
    learning_rate: float = 0.6
    seed: int = 0
    budget_matching: bool = False

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.num_layers < 1:
            raise ValueError("num_layers must be at least 1")
        if self.sweeps_per_stage < 0:
            raise ValueError("sweeps_per_stage must be non-negative")


@dataclass
class StageRecord:
    """State of the decomposition after reaching a given depth."""

    depth: int
    fidelity: float
    infidelity: float
    updates: int  # cumulative unitary updates so far
    seconds: float  # cumulative wall time so far
    sweep_fidelities: list[float] = field(default_factory=list)


@dataclass
class DecompositionReport:
    target_id: str
    kind: str
    num_layers: int
    sweeps_per_stage: int
    learning_rate: float
    seed: int
    budget_matching: bool
    rows: list[StageRecord] = field(default_factory=list)
    reunitarizations: int = 0
    learning_rate_decreases: int = 0
    final_circuit: StaircaseCircuit | None = None
    stage_circuits: list[StaircaseCircuit] | None = None

    def to_json_dict(self) -> dict:
        return {
            "target_id": self.target_id,
            "kind": self.kind,
            "K": self.num_layers,
            "T": self.sweeps_per_stage,
            "r": self.learning_rate,
            "seed": self.seed,
            "budget_matching": self.budget_matching,
            "reunitarizations": self.reunitarizations,
            "learning_rate_decreases": self.learning_rate_decreases,
            "rows": [
                {
                    "k": row.depth,
                    "fidelity": row.fidelity,
                    "infidelity": row.infidelity,
                    "updates": row.updates,
                    "seconds": row.seconds,
                    "sweep_fidelities": row.sweep_fidelities,
                }
                for row in self.rows
            ],
        }


def matched_budget(num_layers: int, sweeps: int, num_sites: int) -> int:
    """Sweep count for flat protocols matching an Iter protocol's total budget.

    An Iter protocol reaching depth K spends T * K(K+1)/2 layer-sweeps; a
    flat protocol at depth K spends T' * K. Equating gives
    T' = ceil(T (K+1) / 2). Layer-sweeps and gate-updates differ only by the
    fixed factor (N-1) on this topology, so the result does not depend on
    num_sites (the argument is kept for interface symmetry).
    """
    if num_layers < 1 or sweeps < 1:
        raise ValueError("num_layers and sweeps must be at least 1")
    del num_sites
    return -(-sweeps * (num_layers + 1) // 2)


def _stage_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


def run_protocol(
    target: MPS,
    spec: ProtocolSpec,
    target_id: str = "target",
    keep_stage_circuits: bool = False,
) -> DecompositionReport:
    """Execute one decomposition protocol against a normalized target MPS.

    Returns a report with one row per reached depth (a single row at depth K
    for the flat kinds), cumulative update and wall-time counters, and the
    final circuit. Identical specs produce identical numeric results.
    """
    if abs(target.norm() - 1.0) > 1e-10:
        raise ValueError("target state must be normalized")
    n = target.num_sites
    report = DecompositionReport(
        target_id=target_id,
        kind=spec.kind,
        num_layers=spec.num_layers,
        sweeps_per_stage=spec.sweeps_per_stage,
        learning_rate=spec.learning_rate,
        seed=spec.seed,
        budget_matching=spec.budget_matching,
        stage_circuits=[] if keep_stage_circuits else None,
    )
    t0 = time.perf_counter()
    updates = 0

    def record(depth: int, f: float, sweep_fids: list[float], circ: StaircaseCircuit):
        report.rows.append(
            StageRecord(
                depth=depth,
                fidelity=f,
                infidelity=1.0 - f,
                updates=updates,
                seconds=time.perf_counter() - t0,
                sweep_fidelities=sweep_fids,
            )
        )
        if keep_stage_circuits:
            report.stage_circuits.append(circ.copy())

    def absorb(trace):
        nonlocal updates
        updates += trace.update_count
        report.reunitarizations += trace.reunitarizations
        report.learning_rate_decreases += trace.learning_rate_decreases

    def optimized_fidelity(circ, trace) -> float:
        # a zero-sweep run leaves no trace; fall back to direct evaluation
        if trace.sweep_fidelities:
            return trace.final_fidelity()
        return circuit_fidelity(circ, target)

    sweeps = spec.sweeps_per_stage
    if spec.budget_matching and spec.kind in FLAT_OPTIMIZING_KINDS and sweeps >= 1:
        sweeps = matched_budget(spec.num_layers, sweeps, n)

    if spec.kind == "D_all":
        circ, trace = analytic_decompose(target, max_layers=spec.num_layers)
        partial = StaircaseCircuit(n)
        for rec in trace.records:
            partial.append_layer(circ.layers[rec.iteration - 1])
            record(rec.iteration, rec.fidelity_to_zero, [], partial)
        report.final_circuit = circ

    elif spec.kind == "Iter_Di_Oi":
        circ = StaircaseCircuit(n)
        residual = target
        cfg = SweepConfig(max_sweeps=sweeps, learning_rate=spec.learning_rate)
        for k in range(1, spec.num_layers + 1):
            layer = disentangle_step(residual).layer
            circ.append_layer(layer)
            circ, trace = sweep_optimize(circ, target, cfg, scope={k - 1})
            absorb(trace)
            residual = apply_layer(residual, circ.layers[k - 1], adjoint=True)
            residual = residual.truncate(None, sv_threshold=CLEANUP_SV_THRESHOLD)
            f = fidelity(zero_state(n), residual)
            record(k, f, trace.sweep_fidelities, circ)
        report.final_circuit = circ

    elif spec.kind == "O_all":
        circ = StaircaseCircuit(n)
        for child in _stage_seeds(spec.seed, spec.num_layers):
            circ.append_layer(random_layer(n, child))
        cfg = SweepConfig(max_sweeps=sweeps, learning_rate=spec.learning_rate)
        circ, trace = sweep_optimize(circ, target, cfg)
        absorb(trace)
        record(spec.num_layers, optimized_fidelity(circ, trace), trace.sweep_fidelities, circ)
        report.final_circuit = circ

    elif spec.kind == "Dall_Oall":
        circ, _ = analytic_decompose(target, max_layers=spec.num_layers)
        cfg = SweepConfig(max_sweeps=sweeps, learning_rate=spec.learning_rate)
        circ, trace = sweep_optimize(circ, target, cfg)
        absorb(trace)
        record(spec.num_layers, optimized_fidelity(circ, trace), trace.sweep_fidelities, circ)
        report.final_circuit = circ

    elif spec.kind in ("Iter_Ii_Oall", "Iter_Di_Oall"):
        circ = StaircaseCircuit(n)
        cfg = SweepConfig(max_sweeps=sweeps, learning_rate=spec.learning_rate)
        residual = target
        for k in range(1, spec.num_layers + 1):
            if spec.kind == "Iter_Ii_Oall":
                layer: LinearLayer = identity_layer(n)
            else:
                layer = disentangle_step(residual).layer
            circ.append_layer(layer)
            circ, trace = sweep_optimize(circ, target, cfg)
            absorb(trace)
            record(k, optimized_fidelity(circ, trace), trace.sweep_fidelities, circ)
            if spec.kind == "Iter_Di_Oall" and k < spec.num_layers:
                # optimization moved every gate, so the residual is rebuilt
                # from scratch by inverting the whole current circuit
                residual = target
                for la in circ.layers:
                    residual = apply_layer(residual, la, adjoint=True)
                residual = residual.truncate(None, sv_threshold=CLEANUP_SV_THRESHOLD)
        report.final_circuit = circ

    else:  # pragma: no cover - guarded by ProtocolSpec
        raise ValueError(f"unknown protocol kind {spec.kind!r}")

    return report
