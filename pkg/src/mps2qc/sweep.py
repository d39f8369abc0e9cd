"""Environment-tensor sweep optimization of staircase circuits.

A forward sweep visits every gate once, in the order the circuit applies
them to the ket. For gate m the 4x4 environment tensor is the partial trace,
over all spectator qubits, of |R_m><L_m| with

    |L_m> = (gates 1..m-1 applied to |0...0>)
    |R_m> = (inverses of gates m+1..M applied to the target state)

so that Tr(F_m U_m^dag) equals the circuit-target overlap for any gate U_m
placed at slot m. The closest unitary to F_m is the locally optimal
replacement; a learning rate r blends it with the current gate through a
fractional unitary power. Both cached sides advance by exactly one gate
application per step.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .circuit import StaircaseCircuit
from .linalg import DEFAULT_TOLS, closest_unitary, fractional_unitary_power
from .mps import MPS, fidelity, inner_product, zero_state

logger = logging.getLogger(__name__)

__all__ = [
    "SweepConfig",
    "FidelityTrace",
    "EnvironmentCache",
    "environment_tensor",
    "local_update",
    "sweep_optimize",
]

REUNITARIZE_TOL = 1e-9


@dataclass(frozen=True)
class SweepConfig:
    """Sweep budget and update strength.

    max_sweeps: number of forward sweeps (None = run until target_fidelity).
    target_fidelity: early-stop threshold checked after each full sweep;
        the default is effectively off.
    learning_rate: fractional step r in [0, 1] toward the locally optimal
        gate; r = 1 is the full polar update.
    """

    max_sweeps: int | None
    target_fidelity: float = 1.0 - 1e-12
    learning_rate: float = 0.6

    def __post_init__(self):
        if self.max_sweeps is None and self.target_fidelity is None:
            raise ValueError("need max_sweeps, target_fidelity, or both")
        if self.max_sweeps is not None and self.max_sweeps < 0:
            raise ValueError("max_sweeps must be non-negative")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in [0, 1]")


@dataclass
class FidelityTrace:
    """Per-update and per-sweep fidelity record of one optimization run."""

    rows: list[tuple[int, int, float]] = field(default_factory=list)  # (sweep, m, f)
    sweep_fidelities: list[float] = field(default_factory=list)
    sweep_seconds: list[float] = field(default_factory=list)
    update_count: int = 0
    reunitarizations: int = 0
    learning_rate_decreases: int = 0

    def per_update_fidelities(self) -> list[float]:
        return [f for (_, _, f) in self.rows]

    def final_fidelity(self) -> float:
        return self.sweep_fidelities[-1] if self.sweep_fidelities else float("nan")

    def to_csv(self, path) -> None:
        """Rows {sweep, gate_index, fidelity, wall_time}; the wall time is the
        enclosing sweep's duration, repeated on each of its rows."""
        with open(path, "w") as fh:
            fh.write("sweep,gate_index,fidelity,wall_time\n")
            for sweep, m, f in self.rows:
                wall = self.sweep_seconds[sweep - 1] if sweep <= len(self.sweep_seconds) else float("nan")
                fh.write(f"{sweep},{m},{f:.12g},{wall:.6g}\n")


def local_update(
    gate: np.ndarray, env: np.ndarray, r: float, tols=DEFAULT_TOLS
) -> np.ndarray:
    """Learning-rate update of one gate from its environment tensor.

    Returns gate @ (gate^dag @ closest_unitary(env))**r: the full polar
    update at r = 1, the unchanged gate at r = 0.
    """
    best = closest_unitary(env, tols)
    if r >= 1.0:
        return best
    if r <= 0.0:
        return np.asarray(gate, dtype=complex).copy()
    step = fractional_unitary_power(gate.conj().T @ best, r, tols)
    return gate @ step


def _transfer_left(env: np.ndarray, rcore: np.ndarray, lcore: np.ndarray) -> np.ndarray:
    t = np.tensordot(env, rcore, axes=(0, 0))  # (l_bond, p, r_right)
    return np.tensordot(lcore.conj(), t, axes=([0, 1], [0, 1])).T  # (r_right, l_right)


def _transfer_right(env: np.ndarray, rcore: np.ndarray, lcore: np.ndarray) -> np.ndarray:
    t = np.tensordot(rcore, env, axes=(2, 0))  # (r_left, p, l_bond)
    return np.tensordot(t, lcore.conj(), axes=([1, 2], [1, 2]))  # (r_left, l_left)


def _environment_from_states(right: MPS, left: MPS, site: int) -> np.ndarray:
    """Partial trace of |right><left| over all qubits except (site, site+1)."""
    n = right.num_sites
    env_l = np.ones((1, 1), dtype=complex)
    for i in range(site):
        env_l = _transfer_left(env_l, right.cores[i], left.cores[i])
    env_r = np.ones((1, 1), dtype=complex)
    for i in range(n - 1, site + 1, -1):
        env_r = _transfer_right(env_r, right.cores[i], left.cores[i])
    t = np.tensordot(env_l, right.cores[site], axes=(0, 0))  # (b, s1, c)
    t = np.tensordot(t, right.cores[site + 1], axes=(2, 0))  # (b, s1, s2, c2)
    t = np.tensordot(t, left.cores[site].conj(), axes=(0, 0))  # (s1, s2, c2, t1, d)
    t = np.tensordot(t, left.cores[site + 1].conj(), axes=(4, 0))  # (s1,s2,c2,t1,t2,d2)
    f = np.tensordot(t, env_r, axes=([2, 5], [0, 1]))  # (s1, s2, t1, t2)
    return f.reshape(4, 4)


class EnvironmentCache:
    """Incrementally maintained boundary states for one forward sweep.

    left_state tracks the gates already visited applied to |0...0>;
    right_state tracks the not-yet-visited gates' inverses applied to the
    target. Advancing the cursor costs one gate application on each side.
    """

    def __init__(
        self,
        circuit: StaircaseCircuit,
        target: MPS,
        order: list[tuple[int, int]],
        max_chi: int | None = None,
    ):
        self.circuit = circuit
        self.target = target
        self.order = order
        self.max_chi = max_chi
        self.cursor = 0
        self.left_state = zero_state(circuit.num_sites)
        right = target
        for li, s in reversed(order[1:]):
            right = right.apply_two_qubit_gate(
                circuit.layers[li].gates[s], s, adjoint=True, max_chi=max_chi
            )
        self.right_state = right

    def gate_site(self, m: int) -> int:
        return self.order[m][1]

    def current_gate(self) -> np.ndarray:
        li, s = self.order[self.cursor]
        return self.circuit.layers[li].gates[s]

    def environment(self, m: int) -> np.ndarray:
        if m != self.cursor:
            raise RuntimeError(f"cache cursor at {self.cursor}, environment requested for {m}")
        return _environment_from_states(self.right_state, self.left_state, self.gate_site(m))

    def advance(self) -> None:
        """Move to the next gate: fold the (possibly updated) current gate
        into the left state and peel the next gate's inverse off the right."""
        li, s = self.order[self.cursor]
        self.left_state = self.left_state.apply_two_qubit_gate(
            self.circuit.layers[li].gates[s], s, max_chi=self.max_chi
        )
        if self.cursor + 1 < len(self.order):
            lj, sj = self.order[self.cursor + 1]
            self.right_state = self.right_state.apply_two_qubit_gate(
                self.circuit.layers[lj].gates[sj], sj, max_chi=self.max_chi
            )
        self.cursor += 1


def environment_tensor(cache: EnvironmentCache, m: int) -> np.ndarray:
    """The 4x4 environment of gate m; |Tr(F U_m^dag)| is the circuit fidelity."""
    return cache.environment(m)


def _fresh_environment(
    circuit: StaircaseCircuit,
    target: MPS,
    order: list[tuple[int, int]],
    m: int,
    max_chi: int | None = None,
) -> np.ndarray:
    """Cache-free recomputation of the environment of gate m (for self-checks)."""
    left = zero_state(circuit.num_sites)
    for li, s in order[:m]:
        left = left.apply_two_qubit_gate(circuit.layers[li].gates[s], s, max_chi=max_chi)
    right = target
    for li, s in reversed(order[m + 1:]):
        right = right.apply_two_qubit_gate(
            circuit.layers[li].gates[s], s, adjoint=True, max_chi=max_chi
        )
    return _environment_from_states(right, left, order[m][1])


def sweep_optimize(
    circuit: StaircaseCircuit,
    target: MPS,
    cfg: SweepConfig,
    scope: set[int] | None = None,
    max_chi: int | None = None,
    coherence_probes: int = 0,
) -> tuple[StaircaseCircuit, FidelityTrace]:
    """Optimize circuit gates by forward sweeps of environment updates.

    scope restricts updates to the gates of the given layer positions
    (0-based indices into circuit.layers); all gates still participate in
    the contractions. The input circuit is not modified. With
    coherence_probes > 0, that many (sweep, gate) positions are re-derived
    without the cache and compared, as a numerical self-check.

    Returns the optimized circuit and the fidelity trace; with r = 1 the
    per-update fidelities are non-decreasing (up to roundoff) because each
    polar update is locally optimal.
    """
    if circuit.num_sites != target.num_sites:
        raise ValueError(
            f"circuit acts on {circuit.num_sites} sites, target has {target.num_sites}"
        )
    circuit = circuit.copy()
    trace = FidelityTrace()
    order = list(circuit.gate_order())
    if not order:
        return circuit, trace
    if scope is not None:
        scope = set(scope)
        if not scope.issubset(range(circuit.num_layers)):
            raise ValueError(f"scope {scope} outside layer range")

    probe_points: set[tuple[int, int]] = set()
    if coherence_probes > 0 and cfg.max_sweeps:
        rng = np.random.default_rng(987654321 + len(order))
        sweeps = rng.integers(1, cfg.max_sweeps + 1, size=coherence_probes)
        gates = rng.integers(0, len(order), size=coherence_probes)
        probe_points = set(zip(sweeps.tolist(), gates.tolist()))

    sweep = 0
    while cfg.max_sweeps is None or sweep < cfg.max_sweeps:
        sweep += 1
        t0 = time.perf_counter()
        cache = EnvironmentCache(circuit, target, order, max_chi=max_chi)
        for m, (li, s) in enumerate(order):
            if scope is None or li in scope:
                env = cache.environment(m)
                if (sweep, m) in probe_points:
                    ref = _fresh_environment(circuit, target, order, m, max_chi=max_chi)
                    dev = np.max(np.abs(env - ref))
                    if dev > 1e-10:
                        raise RuntimeError(
                            f"environment cache incoherence at sweep {sweep}, "
                            f"gate {m}: deviation {dev:.3e}"
                        )
                gate = circuit.layers[li].gates[s]
                f_before = abs(np.vdot(gate, env))
                new_gate = local_update(gate, env, cfg.learning_rate)
                dev = np.max(np.abs(new_gate.conj().T @ new_gate - np.eye(4)))
                if dev > REUNITARIZE_TOL:
                    new_gate = closest_unitary(new_gate)
                    trace.reunitarizations += 1
                f_after = abs(np.vdot(new_gate, env))
                if f_after < f_before - 1e-12:
                    trace.learning_rate_decreases += 1
                circuit.layers[li].gates[s] = new_gate
                trace.update_count += 1
                trace.rows.append((sweep, m + 1, float(f_after)))
            cache.advance()
        # after the last advance the left state is the full circuit state
        f_sweep = float(abs(inner_product(cache.left_state, target)))
        trace.sweep_fidelities.append(f_sweep)
        trace.sweep_seconds.append(time.perf_counter() - t0)
        if cfg.target_fidelity is not None and f_sweep >= cfg.target_fidelity:
            break
    return circuit, trace
