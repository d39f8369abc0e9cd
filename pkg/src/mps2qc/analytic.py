"""Analytic decomposition of an MPS into staircase layers by disentangling.

Each iteration truncates the current state to bond dimension 2, converts the
truncated state exactly into one staircase layer, and applies that layer's
inverse to the current state. The overlap with |0...0> grows toward 1 while
layers accumulate; layer k of the resulting circuit is the one extracted at
iteration k, and the circuit applies the highest-numbered layer first.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

from .circuit import LinearLayer, StaircaseCircuit, apply_layer
from .linalg import complete_isometry
from .mps import MPS, fidelity, zero_state

__all__ = [
    "DisentangleTrace",
    "DisentangleStep",
    "chi2_mps_to_layer",
    "disentangle_step",
    "analytic_decompose",
]

CLEANUP_SV_THRESHOLD = 1e-12


@dataclass
class DisentangleRecord:
    iteration: int
    fidelity_to_zero: float
    bond_dims: list[int]
    truncation_fidelity: float


@dataclass
class DisentangleTrace:
    records: list[DisentangleRecord] = field(default_factory=list)

    def fidelities(self) -> list[float]:
        return [rec.fidelity_to_zero for rec in self.records]


class DisentangleStep(NamedTuple):
    layer: LinearLayer
    state: MPS
    truncation_fidelity: float


def _pad_bonds_to_two(state: MPS) -> MPS:
    """Zero-pad every interior bond to dimension 2."""
    n = state.num_sites
    cores = []
    for s, core in enumerate(state.cores):
        cl, p, cr = core.shape
        tl = 1 if s == 0 else 2
        tr = 1 if s == n - 1 else 2
        if (cl, cr) == (tl, tr):
            cores.append(core)
        else:
            padded = np.zeros((tl, p, tr), dtype=complex)
            padded[:cl, :, :cr] = core
            cores.append(padded)
    return MPS(cores, center=None, validate=False)


def chi2_mps_to_layer(phi: MPS) -> LinearLayer:
    """Convert a normalized MPS with all bonds <= 2 into one exact layer.

    Interior bonds of dimension 1 are zero-padded to 2 and the state is
    re-canonicalized, after which every core from site 2 onward reshapes to a
    (4, chi_right) isometry whose completion is the gate on pair
    (site-1, site). The first gate contracts the site-0 core (a 2x2 unitary
    after padding) with the completed site-1 isometry. Applying the layer to
    |0...0> reproduces phi exactly.
    """
    n = phi.num_sites
    if n < 2:
        raise ValueError("need at least 2 sites to build a layer")
    if any(chi > 2 for chi in phi.bond_dims):
        raise ValueError(f"all bonds must be <= 2, got {phi.bond_dims}")
    st = _pad_bonds_to_two(phi).left_canonicalize().normalize()
    gates: list[np.ndarray | None] = [None] * (n - 1)
    for s in range(2, n):
        cl, p, cr = st.cores[s].shape
        q = st.cores[s].reshape(cl * p, cr)
        gates[s - 1] = complete_isometry(q)
    u1 = complete_isometry(st.cores[1].reshape(4, st.cores[1].shape[2]))
    m0 = st.cores[0].reshape(2, 2)
    gates[0] = np.kron(m0, np.eye(2, dtype=complex)) @ u1
    return LinearLayer(gates)


def disentangle_step(state: MPS, sv_threshold: float = CLEANUP_SV_THRESHOLD) -> DisentangleStep:
    """One disentangling iteration.

    Truncates `state` to bond dimension 2, converts the truncation to a
    layer, and returns the layer together with the normalized residual
    obtained by applying the layer's inverse (exactly, followed by a cleanup
    sweep dropping singular values below sv_threshold so bond dimensions can
    actually shrink).
    """
    truncated = state.truncate(2, sv_threshold=CLEANUP_SV_THRESHOLD)
    layer = chi2_mps_to_layer(truncated)
    residual = apply_layer(state, layer, adjoint=True)
    residual = residual.truncate(None, sv_threshold=sv_threshold)
    grown = [
        (a, b) for a, b in zip(state.bond_dims, residual.bond_dims) if b > a
    ]
    if grown:
        # expected not to happen for saturated bond profiles; possible when
        # the input state was capped below its natural profile
        logger.debug("disentangle_step grew bonds: %s", grown)
    return DisentangleStep(layer, residual, fidelity(truncated, state))


def analytic_decompose(
    state: MPS,
    max_layers: int | None = None,
    target_fidelity: float | None = None,
    sv_threshold: float = CLEANUP_SV_THRESHOLD,
    require_both: bool = False,
) -> tuple[StaircaseCircuit, DisentangleTrace]:
    """Iterate disentangling steps into a staircase circuit.

    Stopping: with only `max_layers` given, exactly that many layers are
    extracted; with only `target_fidelity`, iteration continues until the
    overlap with |0...0> reaches it (beware: this may not terminate for hard
    states). With both bounds given, iteration stops at the first bound
    reached; require_both=True instead keeps going until both are met.

    The layer extracted at iteration k becomes circuit layer k; the circuit
    applies layer K first, so the newest layer sits at the beginning of the
    gate sequence and the final overlap with |0...0> equals the circuit
    fidelity with the original state.
    """
    if max_layers is None and target_fidelity is None:
        raise ValueError("need max_layers, target_fidelity, or both")
    if max_layers is not None and max_layers < 1:
        raise ValueError("max_layers must be at least 1")
    if target_fidelity is not None and not 0.0 < target_fidelity <= 1.0:
        raise ValueError("target_fidelity must lie in (0, 1]")

    def should_continue(k: int, f: float) -> bool:
        k_unmet = max_layers is not None and k < max_layers
        f_unmet = target_fidelity is not None and f < target_fidelity
        if max_layers is None:
            return f_unmet
        if target_fidelity is None:
            return k_unmet
        return (k_unmet or f_unmet) if require_both else (k_unmet and f_unmet)

    zero = zero_state(state.num_sites)
    circ = StaircaseCircuit(state.num_sites)
    trace = DisentangleTrace()
    current = state
    f_zero = fidelity(zero, current)
    k = 0
    # the guard admits k = 0 unconditionally, so at least one layer is
    # always extracted (a no-op layer if the state is already |0...0>)
    while k == 0 or should_continue(k, f_zero):
        layer, current, trunc_fid = disentangle_step(current, sv_threshold=sv_threshold)
        circ.append_layer(layer)
        k += 1
        f_zero = fidelity(zero, current)
        trace.records.append(
            DisentangleRecord(
                iteration=k,
                fidelity_to_zero=f_zero,
                bond_dims=current.bond_dims,
                truncation_fidelity=trunc_fid,
            )
        )
    return circ, trace
