"""Staircase circuits of two-qubit unitaries.

A linear layer holds N-1 gates on adjacent pairs (0,1) ... (N-2,N-1), stored
in ascending pair order. When a layer acts on a ket, the gate on pair
(N-2, N-1) is applied first and the gate on (0, 1) last; this is the order
under which a bond<=2 MPS in left-canonical form converts exactly into a
single layer (the bond index travels from the last site toward the first).
The adjoint layer therefore applies conjugate-transposed gates in ascending
pair order.

A staircase circuit stacks layers indexed k = 1..K, stored in index order;
the layer with the highest index is applied to |0...0> first.
"""

from __future__ import annotations

import io
import json

import numpy as np

from .linalg import DEFAULT_TOLS
from .mps import MPS, fidelity, zero_state

__all__ = [
    "LinearLayer",
    "StaircaseCircuit",
    "identity_layer",
    "random_layer",
    "apply_layer",
    "circuit_state",
    "circuit_fidelity",
    "save_circuit",
    "load_circuit",
    "export_gate_list",
]

CIRCUIT_FORMAT_VERSION = 1


class LinearLayer:
    """One staircase layer: gates[p] is the 4x4 unitary on qubits (p, p+1)."""

    def __init__(self, gates, validate: bool = True):
        self.gates = [np.asarray(g, dtype=complex) for g in gates]
        if validate:
            for p, g in enumerate(self.gates):
                if g.shape != (4, 4):
                    raise ValueError(f"gate {p} has shape {g.shape}, expected (4, 4)")
                dev = np.max(np.abs(g.conj().T @ g - np.eye(4)))
                if dev > DEFAULT_TOLS.unitarity:
                    raise ValueError(f"gate {p} is not unitary (deviation {dev:.3e})")

    @property
    def num_sites(self) -> int:
        return len(self.gates) + 1

    def copy(self) -> "LinearLayer":
        return LinearLayer([g.copy() for g in self.gates], validate=False)


class StaircaseCircuit:
    """Stacked linear layers; layers[k-1] is layer k, applied in order K..1."""

    def __init__(self, num_sites: int, layers=()):
        self.num_sites = num_sites
        self.layers: list[LinearLayer] = []
        for layer in layers:
            self.append_layer(layer)

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def append_layer(self, layer: LinearLayer) -> None:
        if layer.num_sites != self.num_sites:
            raise ValueError(
                f"layer acts on {layer.num_sites} sites, circuit has {self.num_sites}"
            )
        self.layers.append(layer)

    def copy(self) -> "StaircaseCircuit":
        return StaircaseCircuit(self.num_sites, [la.copy() for la in self.layers])

    def gate_order(self):
        """(layer_index, site) pairs in ket application order.

        Layer K comes first; within a layer the pair (N-2, N-1) comes first.
        """
        for li in range(len(self.layers) - 1, -1, -1):
            for s in range(self.num_sites - 2, -1, -1):
                yield (li, s)

    @property
    def num_gates(self) -> int:
        return len(self.layers) * (self.num_sites - 1)


def identity_layer(num_sites: int) -> LinearLayer:
    if num_sites < 2:
        raise ValueError("a layer needs at least 2 sites")
    eye = np.eye(4, dtype=complex)
    return LinearLayer([eye.copy() for _ in range(num_sites - 1)], validate=False)


def random_layer(num_sites: int, seed) -> LinearLayer:
    """Layer of independent Haar-like unitaries, deterministic per seed.

    Each gate: 4x4 complex Gaussian (real and imaginary parts i.i.d. standard
    normal), QR, with Q gauge-fixed so the diagonal of R is real non-negative.
    """
    if num_sites < 2:
        raise ValueError("a layer needs at least 2 sites")
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(num_sites - 1):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        q, r = np.linalg.qr(a)
        d = np.diagonal(r)
        q = q * (d / np.abs(d))
        gates.append(q)
    return LinearLayer(gates, validate=False)


def apply_layer(
    state: MPS,
    layer: LinearLayer,
    adjoint: bool = False,
    max_chi: int | None = None,
    sv_threshold: float = 0.0,
) -> MPS:
    """Apply a staircase layer (or its adjoint) to an MPS, exactly by default."""
    if layer.num_sites != state.num_sites:
        raise ValueError(
            f"layer acts on {layer.num_sites} sites, state has {state.num_sites}"
        )
    n = state.num_sites
    if not adjoint:
        sites = range(n - 2, -1, -1)
        center_side = "left"
    else:
        sites = range(n - 1)
        center_side = "right"
    for s in sites:
        state = state.apply_two_qubit_gate(
            layer.gates[s],
            s,
            adjoint=adjoint,
            max_chi=max_chi,
            sv_threshold=sv_threshold,
            center_side=center_side,
        )
    return state


def circuit_state(circ: StaircaseCircuit, max_chi: int | None = None) -> MPS:
    """The state the circuit prepares from |0...0>, contracted exactly."""
    state = zero_state(circ.num_sites)
    for layer in reversed(circ.layers):
        state = apply_layer(state, layer, max_chi=max_chi)
    return state


def circuit_fidelity(circ: StaircaseCircuit, target: MPS) -> float:
    """|<circuit state|target>|, in [0, 1] for a normalized target."""
    if circ.num_sites != target.num_sites:
        raise ValueError(
            f"circuit acts on {circ.num_sites} sites, target has {target.num_sites}"
        )
    return fidelity(circuit_state(circ), target)


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

def save_circuit(circ: StaircaseCircuit, path) -> None:
    """Write a circuit container; the round trip through load_circuit is bit-exact.

    Layers are stored in index order k = 1..K. Application order to the ket
    is K down to 1 (the header records this).
    """
    header = {
        "format_version": CIRCUIT_FORMAT_VERSION,
        "num_sites": circ.num_sites,
        "num_layers": circ.num_layers,
        "layer_order": "stored k=1..K, applied K..1",
        "gate_order": "16 complex doubles row-major per gate",
    }
    payload = {"header": json.dumps(header)}
    pairs = np.array(
        [[p, p + 1] for p in range(circ.num_sites - 1)], dtype=np.int64
    )
    payload["qubit_pairs"] = pairs
    for k, layer in enumerate(circ.layers, start=1):
        payload[f"layer_{k}"] = np.ascontiguousarray(
            np.stack(layer.gates), dtype=complex
        )
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_circuit(path) -> StaircaseCircuit:
    with open(path, "rb") as fh:
        data = np.load(io.BytesIO(fh.read()), allow_pickle=False)
    header = json.loads(str(data["header"]))
    if header["format_version"] != CIRCUIT_FORMAT_VERSION:
        raise ValueError(
            f"unsupported circuit format version {header['format_version']}"
        )
    circ = StaircaseCircuit(header["num_sites"])
    for k in range(1, header["num_layers"] + 1):
        circ.append_layer(LinearLayer(list(data[f"layer_{k}"]), validate=False))
    return circ


def export_gate_list(circ: StaircaseCircuit, path) -> None:
    """Plain-text gate list for downstream transpilers.

    One gate per line: layer index, the two qubit indices, then the 16 matrix
    entries row-major as real/imaginary pairs.
    """
    with open(path, "w") as fh:
        fh.write(
            "# layer qubit_a qubit_b re00 im00 re01 im01 ... (row-major 4x4)\n"
        )
        fh.write("# layers are applied to |0...0> from the highest index down\n")
        for k, layer in enumerate(circ.layers, start=1):
            for p, gate in enumerate(layer.gates):
                entries = " ".join(
                    f"{z.real:.17g} {z.imag:.17g}" for z in gate.reshape(-1)
                )
                fh.write(f"{k} {p} {p + 1} {entries}\n")
