"""Benchmark target states.

Three families: the exact ground state of the antiferromagnetic spin-1/2
model on an open 2D grid, the uniform superposition over a bars-and-stripes
image set, and seeded random MPS. Grid pixels map to chain sites in
row-major order; the benchmark configuration is 12 qubits at bond
dimension 64.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .mps import MPS, from_statevector, load_mps, save_mps

__all__ = [
    "GridSpec",
    "TargetDescriptor",
    "GroundStateResult",
    "grid_edges",
    "build_heisenberg",
    "heisenberg_ground_state",
    "bas_patterns",
    "bas_superposition",
    "random_mps",
    "build_target",
    "save_target",
    "load_target",
]

DEGENERACY_GAP = 1e-10

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class GridSpec:
    """Open-boundary 2D grid; rows*cols sites, row-major site order."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must have positive dimensions")

    @property
    def num_sites(self) -> int:
        return self.rows * self.cols


def grid_edges(grid: GridSpec) -> list[tuple[int, int]]:
    """Horizontal and vertical nearest-neighbor pairs, sites in row-major order."""
    edges = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            site = r * grid.cols + c
            if c + 1 < grid.cols:
                edges.append((site, site + 1))
            if r + 1 < grid.rows:
                edges.append((site, site + grid.cols))
    return edges


def _site_operator(num_sites: int, site: int, op: np.ndarray) -> scipy.sparse.csr_matrix:
    left = scipy.sparse.identity(2**site, format="csr", dtype=complex)
    right = scipy.sparse.identity(2 ** (num_sites - site - 1), format="csr", dtype=complex)
    return scipy.sparse.kron(scipy.sparse.kron(left, op), right, format="csr")


def build_heisenberg(grid: GridSpec) -> scipy.sparse.csr_matrix:
    """H = sum over grid edges of Sx Sx + Sy Sy + Sz Sz with S = sigma/2."""
    n = grid.num_sites
    dim = 2**n
    h = scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    for i, j in grid_edges(grid):
        for op in (_SX, _SY, _SZ):
            h = h + 0.25 * (_site_operator(n, i, op) @ _site_operator(n, j, op))
    return h


class GroundStateResult(NamedTuple):
    state: MPS
    energy: float
    gap: float
    degenerate: bool


def heisenberg_ground_state(grid: GridSpec, max_chi: int = 64) -> GroundStateResult:
    """Exact ground state of the grid model as an MPS.

    Dense diagonalization for small grids, an iterative eigensolver with a
    fixed deterministic start vector otherwise. The global phase is fixed by
    making the largest-magnitude amplitude real and positive. A gap below
    1e-10 is flagged as degenerate; the first eigenvector is then kept, which
    is a deterministic (if arbitrary) tie-break.
    """
    n = grid.num_sites
    if n > 20:
        raise ValueError("grids beyond 20 sites are not supported")
    h = build_heisenberg(grid)
    dim = h.shape[0]
    if dim <= 512:
        vals, vecs = scipy.linalg.eigh(h.toarray())
        e0, e1 = float(vals[0]), float(vals[1]) if dim > 1 else float(vals[0])
        vec = vecs[:, 0]
    else:
        v0 = np.random.default_rng(0).standard_normal(dim)
        v0 /= np.linalg.norm(v0)
        vals, vecs = scipy.sparse.linalg.eigsh(h, k=2, which="SA", v0=v0)
        idx = np.argsort(vals)
        e0, e1 = float(vals[idx[0]]), float(vals[idx[1]])
        vec = vecs[:, idx[0]]
    gap = e1 - e0
    degenerate = gap < DEGENERACY_GAP
    vec = np.asarray(vec, dtype=complex)
    pivot = int(np.argmax(np.abs(vec)))
    vec *= np.conj(vec[pivot]) / abs(vec[pivot])
    vec /= np.linalg.norm(vec)
    state = from_statevector(vec, max_chi=max_chi)
    return GroundStateResult(state.normalize(), e0, float(gap), degenerate)


def bas_patterns(rows: int, cols: int) -> np.ndarray:
    """All bars-and-stripes images as bit arrays, shape (M, rows*cols).

    An image qualifies if every row is constant or every column is constant;
    the all-zeros and all-ones images qualify both ways and are counted
    once, so M = 2**rows + 2**cols - 2. Rows are sorted for determinism.
    """
    pats = set()
    for bits in itertools.product((0, 1), repeat=rows):
        pats.add(tuple(bits[r] for r in range(rows) for _ in range(cols)))
    for bits in itertools.product((0, 1), repeat=cols):
        pats.add(tuple(bits[c] for _ in range(rows) for c in range(cols)))
    return np.array(sorted(pats), dtype=np.int64)


def bas_superposition(rows: int, cols: int) -> MPS:
    """Uniform superposition over the bars-and-stripes image set.

    Pixel (r, c) sits on qubit r*cols + c; each pattern carries amplitude
    1/sqrt(M). The conversion to MPS is exact.
    """
    n = rows * cols
    if n > 20:
        raise ValueError("grids beyond 20 sites are not supported")
    pats = bas_patterns(rows, cols)
    v = np.zeros(2**n, dtype=complex)
    weights = 2 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for bits in pats:
        v[int(bits @ weights)] = 1.0
    v /= np.linalg.norm(v)
    return from_statevector(v).normalize()


def random_mps(
    num_sites: int,
    max_chi: int,
    seed,
    complex_entries: bool = False,
) -> MPS:
    """Seeded random MPS, canonicalized and normalized.

    Bond b gets dimension min(max_chi, 2**min(b+1, N-b-1)); every core entry
    is drawn from a standard normal (independently for real and imaginary
    parts when complex_entries is set). Identical seeds give bit-identical
    states.
    """
    if num_sites < 2:
        raise ValueError("need at least 2 sites")
    if max_chi < 1:
        raise ValueError("max_chi must be at least 1")
    rng = np.random.default_rng(seed)
    dims = [1] + [
        min(max_chi, 2 ** min(b + 1, num_sites - b - 1))
        for b in range(num_sites - 1)
    ] + [1]
    cores = []
    for s in range(num_sites):
        shape = (dims[s], 2, dims[s + 1])
        core = rng.standard_normal(shape).astype(complex)
        if complex_entries:
            core = core + 1j * rng.standard_normal(shape)
        cores.append(core)
    return MPS(cores).left_canonicalize().normalize()


# ----------------------------------------------------------------------
# descriptors and persistence
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TargetDescriptor:
    """How to (re)build one benchmark target."""

    kind: str  # heisenberg_gs | bas_superposition | random_mps
    rows: int | None = None
    cols: int | None = None
    num_sites: int | None = None
    max_chi: int = 64
    seed: int | None = None

    @property
    def target_id(self) -> str:
        if self.kind == "heisenberg_gs":
            return f"heisenberg_{self.rows}x{self.cols}"
        if self.kind == "bas_superposition":
            return f"bas_{self.rows}x{self.cols}"
        if self.kind == "random_mps":
            return f"random_N{self.num_sites}_chi{self.max_chi}_seed{self.seed}"
        raise ValueError(f"unknown target kind {self.kind!r}")


def build_target(desc: TargetDescriptor) -> tuple[MPS, dict]:
    """Construct a target and its provenance record."""
    if desc.kind == "heisenberg_gs":
        result = heisenberg_ground_state(GridSpec(desc.rows, desc.cols), desc.max_chi)
        prov = {
            "energy": result.energy,
            "gap": result.gap,
            "degenerate": result.degenerate,
        }
        return result.state, prov
    if desc.kind == "bas_superposition":
        state = bas_superposition(desc.rows, desc.cols)
        prov = {"pattern_count": 2**desc.rows + 2**desc.cols - 2}
        return state, prov
    if desc.kind == "random_mps":
        state = random_mps(desc.num_sites, desc.max_chi, desc.seed)
        return state, {}
    raise ValueError(f"unknown target kind {desc.kind!r}")


def save_target(path, state: MPS, desc: TargetDescriptor, provenance: dict) -> None:
    """Persist the MPS plus a JSON provenance sidecar next to it."""
    save_mps(state, path)
    sidecar = {
        "descriptor": asdict(desc),
        "target_id": desc.target_id,
        "provenance": provenance,
        "max_bond": state.max_bond,
    }
    with open(str(path) + ".provenance.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def load_target(path) -> tuple[MPS, dict]:
    state = load_mps(path)
    try:
        with open(str(path) + ".provenance.json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        meta = {}
    return state, meta
