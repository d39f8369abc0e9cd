"""Matrix product state engine.

States are chains of rank-3 cores with shape (chi_left, 2, chi_right) and
open boundaries (both edge bonds have dimension 1). Site 0 maps to the most
significant bit of the statevector index; this convention is fixed
project-wide. All operations are functional: they return new MPS objects and
never mutate core tensors in place, so states can be shared freely.
"""

from __future__ import annotations

import io
import json
import math

import numpy as np

from .linalg import DEFAULT_TOLS, svd

__all__ = [
    "MPS",
    "zero_state",
    "product_state",
    "from_statevector",
    "inner_product",
    "fidelity",
    "entanglement_entropy",
    "save_mps",
    "load_mps",
]

MPS_FORMAT_VERSION = 1
ENDIANNESS_NOTE = "site0-most-significant"
DEFAULT_STATEVECTOR_CAP = 20


class MPS:
    """An N-qubit matrix product state.

    Attributes:
        cores: list of rank-3 tensors, cores[s].shape == (chi_{s-1}, 2, chi_s).
        center: site index of the orthogonality center if known, else None.
            Sites left of the center are left-isometries, sites right of it
            are right-isometries.
    """

    def __init__(self, cores, center: int | None = None, validate: bool = True):
        self.cores = list(cores)
        self.center = center
        if validate:
            self._validate()

    def _validate(self) -> None:
        if len(self.cores) < 1:
            raise ValueError("an MPS needs at least one site")
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for s, core in enumerate(self.cores):
            if core.ndim != 3 or core.shape[1] != 2:
                raise ValueError(f"core {s} has invalid shape {core.shape}")
            if s + 1 < len(self.cores) and core.shape[2] != self.cores[s + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {s} and {s + 1}")
        if self.center is not None and not 0 <= self.center < len(self.cores):
            raise ValueError(f"center {self.center} out of range")

    @property
    def num_sites(self) -> int:
        return len(self.cores)

    @property
    def bond_dims(self) -> list[int]:
        """Interior bond dimensions; bond b joins sites b and b+1."""
        return [core.shape[2] for core in self.cores[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    def copy(self) -> "MPS":
        return MPS(list(self.cores), center=self.center, validate=False)

    # ------------------------------------------------------------------
    # norms and canonical forms
    # ------------------------------------------------------------------

    def norm(self) -> float:
        return float(np.sqrt(abs(inner_product(self, self))))

    def normalize(self) -> "MPS":
        """Rescale to unit norm. <psi|psi> = 1 within 1e-12 afterwards."""
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        cores = list(self.cores)
        pivot = self.center if self.center is not None else len(cores) - 1
        cores[pivot] = cores[pivot] / n
        return MPS(cores, center=self.center, validate=False)

    @staticmethod
    def _shift_right(cores: list[np.ndarray], s: int) -> None:
        """QR step: make core s a left-isometry, absorb R into site s+1."""
        cl, p, cr = cores[s].shape
        q, r = np.linalg.qr(cores[s].reshape(cl * p, cr))
        cores[s] = q.reshape(cl, p, q.shape[1])
        cores[s + 1] = np.tensordot(r, cores[s + 1], axes=(1, 0))

    @staticmethod
    def _shift_left(cores: list[np.ndarray], s: int) -> None:
        """LQ step: make core s a right-isometry, absorb the rest into s-1."""
        cl, p, cr = cores[s].shape
        q, r = np.linalg.qr(cores[s].reshape(cl, p * cr).conj().T)
        k = q.shape[1]
        cores[s] = q.conj().T.reshape(k, p, cr)
        cores[s - 1] = np.tensordot(cores[s - 1], r.conj().T, axes=(2, 0))

    def canonicalize(self, center: int) -> "MPS":
        """Bring the state into mixed-canonical form around `center`.

        The state vector is unchanged exactly (pure QR gauge moves).
        """
        if not 0 <= center < self.num_sites:
            raise ValueError(f"center {center} out of range")
        cores = list(self.cores)
        for s in range(center):
            self._shift_right(cores, s)
        for s in range(self.num_sites - 1, center, -1):
            self._shift_left(cores, s)
        return MPS(cores, center=center, validate=False)

    def move_center(self, target: int) -> "MPS":
        """Move the orthogonality center to `target` with single-bond QR steps."""
        if self.center is None:
            return self.canonicalize(target)
        if not 0 <= target < self.num_sites:
            raise ValueError(f"center {target} out of range")
        cores = list(self.cores)
        c = self.center
        while c < target:
            self._shift_right(cores, c)
            c += 1
        while c > target:
            self._shift_left(cores, c)
            c -= 1
        return MPS(cores, center=target, validate=False)

    def left_canonicalize(self) -> "MPS":
        """All cores except the last become left-isometries; norm is preserved."""
        return self.canonicalize(self.num_sites - 1)

    def is_left_isometric(self, site: int, tol: float = DEFAULT_TOLS.unitarity) -> bool:
        cl, p, cr = self.cores[site].shape
        m = self.cores[site].reshape(cl * p, cr)
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(cr))) <= tol)

    # ------------------------------------------------------------------
    # truncation
    # ------------------------------------------------------------------

    def truncate(self, max_chi: int | None, sv_threshold: float = 1e-12) -> "MPS":
        """Compress every bond to at most `max_chi` states.

        One full left-canonicalization followed by a right-to-left SVD sweep,
        so each local truncation is optimal in the orthogonal gauge. Singular
        values below sv_threshold (relative to the largest at that bond) are
        dropped as well. The result is renormalized, with the orthogonality
        center at site 0.
        """
        if max_chi is not None and max_chi < 1:
            raise ValueError("max_chi must be at least 1")
        st = self.left_canonicalize()
        cores = list(st.cores)
        for s in range(self.num_sites - 1, 0, -1):
            cl, p, cr = cores[s].shape
            u, vals, vh = svd(cores[s].reshape(cl, p * cr))
            k = _select_rank(vals, max_chi, sv_threshold)
            cores[s] = vh[:k, :].reshape(k, p, cr)
            cores[s - 1] = np.tensordot(cores[s - 1], u[:, :k] * vals[:k], axes=(2, 0))
        n = np.linalg.norm(cores[0])
        cores[0] = cores[0] / n
        return MPS(cores, center=0, validate=False)

    # ------------------------------------------------------------------
    # gate application
    # ------------------------------------------------------------------

    def apply_two_qubit_gate(
        self,
        gate: np.ndarray,
        site: int,
        adjoint: bool = False,
        max_chi: int | None = None,
        sv_threshold: float = 0.0,
        center_side: str = "left",
    ) -> "MPS":
        """Apply a 4x4 gate (or its adjoint) to qubits (site, site+1).

        The orthogonality center is moved into the affected pair first, the
        two cores are contracted with the gate and re-split by SVD. With
        max_chi=None and sv_threshold=0 the application is exact (all
        singular values kept) and the norm is preserved. `center_side`
        chooses which of the two sites holds the center afterwards, so layer
        sweeps in either direction avoid re-canonicalization.
        """
        n = self.num_sites
        if not 0 <= site <= n - 2:
            raise ValueError(f"gate site {site} out of range for {n} sites")
        if center_side not in ("left", "right"):
            raise ValueError("center_side must be 'left' or 'right'")
        gate = np.asarray(gate, dtype=complex)
        if gate.shape != (4, 4):
            raise ValueError(f"expected a 4x4 gate, got {gate.shape}")
        if adjoint:
            gate = gate.conj().T
        if self.center is not None and site <= self.center <= site + 1:
            st = self
        else:
            st = self.move_center(site if self.center is None or self.center < site else site + 1)
        cores = list(st.cores)
        theta = np.tensordot(cores[site], cores[site + 1], axes=(2, 0))  # (cl,2,2,cr)
        cl, _, _, cr = theta.shape
        theta = np.einsum("ij,ajb->aib", gate, theta.reshape(cl, 4, cr))
        u, vals, vh = svd(theta.reshape(cl * 2, 2 * cr))
        k = _select_rank(vals, max_chi, sv_threshold)
        kept = vals[:k]
        dropped_weight = float(np.sum(vals[k:] ** 2))
        if dropped_weight > 0.0:
            # keep the state normalized when truncation removed weight
            kept = kept * (np.linalg.norm(vals) / np.linalg.norm(kept))
        if center_side == "left":
            cores[site] = (u[:, :k] * kept).reshape(cl, 2, k)
            cores[site + 1] = vh[:k, :].reshape(k, 2, cr)
            new_center = site
        else:
            cores[site] = u[:, :k].reshape(cl, 2, k)
            cores[site + 1] = (kept[:, None] * vh[:k, :]).reshape(k, 2, cr)
            new_center = site + 1
        return MPS(cores, center=new_center, validate=False)

    # ------------------------------------------------------------------
    # conversions and spectra
    # ------------------------------------------------------------------

    def to_statevector(self, max_sites: int = DEFAULT_STATEVECTOR_CAP) -> np.ndarray:
        """Contract to a dense vector of 2**N amplitudes, site 0 first (big-endian)."""
        if self.num_sites > max_sites:
            raise ValueError(
                f"refusing to build a 2**{self.num_sites} statevector "
                f"(cap is {max_sites} sites); raise max_sites explicitly if intended"
            )
        v = self.cores[0]
        for core in self.cores[1:]:
            v = np.tensordot(v, core, axes=(v.ndim - 1, 0))
        return np.ascontiguousarray(v.reshape(-1))

    def schmidt_spectrum(self, bond: int) -> np.ndarray:
        """Schmidt coefficients across bond `bond` (between sites bond, bond+1).

        Returned non-increasing with squares summing to 1.
        """
        if not 0 <= bond <= self.num_sites - 2:
            raise ValueError(f"bond {bond} out of range")
        st = self.move_center(bond)
        cl, p, cr = st.cores[bond].shape
        vals = np.linalg.svd(st.cores[bond].reshape(cl * p, cr), compute_uv=False)
        total = np.linalg.norm(vals)
        if total == 0.0:
            raise ValueError("zero state has no Schmidt spectrum")
        return vals / total


def _select_rank(vals: np.ndarray, max_chi: int | None, sv_threshold: float) -> int:
    k = vals.shape[0]
    if sv_threshold > 0.0 and k > 0 and vals[0] > 0.0:
        k = int(np.count_nonzero(vals >= sv_threshold * vals[0]))
    if max_chi is not None:
        k = min(k, max_chi)
    return max(k, 1)


def entanglement_entropy(schmidt_values: np.ndarray) -> float:
    """Von Neumann entropy -sum(l^2 ln l^2) of a Schmidt spectrum."""
    p = np.asarray(schmidt_values, dtype=float) ** 2
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)))


# ----------------------------------------------------------------------
# constructors
# ----------------------------------------------------------------------

def product_state(bits) -> MPS:
    """Computational basis product state from an iterable of bits."""
    cores = []
    for b in bits:
        core = np.zeros((1, 2, 1), dtype=complex)
        core[0, int(b), 0] = 1.0
        cores.append(core)
    return MPS(cores, center=0)


def zero_state(num_sites: int) -> MPS:
    return product_state([0] * num_sites)


def from_statevector(
    v: np.ndarray,
    max_chi: int | None = None,
    sv_threshold: float = 1e-14,
) -> MPS:
    """Factor a normalized dense vector into an MPS by sequential SVDs.

    Exact (up to the tiny sv_threshold used to discard numerically-zero
    Schmidt values) whenever max_chi is at least 2**min(b+1, N-b-1) at every
    bond b.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    n = int(math.log2(v.shape[0]))
    if 2**n != v.shape[0]:
        raise ValueError(f"length {v.shape[0]} is not a power of two")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("input vector must be normalized")
    if max_chi is not None and max_chi < 1:
        raise ValueError("max_chi must be at least 1")
    cores = []
    m = v.reshape(1, -1)
    chi = 1
    for _ in range(n - 1):
        m = m.reshape(chi * 2, -1)
        u, vals, vh = svd(m)
        k = _select_rank(vals, max_chi, sv_threshold)
        cores.append(u[:, :k].reshape(chi, 2, k))
        m = vals[:k, None] * vh[:k, :]
        chi = k
    cores.append(m.reshape(chi, 2, 1))
    return MPS(cores, center=n - 1)


# ----------------------------------------------------------------------
# overlaps
# ----------------------------------------------------------------------

def inner_product(a: MPS, b: MPS) -> complex:
    """<a|b> by exact left-to-right transfer contraction."""
    if a.num_sites != b.num_sites:
        raise ValueError(
            f"size mismatch: {a.num_sites} vs {b.num_sites} sites"
        )
    env = np.ones((1, 1), dtype=complex)
    for ca, cb in zip(a.cores, b.cores):
        t = np.tensordot(env, cb, axes=(1, 0))  # (a_bond, p, b_right)
        env = np.tensordot(ca.conj(), t, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def fidelity(a: MPS, b: MPS) -> float:
    """|<a|b>| (states are expected to be normalized)."""
    return float(abs(inner_product(a, b)))


# ----------------------------------------------------------------------
# file format
# ----------------------------------------------------------------------

def save_mps(state: MPS, path) -> None:
    """Write an MPS container: JSON header plus per-site complex128 cores.

    The round trip through load_mps is bit-exact.
    """
    header = {
        "format_version": MPS_FORMAT_VERSION,
        "num_sites": state.num_sites,
        "bond_dims": state.bond_dims,
        "endianness": ENDIANNESS_NOTE,
        "core_order": "(chi_left, physical, chi_right), row-major",
    }
    payload = {"header": json.dumps(header)}
    for s, core in enumerate(state.cores):
        payload[f"core_{s}"] = np.ascontiguousarray(core, dtype=complex)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_mps(path) -> MPS:
    with open(path, "rb") as fh:
        data = np.load(io.BytesIO(fh.read()), allow_pickle=False)
    header = json.loads(str(data["header"]))
    if header["format_version"] != MPS_FORMAT_VERSION:
        raise ValueError(f"unsupported MPS format version {header['format_version']}")
    cores = [data[f"core_{s}"] for s in range(header["num_sites"])]
    return MPS(cores)
