"""Independent dense-statevector oracles.

Everything here works on raw numpy vectors and deliberately avoids the MPS
engine, so the tests cross-check two separate code paths. Conventions match
the package: site 0 is the most significant bit, a layer applies its gate on
pair (N-2, N-1) first, and a circuit applies its highest-indexed layer first.
"""

import itertools

import numpy as np


def apply_gate_dense(vec: np.ndarray, gate: np.ndarray, site: int, n: int) -> np.ndarray:
    t = vec.reshape(2**site, 4, -1)
    return np.einsum("ij,ajb->aib", gate, t).reshape(-1)


def apply_layer_dense(vec, gates, n, adjoint=False):
    if not adjoint:
        for s in range(n - 2, -1, -1):
            vec = apply_gate_dense(vec, gates[s], s, n)
    else:
        for s in range(n - 1):
            vec = apply_gate_dense(vec, gates[s].conj().T, s, n)
    return vec


def circuit_state_dense(layers, n):
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = 1.0
    for gates in reversed(layers):
        vec = apply_layer_dense(vec, gates, n)
    return vec


def schmidt_values_dense(vec: np.ndarray, n: int, bond: int) -> np.ndarray:
    """Schmidt coefficients of the bipartition after site `bond`."""
    m = vec.reshape(2 ** (bond + 1), -1)
    vals = np.linalg.svd(m, compute_uv=False)
    return vals / np.linalg.norm(vals)


def truncate_dense(vec: np.ndarray, n: int, chi: int) -> np.ndarray:
    """Sequential right-to-left rank-chi projection at every bond.

    Mirrors the definition of the MPS truncation sweep (each bond sees the
    state already truncated at the bonds to its right) without ever building
    an MPS. Returns the normalized truncated vector.
    """
    cur = vec.astype(complex)
    for bond in range(n - 2, -1, -1):
        m = cur.reshape(2 ** (bond + 1), -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        k = min(chi, s.shape[0])
        cur = (u[:, :k] * s[:k]) @ vh[:k, :]
        cur = cur.reshape(-1)
    return cur / np.linalg.norm(cur)


def environment_dense(right_vec, left_vec, site: int, n: int) -> np.ndarray:
    """Partial trace of |right><left| over all qubits except (site, site+1)."""
    r = right_vec.reshape(2**site, 4, -1)
    l = left_vec.reshape(2**site, 4, -1)
    return np.einsum("aib,ajb->ij", r, l.conj())


def heisenberg_dense(rows: int, cols: int) -> np.ndarray:
    """Dense grid Hamiltonian, built from explicit Pauli kron products."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    n = rows * cols
    dim = 2**n

    def op_at(site, op):
        full = np.array([[1.0]], dtype=complex)
        for q in range(n):
            full = np.kron(full, op if q == site else np.eye(2))
        return full

    h = np.zeros((dim, dim), dtype=complex)
    for r in range(rows):
        for c in range(cols):
            site = r * cols + c
            neighbors = []
            if c + 1 < cols:
                neighbors.append(site + 1)
            if r + 1 < rows:
                neighbors.append(site + cols)
            for j in neighbors:
                for op in (sx, sy, sz):
                    h += 0.25 * op_at(site, op) @ op_at(j, op)
    return h


def heisenberg_matvec(vec: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Apply the grid Hamiltonian to a dense vector, term by term.

    Independent of the package's sparse-matrix construction: works directly
    on the statevector with explicit two-site Pauli applications.
    """
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    n = rows * cols
    out = np.zeros_like(vec, dtype=complex)
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            neighbors = []
            if c + 1 < cols:
                neighbors.append(i + 1)
            if r + 1 < rows:
                neighbors.append(i + cols)
            for j in neighbors:
                for op in (sx, sy, sz):
                    t = vec.reshape(2**i, 2, 2 ** (j - i - 1), 2, -1)
                    t = np.einsum("ab,cd,xbydz->xaycz", op, op, t)
                    out += 0.25 * t.reshape(-1)
    return out


def heisenberg_ground_vector(rows: int, cols: int):
    """Ground energy and vector from an iterative solve of the matvec oracle."""
    import scipy.sparse.linalg as spla

    n = rows * cols
    dim = 2**n
    op = spla.LinearOperator(
        (dim, dim), matvec=lambda v: heisenberg_matvec(v.astype(complex), rows, cols),
        dtype=complex,
    )
    v0 = np.random.default_rng(1).standard_normal(dim)
    vals, vecs = spla.eigsh(op, k=1, which="SA", v0=v0 / np.linalg.norm(v0))
    return float(vals[0]), vecs[:, 0]


def bas_images_bruteforce(rows: int, cols: int) -> list[tuple[int, ...]]:
    """Classify every 2**(rows*cols) image; keep those with constant rows
    or constant columns."""
    keep = []
    for bits in itertools.product((0, 1), repeat=rows * cols):
        img = np.array(bits).reshape(rows, cols)
        rows_const = all(len(set(row)) == 1 for row in img.tolist())
        cols_const = all(len(set(col)) == 1 for col in img.T.tolist())
        if rows_const or cols_const:
            keep.append(bits)
    return keep


def bas_vector(rows: int, cols: int) -> np.ndarray:
    n = rows * cols
    vec = np.zeros(2**n)
    for bits in bas_images_bruteforce(rows, cols):
        idx = int("".join(map(str, bits)), 2)
        vec[idx] = 1.0
    return vec / np.linalg.norm(vec)


def random_state(n: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
