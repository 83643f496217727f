"""Dense Hermitian operator algebra at small dimension.

Matrices are plain ``numpy`` complex arrays. The ``as_*`` helpers validate
and return a fresh ``complex128`` copy; everything else is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CONSTRUCTION_TOL = 1e-12
DEFAULT_TOL = 1e-10
EIGEN_CLUSTER_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
IDENTITY_2 = np.eye(2, dtype=complex)

MAX_SEED = 2**64 - 1


class NotHermitianError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def _square(A) -> np.ndarray:
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {A.shape}")
    return A


def hermitian_defect(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T)))


def as_hermitian(A, tol: float = CONSTRUCTION_TOL) -> np.ndarray:
    """Validate ``A`` as a Hermitian operator and return it as complex128."""
    A = _square(A)
    defect = hermitian_defect(A)
    if defect > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |A - A*| = {defect:.3e})")
    return A


def as_minimal_projection(P, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate ``P`` as a rank-1 orthogonal projection."""
    P = as_hermitian(P, tol=tol)
    idem = float(np.max(np.abs(P @ P - P)))
    tr = np.trace(P).real
    if idem > tol or abs(tr - 1.0) > tol:
        raise ValueError(
            f"not a minimal projection (|P^2 - P| = {idem:.3e}, trace = {tr:.12g})"
        )
    return P


def projection_onto(v) -> np.ndarray:
    """Rank-1 projection onto the line spanned by the complex vector ``v``."""
    v = np.asarray(v, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot project onto the zero vector")
    v = v / norm
    return np.outer(v, v.conj())


def trace_inner_product(A, B) -> complex:
    """Hilbert-Schmidt inner product Tr(A* B)."""
    A = _square(A)
    B = _square(B)
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {A.shape[0]} vs {B.shape[0]}")
    # Tr(A* B) = sum_ij conj(A_ij) B_ij
    return complex(np.vdot(A, B))


# --- eigendecomposition -----------------------------------------------------


def jacobi_eigh(A, tol: float = 1e-15, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns.
    """
    A = as_hermitian(A, tol=DEFAULT_TOL)
    A = 0.5 * (A + A.conj().T)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(float(np.linalg.norm(A)), np.finfo(float).tiny)
    offdiag = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        if np.linalg.norm(A[offdiag]) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # diag(1, conj(phase)) makes the pivot real, then a real rotation
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ G
    w = np.diag(A).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def eigen_hermitian(A, cluster_tol: float = EIGEN_CLUSTER_TOL):
    """Spectral decomposition as an ascending list of ``(eigenvalue, projection)``.

    Eigenvalues closer than ``cluster_tol`` are merged and their eigenvectors
    combined into a single higher-rank projection; the reported eigenvalue of
    a merged cluster is its mean.
    """
    w, V = jacobi_eigh(A)
    out = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > cluster_tol:
            cols = V[:, start:i]
            out.append((float(np.mean(w[start:i])), cols @ cols.conj().T))
            start = i
    return out


def eigenvalues(A) -> np.ndarray:
    return jacobi_eigh(A)[0]


def min_eigenvalue(A) -> float:
    return float(jacobi_eigh(A)[0][0])


def is_psd(A, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return min_eigenvalue(A) >= -tol


def is_density(A, tol: float = DEFAULT_TOL) -> bool:
    return is_psd(A, tol) and abs(np.trace(np.asarray(A)).real - 1.0) <= tol


def negative_eigenprojection(A):
    """Projection onto the eigenspace of the most negative eigenvalue of ``A``.

    Returns ``None`` when ``A`` has no negative eigenvalue. For any returned
    ``Q`` the pairing Tr(AQ) is negative, which is the certificate that ``A``
    lies outside the self-dual PSD cone.
    """
    lam, Q = eigen_hermitian(A)[0]
    if lam >= 0:
        return None
    return Q


# --- Pauli / Bloch ----------------------------------------------------------


@dataclass(frozen=True)
class PauliDecomposition:
    """M = s0*1 + s.sigma + i*(s0p*1 + sp.sigma) for a 2x2 complex M."""

    s0: float
    s: np.ndarray
    s0p: float = 0.0
    sp: np.ndarray = np.zeros(3)

    def __post_init__(self):
        object.__setattr__(self, "s", _vec3(self.s))
        object.__setattr__(self, "sp", _vec3(self.sp))


def _vec3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"expected a real 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return v


def bloch_vector(v) -> np.ndarray:
    """Coerce to a finite real 3-vector."""
    return _vec3(v).copy()


def sigma_dot(v) -> np.ndarray:
    v = _vec3(v)
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def pauli_compose(d: PauliDecomposition) -> np.ndarray:
    return d.s0 * IDENTITY_2 + sigma_dot(d.s) + 1j * (d.s0p * IDENTITY_2 + sigma_dot(d.sp))


def pauli_decompose(M) -> PauliDecomposition:
    M = _square(M)
    if M.shape != (2, 2):
        raise DimensionError("Pauli decomposition needs a 2x2 matrix")
    # coefficients c_k = Tr(sigma_k M) / 2 are complex; split real/imag
    c0 = np.trace(M) / 2
    c = np.array([np.trace(S @ M) / 2 for S in PAULI])
    return PauliDecomposition(c0.real, c.real, c0.imag, c.imag)


def bloch_operator(v) -> np.ndarray:
    """The operator 1/2 (1 + v.sigma)."""
    return 0.5 * (IDENTITY_2 + sigma_dot(v))


def projection_from_bloch(a, sign: int = +1, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Outcome projection 1/2 (1 +- a.sigma) for a unit Bloch vector ``a``."""
    a = _vec3(a)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if abs(np.linalg.norm(a) - 1.0) > tol:
        raise ValueError(f"Bloch direction must be a unit vector, |a| = {np.linalg.norm(a):.12g}")
    return 0.5 * (IDENTITY_2 + sign * sigma_dot(a))


# --- seeded generators ------------------------------------------------------


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def make_rng(seed, *stream) -> np.random.Generator:
    """PCG64 generator keyed by ``seed`` and optional sub-stream indices."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng([check_seed(seed), *map(int, stream)])


def subseed(seed, *stream) -> int:
    """Derive an independent 64-bit seed from ``seed`` and stream indices."""
    ss = np.random.SeedSequence([check_seed(seed), *map(int, stream)])
    return int(ss.generate_state(1, np.uint64)[0])


def _check_dim(n: int) -> int:
    if int(n) < 2:
        raise DimensionError(f"dimension must be >= 2, got {n}")
    return int(n)


def ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(rng, n))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_unitary(seed, n: int) -> np.ndarray:
    """Haar-distributed unitary via phase-corrected QR of a Ginibre matrix."""
    return haar_unitary(make_rng(seed), _check_dim(n))


def random_density(seed, n: int) -> np.ndarray:
    n = _check_dim(n)
    G = ginibre(make_rng(seed), n)
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_minimal_projection(seed, n: int) -> np.ndarray:
    n = _check_dim(n)
    rng = make_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return projection_onto(v)


def random_hermitian(seed, n: int) -> np.ndarray:
    n = _check_dim(n)
    G = ginibre(make_rng(seed), n)
    return 0.5 * (G + G.conj().T)


# --- Hermitian coordinates --------------------------------------------------


def gell_mann_basis(n: int) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) basis of n x n Hermitian matrices.

    Order: identity/sqrt(n); symmetric E_jk+E_kj for j<k (row-major);
    antisymmetric -i(E_jk-E_kj) for j<k; diagonal generalized Gell-Mann
    matrices l = 1..n-1. Off-diagonal elements are scaled by 1/sqrt(2).
    """
    n = _check_dim(n)
    basis = [np.eye(n, dtype=complex) / math.sqrt(n)]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    for j, k in pairs:
        M = np.zeros((n, n), dtype=complex)
        M[j, k] = M[k, j] = 1 / math.sqrt(2)
        basis.append(M)
    for j, k in pairs:
        M = np.zeros((n, n), dtype=complex)
        M[j, k] = -1j / math.sqrt(2)
        M[k, j] = 1j / math.sqrt(2)
        basis.append(M)
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        basis.append(np.diag(d / math.sqrt(l * (l + 1))).astype(complex))
    return basis


def hermitian_coordinates(A, basis=None) -> np.ndarray:
    """Real coordinates of Hermitian ``A`` in an orthonormal Hermitian basis."""
    A = np.asarray(A, dtype=complex)
    if basis is None:
        basis = gell_mann_basis(A.shape[0])
    return np.array([np.vdot(B, A).real for B in basis])
