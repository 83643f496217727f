"""Sample-based certifiers for inner-product-preserving representations.

Both verifiers take a candidate pair (f, g) that is supposed to preserve
every Born probability, first confirm that hypothesis on a spanning set,
then rebuild the unique linear extension from that set and test whether it
is orthogonal (on R^3) or Hilbert-Schmidt unitary (on M_n(C)), and whether
g's extension coincides with f's.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import ginibre, make_rng, projection_onto
from .reports import Check

GRAM_INVERTIBLE = 1e-8


class InconsistentInputError(ValueError):
    """The supplied maps cannot preserve the inner products they claim to."""

    def __init__(self, what: str, residual: float):
        super().__init__(f"{what} violated (max residual {residual:.3e})")
        self.what = what
        self.residual = residual


@dataclass
class LemmaReport:
    checks: list[Check] = field(default_factory=list)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def is_linear_extension(self) -> bool:
        return self["linear_extension"].passed

    @property
    def g_equals_f(self) -> bool:
        return self["g_equals_f"].passed


def _check(name, residual, tol) -> Check:
    return Check(name, bool(residual <= tol), float(residual))


# --- R^3 ---------------------------------------------------------------------


def random_rotation(seed) -> np.ndarray:
    """Haar-random element of SO(3)."""
    Q, R = np.linalg.qr(make_rng(seed).standard_normal((3, 3)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def lemma1_verify(f, g, tol: float = 1e-10, samples=None, num_samples: int = 100, seed=0) -> LemmaReport:
    """Certify that (f, g) on the sphere extends to one orthogonal map.

    ``f`` and ``g`` map a unit 3-vector to a 3-vector. The images of the
    standard basis must be biorthogonal, (f(e_i), g(e_j)) = delta_ij,
    otherwise :class:`InconsistentInputError` is raised. The matrix with
    columns f(e_i) is the candidate linear extension.
    """
    E = np.eye(3)
    F = np.column_stack([np.asarray(f(e), dtype=float) for e in E])
    G = np.column_stack([np.asarray(g(e), dtype=float) for e in E])
    bio = float(np.max(np.abs(F.T @ G - E)))
    if bio > tol:
        raise InconsistentInputError("biorthogonality (f(e_i), g(e_j)) = delta_ij", bio)

    if samples is None:
        v = make_rng(seed).standard_normal((num_samples, 3))
        samples = v / np.linalg.norm(v, axis=1, keepdims=True)
    samples = np.asarray(samples, dtype=float)
    lin = 0.0
    for a in samples:
        lin = max(lin, float(np.max(np.abs(np.asarray(f(a)) - F @ a))), float(np.max(np.abs(np.asarray(g(a)) - G @ a))))

    return LemmaReport(
        [
            _check("biorthogonality", bio, tol),
            _check("linear_extension", lin, tol),
            _check("orthogonal", float(np.max(np.abs(F.T @ F - E))), tol),
            _check("g_equals_f", float(np.max(np.abs(G - F))), tol),
        ]
    )


# --- M_n(C) ------------------------------------------------------------------


@dataclass(frozen=True)
class FrameGram:
    projections: tuple[np.ndarray, ...]
    gram: np.ndarray
    min_singular_value: float

    @property
    def invertible(self) -> bool:
        return self.min_singular_value > GRAM_INVERTIBLE

    @property
    def n(self) -> int:
        return self.projections[0].shape[0]


def standard_projection_basis(n: int) -> list[np.ndarray]:
    """n^2 minimal projections spanning M_n(C).

    |j>, then (|j>+|k>)/sqrt2 and (|j>+i|k>)/sqrt2 for j<k. For n = 2 this
    is {P_z+, P_z-, P_x+, P_y+}.
    """
    eye = np.eye(n)
    basis = [projection_onto(eye[j]) for j in range(n)]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    basis += [projection_onto(eye[j] + eye[k]) for j, k in pairs]
    basis += [projection_onto(eye[j] + 1j * eye[k]) for j, k in pairs]
    return basis


def lemma2_frame_gram(basis) -> FrameGram:
    basis = tuple(np.asarray(P, dtype=complex) for P in basis)
    n = basis[0].shape[0]
    if len(basis) != n * n:
        raise ValueError(f"need n^2 = {n * n} projections, got {len(basis)}")
    X = np.array([P.ravel() for P in basis])
    gram = (X.conj() @ X.T).real
    sv = np.linalg.svd(gram, compute_uv=False)
    return FrameGram(basis, gram, float(sv.min()))


def _superoperator(images, fg: FrameGram) -> np.ndarray:
    """Matrix of the linear map sending each basis projection to its image.

    Acts on row-major vec(A): coefficients c = G^-1 (Tr(P_j A))_j.
    """
    P = np.array([p.ravel() for p in fg.projections]).T
    F = np.array([np.asarray(m, dtype=complex).ravel() for m in images]).T
    return F @ np.linalg.solve(fg.gram, P.conj().T)


def _apply(S, A) -> np.ndarray:
    n = A.shape[0]
    return (S @ A.ravel()).reshape(n, n)


def hs_inner(A, B) -> complex:
    return complex(np.vdot(A, B))


def polarized_inner(norm_sq, A, B) -> complex:
    """<A, B> (conjugate-linear in A) from squared norms of A + i^k B."""
    return sum((1j) ** (-k) * norm_sq(A + (1j) ** k * B) for k in range(4)) / 4


def lemma2_verify(
    f,
    g,
    basis=None,
    n: int | None = None,
    tol: float = 1e-9,
    seed=0,
    num_extra: int = 100,
    num_pairs: int = 500,
) -> LemmaReport:
    """Certify that (f, g) on minimal projections extends to one HS-unitary map.

    Raises :class:`InconsistentInputError` when the trace pairing
    Tr(f(P_i) g(P_j)) = Tr(P_i P_j) fails on the basis, and ``ValueError``
    when the basis Gram matrix is singular.
    """
    if basis is None:
        if n is None:
            raise ValueError("give either a basis or the dimension n")
        basis = standard_projection_basis(n)
    fg = lemma2_frame_gram(basis)
    if not fg.invertible:
        raise ValueError(f"basis Gram matrix is singular (min singular value {fg.min_singular_value:.3e})")
    n = fg.n
    fP = [np.asarray(f(P), dtype=complex) for P in fg.projections]
    gP = [np.asarray(g(P), dtype=complex) for P in fg.projections]

    pairing = np.array([[np.trace(a @ b) for b in gP] for a in fP])
    pair_res = float(np.max(np.abs(pairing - fg.gram)))
    if pair_res > tol:
        raise InconsistentInputError("trace pairing Tr(f(P_i) g(P_j)) = Tr(P_i P_j)", pair_res)

    Sf = _superoperator(fP, fg)
    Sg = _superoperator(gP, fg)

    rng = make_rng(seed, 1)
    lin = 0.0
    for _ in range(num_extra):
        Q = projection_onto(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        lin = max(
            lin,
            float(np.max(np.abs(np.asarray(f(Q)) - _apply(Sf, Q)))),
            float(np.max(np.abs(np.asarray(g(Q)) - _apply(Sg, Q)))),
        )

    def norm_sq(A):
        return float(np.linalg.norm(_apply(Sf, A)) ** 2)

    rng = make_rng(seed, 2)
    unit = 0.0
    for _ in range(num_pairs):
        A, B = ginibre(rng, n), ginibre(rng, n)
        # diagonal checks ||f(X)|| = ||X|| on the polarization combinations
        for k in range(4):
            X = A + (1j) ** k * B
            unit = max(unit, abs(norm_sq(X) - np.linalg.norm(X) ** 2))
        unit = max(unit, abs(polarized_inner(norm_sq, A, B) - hs_inner(A, B)))

    return LemmaReport(
        [
            _check("pairing", pair_res, tol),
            _check("linear_extension", lin, tol),
            _check("hs_unitary", float(unit), tol),
            _check("g_equals_f", float(np.max(np.abs(Sg - Sf))), tol),
        ]
    )


def conjugation_map(U):
    U = np.asarray(U, dtype=complex)
    return lambda P: U @ P @ U.conj().T


def transpose_map(P):
    return np.asarray(P).T.copy()


def orthogonal_map(R):
    R = np.asarray(R, dtype=float)
    return lambda a: R @ np.asarray(a, dtype=float)

