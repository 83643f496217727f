"""k projective measurements with n outcomes.

A frame of k complete orthogonal measurements fixes k(n-1)+1 independent
trace functionals; for k = n+1 that is n^2 and the state operator is
unique. Uniqueness does not make it positive: the cone D generated by the
frame's projections is strictly smaller than the PSD cone, so its dual D*
is strictly larger, and any trace-1 element of D* outside the PSD cone
reproduces valid probability tables without being a density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    DEFAULT_TOL,
    as_hermitian,
    as_minimal_projection,
    gell_mann_basis,
    haar_unitary,
    make_rng,
    min_eigenvalue,
    projection_from_bloch,
    projection_onto,
)

RANK_TOL = 1e-8
RECONSTRUCT_INCONSISTENT = 1e-6
WITNESS_STEP = 0.999
WITNESS_MIN_EIG = -1e-8
FRAME_RETRIES = 100


class UnderdeterminedError(ValueError):
    def __init__(self, rank: int, needed: int):
        super().__init__(f"frame spans a {rank}-dimensional space; {needed} needed for a unique state")
        self.rank = rank
        self.needed = needed


class InconsistentTableError(ValueError):
    def __init__(self, residual: float):
        super().__init__(f"no operator reproduces the table (least-squares residual {residual:.3e})")
        self.residual = residual


class SearchExhaustedError(RuntimeError):
    pass


def required_frame_count(n: int) -> int:
    """Measurements needed to pin down an n x n state: (n+1)(n-1)+1 = n^2."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    return n + 1


@dataclass(frozen=True)
class MeasurementFrame:
    """k measurements, each a complete set of n orthogonal minimal projections."""

    measurements: tuple[tuple[np.ndarray, ...], ...]
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        ms = tuple(tuple(as_minimal_projection(P, tol=self.tol) for P in m) for m in self.measurements)
        if not ms:
            raise ValueError("frame needs at least one measurement")
        n = ms[0][0].shape[0]
        eye = np.eye(n)
        for i, m in enumerate(ms):
            if len(m) != n or any(P.shape != (n, n) for P in m):
                raise ValueError(f"measurement {i} must have {n} projections of dimension {n}")
            total = sum(m)
            if np.max(np.abs(total - eye)) > self.tol:
                raise ValueError(f"projections of measurement {i} do not sum to the identity")
            for j in range(n):
                for l in range(j + 1, n):
                    overlap = abs(np.trace(m[j] @ m[l]))
                    if overlap > self.tol:
                        raise ValueError(f"measurement {i}: outcomes {j},{l} not orthogonal (Tr = {overlap:.3e})")
        object.__setattr__(self, "measurements", ms)

    @property
    def n(self) -> int:
        return self.measurements[0][0].shape[0]

    @property
    def k(self) -> int:
        return len(self.measurements)

    def projections(self) -> list[np.ndarray]:
        return [P for m in self.measurements for P in m]

    @classmethod
    def from_unitaries(cls, unitaries) -> MeasurementFrame:
        """Each measurement is the eigenbasis U|j> of one unitary."""
        return cls(tuple(tuple(projection_onto(U[:, j]) for j in range(U.shape[0])) for U in unitaries))

    @classmethod
    def from_bloch_directions(cls, directions) -> MeasurementFrame:
        return cls(tuple((projection_from_bloch(v, +1), projection_from_bloch(v, -1)) for v in directions))


def pauli_frame() -> MeasurementFrame:
    """z, x, y measurements on C^2."""
    return MeasurementFrame.from_bloch_directions([(0, 0, 1), (1, 0, 0), (0, 1, 0)])


def trace_gram(projections) -> np.ndarray:
    """g_ij = Tr(P_i P_j), real for Hermitian arguments."""
    X = np.array([np.asarray(P).ravel() for P in projections])
    # Tr(P_i P_j) = vec(P_i)^* . vec(P_j) for Hermitian P_i
    return (X.conj() @ X.T).real


def gram_rank(projections, tol: float = RANK_TOL) -> int:
    sv = np.linalg.svd(trace_gram(projections), compute_uv=False)
    return int(np.sum(sv > tol))


def frame_rank(frame: MeasurementFrame, tol: float = RANK_TOL) -> int:
    """Dimension of the real span of the frame's projections."""
    return gram_rank(frame.projections(), tol)


def random_frame(seed, n: int, k: int, ensure_rank: bool = True) -> MeasurementFrame:
    """k eigenbases of seeded Haar unitaries.

    With ``ensure_rank`` the draw is repeated on fresh sub-streams until the
    frame reaches rank min(k(n-1)+1, n^2).
    """
    if n < 2 or k < 1:
        raise ValueError(f"need n >= 2 and k >= 1, got n={n}, k={k}")
    target = min(k * (n - 1) + 1, n * n)
    for attempt in range(FRAME_RETRIES if ensure_rank else 1):
        rng = make_rng(seed, attempt)
        frame = MeasurementFrame.from_unitaries([haar_unitary(rng, n) for _ in range(k)])
        if not ensure_rank or frame_rank(frame) == target:
            return frame
    raise RuntimeError(f"rank {target} not reached in {FRAME_RETRIES} draws (seed={seed})")


def born_table(W, frame: MeasurementFrame) -> np.ndarray:
    """k x n table of Tr(W P_i^j). Entries go negative only if W is outside D*."""
    W = as_hermitian(W, tol=DEFAULT_TOL)
    if W.shape[0] != frame.n:
        raise ValueError(f"dimension mismatch: state {W.shape[0]}, frame {frame.n}")
    return np.array([[np.trace(W @ P).real for P in m] for m in frame.measurements])


def validate_table(table, tol_neg: float = 1e-12, tol_sum: float = DEFAULT_TOL) -> np.ndarray:
    t = np.asarray(table, dtype=float)
    if t.ndim != 2:
        raise ValueError("probability table must be two-dimensional")
    for i, row in enumerate(t):
        if np.any(row < -tol_neg):
            raise ValueError(f"row {i}: negative probability {row.min():.3e}")
        if abs(row.sum() - 1.0) > tol_sum:
            raise ValueError(f"row {i}: sums to {row.sum():.15g}, expected 1")
    return t


def _design_matrix(frame: MeasurementFrame, basis) -> np.ndarray:
    return np.array([[np.vdot(B, P).real for B in basis] for P in frame.projections()])


def reconstruct_state(frame: MeasurementFrame, table, basis=None) -> np.ndarray:
    """Unique Hermitian W with Tr(W P_i^j) = table[i][j] (least squares).

    ``basis`` is any orthonormal Hermitian basis; defaults to the
    generalized Gell-Mann basis with identity first.
    """
    n = frame.n
    t = np.asarray(table, dtype=float)
    if t.shape != (frame.k, n):
        raise ValueError(f"table shape {t.shape} does not match frame ({frame.k}, {n})")
    rank = frame_rank(frame)
    if rank < n * n:
        raise UnderdeterminedError(rank, n * n)
    if basis is None:
        basis = gell_mann_basis(n)
    A = _design_matrix(frame, basis)
    b = t.ravel()
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A @ x - b)))
    if resid > RECONSTRUCT_INCONSISTENT:
        raise InconsistentTableError(resid)
    W = sum(c * B for c, B in zip(x, basis))
    return 0.5 * (W + W.conj().T)


def reconstruction_residual(W, frame: MeasurementFrame, table) -> float:
    return float(np.max(np.abs(born_table(W, frame) - np.asarray(table))))


def in_dual_cone(W, frame: MeasurementFrame, tol: float = DEFAULT_TOL) -> bool:
    """Membership in D*: checking the finitely many generators suffices."""
    return bool(np.all(born_table(W, frame) >= -tol))


@dataclass(frozen=True)
class DualConeWitness:
    """Trace-1 operator in D* but outside the PSD cone."""

    W: np.ndarray
    min_eigenvalue: float
    constraint_slacks: np.ndarray
    direction_seed: int
    ray_index: int


def _traceless_direction(rng: np.random.Generator, n: int, basis) -> np.ndarray:
    x = rng.standard_normal(len(basis) - 1)
    x /= np.linalg.norm(x)
    return sum(c * B for c, B in zip(x, basis[1:]))


def _fallback_directions(n: int):
    """-(|f><f| - 1/n) for the Fourier basis vectors f."""
    eye = np.eye(n) / n
    for j in range(n):
        f = np.exp(2j * math.pi * j * np.arange(n) / n)
        yield -(projection_onto(f) - eye)


def ray_exit(delta, frame: MeasurementFrame) -> float:
    """Largest t with Tr((1/n + t*delta) P) >= 0 for every frame projection."""
    n = frame.n
    slopes = np.array([np.trace(delta @ P).real for P in frame.projections()])
    neg = slopes < 0
    if not np.any(neg):
        return math.inf
    return float(np.min((1.0 / n) / -slopes[neg]))


def find_nonpsd_witness(frame: MeasurementFrame, seed=0, max_rays: int = 10_000) -> DualConeWitness:
    """Shoot rays from 1/n to the boundary of D* and keep the first non-PSD point.

    Directions are Gaussian in traceless Gell-Mann coordinates, drawn from
    sub-stream ``(seed, ray)``; a few deterministic Fourier directions are
    tried once the random budget is spent.
    """
    n, k = frame.n, frame.k
    if k != n + 1 or frame_rank(frame) != n * n:
        raise ValueError(f"witness search needs an independent frame with k = n+1 = {n + 1} measurements")
    basis = gell_mann_basis(n)
    center = np.eye(n, dtype=complex) / n

    def candidates():
        for ray in range(max_rays):
            yield ray, _traceless_direction(make_rng(seed, ray), n, basis)
        for j, d in enumerate(_fallback_directions(n)):
            yield max_rays + j, d

    for ray, delta in candidates():
        t = ray_exit(delta, frame)
        if not math.isfinite(t):
            continue
        W = center + WITNESS_STEP * t * delta
        W = 0.5 * (W + W.conj().T)
        lam = min_eigenvalue(W)
        if lam < WITNESS_MIN_EIG:
            slacks = born_table(W, frame)
            return DualConeWitness(W, lam, slacks, int(seed), ray)
    raise SearchExhaustedError(f"no non-PSD point of D* found in {max_rays} rays")


def validate_witness(W, frame: MeasurementFrame) -> dict:
    """Re-check the witness contract from scratch; returns the measured quantities."""
    table = born_table(W, frame)
    return {
        "trace_error": abs(np.trace(W).real - 1.0),
        "min_eigenvalue": min_eigenvalue(W),
        "min_entry": float(table.min()),
        "max_entry": float(table.max()),
        "row_sum_error": float(np.max(np.abs(table.sum(axis=1) - 1.0))),
        "in_dual_cone": in_dual_cone(W, frame),
    }


def is_valid_witness(W, frame: MeasurementFrame) -> bool:
    v = validate_witness(W, frame)
    return (
        v["trace_error"] <= DEFAULT_TOL
        and v["min_eigenvalue"] < WITNESS_MIN_EIG
        and v["min_entry"] >= -DEFAULT_TOL
        and v["max_entry"] <= 1.0 + DEFAULT_TOL
        and v["row_sum_error"] <= DEFAULT_TOL
        and v["in_dual_cone"]
    )

