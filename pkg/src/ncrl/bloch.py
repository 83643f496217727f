"""Three yes-no measurements on C^2.

Measurements are assigned unit Bloch directions a, b, c with outcome
projections 1/2 (1 +- a.sigma). Given the "+" probabilities, the state
operator is fitted over *all* 2x2 complex matrices

    W = s0*1 + s.sigma + i*(s0p*1 + sp.sigma)

and the real parts force s0 = 1/2, s0p = 0, sp = 0, leaving
p_a = 1/2 + s.a etc. The vector ``s`` returned by :func:`solve_state_vector`
is therefore the Pauli coefficient of the fitted operator 1/2*1 + s.sigma,
whose Bloch vector (in the 1/2 (1 + v.sigma) convention) is ``2 s``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .operators import (
    DEFAULT_TOL,
    IDENTITY_2,
    PAULI,
    PauliDecomposition,
    as_hermitian,
    bloch_operator,
    bloch_vector,
    is_psd,
    min_eigenvalue,
    pauli_compose,
    projection_from_bloch,
)

TRIPLE_PRODUCT_MIN = 1e-10
DENSITY_SLACK = 1e-12


def _cross(u, v) -> np.ndarray:
    # np.cross carries heavy per-call overhead for single 3-vectors
    return np.array([u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]])


class DegenerateSetupError(ValueError):
    """Measurement directions are (numerically) linearly dependent."""


class Verdict(str, Enum):
    QUANTUM_DENSITY = "QuantumDensity"
    NONCOMMUTATIVE_ONLY = "NoncommutativeOnly"


@dataclass(frozen=True)
class ThreeMeasurementSetup:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in "abc":
            v = bloch_vector(getattr(self, name))
            if abs(np.linalg.norm(v) - 1.0) > DEFAULT_TOL:
                raise ValueError(f"direction {name} is not a unit vector (|{name}| = {np.linalg.norm(v):.12g})")
            object.__setattr__(self, name, v)
        if abs(self.triple_product) <= TRIPLE_PRODUCT_MIN:
            raise DegenerateSetupError(
                f"directions are linearly dependent (a.(b x c) = {self.triple_product:.3e})"
            )

    @property
    def triple_product(self) -> float:
        return float(np.dot(self.a, _cross(self.b, self.c)))

    @property
    def directions(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.a, self.b, self.c

    def projections(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(P+, P-) for each of a, b, c."""
        return [(projection_from_bloch(v, +1), projection_from_bloch(v, -1)) for v in self.directions]


@dataclass(frozen=True)
class ConditionalProbTriple:
    pa: float
    pb: float
    pc: float

    def __post_init__(self):
        for name in ("pa", "pb", "pc"):
            p = float(getattr(self, name))
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} = {p} is not a probability")
            object.__setattr__(self, name, p)

    def as_array(self) -> np.ndarray:
        return np.array([self.pa, self.pb, self.pc])


def tilted_setup(phi: float) -> ThreeMeasurementSetup:
    """a = x, b = (0, cos phi, -sin phi), c = z."""
    return ThreeMeasurementSetup(
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, math.cos(phi), -math.sin(phi)]),
        np.array([0.0, 0.0, 1.0]),
    )


def solve_state_vector(setup: ThreeMeasurementSetup, probs: ConditionalProbTriple) -> np.ndarray:
    """Closed-form cross-product solution of s.a = pa - 1/2 (and b, c)."""
    a, b, c = setup.directions
    num = (
        (probs.pa - 0.5) * _cross(b, c)
        + (probs.pb - 0.5) * _cross(c, a)
        + (probs.pc - 0.5) * _cross(a, b)
    )
    return num / setup.triple_product


def state_operator(s) -> np.ndarray:
    """Fitted operator 1/2*1 + s.sigma for a solved coefficient vector ``s``."""
    return pauli_compose(PauliDecomposition(0.5, s))


def fit_general_operator(setup: ThreeMeasurementSetup, probs: ConditionalProbTriple) -> PauliDecomposition:
    """Least-squares fit of a general 2x2 complex operator to all six Born equations.

    Each unknown real coefficient multiplies one of the eight real-linear
    basis operators {1, sigma_k, i*1, i*sigma_k}; the Born values Tr(B P) are
    computed numerically, so this path is independent of the cross-product
    formula.
    """
    basis = [IDENTITY_2, *PAULI, 1j * IDENTITY_2, *(1j * S for S in PAULI)]
    rows, rhs = [], []
    for (Pp, Pm), p in zip(setup.projections(), probs.as_array()):
        for P, target in ((Pp, p), (Pm, 1.0 - p)):
            vals = np.array([np.trace(B @ P) for B in basis])
            rows.append(vals.real)
            rhs.append(target)
            rows.append(vals.imag)
            rhs.append(0.0)
    x, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    d = PauliDecomposition(x[0], x[1:4], x[4], x[5:8])
    resid = born_residual(pauli_compose(d), setup, probs)
    if resid > DEFAULT_TOL:
        raise ArithmeticError(f"Born residual {resid:.3e} after fit")
    return d


def born_probability(W, P) -> float:
    """Tr(W P), rejecting a trace with a non-negligible imaginary part."""
    W = as_hermitian(W, tol=DEFAULT_TOL)
    P = np.asarray(P, dtype=complex)
    if W.shape != P.shape:
        raise ValueError(f"dimension mismatch: {W.shape[0]} vs {P.shape[0]}")
    if abs(np.trace(W).real - 1.0) > DEFAULT_TOL:
        raise ValueError(f"state operator has trace {np.trace(W).real:.12g}, expected 1")
    val = np.trace(W @ P)
    if abs(val.imag) > DEFAULT_TOL:
        raise ValueError(f"Born value has imaginary part {val.imag:.3e}; malformed operator")
    return float(val.real)


def born_residual(W, setup: ThreeMeasurementSetup, probs: ConditionalProbTriple) -> float:
    """Max |Tr(W P) - p| over the six outcome projections (complex modulus)."""
    worst = 0.0
    for (Pp, Pm), p in zip(setup.projections(), probs.as_array()):
        worst = max(worst, abs(np.trace(W @ Pp) - p), abs(np.trace(W @ Pm) - (1.0 - p)))
    return float(worst)


def classify_representation(v) -> Verdict:
    """Density verdict for the operator 1/2 (1 + v.sigma) of Bloch vector ``v``."""
    v = bloch_vector(v)
    by_norm = np.linalg.norm(v) <= 1.0 + DENSITY_SLACK
    by_spectrum = is_psd(bloch_operator(v), DEFAULT_TOL)
    if by_norm != by_spectrum and abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ArithmeticError(f"norm and spectral verdicts disagree for |v| = {np.linalg.norm(v):.15g}")
    return Verdict.QUANTUM_DENSITY if by_norm else Verdict.NONCOMMUTATIVE_ONLY


def classify_solution(s) -> Verdict:
    """Verdict for the fitted operator 1/2*1 + s.sigma (Bloch vector 2s)."""
    return classify_representation(2.0 * bloch_vector(s))


def tilted_direction(phi: float) -> np.ndarray:
    """(1, (1+cos phi+sin phi)/(1+cos phi-sin phi), 1); s = (p - 1/2) times this."""
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array([1.0, (1 + cp + sp) / (1 + cp - sp), 1.0])


def density_threshold(phi: float) -> tuple[float, float]:
    """Probabilities p above which the tilted-setup solution stops being a density.

    Returns ``(p_bloch, p_norm1)``: the true PSD boundary of the fitted
    operator (|2s| = 1) and the level where |s| itself reaches 1.
    """
    L = float(np.linalg.norm(tilted_direction(phi)))
    return 0.5 + 0.5 / L, 0.5 + 1.0 / L


# --- region scan ------------------------------------------------------------


@dataclass(frozen=True)
class ScanPoint:
    p: float
    phi: float
    s_norm: float
    is_density: bool


@dataclass(frozen=True)
class RegionScanResult:
    points: tuple[ScanPoint, ...]
    p_step: float
    phi_step: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "phi", "s_norm", "is_density"])
        for pt in self.points:
            w.writerow([f"{pt.p:.12g}", f"{pt.phi:.12g}", f"{pt.s_norm:.12g}", "true" if pt.is_density else "false"])
        return buf.getvalue()

    @property
    def density_count(self) -> int:
        return sum(pt.is_density for pt in self.points)

    @property
    def min_norm(self) -> float:
        return min(pt.s_norm for pt in self.points)


def scan_region(phi_range, p_range, steps: int) -> RegionScanResult:
    """Evaluate |s| over a (p, phi) grid for the tilted setup.

    ``is_density`` is the PSD verdict of the assembled fitted operator,
    checked against the closed-form norm criterion |2s| <= 1. phi = pi/2 is
    excluded (the closed form is 0/0 there), so a right endpoint at pi/2
    gives a half-open phi grid.
    """
    phi_min, phi_max = map(float, phi_range)
    p_min, p_max = map(float, p_range)
    steps = int(steps)
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not (0.0 < phi_min <= phi_max <= math.pi / 2):
        raise ValueError(f"phi range must lie in (0, pi/2], got [{phi_min}, {phi_max}]")
    if not (0.0 <= p_min <= p_max <= 1.0):
        raise ValueError(f"p range must lie in [0, 1], got [{p_min}, {p_max}]")

    half_open = math.isclose(phi_max, math.pi / 2, rel_tol=0, abs_tol=1e-15)
    phis = np.linspace(phi_min, phi_max, steps, endpoint=not half_open)
    ps = np.linspace(p_min, p_max, steps)
    setups = [tilted_setup(phi) for phi in phis]
    points = []
    for p in ps:
        for phi, setup in zip(phis, setups):
            s = solve_state_vector(setup, ConditionalProbTriple(p, p, p))
            norm = float(np.linalg.norm(s))
            by_norm = 2.0 * norm <= 1.0 + DENSITY_SLACK
            by_spectrum = min_eigenvalue(state_operator(s)) >= -DEFAULT_TOL
            if by_norm != by_spectrum and abs(2.0 * norm - 1.0) > 1e-9:
                raise ArithmeticError(f"density verdicts disagree at p={p}, phi={phi}")
            points.append(ScanPoint(float(p), float(phi), norm, bool(by_norm)))
    p_step = float(ps[1] - ps[0])
    phi_step = float(phis[1] - phis[0])
    return RegionScanResult(tuple(points), p_step, phi_step)
