"""Belt-map representation of spin statistics for one fixed state.

Directions are spherical (theta, phi) with the fixed state along the polar
axis z. The belt map compresses every measurement direction into the band
|cos theta'| <= 1/r via cos theta' = cos theta / r, and the state is pushed
out to g = r z. Then r cos theta' = cos theta, so every Born probability of
the fixed state is reproduced while 1/2 (1 + g.sigma) has eigenvalue
(1 - r)/2 < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import IDENTITY_2, PAULI, make_rng

ARCCOS_GUARD = 1e-12
ARCCOS_FAIL = 1e-9
POLE = np.array([0.0, 0.0, 1.0])

_PAULI_STACK = np.stack(PAULI)


@dataclass(frozen=True)
class SphericalDirection:
    theta: float
    phi: float

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"theta = {theta} outside [0, pi]")
        if not 0.0 <= phi < 2 * math.pi:
            raise ValueError(f"phi = {phi} outside [0, 2pi)")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def to_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_vector(cls, v) -> SphericalDirection:
        theta, phi = to_spherical(np.asarray(v, dtype=float))
        return cls(float(theta), float(phi))


@dataclass(frozen=True)
class BeltParameters:
    r: float

    def __post_init__(self):
        r = float(self.r)
        if not (r > 1.0 and math.isfinite(r)):
            raise ValueError(f"belt radius must satisfy r > 1, got {r}")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class Counterpair:
    a: np.ndarray
    s: np.ndarray
    discrepancy: float
    sample_index: int


def safe_arccos(x):
    x = np.asarray(x, dtype=float)
    over = np.max(np.abs(x)) - 1.0 if x.size else 0.0
    if over > ARCCOS_FAIL:
        raise ValueError(f"arccos argument exceeds [-1, 1] by {over:.3e}")
    return np.arccos(np.clip(x, -1.0, 1.0))


def to_spherical(v):
    """(theta, phi) of unit vector(s) ``v`` with phi in [0, 2pi)."""
    v = np.asarray(v, dtype=float)
    theta = safe_arccos(v[..., 2] / np.linalg.norm(v, axis=-1))
    phi = np.mod(np.arctan2(v[..., 1], v[..., 0]), 2 * math.pi)
    # mod can round a tiny negative angle up to exactly 2pi
    phi = np.where(phi >= 2 * math.pi, 0.0, phi)
    return theta, phi


def from_spherical(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def belt_angles(theta, phi, r: float):
    """Vectorized belt map on spherical angles."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta_b = safe_arccos(np.cos(theta) / r)
    phi_b = np.where(theta == 0.0, 0.0, np.where(theta == math.pi, math.pi, phi))
    return theta_b, phi_b


def belt_f(a: SphericalDirection, params: BeltParameters) -> SphericalDirection:
    theta_b, phi_b = belt_angles(a.theta, a.phi, params.r)
    return SphericalDirection(float(theta_b), float(phi_b))


def belt_g(params: BeltParameters) -> np.ndarray:
    """Pushed-out state vector r * z for the fixed state z."""
    return params.r * POLE


def belt_map(params: BeltParameters):
    """The belt map as a function on Cartesian unit vectors (single or batched)."""

    def f(a):
        theta, phi = to_spherical(a)
        return from_spherical(*belt_angles(theta, phi, params.r))

    return f


def covariant_state_map(params: BeltParameters):
    """Extension of g to every state by rotating the pole: g(s) = r * s.

    Only the value at the pole is fixed by the construction; this extension
    is one choice and exists to show that *it* breaks the inner products.
    """

    def g(s):
        return params.r * np.asarray(s, dtype=float)

    return g


def sample_directions(seed, num: int, *stream) -> np.ndarray:
    """Uniform unit vectors on the sphere."""
    v = make_rng(seed, *stream).standard_normal((int(num), 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _bloch_ops(vectors, sign=+1):
    """Batch of 1/2 (1 + sign * v.sigma)."""
    return 0.5 * (IDENTITY_2 + sign * np.einsum("ni,ijk->njk", np.atleast_2d(vectors), _PAULI_STACK))


def verify_belt_born(params: BeltParameters, num_samples: int, seed=0) -> float:
    """Max |Tr(W_z P_a) - Tr(W_g P_f(a))| over both outcomes and sampled a.

    The first term is the standard Bloch-sphere probability 1/2 (1 +- a.z);
    the second uses the belt directions and the non-density state operator.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    a = sample_directions(seed, num_samples)
    fa = belt_map(params)(a)
    W_std = _bloch_ops(POLE)[0]
    W_belt = _bloch_ops(belt_g(params))[0]
    worst = 0.0
    for sign in (+1, -1):
        p_std = np.einsum("jk,nkj->n", W_std, _bloch_ops(a, sign)).real
        p_belt = np.einsum("jk,nkj->n", W_belt, _bloch_ops(fa, sign))
        if np.max(np.abs(p_belt.imag)) > 1e-12:
            raise ArithmeticError("complex Born value")
        worst = max(worst, float(np.max(np.abs(p_std - p_belt.real))))
    return worst


def belt_image_gap(params: BeltParameters, num_samples: int = 10_000, seed=0) -> float:
    """Half-angle arccos(1/r) of the polar caps missed by the belt map.

    Sampled images (plus both poles) are checked to stay outside the caps.
    """
    gap = math.acos(1.0 / params.r)
    a = np.vstack([POLE, -POLE, sample_directions(seed, num_samples)])
    theta_b, _ = to_spherical(belt_map(params)(a))
    if np.any(theta_b < gap - ARCCOS_GUARD) or np.any(theta_b > math.pi - gap + ARCCOS_GUARD):
        raise ArithmeticError("belt image entered an excluded polar cap")
    return gap


def belt_full_content_falsifier(
    params: BeltParameters,
    seed=0,
    max_samples: int = 100_000,
    threshold: float = 1e-6,
    batch: int = 4096,
):
    """Search sampled (a, s) pairs for a broken inner product a.s != f(a).g(s).

    Uses the covariant extension of g. Returns the first violating pair in
    sample order, or ``None`` if none exceeds ``threshold``.
    """
    f = belt_map(params)
    g = covariant_state_map(params)
    done = 0
    chunk = 0
    while done < max_samples:
        m = min(batch, max_samples - done)
        a = sample_directions(seed, m, chunk, 0)
        s = sample_directions(seed, m, chunk, 1)
        disc = np.abs(np.sum(a * s, axis=1) - np.sum(f(a) * g(s), axis=1))
        hit = np.flatnonzero(disc > threshold)
        if hit.size:
            i = int(hit[0])
            return Counterpair(a[i], s[i], float(disc[i]), done + i)
        done += m
        chunk += 1
    return None
