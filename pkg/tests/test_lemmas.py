import numpy as np
import pytest

from ncrl.belt import BeltParameters, belt_map, covariant_state_map
from ncrl.lemmas import (
    InconsistentInputError,
    conjugation_map,
    hs_inner,
    lemma1_verify,
    lemma2_frame_gram,
    lemma2_verify,
    orthogonal_map,
    polarized_inner,
    random_rotation,
    standard_projection_basis,
    transpose_map,
)
from ncrl.operators import ginibre, make_rng, projection_from_bloch, random_unitary, subseed

GRAM_N2 = np.array([[1, 0, 0.5, 0.5], [0, 1, 0.5, 0.5], [0.5, 0.5, 1, 0.5], [0.5, 0.5, 0.5, 1]])


def test_random_rotation_is_special_orthogonal():
    for t in range(20):
        R = random_rotation(t)
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-14)
        assert np.linalg.det(R) == pytest.approx(1.0)


def test_lemma1_identity_and_rotations():
    rep = lemma1_verify(lambda a: a, lambda a: a)
    assert rep.passed and rep.is_linear_extension and rep.g_equals_f
    for t in range(10):
        R = random_rotation(subseed(1, t))
        assert lemma1_verify(orthogonal_map(R), orthogonal_map(R), seed=t).passed


def test_lemma1_reflection_passes():
    R = np.diag([1.0, 1.0, -1.0])
    assert lemma1_verify(orthogonal_map(R), orthogonal_map(R)).passed


def test_lemma1_scaled_rotation_rejected():
    R = random_rotation(3)
    with pytest.raises(InconsistentInputError) as e:
        lemma1_verify(orthogonal_map(1.1 * R), orthogonal_map(1.1 * R))
    assert e.value.residual == pytest.approx(0.21, abs=1e-12)


def test_lemma1_belt_pair_rejected():
    params = BeltParameters(2.0)
    with pytest.raises(InconsistentInputError):
        lemma1_verify(belt_map(params), covariant_state_map(params))


def test_lemma1_nonlinear_map_flagged():
    # agrees with the identity on the basis but not elsewhere
    def f(a):
        a = np.asarray(a, dtype=float)
        return a if np.count_nonzero(np.abs(a) > 1e-12) == 1 else -a

    rep = lemma1_verify(f, f)
    assert rep["biorthogonality"].passed and not rep.is_linear_extension


def test_lemma1_biorthogonal_non_orthogonal_pair():
    A = np.array([[1.0, 0.5, 0], [0, 1.0, 0], [0, 0, 1.0]])
    rep = lemma1_verify(orthogonal_map(A), orthogonal_map(np.linalg.inv(A).T))
    assert rep["biorthogonality"].passed and rep.is_linear_extension
    assert not rep["orthogonal"].passed and not rep.g_equals_f


def test_standard_basis_gram_n2():
    fg = lemma2_frame_gram(standard_projection_basis(2))
    np.testing.assert_allclose(fg.gram, GRAM_N2, atol=1e-15)
    assert fg.invertible


def test_gram_singular_example():
    basis = [projection_from_bloch(a, s) for a in ([0, 0, 1], [1, 0, 0]) for s in (1, -1)]
    assert not lemma2_frame_gram(basis).invertible
    with pytest.raises(ValueError, match="singular"):
        lemma2_verify(lambda P: P, lambda P: P, basis=basis)


def test_gram_wrong_count():
    with pytest.raises(ValueError):
        lemma2_frame_gram(standard_projection_basis(2)[:3])


@pytest.mark.parametrize("n", [2, 3])
def test_lemma2_unitary_conjugation(n):
    U = random_unitary(subseed(2, n), n)
    rep = lemma2_verify(conjugation_map(U), conjugation_map(U), n=n, num_pairs=50)
    assert rep.passed
    assert {c.name for c in rep.checks} == {"pairing", "linear_extension", "hs_unitary", "g_equals_f"}


def test_lemma2_transpose_passes():
    assert lemma2_verify(transpose_map, transpose_map, n=3, num_pairs=50).passed


def test_lemma2_mismatched_rejected():
    U, V = random_unitary(1, 2), random_unitary(2, 2)
    with pytest.raises(InconsistentInputError):
        lemma2_verify(conjugation_map(U), conjugation_map(V), n=2)


def test_lemma2_needs_basis_or_n():
    with pytest.raises(ValueError):
        lemma2_verify(transpose_map, transpose_map)


def test_polarized_inner_matches_direct():
    rng = make_rng(5)
    for _ in range(50):
        A, B = ginibre(rng, 3), ginibre(rng, 3)
        got = polarized_inner(lambda X: np.linalg.norm(X) ** 2, A, B)
        assert got == pytest.approx(hs_inner(A, B), abs=1e-10)
