import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ncrl.operators import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DimensionError,
    NotHermitianError,
    PauliDecomposition,
    as_minimal_projection,
    bloch_operator,
    eigen_hermitian,
    gell_mann_basis,
    hermitian_coordinates,
    is_density,
    is_psd,
    jacobi_eigh,
    make_rng,
    negative_eigenprojection,
    pauli_compose,
    pauli_decompose,
    projection_from_bloch,
    random_density,
    random_hermitian,
    random_minimal_projection,
    random_unitary,
    subseed,
    trace_inner_product,
)

PZ_PLUS = np.diag([1.0, 0.0]).astype(complex)
PX_PLUS = 0.5 * np.ones((2, 2), dtype=complex)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_trace_inner_product_examples():
    assert trace_inner_product(np.eye(2), np.eye(2)) == 2
    # hand multiplication: diag(1,0) . 1/2[[1,1],[1,1]] has trace 1/2
    assert trace_inner_product(PZ_PLUS, PX_PLUS) == pytest.approx(0.5, abs=1e-15)
    P = random_minimal_projection(3, 4)
    assert trace_inner_product(P, P) == pytest.approx(1.0, abs=1e-12)


def test_trace_inner_product_dimension_mismatch():
    with pytest.raises(DimensionError):
        trace_inner_product(np.eye(2), np.eye(3))


@pytest.mark.parametrize("seed", range(20))
def test_trace_inner_product_hermitian_real_symmetric(seed):
    n = 2 + seed % 4
    A, B = random_hermitian(subseed(seed, 0), n), random_hermitian(subseed(seed, 1), n)
    ab, ba = trace_inner_product(A, B), trace_inner_product(B, A)
    assert abs(ab.imag) < 1e-12
    assert ab == pytest.approx(ba, abs=1e-12)


def test_eigen_examples():
    (l0, P0), (l1, P1) = eigen_hermitian(np.diag([1.0, 0.0]))
    assert (l0, l1) == (0.0, 1.0)
    np.testing.assert_allclose(P0, np.diag([0, 1]), atol=1e-12)
    np.testing.assert_allclose(P1, np.diag([1, 0]), atol=1e-12)

    (l0, P0), (l1, P1) = eigen_hermitian(0.5 * (IDENTITY_2 + SIGMA_X))
    assert l0 == pytest.approx(0.0, abs=1e-14) and l1 == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(P0, 0.5 * (IDENTITY_2 - SIGMA_X), atol=1e-12)
    np.testing.assert_allclose(P1, 0.5 * (IDENTITY_2 + SIGMA_X), atol=1e-12)

    [(lam, P)] = eigen_hermitian(np.eye(4) / 4)
    assert lam == pytest.approx(0.25)
    np.testing.assert_allclose(P, np.eye(4), atol=1e-12)


def test_eigen_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eigen_hermitian(np.array([[0, 1], [0, 0]]))


def test_eigen_reconstruction_500_matrices():
    worst = 0.0
    for t in range(500):
        n = 2 + t % 5
        A = random_hermitian(subseed(11, t), n)
        parts = eigen_hermitian(A)
        lams = [lam for lam, _ in parts]
        assert lams == sorted(lams)
        total = sum(P for _, P in parts)
        worst = max(worst, np.max(np.abs(total - np.eye(n))))
        worst = max(worst, np.max(np.abs(sum(lam * P for lam, P in parts) - A)))
        for i, (_, P) in enumerate(parts):
            for _, Q in parts[i + 1 :]:
                assert np.max(np.abs(P @ Q)) < 1e-10
    assert worst <= 1e-10


def test_jacobi_matches_lapack():
    for t in range(200):
        n = 2 + t % 7
        A = random_hermitian(subseed(5, t), n)
        np.testing.assert_allclose(jacobi_eigh(A)[0], np.linalg.eigvalsh(A), atol=1e-12)


def test_degenerate_cluster_merged():
    U = random_unitary(4, 3)
    A = U @ np.diag([0.2, 0.2 + 1e-10, 0.6]) @ U.conj().T
    parts = eigen_hermitian(A)
    assert len(parts) == 2
    assert np.trace(parts[0][1]).real == pytest.approx(2.0)
    np.testing.assert_allclose(sum(lam * P for lam, P in parts), A, atol=1e-9)


def test_is_psd_examples():
    assert is_psd(np.eye(2) / 2)
    # 1/2 (1 + 1.5 sigma_z) = diag(1.25, -0.25)
    assert not is_psd(0.5 * (IDENTITY_2 + 1.5 * SIGMA_Z))
    assert is_psd(random_minimal_projection(9, 3))
    with pytest.raises(ValueError):
        is_psd(np.eye(2), tol=-1)


def test_is_density_examples():
    assert is_density(np.eye(2) / 2)
    assert not is_density(np.eye(2))
    assert not is_density(bloch_operator([0.0, 0.0, 1.99]))
    assert is_density(bloch_operator([0.0, 0.6, 0.8]))


def test_pauli_examples():
    np.testing.assert_allclose(pauli_compose(PauliDecomposition(0.5, [0, 0, 0])), np.eye(2) / 2)
    d = pauli_decompose(0.5 * (IDENTITY_2 + SIGMA_Z))
    assert d.s0 == pytest.approx(0.5)
    np.testing.assert_allclose(d.s, [0, 0, 0.5])
    d = pauli_decompose(SIGMA_Y)
    assert d.s0 == 0 and d.s0p == 0
    np.testing.assert_allclose(d.s, [0, 1, 0])
    np.testing.assert_allclose(d.sp, [0, 0, 0])
    with pytest.raises(DimensionError):
        pauli_decompose(np.eye(3))


def test_pauli_round_trip_500_random():
    rng = make_rng(2024)
    worst = 0.0
    for _ in range(500):
        M = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        worst = max(worst, np.max(np.abs(pauli_compose(pauli_decompose(M)) - M)))
    assert worst <= 1e-12


@given(arrays(np.float64, 8, elements=finite))
def test_pauli_decompose_inverts_compose(x):
    d = PauliDecomposition(x[0], x[1:4], x[4], x[5:8])
    back = pauli_decompose(pauli_compose(d))
    np.testing.assert_allclose([back.s0, *back.s, back.s0p, *back.sp], x, atol=1e-12)


def test_projection_from_bloch_examples():
    np.testing.assert_allclose(projection_from_bloch([0, 0, 1], +1), np.diag([1, 0]))
    np.testing.assert_allclose(projection_from_bloch([1, 0, 0], +1), PX_PLUS)
    np.testing.assert_allclose(projection_from_bloch([0, 0, 1], -1), np.diag([0, 1]))
    with pytest.raises(ValueError):
        projection_from_bloch([0, 0, 1.1])


@given(arrays(np.float64, 3, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_bloch_projections_complete(v):
    a = v / np.linalg.norm(v)
    Pp, Pm = projection_from_bloch(a, +1), projection_from_bloch(a, -1)
    as_minimal_projection(Pp)
    as_minimal_projection(Pm)
    np.testing.assert_allclose(Pp + Pm, np.eye(2), atol=1e-12)


def test_random_generator_contracts():
    U = random_unitary(1, 2)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(2), atol=1e-10)
    rho = random_density(7, 3)
    w = np.linalg.eigvalsh(rho)
    assert np.all(w >= -1e-12) and w.sum() == pytest.approx(1.0)
    P = random_minimal_projection(3, 4)
    assert np.trace(P).real == pytest.approx(1.0)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    with pytest.raises(DimensionError):
        random_unitary(0, 1)


def test_random_generators_are_deterministic():
    np.testing.assert_array_equal(random_unitary(5, 3), random_unitary(5, 3))
    assert not np.allclose(random_unitary(5, 3), random_unitary(6, 3))
    with pytest.raises(ValueError):
        make_rng(-1)
    with pytest.raises(ValueError):
        make_rng(2**64)


def test_gell_mann_basis_orthonormal():
    for n in (2, 3, 4):
        B = gell_mann_basis(n)
        assert len(B) == n * n
        G = np.array([[np.vdot(a, b) for b in B] for a in B])
        np.testing.assert_allclose(G, np.eye(n * n), atol=1e-14)
        A = random_hermitian(n, n)
        x = hermitian_coordinates(A, B)
        np.testing.assert_allclose(sum(c * b for c, b in zip(x, B)), A, atol=1e-12)


def _psd(seed, n):
    G = make_rng(seed).standard_normal((n, n)) + 1j * make_rng(seed, 1).standard_normal((n, n))
    return G @ G.conj().T


def test_fejer_positive_direction():
    worst = np.inf
    for t in range(500):
        n = 2 + t % 3
        worst = min(worst, np.trace(_psd(subseed(1, t), n) @ _psd(subseed(2, t), n)).real)
    assert worst >= -1e-10


def test_fejer_negative_direction():
    checked = 0
    for t in range(300):
        A = random_hermitian(subseed(3, t), 2 + t % 3)
        Q = negative_eigenprojection(A)
        if np.linalg.eigvalsh(A)[0] < 0:
            assert Q is not None
            assert np.trace(A @ Q).real < 0
            checked += 1
        else:
            assert Q is None
    assert checked > 100


@settings(max_examples=200)
@given(st.integers(0, 2**32))
def test_polarization_identity_hermitian(seed):
    A, B = random_hermitian(subseed(seed, 0), 3), random_hermitian(subseed(seed, 1), 3)

    def ip(X, Y):
        return trace_inner_product(X, Y).real

    assert ip(A, B) == pytest.approx(0.25 * (ip(A + B, A + B) - ip(A - B, A - B)), abs=1e-10)
