import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncrl.bloch import ConditionalProbTriple, tilted_setup, solve_state_vector, state_operator
from ncrl.operators import (
    bloch_operator,
    gell_mann_basis,
    make_rng,
    projection_from_bloch,
    random_density,
    random_hermitian,
    subseed,
)
from ncrl.tomography import (
    InconsistentTableError,
    MeasurementFrame,
    UnderdeterminedError,
    born_table,
    find_nonpsd_witness,
    frame_rank,
    in_dual_cone,
    is_valid_witness,
    pauli_frame,
    random_frame,
    ray_exit,
    reconstruct_state,
    reconstruction_residual,
    required_frame_count,
    validate_table,
    validate_witness,
)


def z_frame():
    return MeasurementFrame.from_bloch_directions([[0, 0, 1]])


def test_required_frame_count():
    assert [required_frame_count(n) for n in (2, 3, 4)] == [3, 4, 5]
    with pytest.raises(ValueError):
        required_frame_count(1)


def test_frame_rank_examples():
    assert frame_rank(z_frame()) == 2
    assert frame_rank(pauli_frame()) == 4
    assert frame_rank(random_frame(1, 3, 4)) == 9
    # repeating a measurement adds nothing
    xz = MeasurementFrame.from_bloch_directions([[1, 0, 0], [0, 0, 1], [0, 0, 1]])
    assert frame_rank(xz) == 3


def test_frame_validation():
    P = projection_from_bloch([0, 0, 1])
    with pytest.raises(ValueError):
        MeasurementFrame([(P, P)])
    with pytest.raises(ValueError):
        MeasurementFrame([])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 4))
def test_frame_rank_never_exceeds_counting_bound(seed, n):
    k = int(make_rng(seed).integers(1, n + 2))
    assert frame_rank(random_frame(seed, n, k, ensure_rank=False)) <= min(n * n, k * (n - 1) + 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_round_trip(n):
    frame = random_frame(subseed(4, n), n, n + 1)
    for t in range(20):
        W = random_density(subseed(5, n, t), n)
        R = reconstruct_state(frame, born_table(W, frame))
        assert np.max(np.abs(R - W)) <= 1e-9


def test_round_trip_non_psd_operator():
    # reconstruction is linear, so non-positive trace-1 operators come back too
    frame = pauli_frame()
    W = bloch_operator([0.7, 0.7, 0.7])
    np.testing.assert_allclose(reconstruct_state(frame, born_table(W, frame)), W, atol=1e-12)


def test_reconstruction_independent_of_basis():
    frame = random_frame(9, 3, 4)
    table = born_table(random_density(10, 3), frame)
    basis = gell_mann_basis(3)
    perm = make_rng(11).permutation(len(basis))
    flipped = [(-1) ** i * basis[j] for i, j in enumerate(perm)]
    np.testing.assert_allclose(
        reconstruct_state(frame, table), reconstruct_state(frame, table, basis=flipped), atol=1e-12
    )


def test_reconstruction_errors():
    with pytest.raises(UnderdeterminedError) as e:
        reconstruct_state(z_frame(), [[0.5, 0.5]])
    assert e.value.rank == 2
    frame = pauli_frame()
    table = born_table(np.eye(2) / 2, frame)
    table[0] = [0.9, 0.1]
    table[1] = [0.9, 0.1]
    table[2] = [0.9, 0.1]
    # z, x, y all at 0.9 is consistent; breaking a row sum is not
    reconstruct_state(frame, table)
    table[2] = [0.9, 0.3]
    with pytest.raises(InconsistentTableError):
        reconstruct_state(frame, table)
    with pytest.raises(ValueError):
        reconstruct_state(frame, table[:2])


def test_validate_table_names_row():
    with pytest.raises(ValueError, match="row 1"):
        validate_table([[0.5, 0.5], [0.7, 0.2]])
    with pytest.raises(ValueError, match="row 0"):
        validate_table([[1.1, -0.1]])


def test_in_dual_cone_examples():
    assert in_dual_cone(np.eye(2) / 2, pauli_frame())
    # diag(1.25, -0.25) against z only: entries 1.25 and -0.25
    assert not in_dual_cone(np.diag([1.25, -0.25]), z_frame())
    # the same operator passes a frame that never looks along z
    xy = MeasurementFrame.from_bloch_directions([[1, 0, 0], [0, 1, 0]])
    assert in_dual_cone(np.diag([1.25, -0.25]), xy)


def test_in_dual_cone_contains_densities():
    frame = random_frame(3, 3, 4)
    for t in range(50):
        assert in_dual_cone(random_density(subseed(6, t), 3), frame)


def test_pauli_frame_witness_example():
    W = bloch_operator([0.7, 0.7, 0.7])
    # |(0.7, 0.7, 0.7)| = 1.2124355652982141 > 1 but every entry 0.5 +- 0.35 >= 0
    assert np.linalg.eigvalsh(W)[0] == pytest.approx(0.5 * (1 - 1.2124355652982141), abs=1e-12)
    assert is_valid_witness(W, pauli_frame())
    assert not is_valid_witness(np.eye(2) / 2, pauli_frame())


def test_case1_instance_is_witness():
    setup = tilted_setup(np.pi / 3)
    frame = MeasurementFrame.from_bloch_directions(setup.directions)
    s = solve_state_vector(setup, ConditionalProbTriple(0.9, 0.9, 0.9))
    # fitted operator 1/2 + s.sigma and the literal 1/2 (1 + s.sigma) both qualify
    assert is_valid_witness(state_operator(s), frame)
    assert is_valid_witness(bloch_operator(s), frame)
    np.testing.assert_allclose(born_table(state_operator(s), frame)[:, 0], 0.9, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_witness_search(n):
    frame = random_frame(subseed(12, n), n, n + 1)
    w = find_nonpsd_witness(frame, seed=3)
    v = validate_witness(w.W, frame)
    assert v["min_eigenvalue"] < -1e-8
    assert v["min_entry"] >= -1e-10 and v["max_entry"] <= 1 + 1e-10
    assert v["row_sum_error"] <= 1e-10 and v["trace_error"] <= 1e-10
    np.testing.assert_allclose(w.constraint_slacks, born_table(w.W, frame))
    assert w.min_eigenvalue == v["min_eigenvalue"]


def test_witness_search_is_deterministic():
    frame = random_frame(2, 3, 4)
    a, b = find_nonpsd_witness(frame, seed=8), find_nonpsd_witness(frame, seed=8)
    np.testing.assert_array_equal(a.W, b.W)
    assert a.ray_index == b.ray_index


def test_witness_search_rejects_wrong_frame():
    with pytest.raises(ValueError):
        find_nonpsd_witness(random_frame(1, 3, 5))


def test_ray_exit_touches_boundary():
    frame = random_frame(7, 3, 4)
    for t in range(20):
        d = random_hermitian(subseed(7, t), 3)
        d -= np.trace(d).real / 3 * np.eye(3)
        t_exit = ray_exit(d, frame)
        table = born_table(np.eye(3) / 3 + t_exit * d, frame)
        assert table.min() == pytest.approx(0.0, abs=1e-12)


def test_reconstruction_residual():
    frame = pauli_frame()
    W = random_density(4, 2)
    assert reconstruction_residual(W, frame, born_table(W, frame)) == 0.0
