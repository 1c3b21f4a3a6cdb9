import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cosparse_lp.model import (AnalysisOperator, InvalidDimensionError, InvalidPartitionError,
                               analyze_cosupport, build_problem, frame_bounds,
                               generate_cosparse_signal, lp_norm, lp_norm_pow,
                               make_gaussian_measurement, make_random_parseval_frame,
                               partition_supports, subvector)
from cosparse_lp.rng import child_seeds, make_rng


def test_rng_is_pcg64_and_reproducible():
    a = make_rng(5).standard_normal(4)
    b = np.random.Generator(np.random.PCG64(5)).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert child_seeds(1, 3) == child_seeds(1, 3)
    assert len(set(child_seeds(1, 3))) == 3


@pytest.mark.parametrize("n,d", [(8, 4), (12, 12), (60, 30)])
def test_parseval_frame(n, d):
    omega = make_random_parseval_frame(n, d, seed=3)
    assert omega.matrix.shape == (n, d)
    assert omega.is_parseval
    np.testing.assert_allclose(omega.matrix.T @ omega.matrix, np.eye(d), atol=1e-12)
    assert omega.lower_bound == pytest.approx(1.0)
    assert omega.upper_bound == pytest.approx(1.0)


def test_parseval_frame_deterministic():
    a = make_random_parseval_frame(10, 5, 1).matrix
    b = make_random_parseval_frame(10, 5, 1).matrix
    np.testing.assert_array_equal(a, b)


def test_frame_rejects_bad_dimensions():
    with pytest.raises(InvalidDimensionError):
        make_random_parseval_frame(3, 5, 0)
    with pytest.raises(InvalidDimensionError):
        AnalysisOperator.from_matrix(np.ones(4))


def test_frame_bounds_of_scaled_identity():
    lo, hi = frame_bounds(2.0 * np.eye(3))
    assert lo == pytest.approx(4.0) and hi == pytest.approx(4.0)
    assert not AnalysisOperator.from_matrix(2.0 * np.eye(3)).is_parseval


def test_cosparse_signal_cosupport():
    omega = make_random_parseval_frame(8, 4, 5)
    sig = generate_cosparse_signal(omega, 2, 5)
    assert np.max(np.abs(omega.matrix[list(sig.cosupport)] @ sig.x)) <= 1e-10
    assert sig.cosparsity >= 2
    assert np.linalg.norm(sig.x) == pytest.approx(1.0)
    lam, ell = analyze_cosupport(omega, sig.x)
    assert lam == sig.cosupport and ell == sig.cosparsity


def test_identity_operator_cosupport_is_zero_set():
    omega = AnalysisOperator.from_matrix(np.eye(5))
    lam, ell = analyze_cosupport(omega, np.array([0.0, 1.0, 0.0, -2.0, 0.0]))
    assert lam == (0, 2, 4) and ell == 3


def test_cosparsity_out_of_range():
    omega = make_random_parseval_frame(8, 4, 5)
    with pytest.raises(InvalidDimensionError):
        generate_cosparse_signal(omega, 9, 0)


def test_build_problem_noise_level():
    omega = make_random_parseval_frame(8, 4, 1)
    sig = generate_cosparse_signal(omega, 2, 2)
    A = make_gaussian_measurement(3, 4, 3)
    prob = build_problem(A, omega, sig, 0.1, 4)
    assert np.linalg.norm(prob.noise) == pytest.approx(0.09)
    assert prob.residual(sig.x) == pytest.approx(0.09)
    exact = build_problem(A, omega, sig, 0.0, 4)
    assert exact.residual(sig.x) == 0.0


def test_build_problem_dimension_mismatch():
    omega = make_random_parseval_frame(8, 4, 1)
    sig = generate_cosparse_signal(omega, 2, 2)
    with pytest.raises(InvalidDimensionError):
        build_problem(np.ones((3, 5)), omega, sig, 0.1, 0)


def test_partition_example():
    z = np.array([0.1, -5.0, 3.0, 0.0, 2.0, -1.0, 0.5])
    part = partition_supports(z, 2, 2)
    assert part.S0.tolist() == [1, 2]
    assert [b.tolist() for b in part.blocks] == [[4, 5], [6, 0], [3]]
    assert part.has_short_block and part.J == 3


def test_partition_ties_use_lower_index():
    part = partition_supports(np.ones(5), 2, 2)
    assert part.S0.tolist() == [0, 1]
    assert [b.tolist() for b in part.blocks] == [[2, 3], [4]]


def test_partition_rejects_bad_sizes():
    with pytest.raises(InvalidPartitionError):
        partition_supports(np.ones(3), 3, 1)
    with pytest.raises(InvalidPartitionError):
        partition_supports(np.ones(3), 1, 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=30), st.integers(1, 5), st.integers(1, 6))
def test_partition_is_sorted_permutation(values, s, M):
    z = np.array(values)
    if s >= z.size:
        s = z.size - 1
    part = partition_supports(z, s, M)
    assert sorted(part.order.tolist()) == list(range(z.size))
    mags = np.abs(z[part.order])
    assert np.all(np.diff(mags) <= 0)
    assert all(len(b) == M for b in part.blocks[:-1])


def test_lp_norms():
    x = np.array([3.0, -4.0])
    assert lp_norm(x, 1.0) == pytest.approx(7.0)
    assert lp_norm_pow(x, 0.5) == pytest.approx(np.sqrt(3) + 2)
    assert subvector(x, [1]).tolist() == [-4.0]


def test_square_frame_is_orthogonal():
    omega = make_random_parseval_frame(4, 4, 1)
    np.testing.assert_allclose(omega.matrix @ omega.matrix.T, np.eye(4), atol=1e-10)
    lo, hi = frame_bounds(make_random_parseval_frame(6, 3, 3).matrix)
    assert abs(lo - 1) <= 1e-10 and abs(hi - 1) <= 1e-10


def test_frame_bounds_non_tight():
    lo, hi = frame_bounds(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    assert lo == pytest.approx(1.0) and hi == pytest.approx(3.0)


def test_zero_signal_has_full_cosupport():
    omega = make_random_parseval_frame(6, 3, 0)
    lam, ell = analyze_cosupport(omega, np.zeros(3))
    assert ell == 6 and lam == tuple(range(6))


def test_identity_signal_generation():
    omega = AnalysisOperator.from_matrix(np.eye(4))
    for seed in range(5):
        sig = generate_cosparse_signal(omega, 3, seed)
        assert np.count_nonzero(np.abs(sig.x) > 1e-12) == 1
        assert np.linalg.norm(sig.x) == pytest.approx(1.0)
    assert generate_cosparse_signal(omega, 0, 1).cosparsity >= 0


def test_gaussian_measurement_determinism_and_scale():
    a = make_gaussian_measurement(3, 3, 1)
    np.testing.assert_array_equal(a, make_gaussian_measurement(3, 3, 1))
    raw = make_gaussian_measurement(200, 50, 2, normalize=False)
    assert abs(raw.var() - 1.0) < 0.05
    big = make_gaussian_measurement(400, 30, 3)
    assert abs(np.mean(np.linalg.norm(big, axis=0) ** 2) - 1.0) < 0.05


def test_noise_rescale_exact():
    omega = make_random_parseval_frame(8, 4, 1)
    sig = generate_cosparse_signal(omega, 2, 2)
    A = make_gaussian_measurement(3, 4, 3)
    prob = build_problem(A, omega, sig, 1e-4, 9)
    assert abs(np.linalg.norm(prob.y - A @ sig.x) - 9e-5) <= 1e-12


def test_partition_sorted_example():
    part = partition_supports(np.arange(10, 0, -1.0), 2, 3)
    assert part.S0.tolist() == [0, 1]
    assert [b.tolist() for b in part.blocks] == [[2, 3, 4], [5, 6, 7], [8, 9]]
    part = partition_supports(np.ones(3), 1, 1)
    assert part.S0.tolist() == [0] and [b.tolist() for b in part.blocks] == [[1], [2]]


def test_partition_random_nonincreasing(rng):
    z = rng.standard_normal(50)
    part = partition_supports(z, 5, 7)
    seq = np.abs(z[np.concatenate([part.S0] + part.blocks)])
    np.testing.assert_array_equal(seq, np.sort(np.abs(z))[::-1])


def test_lp_norm_examples():
    assert lp_norm(np.ones(4), 0.5) == pytest.approx(16.0)
    assert lp_norm(np.array([3.0, 4.0]), 2.0) == pytest.approx(5.0)
    for p in (0.1, 0.5, 1.0, 2.0):
        assert lp_norm(np.eye(5)[0], p) == pytest.approx(1.0)
