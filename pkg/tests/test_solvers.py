import numpy as np
import pytest

from cosparse_lp.model import (AnalysisOperator, CosparseSignal, RecoveryProblem, lp_norm_pow,
                               make_random_parseval_frame)
from cosparse_lp.solvers import (AdmmOptions, InfeasibleProblemError, IrlsOptions, is_feasible,
                                 smoothed_objective, solve_abp_l1, solve_irls_lp,
                                 solve_l0_exhaustive)

from conftest import tiny_problem


def _identity_problem(x, sigma=0.0):
    d = x.size
    omega = AnalysisOperator.from_matrix(np.eye(d))
    return RecoveryProblem(A=np.eye(d), omega=omega, y=x.copy(), sigma=sigma,
                           truth=CosparseSignal(x=x, cosupport=()))


def _stage_monotone(result, slack=1e-12):
    trace, stages = result.objective_trace, result.trace_stage
    for k in range(1, len(trace)):
        if stages[k] == stages[k - 1]:
            assert trace[k] <= trace[k - 1] + slack * max(1.0, abs(trace[k - 1]))


def test_large_sigma_gives_zero_for_every_solver(problem):
    big = RecoveryProblem(A=problem.A, omega=problem.omega, y=problem.y,
                          sigma=1.01 * np.linalg.norm(problem.y))
    for res in (solve_irls_lp(big, 0.5), solve_abp_l1(big), solve_l0_exhaustive(big)):
        assert np.all(res.x_hat == 0)
        assert lp_norm_pow(big.omega.matrix @ res.x_hat, 0.5) <= 1e-8


def test_identity_problems():
    x = np.array([0.0, 1.5, 0.0, -2.0])
    np.testing.assert_allclose(solve_irls_lp(_identity_problem(x), 0.5).x_hat, x, atol=1e-6)
    np.testing.assert_allclose(solve_abp_l1(_identity_problem(x)).x_hat, x, atol=1e-8)
    res = solve_l0_exhaustive(_identity_problem(np.array([1.0, 0.0, 0.0, 0.0])))
    np.testing.assert_allclose(res.x_hat, [1, 0, 0, 0], atol=1e-12)
    assert res.cosparsity == 3


def test_l0_zero_data():
    omega = make_random_parseval_frame(6, 3, 1)
    prob = RecoveryProblem(A=np.ones((2, 3)), omega=omega, y=np.zeros(2), sigma=0.0)
    res = solve_l0_exhaustive(prob)
    assert np.all(res.x_hat == 0) and res.cosparsity == 6


def test_l0_recovers_unique_cosparse_signal():
    hits = 0
    for seed in range(10):
        prob = tiny_problem(seed, d=6, n=8, m=5, cosparsity=5, sigma=0.0)
        res = solve_l0_exhaustive(prob)
        assert res.cosparsity >= 5
        lam = list(prob.truth.cosupport)
        null_dim = 6 - np.linalg.matrix_rank(prob.omega.matrix[lam])
        if null_dim == 1:
            hits += 1
            np.testing.assert_allclose(res.x_hat, prob.truth.x, atol=1e-8)
    assert hits > 0


def test_l0_tie_break_prefers_lexicographic():
    # every singleton cosupport fits exactly; the first one wins
    omega = AnalysisOperator.from_matrix(np.eye(3))
    prob = RecoveryProblem(A=np.eye(3), omega=omega, y=np.array([0.0, 0.0, 0.0]), sigma=1.0)
    assert solve_l0_exhaustive(prob).cosparsity == 3


def test_l0_infeasible_min_cosparsity():
    prob = tiny_problem(2, sigma=0.0)
    with pytest.raises(InfeasibleProblemError):
        solve_l0_exhaustive(prob, min_cosparsity=8)


def test_l0_refuses_large_n():
    omega = make_random_parseval_frame(30, 3, 1)
    prob = RecoveryProblem(A=np.eye(3), omega=omega, y=np.ones(3), sigma=0.0)
    with pytest.raises(ValueError):
        solve_l0_exhaustive(prob)


def test_irls_close_to_oracle_objective():
    prob = tiny_problem(3, d=8, n=10, m=6, cosparsity=7, sigma=1e-4)
    oracle = solve_l0_exhaustive(prob, p=0.5)
    res = solve_irls_lp(prob, 0.5)
    assert res.converged
    assert res.analysis_lp <= oracle.analysis_lp * (1 + 1e-3)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("p", [0.3, 0.5, 1.0])
def test_irls_stage_monotone_and_feasible(seed, p):
    prob = tiny_problem(seed, sigma=1e-2)
    res = solve_irls_lp(prob, p)
    _stage_monotone(res)
    assert is_feasible(prob, res.residual, 1e-6)


def test_irls_rejects_bad_p(problem):
    with pytest.raises(ValueError):
        solve_irls_lp(problem, 0.0)


def test_irls_options_from_mapping():
    opts = IrlsOptions.from_mapping({"eps0": "0.5", "max_outer": "10", "unrelated": 1})
    assert opts.eps0 == 0.5 and opts.max_outer == 10


def test_smoothed_objective_limit():
    z = np.array([1.0, -2.0, 0.0])
    assert smoothed_objective(z, 1e-12, 1.0) == pytest.approx(3.0)


@pytest.mark.parametrize("seed", range(6))
def test_admm_matches_irls_at_p1(seed):
    prob = tiny_problem(seed, sigma=1e-2)
    a = solve_abp_l1(prob)
    b = solve_irls_lp(prob, 1.0)
    assert is_feasible(prob, a.residual, 1e-6)
    assert abs(a.analysis_lp - b.analysis_lp) <= 1e-4 * max(a.analysis_lp, b.analysis_lp)


def test_admm_options_are_used(problem):
    res = solve_abp_l1(problem, AdmmOptions(max_iter=5, polish=False))
    assert res.iterations <= 5
