import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cosparse_lp import bounds
from cosparse_lp.bounds import (BoundDomainError, BoundInputs, BoundUndefinedError, K_constants,
                                bound_curve, compute_eta, constants, delta_grid, derived_params,
                                error_bound, eta_samples, feasibility_conditions, max_delta_sweep,
                                reference_values, policy_delta_M)
from cosparse_lp.model import AnalysisOperator, make_random_parseval_frame


def oracle_K(p, s, M, dM, dsM, dps=60):
    """Independent extended-precision evaluation straight from the definitions."""
    with mpmath.workdps(dps):
        p, s, M = mpmath.mpf(p), mpmath.mpf(s), mpmath.mpf(M)
        dM, dsM = mpmath.mpf(dM), mpmath.mpf(dsM)
        rho = s ** (mpmath.mpf(1) / 8) * M ** ((1 - p) / p)
        kappa = s / M
        gamma = rho * M ** (mpmath.mpf(1) / 2 - 1 / p)
        alpha = 1 - 4 * gamma ** 2 - 2 * kappa ** ((2 - p) / p)
        beta = kappa ** (1 / p - mpmath.mpf(1) / 2)
        K1 = mpmath.sqrt(alpha * (1 - dsM)) - (beta + gamma) * mpmath.sqrt(1 + dM)
        K2 = gamma * (2 * mpmath.sqrt(1 - dsM) + mpmath.sqrt(1 + dM))
        return dict(rho=rho, kappa=kappa, gamma=gamma, alpha=alpha, beta=beta, K1=K1, K2=K2)


def test_reference_setting_against_oracle():
    c = constants(0.5, 100, 600, 0.4, 0.5)
    o = oracle_K(0.5, 100, 600, 0.4, 0.5)
    assert abs(c.K1 - float(o["K1"])) <= 1e-12 * abs(float(o["K1"]))
    assert abs(c.K2 - float(o["K2"])) <= 1e-12 * abs(float(o["K2"]))
    assert c.K1 == pytest.approx(0.52989, abs=1e-5)
    assert c.K2 == pytest.approx(0.18857, abs=1e-5)
    assert c.C0 == pytest.approx(3.7744, abs=1e-4)
    assert c.C1 == pytest.approx(2 * c.K2 / c.K1)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0]), st.integers(1, 50), st.integers(2, 400),
       st.floats(0, 0.99), st.floats(0, 0.99))
def test_constants_match_oracle(p, s, M, dM, dsM):
    if s >= M:
        M = s + 1
    c = constants(p, s, M, dM, dsM)
    o = oracle_K(p, s, M, dM, dsM)
    assert c.gamma == pytest.approx(float(o["gamma"]), rel=1e-13)
    assert c.alpha == pytest.approx(float(o["alpha"]), rel=1e-12, abs=1e-14)
    assert c.K2 == pytest.approx(float(o["K2"]), rel=1e-12)
    if c.K1 is not None:
        assert c.K1 == pytest.approx(float(o["K1"]), rel=1e-9, abs=1e-13)


def test_derived_params_examples():
    rho, kappa, gamma = derived_params(0.5, 100, 600)
    assert rho == pytest.approx(100 ** 0.125 * 600, rel=1e-14)
    assert rho == pytest.approx(1066.97, abs=0.01)
    assert kappa == pytest.approx(1 / 6)
    assert gamma == pytest.approx(0.072598, abs=1e-6)
    assert derived_params(1.0, 1, 1) == (1.0, 1.0, 1.0)


@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.integers(1, 100), st.integers(1, 1000))
def test_gamma_independent_of_p(p1, p2, s, M):
    assert derived_params(p1, s, M)[2] == derived_params(p2, s, M)[2]


def test_feasibility_examples():
    g_ok, d_ok, alpha, beta = feasibility_conditions(0.5, 100, 600, 0.4, 0.5)
    assert g_ok
    assert math.sqrt(0.25 - (1 / 6) ** 3 / 2) == pytest.approx(0.49768, abs=1e-5)
    g_ok, _, _, _ = feasibility_conditions(1.0, 1, 2, 0.0, 0.0)
    assert not g_ok
    _, d_ok, alpha, beta = feasibility_conditions(1.0, 100, 600, 0.4, 0.5)
    gamma = derived_params(1.0, 100, 600)[2]
    assert (beta + gamma) ** 2 * 1.4 / alpha == pytest.approx(0.501, abs=1e-3)
    assert not d_ok


def test_K_constants_domain():
    with pytest.raises(BoundDomainError):
        constants(0.5, 100, 600, 0.4, 1.0)
    with pytest.raises(BoundDomainError):
        BoundInputs(p=0.0, s=1, M=2, delta_M=0, delta_sM=0)
    with pytest.raises(BoundDomainError):
        BoundInputs(p=0.5, s=3, M=3, delta_M=0, delta_sM=0)


def test_gamma_zero_limit():
    c = constants(0.5, 1, 10 ** 12, 0.0, 0.0)
    assert c.K2 == pytest.approx(0.0, abs=1e-5)
    assert c.K1 == pytest.approx(math.sqrt(c.alpha) - c.beta, abs=1e-5)


def test_table_row_p05():
    c = constants(0.5, 100, 600, 0.0, 0.97)
    assert c.K1 == pytest.approx(0.0299, abs=5e-5)


def test_error_bound_examples():
    assert error_bound(1.0, 1.0, 0.0, 0.0) == 0.0
    assert error_bound(2.0, 1.0, 1.0, 2.0) == 2.0
    c = constants(0.5, 100, 600, 0.4, 0.5)
    b = error_bound(c.K1, c.K2, 1e-4, 0.01)
    assert b == pytest.approx(3.94e-3, abs=1e-5)
    with pytest.raises(BoundUndefinedError):
        error_bound(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(BoundUndefinedError):
        error_bound(None, 1.0, 1.0, 1.0)


def test_eta_examples():
    eye = AnalysisOperator.from_matrix(np.eye(4))
    assert compute_eta(eye, np.array([5.0, 4.0, 1.0, 1.0]), 2) == pytest.approx(2 * math.sqrt(2))
    assert compute_eta(eye, np.array([0.0, 3.0, 0.0, -1.0]), 2) == 0.0


def test_eta_best_term_is_minimal(rng):
    omega = make_random_parseval_frame(7, 4, 3)
    x = rng.standard_normal(4)
    best = compute_eta(omega, x, 2)
    for S0 in itertools.combinations(range(7), 2):
        assert best <= compute_eta(omega, x, 2, S0) + 1e-15


def test_policies_and_grid():
    assert policy_delta_M("zero", 0.3) == 0.0
    assert policy_delta_M("equal", 0.3) == 0.3
    assert policy_delta_M("fixed:0.4", 0.3) == 0.4
    with pytest.raises(ValueError):
        policy_delta_M("bogus", 0.3)
    assert delta_grid(0.5) == [0.5]
    g = delta_grid(0.01)
    assert len(g) == 99 and g[0] == 0.01 and g[-1] == 0.99


def test_sweep_p05_reproduces_table_row():
    sweep = max_delta_sweep(0.5, 100, 600, "zero", 0.01)
    assert sweep.delta_max == 0.97
    assert sweep.K1_at_max == pytest.approx(0.0299, abs=5e-5)


def test_sweep_p01_choice():
    sweep = max_delta_sweep(0.1, 100, 600, "zero", 0.01)
    assert sweep.delta_max in (0.98, 0.99)
    assert constants(0.1, 100, 600, 0.0, 0.99).K1 == pytest.approx(0.026, abs=1e-3)


def test_sweep_empty_result():
    sweep = max_delta_sweep(1.0, 1, 2, "zero", 0.1)
    assert sweep.empty and sweep.K1_at_max is None


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.7, 0.9, 1.0])
def test_K1_strictly_decreasing_along_sweep(p):
    curve = max_delta_sweep(p, 100, 600, "zero", 0.01).curve
    K = [k for _, _, k, _ in curve if k is not None]
    assert all(b < a for a, b in zip(K, K[1:]))


def test_bound_curve_shape_and_order():
    etas = eta_samples()
    curves = bound_curve([0.9, 0.1, 0.5, 1.0], etas, 1e-4, 100, 600, 0.4, 0.5)
    assert [c.p for c in curves] == [0.1, 0.5, 0.9, 1.0]
    assert curves[-1].absent
    live = [c for c in curves if not c.absent]
    for c in live:
        K1, K2 = c.constants.K1, c.constants.K2
        for p, eta, b in c.rows:
            assert b == pytest.approx(2e-4 / K1 + K2 * eta / K1, rel=1e-14)
            assert b < 0.15
    for a, b in zip(live, live[1:]):
        assert all(ra[2] <= rb[2] for ra, rb in zip(a.rows, b.rows))


def test_eta_samples():
    e = eta_samples(0.01, 100)
    assert len(e) == 100 and e[0] > 0 and e[-1] == pytest.approx(0.01)


def test_reference_data_is_labelled():
    ref = reference_values()
    assert "transcribed" in ref["note"].lower()
    assert ref["constants"]["lp_p0.5"]["C0"] == 3.8273
    assert [r["p"] for r in ref["table1"]] == [0.1, 0.3, 0.5, 0.7, 0.9, 1.0]
