import numpy as np
import pytest

from cosparse_lp.model import (build_problem, generate_cosparse_signal, make_gaussian_measurement,
                               make_random_parseval_frame)
from cosparse_lp.rng import child_seeds


def tiny_problem(seed, d=6, n=8, m=5, cosparsity=4, sigma=1e-3):
    s_frame, s_signal, s_meas, s_noise = child_seeds(seed, 4)
    omega = make_random_parseval_frame(n, d, s_frame)
    signal = generate_cosparse_signal(omega, cosparsity, s_signal)
    A = make_gaussian_measurement(m, d, s_meas)
    return build_problem(A, omega, signal, sigma, s_noise)


@pytest.fixture
def problem():
    return tiny_problem(7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
