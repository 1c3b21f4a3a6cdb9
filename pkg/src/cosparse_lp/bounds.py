"""Error-bound constants for lp analysis recovery and the sweeps built on them.

Symbols, for block size M, sparsity level s and exponent p in (0, 1]:

    rho   = s^(1/8) M^((1-p)/p)
    kappa = s / M
    gamma = rho M^(1/2 - 1/p)      (= s^(1/8) / sqrt(M), independent of p)
    alpha = 1 - 4 gamma^2 - 2 kappa^((2-p)/p)
    beta  = kappa^(1/p - 1/2)
    K1    = sqrt(alpha (1 - delta_sM)) - (beta + gamma) sqrt(1 + delta_M)
    K2    = gamma (2 sqrt(1 - delta_sM) + sqrt(1 + delta_M))

and the recovery error is bounded by 2 sigma / K1 + K2 eta / K1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .model import AnalysisOperator, partition_supports


class BoundDomainError(ValueError):
    pass


class BoundUndefinedError(ValueError):
    pass


@dataclass(frozen=True)
class BoundInputs:
    p: float
    s: int
    M: int
    delta_M: float
    delta_sM: float
    sigma: float = 0.0

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise BoundDomainError(f"p must lie in (0, 1], got {self.p}")
        if self.s < 1 or self.M < 1:
            raise BoundDomainError("s and M must be positive")
        if self.s >= self.M:
            raise BoundDomainError(f"block size M={self.M} must exceed s={self.s}")
        if self.delta_M < 0 or self.delta_sM < 0 or self.sigma < 0:
            raise BoundDomainError("isometry constants and sigma must be nonnegative")


@dataclass(frozen=True)
class BoundConstants:
    p: float
    s: int
    M: int
    delta_M: float
    delta_sM: float
    rho: float
    kappa: float
    gamma: float
    alpha: float
    beta: float
    K1: Optional[float]
    K2: float
    C0: Optional[float]
    C1: Optional[float]
    gamma_feasible: bool
    delta_feasible: bool

    @property
    def K1_positive(self) -> bool:
        return self.K1 is not None and self.K1 > 0

    def csv_row(self) -> tuple:
        return (self.p, self.s, self.M, self.delta_M, self.delta_sM, self.rho, self.kappa,
                self.gamma, self.alpha, self.beta, self.K1, self.K2, self.C0, self.C1,
                self.gamma_feasible, self.delta_feasible)


CONSTANTS_HEADER = ("p", "s", "M", "delta_M", "delta_sM", "rho", "kappa", "gamma", "alpha",
                    "beta", "K1", "K2", "C0", "C1", "gamma_feasible", "delta_feasible")


def derived_params(p: float, s: int, M: int) -> tuple[float, float, float]:
    """(rho, kappa, gamma).

    gamma is evaluated through its closed form s^(1/8) M^(-1/2), which equals
    rho * M^(1/2 - 1/p) exactly but avoids the huge intermediate powers of M
    for small p. rho itself may overflow to inf for very small p.
    """
    if not 0 < p <= 1 or s < 1 or M < 1:
        raise BoundDomainError(f"invalid (p, s, M) = ({p}, {s}, {M})")
    try:
        rho = s ** 0.125 * M ** ((1.0 - p) / p)
    except OverflowError:
        rho = math.inf
    kappa = s / M
    gamma = s ** 0.125 / math.sqrt(M)
    return rho, kappa, gamma


def _alpha_beta(p: float, kappa: float, gamma: float) -> tuple[float, float]:
    alpha = 1.0 - 4.0 * gamma * gamma - 2.0 * kappa ** ((2.0 - p) / p)
    beta = kappa ** (1.0 / p - 0.5)
    return alpha, beta


def feasibility_conditions(p: float, s: int, M: int, delta_M: float, delta_sM: float):
    """Both strict hypotheses of the main bound, plus alpha and beta.

    Returns ``(gamma_feasible, delta_feasible, alpha, beta)``.
    """
    _, kappa, gamma = derived_params(p, s, M)
    alpha, beta = _alpha_beta(p, kappa, gamma)
    if alpha <= 0:
        return False, False, alpha, beta
    thr_sq = 0.25 - 0.5 * kappa ** ((2.0 - p) / p)
    gamma_ok = thr_sq > 0 and gamma < math.sqrt(thr_sq)
    delta_ok = delta_sM < 1.0 - (beta + gamma) ** 2 / alpha * (1.0 + delta_M)
    return bool(gamma_ok), bool(delta_ok), alpha, beta


def K_constants(inputs: BoundInputs) -> BoundConstants:
    p, s, M = inputs.p, inputs.s, inputs.M
    dM, dsM = inputs.delta_M, inputs.delta_sM
    if dsM >= 1:
        raise BoundDomainError(f"delta_sM = {dsM} >= 1 puts K1 outside the real domain")
    rho, kappa, gamma = derived_params(p, s, M)
    gamma_ok, delta_ok, alpha, beta = feasibility_conditions(p, s, M, dM, dsM)
    K2 = gamma * (2.0 * math.sqrt(1.0 - dsM) + math.sqrt(1.0 + dM))
    radicand = alpha * (1.0 - dsM)
    K1 = None if radicand < 0 else math.sqrt(radicand) - (beta + gamma) * math.sqrt(1.0 + dM)
    if K1 is not None and K1 > 0:
        C0, C1 = 2.0 / K1, 2.0 * K2 / K1
    else:
        C0 = C1 = None
    return BoundConstants(p=p, s=s, M=M, delta_M=dM, delta_sM=dsM, rho=rho, kappa=kappa,
                          gamma=gamma, alpha=alpha, beta=beta, K1=K1, K2=K2, C0=C0, C1=C1,
                          gamma_feasible=gamma_ok, delta_feasible=delta_ok)


def constants(p: float, s: int, M: int, delta_M: float, delta_sM: float) -> BoundConstants:
    return K_constants(BoundInputs(p=p, s=s, M=M, delta_M=delta_M, delta_sM=delta_sM))


def error_bound(K1: Optional[float], K2: float, sigma: float, eta: float) -> float:
    if K1 is None or not K1 > 0:
        raise BoundUndefinedError(f"bound undefined for K1 = {K1}")
    return 2.0 * sigma / K1 + K2 * eta / K1


def compute_eta(omega: AnalysisOperator, x, s: int, S0: Optional[Sequence[int]] = None) -> float:
    """eta = (2 / sqrt(s)) * ||(Omega x) off S0||_1.

    Without ``S0`` the s largest entries of |Omega x| are used (best s-term
    residual). Pass ``S0`` explicitly to use another index set, e.g. the one
    derived from Omega h.
    """
    z = omega.matrix @ np.asarray(x, dtype=float)
    n = z.size
    if not 1 <= s < n:
        raise ValueError(f"need 1 <= s < n, got s={s}, n={n}")
    if S0 is None:
        S0 = partition_supports(z, s, 1).S0
    S0 = np.asarray(S0, dtype=int)
    if S0.size != s or np.unique(S0).size != s:
        raise ValueError(f"S0 must hold {s} distinct indices")
    mask = np.ones(n, dtype=bool)
    mask[S0] = False
    return float(2.0 / math.sqrt(s) * np.sum(np.abs(z[mask])))


# --- delta_M policies ------------------------------------------------------

def parse_policy(policy: str) -> tuple[str, Optional[float]]:
    policy = policy.strip()
    if policy in ("zero", "equal"):
        return policy, None
    if policy.startswith("fixed:"):
        return "fixed", float(policy.split(":", 1)[1])
    raise ValueError(f"unknown delta_M policy {policy!r} (use zero, equal or fixed:<v>)")


def policy_delta_M(policy: str, delta_sM: float) -> float:
    kind, value = parse_policy(policy)
    if kind == "zero":
        return 0.0
    if kind == "equal":
        return delta_sM
    return value


def delta_grid(step: float) -> list[float]:
    """{step, 2 step, ...} strictly below 1, rounded to kill float drift."""
    if not step > 0:
        raise ValueError("step must be positive")
    k_max = int(math.floor(1.0 / step + 1e-9))
    grid = [round(k * step, 12) for k in range(1, k_max + 1)]
    return [g for g in grid if g < 1.0 - 1e-12]


@dataclass
class SweepResult:
    p: float
    policy: str
    delta_max: Optional[float]
    K1_at_max: Optional[float]
    curve: list = field(default_factory=list)  # (delta_sM, delta_M, K1 or None, feasible)

    @property
    def empty(self) -> bool:
        return self.delta_max is None


def max_delta_sweep(p: float, s: int, M: int, policy: str = "zero", step: float = 0.01) -> SweepResult:
    """Largest grid value of delta_sM that keeps K1 > 0 and gamma feasible."""
    curve = []
    best = None
    for d in delta_grid(step):
        dM = policy_delta_M(policy, d)
        c = constants(p, s, M, dM, d)
        feasible = c.gamma_feasible and c.K1_positive
        curve.append((d, dM, c.K1, feasible))
        if feasible:
            best = (d, c.K1)
    if best is None:
        return SweepResult(p=p, policy=policy, delta_max=None, K1_at_max=None, curve=curve)
    return SweepResult(p=p, policy=policy, delta_max=best[0], K1_at_max=best[1], curve=curve)


@dataclass
class BoundCurve:
    p: float
    constants: BoundConstants
    rows: list = field(default_factory=list)  # (p, eta, bound)
    absent_reason: Optional[str] = None

    @property
    def absent(self) -> bool:
        return self.absent_reason is not None


def eta_samples(eta_max: float = 0.01, samples: int = 100) -> list[float]:
    """``samples`` evenly spaced points in (0, eta_max]."""
    return [eta_max * (k + 1) / samples for k in range(samples)]


def bound_curve(p_list: Sequence[float], etas: Sequence[float], sigma: float, s: int, M: int,
                delta_M: float, delta_sM: float) -> list[BoundCurve]:
    curves = []
    for p in sorted(p_list):
        c = constants(p, s, M, delta_M, delta_sM)
        if not c.gamma_feasible:
            curves.append(BoundCurve(p=p, constants=c, absent_reason="gamma condition fails"))
            continue
        if not (c.delta_feasible and c.K1_positive):
            curves.append(BoundCurve(p=p, constants=c, absent_reason=f"delta condition fails (K1 = {c.K1})"))
            continue
        rows = [(p, eta, error_bound(c.K1, c.K2, sigma, eta)) for eta in sorted(etas)]
        curves.append(BoundCurve(p=p, constants=c, rows=rows))
    return curves


@lru_cache(maxsize=1)
def reference_values() -> dict:
    """Transcribed reference values (never computed output)."""
    text = resources.files("cosparse_lp").joinpath("data/reference_values.json").read_text()
    return json.loads(text)
