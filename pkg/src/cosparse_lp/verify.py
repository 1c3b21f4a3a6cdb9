"""Numerical verification of the inequality chain behind the lp error bound.

Every check evaluates a left and a right side exactly as the inequality is
written, on instances whose premises are recomputed rather than assumed.
A float64 violation is re-evaluated with 50-digit arithmetic before it is
reported as persistent.

Check kinds
-----------
norm_chain        ||x||_2 <= ||x||_1 <= sqrt(d) ||x||_2 and ||x||_p <= d^(1/p-1/2) ||x||_2
cone_constraint   ||(Oh)_T0c||_p^p <= 2 ||(Ox)_T0c||_p^p + ||(Oh)_T0||_p^p
cone_minimizer    ||(Oh)_T0c||_p^p <= ||(Oh)_T0||_p^p                  (logged)
tail_block_sum    sum_{j>=2} ||(Oh)_Tj||_p^2 <= rho^2 (||(Oh)_T0||_2 + eta)^2   (logged)
block_decay       ||(Oh)_T(j+1)||_2^2 <= M^(1-2/p) ||(Oh)_Tj||_p^2
rip_head_bound    ||P h||^2 <= (4 sigma^2 + kappa^q (1+dM) ||h||^2 + gamma^2 (1+dM)(||h|| + eta)^2) / (1 - dsM)
head_energy       (1 - kappa^q) ||h||^2 <= ||h|| ||P h|| + gamma^2 (||h|| + eta)^2
head_lower_bound  sqrt(alpha) ||h|| - 2 gamma eta <= ||P h||
error_bound       ||x - x_hat|| <= 2 sigma / K1 + K2 eta / K1

Here O is the analysis operator, h = x_hat - x, T0 the s largest entries of
|Oh|, T1, T2, ... the following blocks of size M, P = O_T01^T O_T01 with
T01 = T0 u T1, q = (2-p)/p and eta = (2/sqrt(s)) ||(Ox)_T0c||_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import mpmath
import numpy as np

from . import bounds
from .model import (AnalysisOperator, RecoveryProblem, build_problem, generate_cosparse_signal,
                    make_gaussian_measurement, make_random_parseval_frame, partition_supports)
from .rip import omega_rip_exact
from .rng import child_seeds, make_rng
from .solvers import is_feasible, solve_irls_lp, solve_l0_exhaustive

VIOLATION_RTOL = 1e-10
FEASIBILITY_RTOL = 1e-9
EXTENDED_DPS = 50
P_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

CONTRACT_KINDS = ("norm_chain", "cone_constraint", "block_decay", "rip_head_bound",
                  "head_energy", "head_lower_bound", "error_bound")
LOGGED_KINDS = ("cone_minimizer", "tail_block_sum")
ALL_KINDS = CONTRACT_KINDS + LOGGED_KINDS

FINDINGS_HEADER = ("check", "seed", "p", "s", "M", "delta_M", "delta_sM", "lhs", "rhs",
                   "margin", "premises_ok")


def holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + VIOLATION_RTOL * max(1.0, abs(rhs))


@dataclass
class CheckReport:
    name: str
    holds: bool
    lhs: float
    rhs: float
    premises_ok: bool
    context: dict = field(default_factory=dict)
    persistent: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def relative_margin(self) -> float:
        return self.margin / max(1.0, abs(self.rhs))

    @property
    def counted(self) -> bool:
        return self.premises_ok

    @property
    def violated(self) -> bool:
        return self.premises_ok and not self.holds

    def findings_row(self) -> tuple:
        c = self.context
        return (self.name, c.get("seed"), c.get("p"), c.get("s"), c.get("M"), c.get("delta_M"),
                c.get("delta_sM"), self.lhs, self.rhs, self.margin, self.premises_ok)


# --- arithmetic backends ------------------------------------------------------

class _Float:
    extended = False

    def arr(self, a):
        return np.asarray(a, dtype=float)

    def num(self, v):
        return float(v)

    def sqrt(self, v):
        return math.sqrt(v)

    def power(self, v, e):
        return v ** e


class _Mp:
    extended = True

    def arr(self, a):
        a = np.asarray(a, dtype=float)
        out = np.empty(a.shape, dtype=object)
        for idx, v in np.ndenumerate(a):
            out[idx] = mpmath.mpf(float(v))
        return out

    def num(self, v):
        return mpmath.mpf(float(v)) if not isinstance(v, mpmath.mpf) else v

    def sqrt(self, v):
        return mpmath.sqrt(v)

    def power(self, v, e):
        if isinstance(v, np.ndarray):
            return np.array([mpmath.power(t, e) for t in v.ravel()], dtype=object).reshape(v.shape)
        return mpmath.power(v, e)


_FLOAT = _Float()
_MP = _Mp()


def _pnorm_pow(B, v, p):
    if v.size == 0:
        return B.num(0.0)
    return sum(B.power(np.abs(v), p).tolist(), B.num(0.0))


def _norm2(B, v):
    if v.size == 0:
        return B.num(0.0)
    return B.sqrt(sum((v * v).tolist(), B.num(0.0)))


def _norm1(B, v):
    return sum(np.abs(v).tolist(), B.num(0.0))


def _symbols(B, p, s, M):
    p_, s_, M_ = B.num(p), B.num(s), B.num(M)
    one, half = B.num(1.0), B.num(0.5)
    rho = B.power(s_, B.num(0.125)) * B.power(M_, (one - p_) / p_)
    kappa = s_ / M_
    gamma = rho * B.power(M_, half - one / p_)
    q = (B.num(2.0) - p_) / p_
    kq = B.power(kappa, q)
    alpha = one - 4 * gamma * gamma - 2 * kq
    beta = B.power(kappa, one / p_ - half)
    return dict(rho=rho, kappa=kappa, gamma=gamma, kq=kq, alpha=alpha, beta=beta)


def _evaluate(kernel: Callable, *args) -> tuple[float, float, bool, bool]:
    """Run ``kernel(backend, *args)`` in float64; re-run in 50 digits on violation."""
    lhs, rhs = kernel(_FLOAT, *args)
    ok = holds(float(lhs), float(rhs))
    persistent = False
    if not ok:
        with mpmath.workdps(EXTENDED_DPS):
            lhs_x, rhs_x = kernel(_MP, *args)
            ok_x = lhs_x <= rhs_x + VIOLATION_RTOL * max(1, abs(rhs_x))
            persistent = not ok_x
            lhs, rhs, ok = float(lhs_x), float(rhs_x), bool(ok_x)
    return float(lhs), float(rhs), ok, persistent


def _report(name, kernel, args, premises_ok, context) -> CheckReport:
    if not premises_ok:
        lhs, rhs = kernel(_FLOAT, *args) if args is not None else (math.nan, math.nan)
        return CheckReport(name, holds(float(lhs), float(rhs)), float(lhs), float(rhs), False, context)
    lhs, rhs, ok, persistent = _evaluate(kernel, *args)
    return CheckReport(name, ok, lhs, rhs, True, context, persistent)


# --- norm chain -------------------------------------------------------------

def _k_l2_l1(B, x):
    x = B.arr(x)
    return _norm2(B, x), _norm1(B, x)


def _k_l1_sqrtd(B, x):
    x = B.arr(x)
    return _norm1(B, x), B.sqrt(B.num(x.size)) * _norm2(B, x)


def _k_lp(B, x, p):
    x = B.arr(x)
    p_ = B.num(p)
    lhs = B.power(_pnorm_pow(B, x, p_), 1 / p_)
    rhs = B.power(B.num(x.size), 1 / p_ - B.num(0.5)) * _norm2(B, x)
    return lhs, rhs


def norm_chain_reports(x, context: Optional[dict] = None) -> list[CheckReport]:
    context = dict(context or {})
    out = [
        _report("norm_chain", _k_l2_l1, (x,), True, {**context, "inequality": "l2<=l1"}),
        _report("norm_chain", _k_l1_sqrtd, (x,), True, {**context, "inequality": "l1<=sqrt(d)l2"}),
    ]
    for p in P_GRID:
        out.append(_report("norm_chain", _k_lp, (x, p), True,
                           {**context, "inequality": "lp<=d^(1/p-1/2)l2", "p": p}))
    return out


def check_norm_lemma(d: int, trials: int, seed: int) -> list[CheckReport]:
    """Gaussian, sparse and constant-magnitude vectors in R^d."""
    if d < 1 or trials < 1:
        raise ValueError("need d >= 1 and trials >= 1")
    rng = make_rng(seed)
    reports = []
    for t in range(trials):
        g = rng.standard_normal(d)
        sparse = np.zeros(d)
        k = int(rng.integers(1, d + 1))
        sparse[rng.choice(d, size=k, replace=False)] = rng.standard_normal(k)
        const = rng.choice([-1.0, 1.0], size=d) * rng.exponential()
        for family, x in (("gaussian", g), ("sparse", sparse), ("constant", const)):
            reports.extend(norm_chain_reports(x, {"seed": seed, "trial": t, "family": family, "d": d}))
    return reports


# --- cone inequalities ------------------------------------------------------------

def _k_cone(B, zx, zh, S0, p, minimizer_form):
    zx, zh = B.arr(zx), B.arr(zh)
    mask = np.ones(zh.size, dtype=bool)
    mask[S0] = False
    p_ = B.num(p)
    lhs = _pnorm_pow(B, zh[mask], p_)
    head = _pnorm_pow(B, zh[~mask], p_)
    if minimizer_form:
        return lhs, head
    return lhs, 2 * _pnorm_pow(B, zx[mask], p_) + head


def minimality_premise(omega: AnalysisOperator, x, x_hat, p: float) -> bool:
    """||Omega x_hat||_p^p <= ||Omega x||_p^p, recomputed."""
    return bounds_lp(omega.matrix @ x_hat, p) <= bounds_lp(omega.matrix @ x, p)


def bounds_lp(z, p):
    return float(np.sum(np.abs(z) ** p))


def check_cone_lemmas(x, x_hat, omega: AnalysisOperator, s: int, p: float, minimizer: bool = False,
                      context: Optional[dict] = None) -> tuple[CheckReport, CheckReport]:
    """The cone constraint and its minimizer-only sharpening.

    ``minimizer`` must be set only when x_hat is an actual solver/oracle
    output; synthetic pairs leave the sharpened form premise-excluded.
    """
    x, x_hat = np.asarray(x, dtype=float), np.asarray(x_hat, dtype=float)
    context = {**(context or {}), "p": p, "s": s}
    zx, zh = omega.matrix @ x, omega.matrix @ (x_hat - x)
    S0 = partition_supports(zh, s, 1).S0
    premise = minimality_premise(omega, x, x_hat, p)
    args_c = (zx, zh, S0, p, False)
    args_m = (zx, zh, S0, p, True)
    return (_report("cone_constraint", _k_cone, args_c, premise, context),
            _report("cone_minimizer", _k_cone, args_m, premise and minimizer, context))


# --- block inequalities -------------------------------------------------------

def _k_tail_sum(B, zx, zh, S0, blocks, p, s, M):
    zx, zh = B.arr(zx), B.arr(zh)
    sym = _symbols(B, p, s, M)
    p_ = B.num(p)
    two_over_p = 2 / p_
    lhs = B.num(0.0)
    for blk in blocks[1:]:
        lhs = lhs + B.power(_pnorm_pow(B, zh[blk], p_), two_over_p)
    mask = np.ones(zh.size, dtype=bool)
    mask[S0] = False
    eta = 2 / B.sqrt(B.num(s)) * _norm1(B, zx[mask])
    rhs = sym["rho"] ** 2 * (_norm2(B, zh[S0]) + eta) ** 2
    return lhs, rhs


def _k_decay_pair(B, zh, cur, nxt, p, M):
    zh = B.arr(zh)
    p_, M_ = B.num(p), B.num(M)
    lhs = _norm2(B, zh[nxt]) ** 2
    rhs = B.power(M_, 1 - 2 / p_) * B.power(_pnorm_pow(B, zh[cur], p_), 2 / p_)
    return lhs, rhs


def check_block_lemmas(h, x, omega: AnalysisOperator, s: int, M: int, p: float,
                       context: Optional[dict] = None) -> tuple[CheckReport, CheckReport]:
    """Tail-sum bound (premise: the cone premise for (x, x + h)) and block decay.

    Block decay is reported for the worst consecutive block pair.
    """
    h, x = np.asarray(h, dtype=float), np.asarray(x, dtype=float)
    zx, zh = omega.matrix @ x, omega.matrix @ h
    part = partition_supports(zh, s, M)
    context = {**(context or {}), "p": p, "s": s, "M": M, "short_block": part.has_short_block}
    premise = minimality_premise(omega, x, x + h, p)
    tail = _report("tail_block_sum", _k_tail_sum, (zx, zh, part.S0, part.blocks, p, s, M), premise,
                   context)
    worst = None
    for j in range(len(part.blocks) - 1):
        args = (zh, part.blocks[j], part.blocks[j + 1], p, M)
        lhs, rhs = _k_decay_pair(_FLOAT, *args)
        score = (lhs - rhs) / max(1.0, abs(rhs))
        if worst is None or score > worst[0]:
            worst = (score, args, j)
    if worst is None:
        decay = CheckReport("block_decay", True, 0.0, 0.0, True, {**context, "pair": None})
    else:
        decay = _report("block_decay", _k_decay_pair, worst[1], True, {**context, "pair": worst[2]})
    return tail, decay


# --- isometry-based inequalities ----------------------------------------------------

def _k_rip(B, which, omega, x, x_hat, S0, S01, p, s, M, sigma, dM, dsM):
    om = B.arr(omega)
    x, x_hat = B.arr(x), B.arr(x_hat)
    h = x_hat - x
    zx = om @ x
    zh = om @ h
    sym = _symbols(B, p, s, M)
    mask = np.ones(zh.size, dtype=bool)
    mask[S0] = False
    eta = 2 / B.sqrt(B.num(s)) * _norm1(B, zx[mask])
    Ph = om[S01].T @ zh[S01]
    nPh = _norm2(B, Ph)
    nh = _norm2(B, h)
    one = B.num(1.0)
    dM_, dsM_, sig = B.num(dM), B.num(dsM), B.num(sigma)
    g2 = sym["gamma"] ** 2
    if which == "rip_head_bound":
        rhs = (4 * sig * sig + sym["kq"] * (one + dM_) * nh * nh
               + g2 * (one + dM_) * (nh + eta) ** 2) / (one - dsM_)
        return nPh * nPh, rhs
    if which == "head_energy":
        return (one - sym["kq"]) * nh * nh, nh * nPh + g2 * (nh + eta) ** 2
    if which == "head_lower_bound":
        alpha = sym["alpha"]
        root = B.sqrt(alpha) if alpha > 0 else B.num(math.nan)
        return root * nh - 2 * sym["gamma"] * eta, nPh
    if which == "error_bound":
        K1 = B.sqrt(sym["alpha"] * (one - dsM_)) - (sym["beta"] + sym["gamma"]) * B.sqrt(one + dM_)
        K2 = sym["gamma"] * (2 * B.sqrt(one - dsM_) + B.sqrt(one + dM_))
        return nh, 2 * sig / K1 + K2 * eta / K1
    raise ValueError(which)


def _feasible(problem: RecoveryProblem, x) -> bool:
    return is_feasible(problem, problem.residual(x), FEASIBILITY_RTOL)


def _rip_setup(problem, x, x_hat, s, M):
    zh = problem.omega.matrix @ (np.asarray(x_hat) - np.asarray(x))
    part = partition_supports(zh, s, M)
    S01 = np.concatenate([part.S0, part.blocks[0]]) if part.blocks else part.S0
    return part, S01


def check_rip_lemmas(problem: RecoveryProblem, x, x_hat, s: int, M: int, p: float,
                     deltas: tuple[float, float], context: Optional[dict] = None
                     ) -> tuple[CheckReport, CheckReport, CheckReport]:
    """Head-energy inequalities driven by the isometry constants (delta_M, delta_sM).

    Premises: Parseval analysis operator, x and x_hat both feasible, the
    minimality premise, delta_sM < 1; the lower bound also needs the gamma
    condition.
    """
    x, x_hat = np.asarray(x, dtype=float), np.asarray(x_hat, dtype=float)
    dM, dsM = float(deltas[0]), float(deltas[1])
    omega = problem.omega
    part, S01 = _rip_setup(problem, x, x_hat, s, M)
    context = {**(context or {}), "p": p, "s": s, "M": M, "delta_M": dM, "delta_sM": dsM,
               "short_block": part.has_short_block}
    base = (omega.is_parseval and _feasible(problem, x) and _feasible(problem, x_hat)
            and minimality_premise(omega, x, x_hat, p) and dsM < 1)
    _, kappa, gamma = bounds.derived_params(p, s, M)
    thr_sq = 0.25 - 0.5 * kappa ** ((2.0 - p) / p)
    gamma_ok = thr_sq > 0 and gamma < math.sqrt(thr_sq)
    common = (omega.matrix, x, x_hat, part.S0, S01, p, s, M, problem.sigma, dM, dsM)

    def make(name, premise):
        args = (name,) + common
        if not premise:
            return CheckReport(name, True, math.nan, math.nan, False, context)
        return _report(name, _k_rip, args, True, context)

    return (make("rip_head_bound", base), make("head_energy", base),
            make("head_lower_bound", base and gamma_ok))


def check_theorem(problem: RecoveryProblem, x, x_hat, s: int, M: int, p: float,
                  deltas: tuple[float, float], context: Optional[dict] = None) -> CheckReport:
    x, x_hat = np.asarray(x, dtype=float), np.asarray(x_hat, dtype=float)
    dM, dsM = float(deltas[0]), float(deltas[1])
    omega = problem.omega
    part, S01 = _rip_setup(problem, x, x_hat, s, M)
    context = {**(context or {}), "p": p, "s": s, "M": M, "delta_M": dM, "delta_sM": dsM}
    premise = (omega.is_parseval and _feasible(problem, x) and _feasible(problem, x_hat)
               and minimality_premise(omega, x, x_hat, p) and dsM < 1 and s < M)
    if premise:
        gamma_ok, delta_ok, _, _ = bounds.feasibility_conditions(p, s, M, dM, dsM)
        premise = gamma_ok and delta_ok
    if not premise:
        return CheckReport("error_bound", True, math.nan, math.nan, False, context)
    args = ("error_bound", omega.matrix, x, x_hat, part.S0, S01, p, s, M, problem.sigma, dM, dsM)
    return _report("error_bound", _k_rip, args, True, context)


# --- instance families and the default suite ----------------------------------------

@dataclass(frozen=True)
class InstanceFamily:
    """Recipe for a random recovery instance.

    ``ensemble`` is ``gaussian`` (entries N(0, 1/m)) or ``near_isometry``
    (an orthogonal matrix times I + perturbation * G, which needs m = d).
    """

    name: str
    d: int
    n: int
    m: int
    cosparsity: int
    s: int
    M: int
    p: float
    sigma: float
    ensemble: str = "gaussian"
    perturbation: float = 0.0
    solvers: tuple = ("l0", "irls")


DEFAULT_FAMILIES = {
    "tiny": InstanceFamily("tiny", d=6, n=8, m=5, cosparsity=4, s=2, M=3, p=0.5, sigma=1e-3),
    "isometric": InstanceFamily("isometric", d=6, n=8, m=6, cosparsity=4, s=1, M=6, p=0.5,
                                sigma=1e-3, ensemble="near_isometry", perturbation=0.02),
}

BLOCK_FAMILY = dict(n=60, d=30, s=4, M=8)


def make_measurement(family: InstanceFamily, seed: int) -> np.ndarray:
    if family.ensemble == "gaussian":
        return make_gaussian_measurement(family.m, family.d, seed, normalize=True)
    if family.ensemble == "near_isometry":
        if family.m != family.d:
            raise ValueError("near_isometry ensemble needs m == d")
        rng = make_rng(seed)
        q, r = np.linalg.qr(rng.standard_normal((family.d, family.d)))
        q = q * np.sign(np.diag(r))
        return q @ (np.eye(family.d) + family.perturbation * rng.standard_normal((family.d, family.d)))
    raise ValueError(f"unknown ensemble {family.ensemble!r}")


def make_instance(family: InstanceFamily, seed: int) -> RecoveryProblem:
    s_frame, s_signal, s_meas, s_noise = child_seeds(seed, 4)
    omega = make_random_parseval_frame(family.n, family.d, s_frame)
    signal = generate_cosparse_signal(omega, family.cosparsity, s_signal)
    A = make_measurement(family, s_meas)
    return build_problem(A, omega, signal, family.sigma, s_noise)


def exact_deltas(problem: RecoveryProblem, s: int, M: int) -> tuple[float, float]:
    n = problem.omega.n
    dM = omega_rip_exact(problem.A, problem.omega, min(M, n)).delta
    dsM = omega_rip_exact(problem.A, problem.omega, min(s + M, n)).delta
    return dM, dsM


def solve_with(name: str, problem: RecoveryProblem, p: float):
    if name == "l0":
        return solve_l0_exhaustive(problem, p=p)
    if name == "irls":
        return solve_irls_lp(problem, p)
    raise ValueError(f"unknown solver {name!r}")


def instance_reports(family: InstanceFamily, seed: int,
                     deltas: Optional[tuple[float, float]] = None) -> list[CheckReport]:
    """All solver-pair checks for one seeded instance of ``family``."""
    problem = make_instance(family, seed)
    x = problem.truth.x
    if deltas is None:
        deltas = exact_deltas(problem, family.s, family.M)
    reports = []
    for solver in family.solvers:
        x_hat = solve_with(solver, problem, family.p).x_hat
        ctx = {"seed": seed, "family": family.name, "solver": solver}
        reports.extend(check_cone_lemmas(x, x_hat, problem.omega, family.s, family.p,
                                         minimizer=True, context=ctx))
        reports.extend(check_block_lemmas(x_hat - x, x, problem.omega, family.s, family.M,
                                          family.p, context=ctx))
        reports.extend(check_rip_lemmas(problem, x, x_hat, family.s, family.M, family.p, deltas,
                                        context=ctx))
        reports.append(check_theorem(problem, x, x_hat, family.s, family.M, family.p, deltas,
                                     context=ctx))
    return reports


def block_pair_reports(seed: int, p: float = 0.5) -> list[CheckReport]:
    """Block inequalities on random and structured (tie-heavy, constant-block) pairs."""
    n, d, s, M = BLOCK_FAMILY["n"], BLOCK_FAMILY["d"], BLOCK_FAMILY["s"], BLOCK_FAMILY["M"]
    s_frame, s_pair = child_seeds(seed, 2)
    omega = make_random_parseval_frame(n, d, s_frame)
    rng = make_rng(s_pair)
    x = rng.standard_normal(d)
    # shrinking toward zero plus noise keeps the cone premise plausible
    h = -rng.uniform(0.0, 1.0) * x + 0.1 * rng.standard_normal(d)
    out = list(check_block_lemmas(h, x, omega, s, M, p, context={"seed": seed, "family": "block"}))
    eye = AnalysisOperator.from_matrix(np.eye(n))
    levels = rng.choice([0.0, 0.25, 0.5, 1.0], size=n) * rng.choice([-1.0, 1.0], size=n)
    xs = rng.standard_normal(n)
    hs = levels - 0.5 * xs * (levels == 0)
    out.extend(check_block_lemmas(hs, xs, eye, s, M, p,
                                  context={"seed": seed, "family": "block_structured"}))
    return out


def seed_reports(seed: int, families: Sequence[str] = ("tiny", "isometric"),
                 deltas: Optional[tuple[float, float]] = None, norm_dim: int = 37,
                 block: bool = True) -> list[CheckReport]:
    reports = check_norm_lemma(norm_dim, 1, seed)
    for name in families:
        reports.extend(instance_reports(DEFAULT_FAMILIES[name], seed, deltas))
    if block:
        reports.extend(block_pair_reports(seed))
    return reports


@dataclass
class KindSummary:
    kind: str
    evaluated: int = 0
    excluded: int = 0
    violations: int = 0
    persistent: int = 0
    min_margin: float = math.inf

    @property
    def logged(self) -> bool:
        return self.kind in LOGGED_KINDS


@dataclass
class SuiteSummary:
    kinds: dict
    findings: list

    @property
    def contract_violations(self) -> int:
        return sum(k.persistent for k in self.kinds.values() if not k.logged)

    @property
    def logged_violations(self) -> int:
        return sum(k.persistent for k in self.kinds.values() if k.logged)

    def lines(self) -> list[str]:
        out = []
        for name in ALL_KINDS:
            k = self.kinds[name]
            channel = "logged" if k.logged else "contract"
            status = "PASS" if k.persistent == 0 else ("LOGGED" if k.logged else "FAIL")
            margin = "" if k.evaluated == 0 else f" min_rel_margin={k.min_margin:.3e}"
            out.append(f"{name:<17} [{channel}] {status}: evaluated={k.evaluated} "
                       f"excluded={k.excluded} persistent_violations={k.persistent}{margin}")
        return out


def summarize(reports: Iterable[CheckReport]) -> SuiteSummary:
    kinds = {name: KindSummary(name) for name in ALL_KINDS}
    findings = []
    for r in reports:
        k = kinds[r.name]
        if not r.premises_ok:
            k.excluded += 1
            continue
        k.evaluated += 1
        k.min_margin = min(k.min_margin, r.relative_margin)
        if not r.holds:
            k.violations += 1
            if r.persistent:
                k.persistent += 1
                findings.append(r)
    findings.sort(key=lambda r: (r.context.get("seed") or 0, r.name))
    return SuiteSummary(kinds=kinds, findings=findings)


def run_suite(seeds: Iterable[int], families: Sequence[str] = ("tiny", "isometric"),
              deltas: Optional[tuple[float, float]] = None, block: bool = True) -> SuiteSummary:
    reports = []
    for seed in seeds:
        reports.extend(seed_reports(seed, families, deltas, block=block))
    return summarize(reports)
