"""Recovery solvers for

    min ||Omega x||_p^p   s.t. ||A x - y||_2 <= sigma     (IRLS, 0 < p <= 1)
    min ||Omega x||_1     s.t. ||A x - y||_2 <= sigma     (ADMM)
    min ||Omega x||_0     s.t. ||A x - y||_2 <= sigma     (exhaustive, tiny n)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .model import RecoveryProblem, lp_norm_pow, null_space

FEAS_ATOL = 1e-12


class SolverDivergedError(RuntimeError):
    pass


class InfeasibleProblemError(RuntimeError):
    pass


@dataclass
class SolverResult:
    x_hat: np.ndarray
    objective_trace: list
    iterations: int
    converged: bool
    residual: float
    analysis_lp: float
    p: float
    trace_stage: list = field(default_factory=list)
    cosupport: Optional[tuple] = None
    solver: str = ""
    polished: bool = False

    @property
    def cosparsity(self) -> Optional[int]:
        return None if self.cosupport is None else len(self.cosupport)


def is_feasible(problem: RecoveryProblem, residual: float, feas_tol: float) -> bool:
    """residual <= sigma (1 + feas_tol), plus an absolute floor for sigma = 0."""
    floor = FEAS_ATOL * max(1.0, float(np.linalg.norm(problem.y)))
    return residual <= problem.sigma * (1.0 + feas_tol) + floor


def _finish(problem, x, trace, iterations, p, feas_tol, solver, stages=None, cosupport=None,
            converged=True) -> SolverResult:
    if not np.all(np.isfinite(x)):
        raise SolverDivergedError(f"{solver} produced non-finite iterates")
    res = problem.residual(x)
    return SolverResult(
        x_hat=x, objective_trace=list(trace), iterations=iterations,
        converged=bool(converged and is_feasible(problem, res, feas_tol)),
        residual=res, analysis_lp=lp_norm_pow(problem.omega.matrix @ x, p), p=p,
        trace_stage=list(stages or []), cosupport=cosupport, solver=solver,
    )


def _zero_result(problem, p, solver, cosupport=None) -> SolverResult:
    x = np.zeros(problem.d)
    return _finish(problem, x, [0.0], 0, p, 0.0, solver, stages=[0], cosupport=cosupport)


# --- IRLS -----------------------------------------------------------------

@dataclass
class IrlsOptions:
    p: float = 0.5
    eps0: float = 1.0
    eps_factor: float = 0.1
    eps_stages: int = 6
    lambda0: float = 1.0
    lambda_growth: float = 10.0
    lambda_cap: float = 1e16
    feas_tol: float = 1e-6
    max_outer: int = 200
    tol: float = 1e-9
    polish: bool = True

    @classmethod
    def from_mapping(cls, values: dict) -> "IrlsOptions":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, val in values.items():
            if key not in known:
                continue
            if key in ("eps_stages", "max_outer"):
                kwargs[key] = int(val)
            elif key == "polish":
                kwargs[key] = str(val).lower() in ("1", "true", "yes")
            else:
                kwargs[key] = float(val)
        return cls(**kwargs)


class _WeightedBallSolver:
    """argmin x^T Q x  s.t. ||A x - y|| <= sigma, with Q = Omega^T W Omega.

    Uses the penalized family x(lam) = argmin x^T Q x + lam ||A x - y||^2.
    The simultaneous diagonalization V^T Q V = I, V^T A^T A V = diag(mu)
    makes every x(lam) a diagonal solve, so lam can be continued
    geometrically and then refined to the point where the ball constraint
    is active.
    """

    def __init__(self, A, y, omega, w, opts: IrlsOptions):
        self.A, self.y = A, y
        Q = omega.T @ (w[:, None] * omega)
        Q = 0.5 * (Q + Q.T)
        AtA = A.T @ A
        self.mu, self.V = sla.eigh(0.5 * (AtA + AtA.T), Q)
        self.b = self.V.T @ (A.T @ y)
        self.opts = opts

    def x_of(self, lam: float) -> np.ndarray:
        return self.V @ (lam * self.b / (1.0 + lam * self.mu))

    def x_limit(self) -> np.ndarray:
        mu_floor = 1e-13 * max(float(np.max(np.abs(self.mu))), 1e-300)
        c = np.where(self.mu > mu_floor, self.b / np.where(self.mu > mu_floor, self.mu, 1.0), 0.0)
        return self.V @ c

    def residual(self, x) -> float:
        return float(np.linalg.norm(self.A @ x - self.y))

    def solve(self, sigma: float) -> np.ndarray:
        x_inf = self.x_limit()
        if self.residual(x_inf) >= sigma:
            return x_inf
        o = self.opts
        lam, lam_lo = o.lambda0, 0.0
        while self.residual(self.x_of(lam)) > sigma:
            if lam >= o.lambda_cap:
                return x_inf
            lam_lo, lam = lam, lam * o.lambda_growth
        if lam_lo == 0.0:
            lam_lo = lam
            while self.residual(self.x_of(lam_lo)) <= sigma:
                lam_lo /= o.lambda_growth
                if lam_lo < 1e-300:
                    return self.x_of(lam)

        def gap(t):
            return self.residual(self.x_of(math.exp(t))) - sigma

        t = brentq(gap, math.log(lam_lo), math.log(lam), xtol=1e-14, rtol=4 * np.finfo(float).eps)
        x = self.x_of(math.exp(t))
        if self.residual(x) > sigma * (1.0 + 0.1 * o.feas_tol):
            x = self.x_of(lam)
        return x


def smoothed_objective(z, eps: float, p: float) -> float:
    return float(np.sum((z * z + eps * eps) ** (p / 2.0)))


def solve_irls_lp(problem: RecoveryProblem, p: Optional[float] = None,
                  opts: Optional[IrlsOptions] = None) -> SolverResult:
    """Iteratively reweighted least squares for the lp analysis problem.

    Each stage fixes a smoothing level eps and minimizes
    sum_i ((Omega x)_i^2 + eps^2)^(p/2) over the feasible ball by
    majorization: weights w_i = ((Omega x_prev)_i^2 + eps^2)^(p/2 - 1), then
    a weighted least-squares step constrained to the ball. A step that would
    raise the smoothed objective ends the stage without being taken.
    """
    opts = opts or IrlsOptions()
    if p is None:
        p = opts.p
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    A, y, sigma = problem.A, problem.y, problem.sigma
    omega = problem.omega.matrix
    if np.linalg.norm(y) <= sigma:
        return _zero_result(problem, p, "irls")

    x = np.linalg.lstsq(A, y, rcond=None)[0]
    trace, stages = [], []
    iterations = 0
    eps = opts.eps0
    for stage in range(opts.eps_stages):
        f_prev = smoothed_objective(omega @ x, eps, p)
        trace.append(f_prev)
        stages.append(stage)
        for _ in range(opts.max_outer):
            z = omega @ x
            w = (z * z + eps * eps) ** (p / 2.0 - 1.0)
            x_new = _WeightedBallSolver(A, y, omega, w, opts).solve(sigma)
            if not np.all(np.isfinite(x_new)):
                raise SolverDivergedError("IRLS produced non-finite iterates")
            iterations += 1
            f_new = smoothed_objective(omega @ x_new, eps, p)
            if f_new > f_prev:
                break
            step = np.linalg.norm(x_new - x)
            x, f_prev = x_new, f_new
            trace.append(f_new)
            stages.append(stage)
            if step <= opts.tol * max(np.linalg.norm(x), 1e-300):
                break
        eps *= opts.eps_factor
    result = _finish(problem, x, trace, iterations, p, opts.feas_tol, "irls", stages=stages)
    if opts.polish:
        result = _polish(problem, result, eps / opts.eps_factor, opts.feas_tol)
    return result


def _polish(problem: RecoveryProblem, result: SolverResult, eps: float, feas_tol: float) -> SolverResult:
    """Least-squares refit on the numerically zero analysis rows.

    Smoothing leaves entries of size ~eps where the exact minimizer has
    zeros; for p < 1 those cost ~eps^p each. The refit is kept only when it
    stays feasible and lowers ||Omega x||_p^p.
    """
    omega = problem.omega.matrix
    z = omega @ result.x_hat
    lam = np.flatnonzero(np.abs(z) <= 10.0 * eps)
    if lam.size == 0:
        return result
    xs, res = _level_candidates(problem.A, problem.y, omega, lam[None, :], 1e-12)
    x = xs[0]
    if not is_feasible(problem, res[0], feas_tol):
        return result
    if lp_norm_pow(omega @ x, result.p) >= result.analysis_lp:
        return result
    out = _finish(problem, x, result.objective_trace, result.iterations, result.p, feas_tol, "irls",
                  stages=result.trace_stage, cosupport=tuple(int(i) for i in lam))
    out.polished = True
    return out


# --- ADMM for analysis basis pursuit --------------------------------------

@dataclass
class AdmmOptions:
    rho: float = 10.0
    max_iter: int = 10000
    abstol: float = 1e-9
    reltol: float = 1e-8
    feas_tol: float = 1e-6
    balance: float = 10.0
    balance_every: int = 100
    polish: bool = True


def _soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _ball(v, r):
    nv = np.linalg.norm(v)
    return v if nv <= r else v * (r / nv)


def _restore_feasibility(A, y, sigma, x, x_ls):
    """Smallest move from x toward x_ls that lands in the residual ball."""
    r0, r1 = A @ x - y, A @ x_ls - y
    if np.linalg.norm(r0) <= sigma or np.linalg.norm(r1) > sigma:
        return x
    d = r1 - r0
    a, b, c = d @ d, 2 * r0 @ d, r0 @ r0 - sigma * sigma
    t = (-b - math.sqrt(max(b * b - 4 * a * c, 0.0))) / (2 * a)
    t = min(max(t, 0.0), 1.0)
    for _ in range(60):
        x_t = x + t * (x_ls - x)
        if np.linalg.norm(A @ x_t - y) <= sigma:
            return x_t
        t = min(1.0, t + max(1e-15, 2 * t * np.finfo(float).eps) * 16)
    return x_ls


def _l1_active_set(problem: RecoveryProblem, x, k: int):
    """Exact minimizer of the l1 objective for a frozen cosupport and sign pattern.

    The cosupport is taken as the k smallest entries of |Omega x|.
    With Omega_Lambda x = 0 and fixed signs on the rest, the objective is
    linear, g^T x, and the feasible set is an ellipsoid in null(Omega_Lambda),
    so the minimizer has a closed form. Returns None when the pattern is
    degenerate or the candidate breaks the sign pattern.
    """
    A, y, sigma = problem.A, problem.y, problem.sigma
    omega = problem.omega.matrix
    z = omega @ x
    lam = np.zeros(z.size, dtype=bool)
    lam[np.argsort(np.abs(z), kind="stable")[:k]] = True
    sgn = np.sign(z) * ~lam
    if np.any(sgn[~lam] == 0):
        return None
    N = null_space(omega[lam]) if lam.any() else np.eye(x.size)
    if N.shape[1] == 0:
        return None
    B = A @ N
    G = B.T @ B
    try:
        cf = sla.cho_factor(G)
    except np.linalg.LinAlgError:
        return None
    if np.linalg.cond(G) > 1e12:
        return None
    t0 = sla.cho_solve(cf, B.T @ y)
    r0sq = float(np.sum((B @ t0 - y) ** 2))
    rad_sq = sigma * sigma - r0sq
    if rad_sq <= 0:
        return None
    c = N.T @ (omega.T @ sgn)
    Gc = sla.cho_solve(cf, c)
    denom = float(c @ Gc)
    t = t0 if denom <= 0 else t0 - math.sqrt(rad_sq) * Gc / math.sqrt(denom)
    x_new = N @ t
    z_new = omega @ x_new
    if np.any(np.sign(z_new[~lam]) != sgn[~lam]):
        return None
    return x_new


class _BallProjector:
    """x-step of the analysis ADMM: argmin ||Omega x - v||^2 s.t. ||A x - y|| <= sigma.

    One generalized eigendecomposition V^T (Omega^T Omega) V = I,
    V^T A^T A V = diag(mu) turns every penalized solve into a diagonal one;
    the multiplier lam of the ball constraint is found by a bracketed root
    search on log(lam), warm-started from the previous call.
    """

    def __init__(self, A, y, omega, sigma):
        self.A, self.y, self.omega, self.sigma = A, y, omega, sigma
        G = omega.T @ omega
        AtA = A.T @ A
        self.mu, self.V = sla.eigh(0.5 * (AtA + AtA.T), 0.5 * (G + G.T))
        self.b = self.V.T @ (A.T @ y)
        self.pos = self.mu > 1e-13 * max(float(np.max(np.abs(self.mu))), 1e-300)
        self.lam = 1.0

    def _x(self, c, lam):
        return self.V @ ((c + lam * self.b) / (1.0 + lam * self.mu))

    def _res(self, x):
        return float(np.linalg.norm(self.A @ x - self.y))

    def __call__(self, v):
        c = self.V.T @ (self.omega.T @ v)
        x0 = self._x(c, 0.0)
        sigma = self.sigma
        if self._res(x0) <= sigma:
            return x0
        x_inf = self.V @ np.where(self.pos, self.b / np.where(self.pos, self.mu, 1.0), c)
        if self._res(x_inf) >= sigma:
            return x_inf

        def gap(t):
            return self._res(self._x(c, math.exp(t))) - sigma

        lo = hi = math.log(self.lam)
        while gap(hi) > 0:
            hi += 2.0
        while gap(lo) <= 0:
            lo -= 2.0
        t = brentq(gap, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        self.lam = math.exp(t)
        return self._x(c, self.lam)


def solve_abp_l1(problem: RecoveryProblem, opts: Optional[AdmmOptions] = None) -> SolverResult:
    """ADMM on the splitting z = Omega x for min ||z||_1, ||A x - y|| <= sigma.

    The x-step keeps the ball constraint exactly (see ``_BallProjector``),
    the z-step is a soft threshold, and the penalty rho is rebalanced every
    ``opts.balance_every`` iterations. The final iterate is pulled into the
    residual ball and, when ``opts.polish`` is set, refined by an active-set
    solve; the refinement is kept only if it lowers the l1 objective.
    """
    opts = opts or AdmmOptions()
    A, y, sigma = problem.A, problem.y, problem.sigma
    omega = problem.omega.matrix
    if np.linalg.norm(y) <= sigma:
        return _zero_result(problem, 1.0, "admm")
    n = omega.shape[0]
    project = _BallProjector(A, y, omega, sigma)
    x_ls = np.linalg.lstsq(A, y, rcond=None)[0]
    z = omega @ x_ls
    w = np.zeros(n)
    x = x_ls
    rho = opts.rho
    trace = []
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        x = project(z - w)
        ox = omega @ x
        z_old = z
        z = _soft(ox + w, 1.0 / rho)
        w += ox - z
        trace.append(float(np.sum(np.abs(ox))))
        r_pri = float(np.linalg.norm(ox - z))
        s_dual = rho * float(np.linalg.norm(omega.T @ (z - z_old)))
        eps_pri = math.sqrt(n) * opts.abstol + opts.reltol * max(np.linalg.norm(ox), np.linalg.norm(z))
        eps_dual = math.sqrt(x.size) * opts.abstol + opts.reltol * rho * np.linalg.norm(omega.T @ w)
        if r_pri <= eps_pri and s_dual <= eps_dual:
            converged = True
            break
        if opts.balance_every and it % opts.balance_every == 0:
            if r_pri > opts.balance * s_dual:
                rho *= 2.0
                w /= 2.0
            elif s_dual > opts.balance * r_pri:
                rho /= 2.0
                w *= 2.0
    x = _restore_feasibility(A, y, sigma, x, x_ls)
    polished = False
    if opts.polish:
        best = float(np.sum(np.abs(omega @ x)))
        for k in range(n):
            cand = _l1_active_set(problem, x, k)
            if cand is None or not problem.residual(cand) <= sigma * (1.0 + 1e-12):
                continue
            val = float(np.sum(np.abs(omega @ cand)))
            if val < best:
                x, best, polished = cand, val, True
    result = _finish(problem, x, trace, it, 1.0, opts.feas_tol, "admm", converged=converged)
    result.polished = polished
    return result


# --- exhaustive l0 oracle ---------------------------------------------------

MAX_L0_ROWS = 24


def _level_candidates(A, y, omega, lam_sets: np.ndarray, rtol: float):
    """Least-squares fits restricted to null(Omega_Lambda) for each Lambda."""
    K, ell = lam_sets.shape
    d = omega.shape[1]
    if ell == 0:
        x = np.linalg.lstsq(A, y, rcond=None)[0]
        return np.array([x]), np.array([np.linalg.norm(A @ x - y)])
    sub = omega[lam_sets]  # (K, ell, d)
    _, sv, vt = np.linalg.svd(sub, full_matrices=True)
    scale = max(float(np.max(sv)) if sv.size else 0.0, 1.0)
    ranks = np.sum(sv > rtol * scale * max(ell, d), axis=1)
    xs = np.zeros((K, d))
    for r in np.unique(ranks):
        if r == d:
            continue
        sel = np.flatnonzero(ranks == r)
        N = np.transpose(vt[sel][:, r:, :], (0, 2, 1))  # (k, d, d - r)
        AN = A @ N
        coef = np.linalg.pinv(AN, rcond=1e-12) @ y
        xs[sel] = (N @ coef[..., None])[..., 0]
    res = np.linalg.norm(xs @ A.T - y, axis=1)
    return xs, res


def solve_l0_exhaustive(problem: RecoveryProblem, min_cosparsity: int = 0, p: float = 1.0,
                        feas_tol: float = 1e-6, rtol: float = 1e-12) -> SolverResult:
    """Largest cosupport that admits a feasible point, by full enumeration.

    Cosupport sizes are scanned from n downward; at each size every
    Lambda is tried in lexicographic order and the constrained least-squares
    fit with Omega_Lambda x = 0 is computed. The first size with a feasible
    fit wins; among its fits the smallest residual wins, then the first
    Lambda in lexicographic order.
    """
    A, y, sigma = problem.A, problem.y, problem.sigma
    omega = problem.omega.matrix
    n = omega.shape[0]
    if n > MAX_L0_ROWS:
        raise ValueError(f"exhaustive search limited to n <= {MAX_L0_ROWS}, got {n}")
    examined = 0
    for ell in range(n, min_cosparsity - 1, -1):
        lam_sets = np.array(list(itertools.combinations(range(n), ell)), dtype=int).reshape(-1, ell)
        xs, res = _level_candidates(A, y, omega, lam_sets, rtol)
        examined += lam_sets.shape[0]
        ok = np.array([is_feasible(problem, r, feas_tol) for r in res])
        if not ok.any():
            continue
        idx = np.flatnonzero(ok)
        best = idx[np.argmin(res[idx])]  # argmin keeps the first (lexicographic) on ties
        x = xs[best]
        cos = tuple(int(i) for i in lam_sets[best])
        return _finish(problem, x, [float(n - ell)], examined, p,
                       feas_tol, "l0", cosupport=cos)
    raise InfeasibleProblemError(f"no cosupport of size >= {min_cosparsity} admits a feasible point")
