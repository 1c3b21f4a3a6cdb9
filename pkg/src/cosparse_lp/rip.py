"""Restricted isometry constants, classic and adapted to an analysis operator.

For a support T of size s in {0..n-1} the test vectors are u = Omega^T z with
z supported on T, i.e. u ranges over the column space of B_T = Omega[T].T.
The per-support constants are the extreme Rayleigh ratios
||A u||^2 / ||u||^2 on that space; directions with u = 0 are dropped.
With Omega = I this is the usual restricted isometry constant of A.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import AnalysisOperator
from .rng import make_rng

DEFAULT_ENUMERATION_CAP = 2_000_000
_CHUNK = 4096


class EnumerationCapError(RuntimeError):
    pass


@dataclass(frozen=True)
class RipEstimate:
    order: int
    delta: float
    method: str
    lambda_min: float
    lambda_max: float
    trials: int = 0
    support_count: int = 0
    witness_support: tuple[int, ...] = ()
    witness_coeffs: Optional[np.ndarray] = None
    min_support: tuple[int, ...] = ()
    min_coeffs: Optional[np.ndarray] = None
    max_support: tuple[int, ...] = ()
    max_coeffs: Optional[np.ndarray] = None

    def scaled(self, c: float) -> float:
        """Constant of c*A, from the stored extreme ratios."""
        return float(max(c * c * self.lambda_max - 1.0, 1.0 - c * c * self.lambda_min))

    def csv_row(self) -> tuple:
        count = self.trials if self.method == "sampled" else self.support_count
        return (self.order, self.delta, self.method, count)


def rayleigh_ratio(A, omega_matrix, support, coeffs) -> float:
    """||A Omega_T^T z||^2 / ||Omega_T^T z||^2 for z supported on T."""
    u = np.asarray(omega_matrix)[list(support)].T @ np.asarray(coeffs, dtype=float)
    return float(np.linalg.norm(np.asarray(A) @ u) ** 2 / np.linalg.norm(u) ** 2)


class _Extremes:
    """Running min/max with first-seen (lexicographic) tie-break."""

    def __init__(self):
        self.lmin, self.lmax = math.inf, -math.inf
        self.min_support = self.max_support = ()
        self.min_coeffs = self.max_coeffs = None

    def update(self, lmin, lmax, supp_min, coef_min, supp_max, coef_max):
        if lmin < self.lmin:
            self.lmin, self.min_support, self.min_coeffs = lmin, supp_min, coef_min
        if lmax > self.lmax:
            self.lmax, self.max_support, self.max_coeffs = lmax, supp_max, coef_max


def _process_batch(A, omega_matrix, supports: np.ndarray, ext: _Extremes, rank_floor: float) -> None:
    """Extreme ratios for a batch of supports (rows of ``supports``)."""
    B = np.transpose(omega_matrix[supports], (0, 2, 1))  # (K, d, s)
    # SVD of B itself, not of its Gram, keeps near-singular supports accurate
    Ufull, sv, Vt = np.linalg.svd(B, full_matrices=False)
    ranks = np.sum(sv * sv > rank_floor, axis=1)
    for r in np.unique(ranks):
        if r == 0:
            continue
        sel = np.flatnonzero(ranks == r)
        U = Ufull[sel][:, :, :r]
        AU = A @ U
        H = np.transpose(AU, (0, 2, 1)) @ AU
        lam, vec = np.linalg.eigh(H)
        kmin = int(np.argmin(lam[:, 0]))
        kmax = int(np.argmax(lam[:, -1]))

        def coeffs(k, col):
            # z with B z = U v:  z = V_r diag(1/sv_r) v
            v = vec[k][:, col]
            return Vt[sel[k]][:r].T @ (v / sv[sel[k]][:r])

        ext.update(
            float(lam[kmin, 0]), float(lam[kmax, -1]),
            tuple(int(i) for i in supports[sel[kmin]]), coeffs(kmin, 0),
            tuple(int(i) for i in supports[sel[kmax]]), coeffs(kmax, -1),
        )


def _estimate(A, omega_matrix, s, support_iter, method, trials, count, rank_rtol) -> RipEstimate:
    A = np.asarray(A, dtype=float)
    rank_floor = rank_rtol * max(float(np.linalg.norm(omega_matrix, 2)) ** 2, 1e-300)
    ext = _Extremes()
    chunk = []
    for supp in support_iter:
        chunk.append(supp)
        if len(chunk) == _CHUNK:
            _process_batch(A, omega_matrix, np.array(chunk, dtype=int), ext, rank_floor)
            chunk = []
    if chunk:
        _process_batch(A, omega_matrix, np.array(chunk, dtype=int), ext, rank_floor)
    if not math.isfinite(ext.lmax):
        # every direction degenerate: the inequality is vacuous
        return RipEstimate(order=s, delta=0.0, method=method, lambda_min=1.0, lambda_max=1.0,
                           trials=trials, support_count=count)
    up, down = ext.lmax - 1.0, 1.0 - ext.lmin
    if up >= down:
        wsupp, wcoef = ext.max_support, ext.max_coeffs
    else:
        wsupp, wcoef = ext.min_support, ext.min_coeffs
    return RipEstimate(
        order=s, delta=float(max(up, down, 0.0)), method=method,
        lambda_min=ext.lmin, lambda_max=ext.lmax, trials=trials, support_count=count,
        witness_support=wsupp, witness_coeffs=wcoef,
        min_support=ext.min_support, min_coeffs=ext.min_coeffs,
        max_support=ext.max_support, max_coeffs=ext.max_coeffs,
    )


def _omega_matrix(omega) -> np.ndarray:
    if isinstance(omega, AnalysisOperator):
        return omega.matrix
    return np.atleast_2d(np.asarray(omega, dtype=float))


def _check_order(s: int, n: int) -> None:
    if not 1 <= s <= n:
        raise ValueError(f"order s={s} must lie in [1, {n}]")


def omega_rip_exact(A, omega, s: int, cap: int = DEFAULT_ENUMERATION_CAP,
                    rank_rtol: float = 1e-10) -> RipEstimate:
    """Exact constant of order ``s`` by enumerating all supports."""
    mat = _omega_matrix(omega)
    n = mat.shape[0]
    _check_order(s, n)
    count = math.comb(n, s)
    if count > cap:
        raise EnumerationCapError(
            f"C({n},{s}) = {count} supports exceeds the cap of {cap}; use omega_rip_sampled instead"
        )
    return _estimate(A, mat, s, itertools.combinations(range(n), s), "exhaustive", 0, count, rank_rtol)


def omega_rip_sampled(A, omega, s: int, trials: int, seed: int, rank_rtol: float = 1e-10) -> RipEstimate:
    """Lower bound on the constant from ``trials`` random supports.

    When ``trials`` is at least the number of supports, all of them are
    enumerated instead, so the result equals the exhaustive constant.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mat = _omega_matrix(omega)
    n = mat.shape[0]
    _check_order(s, n)
    total = math.comb(n, s)
    if trials >= total:
        return _estimate(A, mat, s, itertools.combinations(range(n), s), "sampled", trials, total, rank_rtol)
    rng = make_rng(seed)
    supports = (tuple(sorted(rng.choice(n, size=s, replace=False).tolist())) for _ in range(trials))
    return _estimate(A, mat, s, supports, "sampled", trials, 0, rank_rtol)


def classic_rip(A, s: int, mode: str = "exhaustive", trials: int = 1000, seed: int = 0,
                cap: int = DEFAULT_ENUMERATION_CAP) -> RipEstimate:
    A = np.asarray(A, dtype=float)
    eye = np.eye(A.shape[1])
    if mode == "exhaustive":
        return omega_rip_exact(A, eye, s, cap=cap)
    if mode == "sampled":
        return omega_rip_sampled(A, eye, s, trials, seed)
    raise ValueError(f"unknown mode {mode!r}")
