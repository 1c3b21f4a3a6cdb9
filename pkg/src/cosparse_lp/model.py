"""Core data model: analysis operators, cosparse signals, recovery problems.

Indices are 0-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .rng import make_rng

DEFAULT_ZERO_TOL = 1e-10
DEFAULT_PARSEVAL_TOL = 1e-10
MAX_COSUPPORT_ATTEMPTS = 50


class InvalidDimensionError(ValueError):
    pass


class InfeasibleCosparsityError(RuntimeError):
    pass


class InvalidPartitionError(ValueError):
    pass


def frame_bounds(phi) -> tuple[float, float]:
    """Optimal frame bounds (A, B) of the rows of ``phi``.

    Since sum_i <x, phi_i>^2 = ||phi x||^2, the bounds are the extreme
    eigenvalues of phi^T phi, i.e. the squared extreme singular values.
    A rank-deficient ``phi`` yields A = 0.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    sv = np.linalg.svd(phi, compute_uv=False)
    n_cols = phi.shape[1]
    smax = sv[0] if sv.size else 0.0
    smin = sv[-1] if sv.size == n_cols else 0.0
    return float(smin**2), float(smax**2)


@dataclass(frozen=True)
class AnalysisOperator:
    """An n x d analysis matrix with its frame metadata."""

    matrix: np.ndarray
    lower_bound: float
    upper_bound: float
    parseval_tol: float = DEFAULT_PARSEVAL_TOL

    @classmethod
    def from_matrix(cls, matrix, parseval_tol: float = DEFAULT_PARSEVAL_TOL) -> "AnalysisOperator":
        mat = np.array(matrix, dtype=float, copy=True)
        if mat.ndim != 2:
            raise InvalidDimensionError("analysis operator must be a 2-d array")
        n, d = mat.shape
        if d < 1 or n < d:
            raise InvalidDimensionError(f"analysis operator needs n >= d >= 1, got {n}x{d}")
        mat.setflags(write=False)
        lo, hi = frame_bounds(mat)
        return cls(matrix=mat, lower_bound=lo, upper_bound=hi, parseval_tol=parseval_tol)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    @property
    def is_parseval(self) -> bool:
        gram = self.matrix.T @ self.matrix
        return bool(np.max(np.abs(gram - np.eye(self.d))) <= self.parseval_tol)

    def analyze(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def rows(self, idx) -> np.ndarray:
        return self.matrix[np.asarray(idx, dtype=int)]


@dataclass(frozen=True)
class CosparseSignal:
    x: np.ndarray
    cosupport: tuple[int, ...]
    zero_tol: float = DEFAULT_ZERO_TOL

    @property
    def cosparsity(self) -> int:
        return len(self.cosupport)


@dataclass(frozen=True)
class RecoveryProblem:
    A: np.ndarray
    omega: AnalysisOperator
    y: np.ndarray
    sigma: float
    truth: Optional[CosparseSignal] = None
    noise: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    def residual(self, x) -> float:
        return float(np.linalg.norm(self.A @ np.asarray(x, dtype=float) - self.y))


@dataclass(frozen=True)
class SupportPartition:
    """S0 (the s largest entries) followed by blocks of size M.

    ``order`` is the full permutation: S0 first, then the blocks in order,
    and ``sorted_values`` holds z[order].
    """

    s: int
    M: int
    S0: np.ndarray
    blocks: list = field(default_factory=list)
    order: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    sorted_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def complement(self) -> np.ndarray:
        return self.order[self.s:]

    @property
    def J(self) -> int:
        return len(self.blocks)

    @property
    def has_short_block(self) -> bool:
        return bool(self.blocks) and len(self.blocks[-1]) < self.M


def make_random_parseval_frame(n: int, d: int, seed: int) -> AnalysisOperator:
    """Random n x d Parseval frame from a Gaussian matrix with orthonormalized columns."""
    if d < 1 or n < d:
        raise InvalidDimensionError(f"need n >= d >= 1, got n={n}, d={d}")
    rng = make_rng(seed)
    g = rng.standard_normal((n, d))
    q, r = np.linalg.qr(g)
    # sign fix makes the factorization unique
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return AnalysisOperator.from_matrix(q * signs)


def _zero_mask(omega: AnalysisOperator, x: np.ndarray, zero_tol: float) -> np.ndarray:
    coeffs = omega.matrix @ x
    row_norms = np.linalg.norm(omega.matrix, axis=1)
    return np.abs(coeffs) <= zero_tol * (row_norms * np.linalg.norm(x) + 1.0)


def analyze_cosupport(omega: AnalysisOperator, x, zero_tol: float = DEFAULT_ZERO_TOL) -> tuple[tuple[int, ...], int]:
    x = np.asarray(x, dtype=float)
    if x.shape != (omega.d,):
        raise InvalidDimensionError(f"signal has shape {x.shape}, expected ({omega.d},)")
    lam = tuple(int(j) for j in np.flatnonzero(_zero_mask(omega, x, zero_tol)))
    return lam, len(lam)


def null_space(mat: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of ``mat``."""
    d = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(d)
    _, sv, vt = np.linalg.svd(mat, full_matrices=True)
    scale = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > rtol * max(scale, 1.0) * max(mat.shape)))
    return vt[rank:].T


def generate_cosparse_signal(
    omega: AnalysisOperator, cosparsity: int, seed: int, zero_tol: float = DEFAULT_ZERO_TOL
) -> CosparseSignal:
    """Unit-norm signal orthogonal to ``cosparsity`` randomly chosen analysis rows."""
    if not 0 <= cosparsity <= omega.n:
        raise InvalidDimensionError(f"cosparsity {cosparsity} outside [0, {omega.n}]")
    rng = make_rng(seed)
    for _ in range(MAX_COSUPPORT_ATTEMPTS):
        lam = np.sort(rng.choice(omega.n, size=cosparsity, replace=False))
        basis = null_space(omega.matrix[lam])
        g = rng.standard_normal(omega.d)
        if basis.shape[1] == 0:
            continue
        x = basis @ (basis.T @ g)
        norm = np.linalg.norm(x)
        if norm <= 1e-8 * np.linalg.norm(g):
            continue
        x = x / norm
        # exact zeros on the chosen rows are only approximate after projection
        achieved, _ = analyze_cosupport(omega, x, zero_tol)
        if set(lam.tolist()) <= set(achieved):
            return CosparseSignal(x=x, cosupport=achieved, zero_tol=zero_tol)
    raise InfeasibleCosparsityError(
        f"no nontrivial null space found for cosparsity {cosparsity} after {MAX_COSUPPORT_ATTEMPTS} attempts"
    )


def make_gaussian_measurement(m: int, d: int, seed: int, normalize: bool = True) -> np.ndarray:
    if m < 1 or d < 1:
        raise InvalidDimensionError(f"need m, d >= 1, got m={m}, d={d}")
    rng = make_rng(seed)
    a = rng.standard_normal((m, d))
    if normalize:
        a /= np.sqrt(m)
    return a


def build_problem(A, omega: AnalysisOperator, signal: CosparseSignal, sigma: float, seed: int) -> RecoveryProblem:
    """y = A x + v with ||v||_2 = 0.9 sigma, so the truth is strictly feasible."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != omega.d or signal.x.shape != (omega.d,):
        raise InvalidDimensionError(
            f"dimension mismatch: A {A.shape}, omega {omega.matrix.shape}, x {signal.x.shape}"
        )
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        v = np.zeros(A.shape[0])
    else:
        rng = make_rng(seed)
        g = rng.standard_normal(A.shape[0])
        v = 0.9 * sigma * g / np.linalg.norm(g)
    y = A @ signal.x + v
    return RecoveryProblem(A=A, omega=omega, y=y, sigma=float(sigma), truth=signal, noise=v)


def partition_supports(z, s: int, M: int) -> SupportPartition:
    """Split indices of ``z`` into S0 (s largest |z_i|) and blocks of size M.

    Ties are broken by the lower index. The last block may be shorter than M.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    if s < 1 or s >= n:
        raise InvalidPartitionError(f"need 1 <= s < n, got s={s}, n={n}")
    if M < 1:
        raise InvalidPartitionError(f"block size must be positive, got {M}")
    order = np.argsort(-np.abs(z), kind="stable")
    rest = order[s:]
    blocks = [rest[i:i + M] for i in range(0, rest.size, M)]
    return SupportPartition(s=s, M=M, S0=order[:s], blocks=blocks, order=order, sorted_values=z[order])


def lp_norm_pow(x, p: float) -> float:
    if p <= 0:
        raise ValueError("p must be positive")
    return float(np.sum(np.abs(np.asarray(x, dtype=float)) ** p))


def lp_norm(x, p: float) -> float:
    return lp_norm_pow(x, p) ** (1.0 / p)


def subvector(z, idx: Sequence[int]) -> np.ndarray:
    return np.asarray(z)[np.asarray(idx, dtype=int)]
