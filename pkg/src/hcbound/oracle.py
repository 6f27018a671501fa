"""a_{P-bar}(g)^{2 rho_P} from a matrix factorization, independent of the exterior algebra.

Writing g = L Q with L lower triangular (positive diagonal) and Q orthogonal
realizes g = n_bar m a k: the block-diagonal part of L carries m a, and the
A_P coordinate of block i is ``t_i = det(D_i)^{1/n_i}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DomainError
from .parabolic import GradedStructure
from .psi_map import evaluate_psi

COND_LIMIT = 1e12
DET_TOL = 1e-10


@dataclass(frozen=True)
class LanglandsFactors:
    L: np.ndarray
    Q: np.ndarray
    t: np.ndarray
    log_a_2rho: float

    @property
    def a_2rho(self) -> float:
        return float(np.exp(self.log_a_2rho))


def nilpotent_exp(X) -> np.ndarray:
    """exp(X) for nilpotent X via the terminating power series."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, n + 1):
        term = term @ X / k
        out = out + term
    return out


def _block_bounds(sizes):
    edges = np.cumsum((0,) + tuple(sizes))
    return [(int(edges[i]), int(edges[i + 1])) for i in range(len(sizes))]


def log_a_2rho_from_L(gs: GradedStructure, L: np.ndarray) -> tuple:
    """Block scalars t_i (as logs) and log prod_{i<j} (t_i/t_j)^{n_i n_j} from a lower factor."""
    logd = np.log(np.abs(np.diag(L)))
    sizes = gs.block_sizes
    log_t = np.array([logd[a:b].sum() / (b - a) for a, b in _block_bounds(sizes)])
    total = 0.0
    for i, j, e in gs.rho_exponents:
        total += e * (log_t[i] - log_t[j])
    return log_t, total


def langlands_factorize(gs: GradedStructure, g, cond_limit: float = COND_LIMIT,
                        method: str = "householder") -> LanglandsFactors:
    """Factor g = L Q and read off the A_P coordinates.

    ``method="householder"`` (default) gets L from a Householder QR of g^T and
    never squares the condition number.  ``method="cholesky"`` takes the
    Cholesky factor of g g^T; its error grows like cond(g g^T) * eps, so it
    refuses inputs worse conditioned than ``cond_limit``.
    """
    g = np.asarray(g, dtype=float)
    n = gs.alg.n
    if g.shape != (n, n):
        raise DomainError(f"expected an {n}x{n} matrix, got {g.shape}")
    sign, logdet = np.linalg.slogdet(g)
    if sign <= 0 or abs(logdet) > DET_TOL * max(1.0, n):
        raise DomainError(f"det g must be 1 (got sign {sign}, log|det| {logdet:.3e})")
    if method == "cholesky":
        A = g @ g.T
        cond = np.linalg.cond(A)
        if not np.isfinite(cond) or cond > cond_limit:
            raise ConditioningError(f"g g^T has condition number {cond:.3e} > {cond_limit:.1e}")
        L = np.linalg.cholesky(A)
        Q = np.linalg.solve(L, g)
    elif method == "householder":
        Qt, R = np.linalg.qr(g.T)
        signs = np.where(np.diag(R) < 0, -1.0, 1.0)
        L = (R * signs[:, None]).T
        Q = (Qt * signs[None, :]).T
    else:
        raise ValueError(f"unknown factorization method {method!r}")
    log_t, log_a = log_a_2rho_from_L(gs, L)
    return LanglandsFactors(L, Q, np.exp(log_t), float(log_a))


def a_2rho_of_exp(gs: GradedStructure, X) -> float:
    return langlands_factorize(gs, nilpotent_exp(X)).a_2rho


def cross_check(module, gs: GradedStructure, X, method: str = "householder") -> float:
    """Relative discrepancy |‖psi(X)‖ - a_2rho(exp X)| / a_2rho(exp X)."""
    psi = evaluate_psi(module, gs, X)
    fac = langlands_factorize(gs, nilpotent_exp(X), method=method)
    log_psi = 0.5 * np.log(psi.norm2)
    return float(abs(np.expm1(log_psi - fac.log_a_2rho)))
