"""psi(X) = sigma(exp(-X)) xi, its grade components, the maps T_j and residuals u_j."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import DomainError
from .exterior import CyclicModule
from .parabolic import GradedStructure

NP_TOL = 1e-10


@dataclass(frozen=True)
class PsiValue:
    coords: np.ndarray
    components: Dict[int, np.ndarray]

    @property
    def norm2(self) -> float:
        return float(self.coords @ self.coords)


def nplus_coords(gs: GradedStructure, X, tol: float = NP_TOL) -> np.ndarray:
    """Coordinates of X in the orthonormal n_P basis; DomainError if X is not in n_P."""
    X = np.asarray(X, dtype=float)
    if X.shape != (gs.alg.n, gs.alg.n):
        raise DomainError(f"expected a {gs.alg.n}x{gs.alg.n} matrix, got {X.shape}")
    x = gs.n_plus_coords(X)
    resid = np.linalg.norm(X - gs.n_plus_matrix(x))
    if resid > tol * max(1.0, np.linalg.norm(X)):
        raise DomainError(f"X has a component of norm {resid:.3e} outside n_P")
    return x


def psi_coords_batch(module: CyclicModule, x) -> np.ndarray:
    """psi for many X at once: ``x`` is (S, r) n_P coordinates, result is (dim Z, S).

    sigma(X) strictly raises the grade, so the exponential series stops after
    ``top_grade`` terms and is exact up to rounding.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    term = np.zeros((module.dim, x.shape[0]))
    term[0] = 1.0
    total = term.copy()
    for k in range(1, module.top_grade + 1):
        term = -module.apply_sigma(x, term) / k
        total += term
    return total


def _components(module: CyclicModule, z) -> Dict[int, np.ndarray]:
    return {j: z[s].copy() for j, s in sorted(module.grade_blocks.items())}


def evaluate_psi(module: CyclicModule, gs: GradedStructure, X) -> PsiValue:
    x = nplus_coords(gs, X)
    z = psi_coords_batch(module, x[None, :])[:, 0]
    return PsiValue(z, _components(module, z))


def evaluate_psi_coords(module: CyclicModule, x) -> PsiValue:
    z = psi_coords_batch(module, np.asarray(x, dtype=float)[None, :])[:, 0]
    return PsiValue(z, _components(module, z))


def _grade_slice(gs: GradedStructure, j: int) -> slice:
    """Range of n_P coordinates belonging to grade j."""
    start = sum(gs.dim_grade(i) for i in range(1, j))
    return slice(start, start + gs.dim_grade(j))


def component_map_T(module: CyclicModule, gs: GradedStructure, j: int,
                    tol: float = NP_TOL) -> np.ndarray:
    """Matrix of X_j -> -sigma(X_j) xi from g_j (orthonormal basis) into Z_j."""
    if not 1 <= j <= gs.q:
        raise DomainError(f"grade {j} outside 1..{gs.q}")
    cols = _grade_slice(gs, j)
    zs = module.grade_blocks.get(j)
    if zs is None:
        raise DomainError(f"Z has no grade {j} block")
    xi = module.xi
    full = np.column_stack([-(module.sigma_gens[i] @ xi) for i in range(cols.start, cols.stop)])
    T = full[zs]
    leak = np.linalg.norm(np.delete(full, np.r_[zs], axis=0))
    if leak > tol:
        raise DomainError(f"T_{j} leaks {leak:.3e} outside Z_{j}")
    return T


def smallest_singular_value(T: np.ndarray) -> float:
    if T.shape[1] == 0:
        return float("inf")
    s = np.linalg.svd(T, compute_uv=False)
    if len(s) < T.shape[1]:
        return 0.0
    return float(s[-1])


def truncate_below(gs: GradedStructure, x, j: int) -> np.ndarray:
    """n_P coordinates of X_1 + ... + X_{j-1}."""
    x = np.array(x, dtype=float)
    x[_grade_slice(gs, j).start:] = 0.0
    return x


def residual_u(module: CyclicModule, gs: GradedStructure, j: int, X) -> np.ndarray:
    """u_j(X_1, ..., X_{j-1}) as a vector in Z_j coordinates."""
    if not 2 <= j <= gs.q:
        raise DomainError(f"u_j needs 2 <= j <= {gs.q}, got {j}")
    x = nplus_coords(gs, X)
    return residual_u_coords(module, gs, j, x)


def residual_u_coords(module: CyclicModule, gs: GradedStructure, j: int, x) -> np.ndarray:
    low = truncate_below(gs, x, j)
    z = psi_coords_batch(module, low[None, :])[:, 0]
    return z[module.grade_blocks[j]]


def residual_u_via_difference(module: CyclicModule, gs: GradedStructure, j: int, X) -> np.ndarray:
    """psi(X)_j - T_j(X_j): the second route to u_j used for cross-checking."""
    x = nplus_coords(gs, X)
    z = psi_coords_batch(module, x[None, :])[:, 0]
    T = component_map_T(module, gs, j)
    return z[module.grade_blocks[j]] - T @ x[_grade_slice(gs, j)]
