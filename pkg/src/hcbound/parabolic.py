"""Gradings of sl(n) attached to block parabolic subalgebras.

For block sizes (n_1, ..., n_k) the grading element is
``H = diag(c_1 I_{n_1}, ..., c_k I_{n_k})`` with ``c_i - c_{i+1} = 1`` and
``sum n_i c_i = 0``.  The block (i, j) then sits in grade ``j - i`` and the
nilradical n_P is the strictly upper block-triangular part.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Sequence

import numpy as np

from .errors import GradingError, InvalidBlocksError
from .lie_core import MatrixLieAlgebra, bracket, inner_product, orthonormalize

GRADE_CLUSTER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GradedStructure:
    alg: MatrixLieAlgebra
    block_sizes: tuple
    H: np.ndarray
    grades: Dict[int, np.ndarray]
    q: int
    r: int
    rho_H: float
    trivial: bool = False

    @property
    def k(self) -> int:
        return len(self.block_sizes)

    @property
    def rho_exponents(self):
        """Triples (i, j, n_i * n_j) for i < j: a^{2 rho} = prod (t_i / t_j)^{n_i n_j}."""
        b = self.block_sizes
        return tuple((i, j, b[i] * b[j]) for i in range(len(b)) for j in range(i + 1, len(b)))

    @property
    def grade_list(self):
        return sorted(self.grades)

    @property
    def basis(self) -> np.ndarray:
        """Orthonormal basis of the algebra adapted to the grading, grades ascending."""
        return np.concatenate([self.grades[j] for j in self.grade_list], axis=0)

    @property
    def basis_grades(self) -> np.ndarray:
        return np.concatenate(
            [np.full(len(self.grades[j]), j, dtype=int) for j in self.grade_list])

    @property
    def n_plus(self) -> np.ndarray:
        """Orthonormal basis of n_P, grades 1..q in order."""
        parts = [self.grades[j] for j in range(1, self.q + 1)]
        if not parts:
            return np.zeros((0, self.alg.n, self.alg.n))
        return np.concatenate(parts, axis=0)

    @property
    def n_plus_grades(self) -> np.ndarray:
        return np.concatenate(
            [np.full(len(self.grades[j]), j, dtype=int) for j in range(1, self.q + 1)]
            or [np.zeros(0, dtype=int)])

    @property
    def n_minus(self) -> np.ndarray:
        parts = [self.grades[j] for j in range(-self.q, 0)]
        if not parts:
            return np.zeros((0, self.alg.n, self.alg.n))
        return np.concatenate(parts, axis=0)

    def dim_grade(self, j: int) -> int:
        g = self.grades.get(j)
        return 0 if g is None else len(g)

    def n_plus_coords(self, X) -> np.ndarray:
        """Coordinates of the n_P part of X in the orthonormal n_P basis."""
        N = self.n_plus
        return N.reshape(len(N), -1) @ np.asarray(X, dtype=float).reshape(-1)

    def n_plus_matrix(self, coords) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=float), self.n_plus, axes=1)


def block_grading_element(block_sizes: Sequence[int]) -> np.ndarray:
    """Diagonal H with unit steps between consecutive blocks and trace zero."""
    sizes = list(block_sizes)
    n = sum(sizes)
    c1 = Fraction(sum(s * i for i, s in enumerate(sizes)), n)
    diag = []
    for i, s in enumerate(sizes):
        diag.extend([float(c1 - i)] * s)
    return np.diag(diag)


def _weight_eigenvalue(alg, H, b):
    Hb = bracket(alg, H, b)
    lam = inner_product(alg, Hb, b) / inner_product(alg, b, b)
    resid = np.linalg.norm(Hb - lam * b)
    return lam, resid


def grading_from_blocks(alg: MatrixLieAlgebra, block_sizes: Sequence[int],
                        tol: float = GRADE_CLUSTER_TOL) -> GradedStructure:
    sizes = tuple(int(s) for s in block_sizes)
    if not sizes or any(s <= 0 for s in sizes) or sum(sizes) != alg.n:
        raise InvalidBlocksError(
            f"block sizes {list(block_sizes)} must be positive and sum to n = {alg.n}")
    if len(sizes) == 1:
        H = np.zeros((alg.n, alg.n))
        basis = np.array(orthonormalize(alg, alg.basis))
        return GradedStructure(alg, sizes, H, {0: basis}, q=0, r=0, rho_H=0.0, trivial=True)

    H = block_grading_element(sizes)
    buckets: Dict[int, list] = {}
    for b in alg.basis:
        lam, resid = _weight_eigenvalue(alg, H, b)
        if resid > tol:
            raise GradingError("basis element is not an ad(H) eigenvector; "
                               f"residual {resid:.3e}")
        j = int(round(lam))
        if abs(lam - j) > tol:
            raise GradingError(f"non-integral ad(H) eigenvalue {lam!r}")
        buckets.setdefault(j, []).append(b)
    grades = {}
    for j in sorted(buckets):
        on = orthonormalize(alg, buckets[j])
        arr = np.array(on)
        arr.setflags(write=False)
        grades[j] = arr
    q = max(grades)
    r = sum(len(grades[j]) for j in grades if j > 0)
    rho = 0.5 * sum(j * len(grades[j]) for j in grades if j > 0)
    H.setflags(write=False)
    return GradedStructure(alg, sizes, H, grades, q=q, r=r, rho_H=rho)


def grade_decompose(gs: GradedStructure, X) -> Dict[int, np.ndarray]:
    """Orthogonal projections X_j of X onto every grade space g_j."""
    X = np.asarray(X, dtype=float)
    out = {}
    for j in gs.grade_list:
        B = gs.grades[j]
        c = B.reshape(len(B), -1) @ X.reshape(-1)
        out[j] = np.tensordot(c, B, axes=1)
    return out


def rho_value(gs: GradedStructure) -> float:
    """rho_P(H) = 1/2 sum_{j >= 1} j dim g_j."""
    return 0.5 * sum(j * gs.dim_grade(j) for j in range(1, gs.q + 1))


def trace_ad_H_on_nplus(gs: GradedStructure) -> float:
    """tr(ad H | n_P) evaluated directly from brackets (independent of rho_value)."""
    total = 0.0
    for b in gs.n_plus:
        total += inner_product(gs.alg, bracket(gs.alg, gs.H, b), b)
    return total


def torus_weights(gs: GradedStructure) -> np.ndarray:
    """Weight of each adapted basis element under the diagonal torus.

    Row i is the vector ``w`` with ``[D, b_i] = (w . diag D) b_i``.  Elements
    supported on the diagonal get weight 0; a single off-diagonal entry at
    (p, q) gets e_p - e_q.
    """
    basis = gs.basis
    n = gs.alg.n
    W = np.zeros((len(basis), n), dtype=int)
    for i, b in enumerate(basis):
        off = b - np.diag(np.diag(b))
        nz = np.argwhere(np.abs(off) > 0)
        if len(nz) == 0:
            continue
        if len(nz) != 1 or np.any(np.abs(np.diag(b)) > 0):
            raise GradingError("adapted basis element is not a torus weight vector")
        p, qq = nz[0]
        W[i, p] += 1
        W[i, qq] -= 1
    return W
