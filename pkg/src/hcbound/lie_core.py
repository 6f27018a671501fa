"""Concrete matrix Lie algebras with Cartan involution, invariant form and inner product.

Only sl(n, R) is provided.  Its invariant form is the trace form
``B(X, Y) = tr(XY)`` and the Cartan involution is ``theta(X) = -X^T``, so the
induced inner product ``<X, Y> = -B(X, theta Y)`` is the Frobenius pairing
``tr(X Y^T)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidDimensionError, ShapeMismatchError

DEFAULT_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def elementary(n: int, p: int, q: int) -> np.ndarray:
    E = np.zeros((n, n))
    E[p, q] = 1.0
    return E


@dataclass(frozen=True, eq=False)
class MatrixLieAlgebra:
    """A real Lie algebra realized as a space of n x n matrices.

    ``basis`` has shape ``(dim, n, n)``.  ``labels`` gives a readable name for
    each basis element, e.g. ``"E12"`` or ``"H1"``.
    """

    family: str
    n: int
    basis: np.ndarray
    labels: tuple
    form_kind: str = "trace"
    involution_kind: str = "minus-transpose"
    _gram_inv: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def name(self) -> str:
        return f"{self.family}({self.n})"

    def theta(self, X):
        return -np.asarray(X).T

    def form(self, X, Y) -> float:
        """The invariant form B(X, Y) = tr(XY)."""
        _check_pair(self, X, Y)
        return float(np.trace(np.asarray(X) @ np.asarray(Y)))

    def gram(self) -> np.ndarray:
        """Gram matrix of the inner product on the basis."""
        B = self.basis.reshape(self.dim, -1)
        return B @ B.T

    def coords(self, X) -> np.ndarray:
        """Coordinates of X in ``basis`` (least squares against the Gram matrix)."""
        X = np.asarray(X, dtype=float)
        rhs = self.basis.reshape(self.dim, -1) @ X.reshape(-1)
        return self._gram_inv @ rhs

    def from_coords(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), self.basis, axes=1)

    def contains(self, X, tol: float = DEFAULT_TOL) -> bool:
        X = np.asarray(X, dtype=float)
        if X.shape != (self.n, self.n):
            return False
        resid = X - self.from_coords(self.coords(X))
        return float(np.linalg.norm(resid)) <= tol * max(1.0, float(np.linalg.norm(X)))


def make_special_linear(n: int) -> MatrixLieAlgebra:
    """sl(n, R) with basis E_pq (p != q, row-major order) then E_pp - E_{p+1,p+1}."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidDimensionError(f"sl(n) needs n >= 2, got {n!r}")
    n = int(n)
    mats, labels = [], []
    for p in range(n):
        for q in range(n):
            if p != q:
                mats.append(elementary(n, p, q))
                labels.append(f"E{p + 1}{q + 1}")
    for p in range(n - 1):
        mats.append(elementary(n, p, p) - elementary(n, p + 1, p + 1))
        labels.append(f"H{p + 1}")
    basis = _frozen(mats)
    flat = basis.reshape(len(mats), -1)
    gram_inv = _frozen(np.linalg.inv(flat @ flat.T))
    return MatrixLieAlgebra("sl", n, basis, tuple(labels), _gram_inv=gram_inv)


def _check_pair(alg, X, Y):
    shape = (alg.n, alg.n)
    if np.shape(X) != shape or np.shape(Y) != shape:
        raise ShapeMismatchError(
            f"expected {shape} matrices, got {np.shape(X)} and {np.shape(Y)}"
        )


def bracket(alg: MatrixLieAlgebra, X, Y) -> np.ndarray:
    _check_pair(alg, X, Y)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return X @ Y - Y @ X


def inner_product(alg: MatrixLieAlgebra, X, Y) -> float:
    """<X, Y> = -B(X, theta Y), which for sl(n) is tr(X Y^T)."""
    _check_pair(alg, X, Y)
    return -alg.form(X, alg.theta(Y))


def norm(alg: MatrixLieAlgebra, X) -> float:
    return float(np.sqrt(max(inner_product(alg, X, X), 0.0)))


def orthonormalize(alg: MatrixLieAlgebra, vectors: Sequence, tol: float = DEFAULT_TOL,
                   return_dropped: bool = False):
    """Modified Gram-Schmidt (two passes) with respect to <., .>.

    Vectors whose residual norm falls below ``tol`` are dropped; with
    ``return_dropped=True`` the number dropped is returned as well.
    """
    out = []
    dropped = 0
    for v in vectors:
        w = np.array(v, dtype=float)
        if w.shape != (alg.n, alg.n):
            raise ShapeMismatchError(f"expected ({alg.n}, {alg.n}), got {w.shape}")
        for _ in range(2):
            for u in out:
                w = w - inner_product(alg, u, w) * u
        nw = norm(alg, w)
        if nw < tol:
            dropped += 1
            continue
        out.append(w / nw)
    if return_dropped:
        return out, dropped
    return out


def ad_invariance_residual(alg: MatrixLieAlgebra) -> float:
    """max |B([Z,X],Y) + B(X,[Z,Y])| over all basis triples."""
    worst = 0.0
    b = alg.basis
    for Z in b:
        for X in b:
            ZX = bracket(alg, Z, X)
            for Y in b:
                val = alg.form(ZX, Y) + alg.form(X, bracket(alg, Z, Y))
                worst = max(worst, abs(val))
    return worst


def structure_matrices(basis: np.ndarray) -> np.ndarray:
    """ad matrices in an orthonormal (Frobenius) basis.

    Returns ``A`` with ``A[a, c, b] = <[e_a, e_b], e_c>``, so ``A[a]`` is the
    matrix of ad(e_a) acting on coordinate vectors.
    """
    d = basis.shape[0]
    flat = basis.reshape(d, -1)
    A = np.empty((d, d, d))
    for a in range(d):
        br = np.einsum("ij,bjk->bik", basis[a], basis) - np.einsum("bij,jk->bik", basis, basis[a])
        A[a] = flat @ br.reshape(d, -1).T
    return A
