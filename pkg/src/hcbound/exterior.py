"""The representation sigma = wedge^r ad on the cyclic subspace Z = sigma(U(n_P)) xi.

Ambient vectors of wedge^r g are kept sparse: a ``dict`` mapping a sorted
r-tuple of indices into the graded orthonormal basis of g (``gs.basis``) to a
coefficient.  Because that basis is orthonormal, the wedge monomials are
orthonormal in the induced inner product.

Z is never embedded in the full wedge^r g.  It is built weight space by weight
space for the diagonal torus: every n_P basis element is a torus weight
vector, so sigma(b) maps the weight-mu part of Z into the weight
(mu + wt b) part.  Each weight space gets its own orthonormal basis, which
keeps the generator matrices block sparse.
"""

from __future__ import annotations

import bisect
import logging
import weakref
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import ClosureError, TrivialModuleError
from .lie_core import structure_matrices
from .parabolic import GradedStructure, torus_weights

log = logging.getLogger(__name__)

CLOSURE_TOL = 1e-10
_COEF_EPS = 1e-14

Wedge = Dict[Tuple[int, ...], float]


class _Frame:
    """Structure constants of g in the graded orthonormal basis (cached per structure)."""

    def __init__(self, gs: GradedStructure):
        self.basis = gs.basis
        self.grades = gs.basis_grades
        self.ad = structure_matrices(self.basis)
        self.weights = torus_weights(gs) if not gs.trivial else None
        # columns of ad(e_a): for each a and source index i, list of (target, value)
        self._cols = {}

    def coords(self, X) -> np.ndarray:
        B = self.basis
        return B.reshape(len(B), -1) @ np.asarray(X, dtype=float).reshape(-1)

    def ad_columns(self, a: int):
        cols = self._cols.get(a)
        if cols is None:
            A = self.ad[a]
            cols = []
            for i in range(A.shape[1]):
                nz = np.nonzero(np.abs(A[:, i]) > _COEF_EPS)[0]
                cols.append([(int(c), float(A[c, i])) for c in nz])
            self._cols[a] = cols
        return cols


_frames: "weakref.WeakKeyDictionary[GradedStructure, _Frame]" = weakref.WeakKeyDictionary()


def frame(gs: GradedStructure) -> _Frame:
    f = _frames.get(gs)
    if f is None:
        f = _Frame(gs)
        _frames[gs] = f
    return f


def wedge_basis(indices) -> Wedge:
    """e_{i1} ^ ... ^ e_{ir} as a sparse vector in sorted-index form (0 if repeated)."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return {}
    sign = 1.0
    # bubble sort parity; r is small
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return {tuple(idx): sign}


def _derive_monomial(I: Tuple[int, ...], columns, out: Wedge, scale: float = 1.0):
    """Accumulate sum_l e_I with slot l replaced by ad(X) e_{i_l} into ``out``."""
    for l, i in enumerate(I):
        rest = I[:l] + I[l + 1:]
        for c, val in columns[i]:
            if c in rest:
                continue
            pos = bisect.bisect_left(rest, c)
            J = rest[:pos] + (c,) + rest[pos:]
            coef = val * scale
            if (pos - l) % 2:
                coef = -coef
            out[J] = out.get(J, 0.0) + coef


def wedge_action(alg, gs: GradedStructure, X, v: Wedge) -> Wedge:
    """sigma(X) v for X in the algebra acting as a derivation on wedge^r g."""
    fr = frame(gs)
    x = fr.coords(X)
    adX = np.tensordot(x, fr.ad, axes=1)
    columns = []
    for i in range(adX.shape[1]):
        nz = np.nonzero(np.abs(adX[:, i]) > _COEF_EPS)[0]
        columns.append([(int(c), float(adX[c, i])) for c in nz])
    out: Wedge = {}
    for I, coef in v.items():
        if coef != 0.0:
            _derive_monomial(I, columns, out, coef)
    return {J: c for J, c in out.items() if c != 0.0}


@dataclass(frozen=True, eq=False)
class _WeightBlock:
    weight: tuple
    grade: int
    support: tuple          # ambient r-tuples spanning this weight's coordinates
    Q: np.ndarray           # len(support) x dim, orthonormal columns
    offset: int             # position of the first column in Z coordinates


@dataclass(frozen=True, eq=False)
class CyclicModule:
    """Orthonormal model of Z with the sigma action of an orthonormal n_P basis.

    Z coordinates are ordered by grade, then by torus weight.  ``xi`` is the
    first Z basis vector.  ``sigma_gens[i]`` is the (sparse) matrix of
    sigma(b_i) on Z for ``b_i = gs.n_plus[i]``.
    """

    gs: GradedStructure
    r: int
    blocks: tuple
    sigma_gens: tuple
    gen_grades: np.ndarray
    sigma_H_eigs: np.ndarray
    grade_blocks: Dict[int, slice]
    top_grade: int
    closure_residual: float

    @property
    def dim(self) -> int:
        return int(sum(b.Q.shape[1] for b in self.blocks))

    @property
    def xi(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    @property
    def xi_index(self) -> tuple:
        return tuple(range(self.r))

    @property
    def ambient_index(self) -> tuple:
        return tuple(I for b in self.blocks for I in b.support)

    def grade_dim(self, j: int) -> int:
        s = self.grade_blocks.get(j)
        return 0 if s is None else s.stop - s.start

    def to_ambient(self, z) -> Wedge:
        z = np.asarray(z, dtype=float)
        out: Wedge = {}
        for b in self.blocks:
            vals = b.Q @ z[b.offset:b.offset + b.Q.shape[1]]
            for I, c in zip(b.support, vals):
                if c != 0.0:
                    out[I] = out.get(I, 0.0) + float(c)
        return out

    def from_ambient(self, v: Wedge) -> np.ndarray:
        """Orthogonal projection of an ambient vector onto Z, in Z coordinates."""
        z = np.zeros(self.dim)
        for b in self.blocks:
            pos = {I: k for k, I in enumerate(b.support)}
            w = np.zeros(len(b.support))
            hit = False
            for I, c in v.items():
                k = pos.get(I)
                if k is not None:
                    w[k] = c
                    hit = True
            if hit:
                z[b.offset:b.offset + b.Q.shape[1]] = b.Q.T @ w
        return z

    def sigma(self, x) -> sp.csr_matrix:
        """Matrix of sigma(X) on Z for X with n_P coordinates ``x``."""
        x = np.asarray(x, dtype=float)
        M = sp.csr_matrix((self.dim, self.dim))
        for xi_, G in zip(x, self.sigma_gens):
            if xi_ != 0.0:
                M = M + xi_ * G
        return M

    def apply_sigma(self, x, V) -> np.ndarray:
        """Batched sigma(X_s) V[:, s]; ``x`` has shape (S, r), ``V`` shape (dim, S)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros_like(V)
        for i, G in enumerate(self.sigma_gens):
            out += (G @ V) * x[:, i]
        return out


def _monomial_image(I, cols):
    out: Wedge = {}
    _derive_monomial(I, cols, out)
    return out


def build_cyclic_module(alg, gs: GradedStructure, tol: float = CLOSURE_TOL,
                        grade_cap: Optional[int] = None) -> CyclicModule:
    """Close xi under sigma(n_P) grade by grade and orthonormalize each weight space.

    Grades of Z lie in [0, 4 rho(H)]; ``grade_cap`` lowers that budget.
    """
    if gs.trivial or gs.r == 0:
        raise TrivialModuleError("r = 0: the cyclic module is trivial")
    fr = frame(gs)
    r = gs.r
    d = len(fr.basis)
    gens = list(range(d - r, d))
    gen_w = [tuple(fr.weights[a]) for a in gens]
    gen_g = [int(fr.grades[a]) for a in gens]
    if any(g < 1 for g in gen_g) or any(fr.grades[i] >= 0 for i in range(r)):
        raise ClosureError("graded basis is not ordered n_bar, m, n_P")

    xi_idx = tuple(range(r))
    xi_w = tuple(int(v) for v in fr.weights[:r].sum(axis=0))
    cap = int(round(4 * gs.rho_H)) if grade_cap is None else int(grade_cap)

    support: Dict[tuple, list] = {xi_w: [xi_idx]}
    support_pos: Dict[tuple, dict] = {xi_w: {xi_idx: 0}}
    pending: Dict[tuple, list] = {}
    done: Dict[tuple, _WeightBlock] = {}
    maps = []                                    # (gen k, src weight, dst weight, sparse M)
    image_cache = {}
    by_grade: Dict[int, set] = {0: {xi_w}}
    residual = 0.0

    g = 0
    empty_run = 0
    while True:
        ws = sorted(by_grade.get(g, ()))
        found = False
        for w in ws:
            if w == xi_w and g == 0:
                Q = np.ones((1, 1))
            else:
                parts = []
                for k, src, rows, cidx, vals in pending.get(w, ()):
                    M = sp.csr_matrix((vals, (rows, cidx)),
                                      shape=(len(support[w]), len(support[src])))
                    parts.append(M @ done[src].Q)
                Y = np.hstack(parts) if parts else np.zeros((len(support[w]), 0))
                Q = _orth(Y, tol)
            if Q.shape[1] == 0:
                continue
            found = True
            if g > cap:
                raise ClosureError(f"nonzero grade {g} exceeds cap {cap}")
            done[w] = _WeightBlock(w, g, tuple(support[w]), Q, -1)
            # push images into higher weights
            for k, a in enumerate(gens):
                cols = fr.ad_columns(a)
                tgt = tuple(x + y for x, y in zip(w, gen_w[k]))
                rows, cidx, vals = [], [], []
                spos = support.setdefault(tgt, [])
                ppos = support_pos.setdefault(tgt, {})
                for ci, I in enumerate(support[w]):
                    key = (a, I)
                    img = image_cache.get(key)
                    if img is None:
                        img = _monomial_image(I, cols)
                        image_cache[key] = img
                    for J, c in img.items():
                        if abs(c) <= _COEF_EPS:
                            continue
                        p = ppos.get(J)
                        if p is None:
                            p = len(spos)
                            ppos[J] = p
                            spos.append(J)
                        rows.append(p)
                        cidx.append(ci)
                        vals.append(c)
                if not vals:
                    continue
                by_grade.setdefault(g + gen_g[k], set()).add(tgt)
                maps.append((k, w, tgt, rows, cidx, vals))
                pending.setdefault(tgt, []).append((k, w, rows, cidx, vals))
        if found:
            empty_run = 0
        else:
            empty_run += 1
            if empty_run >= max(gen_g) and g > 0:
                break
        g += 1
        if g > cap + max(gen_g) + 1:
            raise ClosureError("closure did not terminate within the grade cap")

    # lay out Z coordinates: grade, then weight
    order = sorted(done.values(), key=lambda b: (b.grade, b.weight))
    blocks = []
    offset = 0
    offsets = {}
    for b in order:
        blocks.append(_WeightBlock(b.weight, b.grade, b.support, b.Q, offset))
        offsets[b.weight] = offset
        offset += b.Q.shape[1]
    dimZ = offset
    block_of = {b.weight: b for b in blocks}

    rows_k = [[] for _ in gens]
    cols_k = [[] for _ in gens]
    vals_k = [[] for _ in gens]
    for k, w, tgt, rows, cidx, vals in maps:
        src = block_of[w]
        M = sp.csr_matrix((vals, (rows, cidx)), shape=(len(support[tgt]), len(src.support)))
        img = M @ src.Q
        dst = block_of.get(tgt)
        if dst is None:
            residual = max(residual, float(np.abs(img).max(initial=0.0)))
            continue
        Qd = np.zeros((len(support[tgt]), dst.Q.shape[1]))
        Qd[:dst.Q.shape[0]] = dst.Q
        blk = Qd.T @ img
        residual = max(residual, float(np.abs(img - Qd @ blk).max(initial=0.0)))
        nz = np.nonzero(np.abs(blk) > _COEF_EPS)
        rows_k[k].extend((nz[0] + dst.offset).tolist())
        cols_k[k].extend((nz[1] + src.offset).tolist())
        vals_k[k].extend(blk[nz].tolist())
    if residual > tol:
        raise ClosureError(f"Z is not closed under sigma(n_P): residual {residual:.3e}")
    sigma_gens = tuple(
        sp.csr_matrix((vals_k[k], (rows_k[k], cols_k[k])), shape=(dimZ, dimZ))
        for k in range(len(gens)))

    # sigma(H) eigenvalue of every Z basis vector, computed from the ambient action
    H_eigs = np.empty(dimZ)
    for b in blocks:
        diag_H = np.array([float(sum(fr.grades[list(I)])) for I in b.support])
        H_eigs[b.offset:b.offset + b.Q.shape[1]] = np.einsum("ij,i,ij->j", b.Q, diag_H, b.Q)
    shifted = H_eigs + 2 * gs.rho_H
    grades_z = np.rint(shifted).astype(int)
    if np.max(np.abs(shifted - grades_z), initial=0.0) > 1e-9:
        raise ClosureError("sigma(H) eigenvalues on Z are not integral shifts of -2 rho(H)")
    expected = np.concatenate([np.full(b.Q.shape[1], b.grade) for b in blocks])
    if not np.array_equal(grades_z, expected):
        raise ClosureError("sigma(H) eigenvalues disagree with closure grades")
    grade_blocks = {}
    for j in np.unique(grades_z):
        idx = np.nonzero(grades_z == j)[0]
        grade_blocks[int(j)] = slice(int(idx[0]), int(idx[-1]) + 1)
    if grade_blocks[0] != slice(0, 1):
        raise ClosureError("lowest grade of Z is not one dimensional")
    if dimZ > comb(d, r):
        raise ClosureError("dim Z exceeds dim wedge^r g")
    log.debug("cyclic module for %s blocks %s: dim Z = %d, top grade %d",
              alg.name, gs.block_sizes, dimZ, int(grades_z.max()))
    return CyclicModule(gs, r, tuple(blocks), sigma_gens, np.array(gen_g), H_eigs,
                        grade_blocks, int(grades_z.max()), residual)


def _orth(Y: np.ndarray, tol: float) -> np.ndarray:
    if Y.shape[1] == 0:
        return Y
    U, s, _ = np.linalg.svd(Y, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 0.0)))
    return U[:, :rank]


def grade_project(module: CyclicModule, z, j: int) -> np.ndarray:
    """Orthogonal projection of z (Z coordinates) onto Z_j; zero outside [0, p]."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    s = module.grade_blocks.get(j)
    if s is not None:
        out[s] = z[s]
    return out
