"""End-to-end construction: algebra -> grading -> cyclic module -> certificate."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .certificate import LowerBoundCertificate, build_certificate
from .exterior import CyclicModule, build_cyclic_module
from .lie_core import MatrixLieAlgebra, make_special_linear
from .parabolic import GRADE_CLUSTER_TOL, GradedStructure, grading_from_blocks


@dataclass(frozen=True, eq=False)
class Pipeline:
    alg: MatrixLieAlgebra
    gs: GradedStructure
    module: Optional[CyclicModule]
    cert: LowerBoundCertificate

    @property
    def trivial(self) -> bool:
        return self.gs.trivial


def build_pipeline(n: int, blocks: Sequence[int], tolerances: Optional[dict] = None) -> Pipeline:
    tol = dict(tolerances or {})
    alg = make_special_linear(n)
    gs = grading_from_blocks(alg, blocks, tol.get("grade_cluster", GRADE_CLUSTER_TOL))
    module = None if gs.trivial else build_cyclic_module(alg, gs)
    cert = build_certificate(module, gs, tolerances=tol or None)
    return Pipeline(alg, gs, module, cert)


@lru_cache(maxsize=None)
def cached_pipeline(n: int, blocks: tuple) -> Pipeline:
    return build_pipeline(n, blocks)


def compositions(n: int, min_parts: int = 2):
    """All ordered block-size tuples summing to n with at least ``min_parts`` parts."""
    out = []

    def rec(rem, acc):
        if rem == 0:
            if len(acc) >= min_parts:
                out.append(tuple(acc))
            return
        for s in range(1, rem + 1):
            rec(rem - s, acc + [s])

    rec(n, [])
    return out
