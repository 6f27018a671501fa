"""Certified constants (C, m) for ‖psi(X)‖² >= C (1 + ‖X‖²)^m on n_P.

The chain runs over the grades r = 1..q of n_P.  Write ``phi_r`` for the sum
of the grade 0..r components of psi, ``a = 1 + ‖X_1 + ... + X_{r-1}‖²`` and
``b = ‖X_r‖²``.  Level r - 1 gives ``‖phi_{r-1}‖² >= C_{r-1} a^{m_{r-1}}``.

Level 1.  ``‖phi_1‖² = 1 + ‖T_1 X_1‖² >= min(1, lambda_1²) (1 + ‖X_1‖²)``.

Level r >= 2, split on whether ``‖T_r X_r‖ > 2 ‖u_r‖``:

* inside: ``‖T_r X_r + u_r‖ >= lambda_r sqrt(b) / 2``, hence
  ``‖phi_r‖² >= min(C_{r-1}, lambda_r²/4) (a^{m_{r-1}} + b)`` and the scalar
  bound ``a^m + b >= (a + b)^m / 2`` gives constant ``C_in`` at exponent
  ``m_{r-1}``.
* outside: ``lambda_r sqrt(b) <= 2 ‖u_r‖ <= 2 M_r a^{r/2}``, so
  ``a + b <= K_r a^r`` with ``K_r = 1 + (2 M_r / lambda_r)²``.  Then
  ``‖phi_r‖² >= ‖phi_{r-1}‖² >= C_{r-1} K_r^{-m_{r-1}/r} (a + b)^{m_{r-1}/r}``.

Both branches hold at the smaller exponent ``m_r = m_{r-1} / r`` because the
base ``a + b`` is at least 1.  Grades of Z above q only add norm, so
``‖psi‖² >= C_q (1 + ‖X‖²)^{m_q}``, and ``a^{rho} = ‖psi‖^{1/2}`` turns this
into the group-level constants ``(C_q^{1/4}, m_q / 4)``.
"""

from __future__ import annotations

import hashlib
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import CertificateUnsoundError, DomainError, InjectivityError
from .exterior import CyclicModule
from .parabolic import GradedStructure
from .psi_map import component_map_T, nplus_coords, psi_coords_batch, smallest_singular_value

SVD_FLOOR = 1e-10
CERT_SLACK = 1e-9
CHAIN_KIND = "normative-corrected"


def trivial_scalar_bound(a, b, m):
    """Whether a^m + b >= (a + b)^m / 2; works elementwise on arrays."""
    a_ = np.asarray(a, dtype=float)
    b_ = np.asarray(b, dtype=float)
    m_ = np.asarray(m, dtype=float)
    if np.any(a_ < 1) or np.any(b_ < 0) or np.any(m_ <= 0) or np.any(m_ > 1):
        raise DomainError("need a >= 1, b >= 0 and 0 < m <= 1")
    ok = a_ ** m_ + b_ >= 0.5 * (a_ + b_) ** m_
    return bool(ok) if ok.ndim == 0 else ok


def spectral_norm(G) -> float:
    M = G.toarray() if hasattr(G, "toarray") else np.asarray(G)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def sigma_norm_bound(module: CyclicModule) -> float:
    """s with ‖sigma(X)‖ <= s ‖X‖ on Z, by Cauchy-Schwarz over the orthonormal n_P basis."""
    return float(math.sqrt(sum(spectral_norm(G) ** 2 for G in module.sigma_gens)))


def polynomial_bound_M(r: int, s: float) -> float:
    """M_r = sum_{k=2}^r s^k / k!, bounding ‖u_r(w)‖ / (1 + ‖w‖²)^{r/2}."""
    if r < 2:
        raise DomainError(f"M_r is defined for r >= 2, got {r}")
    return float(sum(s ** k / math.factorial(k) for k in range(2, r + 1)))


@dataclass(frozen=True)
class LevelRecord:
    r: int
    lambda_r: float
    d_r: int
    M_r: Optional[float]
    e_r: int
    C_r: float
    m_r: float
    m_r_exact: str
    C_in: Optional[float] = None
    C_out: Optional[float] = None
    K_r: Optional[float] = None


@dataclass(frozen=True)
class LowerBoundCertificate:
    algebra: dict
    blocks: tuple
    levels: tuple
    s_bound: Optional[float]
    final_psi: dict
    final_hc: dict
    chain_kind: str
    tolerances: dict
    build_info: dict

    @property
    def C_q(self) -> float:
        return self.final_psi["C"]

    @property
    def m_q(self) -> float:
        return self.final_psi["m"]

    @property
    def trivial(self) -> bool:
        return bool(self.build_info.get("trivial", False))

    def to_dict(self) -> dict:
        return {
            "algebra": dict(self.algebra),
            "blocks": list(self.blocks),
            "levels": [asdict(lv) for lv in self.levels],
            "s_bound": self.s_bound,
            "final_psi": dict(self.final_psi),
            "final_hc": dict(self.final_hc),
            "chain_kind": self.chain_kind,
            "tolerances": dict(self.tolerances),
            "build_info": dict(self.build_info),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "LowerBoundCertificate":
        return cls(
            algebra=dict(d["algebra"]),
            blocks=tuple(d["blocks"]),
            levels=tuple(LevelRecord(**lv) for lv in d["levels"]),
            s_bound=d["s_bound"],
            final_psi=dict(d["final_psi"]),
            final_hc=dict(d["final_hc"]),
            chain_kind=d["chain_kind"],
            tolerances=dict(d["tolerances"]),
            build_info=dict(d["build_info"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "LowerBoundCertificate":
        return cls.from_dict(json.loads(text))


def structure_hash(family: str, n: int, blocks: Sequence[int]) -> str:
    payload = json.dumps({"algebra": {"family": family, "n": int(n)},
                          "blocks": [int(b) for b in blocks]}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _build_info(gs: GradedStructure, module: Optional[CyclicModule], trivial: bool) -> dict:
    info = {
        "package": "hcbound",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "form": gs.alg.form_kind,
        "involution": gs.alg.involution_kind,
        "structure_hash": structure_hash(gs.alg.family, gs.alg.n, gs.block_sizes),
        "trivial": trivial,
        "q": gs.q,
        "r_dim_nP": gs.r,
        "rho_H": gs.rho_H,
    }
    if module is not None:
        info["dim_Z"] = module.dim
        info["top_grade_Z"] = module.top_grade
    return info


def trivial_certificate(gs: GradedStructure, tolerances: Optional[dict] = None) -> LowerBoundCertificate:
    """P = G: n_P = 0 and both sides equal 1, so (C, m) = (1, 1) works."""
    info = _build_info(gs, None, True)
    info["warning"] = "single block: n_P = 0, certificate is trivial"
    return LowerBoundCertificate(
        algebra={"family": gs.alg.family, "n": gs.alg.n},
        blocks=tuple(gs.block_sizes),
        levels=(),
        s_bound=None,
        final_psi={"C": 1.0, "m": 1.0},
        final_hc={"C": 1.0, "m": 0.25},
        chain_kind=CHAIN_KIND,
        tolerances=dict(tolerances or _default_tolerances()),
        build_info=info,
    )


def _default_tolerances() -> dict:
    return {"svd_floor": SVD_FLOOR, "cert_slack": CERT_SLACK}


def build_certificate(module: Optional[CyclicModule], gs: GradedStructure,
                      svd_floor: float = SVD_FLOOR,
                      tolerances: Optional[dict] = None) -> LowerBoundCertificate:
    tol = dict(tolerances or _default_tolerances())
    tol.setdefault("svd_floor", svd_floor)
    floor = float(tol["svd_floor"])
    if gs.trivial or gs.r == 0:
        return trivial_certificate(gs, tol)

    lambdas = {}
    for j in range(1, gs.q + 1):
        lam = smallest_singular_value(component_map_T(module, gs, j))
        if not lam > floor:
            raise InjectivityError(f"T_{j} is not injective: smallest singular value {lam:.3e}")
        lambdas[j] = lam
    s = sigma_norm_bound(module)

    levels = []
    lam1 = lambdas[1]
    m_exact = Fraction(1)
    C = min(1.0, lam1 ** 2)
    levels.append(LevelRecord(r=1, lambda_r=lam1, d_r=1, M_r=None, e_r=1, C_r=C,
                              m_r=float(m_exact), m_r_exact=str(m_exact)))
    for r in range(2, gs.q + 1):
        lam = lambdas[r]
        M = polynomial_bound_M(r, s)
        d = r
        e = max(d, 1)
        K = 1.0 + (2.0 * M / lam) ** 2
        m_prev = float(m_exact)
        C_in = 0.5 * min(C, lam ** 2 / 4.0)
        C_out = C * K ** (-m_prev / e)
        m_exact = m_exact / e
        C = min(C_in, C_out)
        levels.append(LevelRecord(r=r, lambda_r=lam, d_r=d, M_r=M, e_r=e, C_r=C,
                                  m_r=float(m_exact), m_r_exact=str(m_exact),
                                  C_in=C_in, C_out=C_out, K_r=K))
    m_q = float(m_exact)
    return LowerBoundCertificate(
        algebra={"family": gs.alg.family, "n": gs.alg.n},
        blocks=tuple(gs.block_sizes),
        levels=tuple(levels),
        s_bound=s,
        final_psi={"C": C, "m": m_q},
        final_hc={"C": C ** 0.25, "m": m_q / 4.0},
        chain_kind=CHAIN_KIND,
        tolerances=tol,
        build_info=_build_info(gs, module, False),
    )


@dataclass
class SlackReport:
    samples: int
    min_slack: float
    min_ratio: float
    worst_x: list = field(default_factory=list)
    worst_norm: float = 0.0
    violations: int = 0
    witnesses: list = field(default_factory=list)


def _log_bound(cert, norm2):
    return math.log(cert.C_q) + cert.m_q * np.log1p(norm2)


def check_certificate_coords(module: CyclicModule, cert: LowerBoundCertificate, x,
                             slack: Optional[float] = None, raise_on_violation: bool = True,
                             chunk: int = 2048) -> SlackReport:
    """Check ‖psi‖² >= C_q (1 + ‖X‖²)^{m_q} on samples given by n_P coordinates (S, r)."""
    slack = cert.tolerances.get("cert_slack", CERT_SLACK) if slack is None else slack
    x = np.atleast_2d(np.asarray(x, dtype=float))
    min_slack = math.inf
    min_ratio = math.inf
    worst = None
    violations = 0
    witnesses = []
    for start in range(0, x.shape[0], chunk):
        xs = x[start:start + chunk]
        Z = psi_coords_batch(module, xs)
        psi2 = np.einsum("ij,ij->j", Z, Z)
        norm2 = np.einsum("ij,ij->i", xs, xs)
        log_b = _log_bound(cert, norm2)
        log_ratio = np.log(psi2) - log_b
        diff = psi2 - np.exp(log_b)
        for i in range(len(xs)):
            if diff[i] < min_slack:
                min_slack = float(diff[i])
            if log_ratio[i] < min_ratio:
                min_ratio = float(log_ratio[i])
                worst = start + i
            if diff[i] < -slack * psi2[i]:
                violations += 1
                witnesses.append({"x": xs[i].tolist(), "psi_norm2": float(psi2[i]),
                                  "bound": float(np.exp(log_b[i]))})
    rep = SlackReport(samples=int(x.shape[0]), min_slack=min_slack,
                      min_ratio=float(np.exp(min_ratio)) if worst is not None else math.inf,
                      worst_x=x[worst].tolist() if worst is not None else [],
                      worst_norm=float(np.linalg.norm(x[worst])) if worst is not None else 0.0,
                      violations=violations, witnesses=witnesses)
    if violations and raise_on_violation:
        raise CertificateUnsoundError(
            f"{violations} certificate violations; first witness {witnesses[0]}",
            witness=witnesses[0])
    return rep


def check_certificate(module: CyclicModule, cert: LowerBoundCertificate, samples,
                      slack: Optional[float] = None, raise_on_violation: bool = True) -> SlackReport:
    """Worst-case slack of the certificate over sample matrices X in n_P."""
    gs = module.gs
    x = np.array([nplus_coords(gs, X) for X in samples]).reshape(-1, gs.r)
    return check_certificate_coords(module, cert, x, slack, raise_on_violation)
