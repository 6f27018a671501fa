"""Sampling campaigns: certificate soundness, oracle agreement, empirical exponent.

Also hosts the demonstration that a strictly positive polynomial need not
admit any lower bound C (1 + ‖x‖²)^m with m >= 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .certificate import LowerBoundCertificate, check_certificate_coords
from .exterior import CyclicModule
from .oracle import langlands_factorize, nilpotent_exp
from .parabolic import GradedStructure
from .psi_map import psi_coords_batch

DEFAULT_TOLERANCES = {
    "grade_cluster": 1e-9,
    "svd_floor": 1e-10,
    "oracle_rel": 1e-8,
    "oracle_radius": 10.0,
    "oracle_log_far": 1e-3,
    "cert_slack": 1e-9,
}


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 0
    samples: int = 200
    min_exp: float = 0.0
    max_exp: float = 3.0
    count: int = 20
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def radii(self) -> np.ndarray:
        return np.logspace(self.min_exp, self.max_exp, self.count)

    def echo(self) -> dict:
        return {"seed": self.seed, "samples": self.samples,
                "radii": {"min_exp": self.min_exp, "max_exp": self.max_exp, "count": self.count},
                "tolerances": dict(self.tolerances)}


@dataclass
class VerificationReport:
    config: dict
    algebra: dict
    blocks: list
    trivial: bool = False
    n_samples: int = 0
    oracle_method: str = "householder-lq"
    oracle_max_discrepancy: float = 0.0
    oracle_near_samples: int = 0
    oracle_max_log_discrepancy_far: float = 0.0
    oracle_far_samples: int = 0
    oracle_within_tolerance: bool = True
    certificate_min_slack: Optional[float] = None
    certificate_min_ratio: Optional[float] = None
    certificate_worst_x: list = field(default_factory=list)
    violations: int = 0
    witnesses: list = field(default_factory=list)
    empirical_m: Optional[float] = None
    empirical_m_by_radius: list = field(default_factory=list)
    certified_m: Optional[float] = None
    demo_results: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.oracle_within_tolerance

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def sample_directions(seed: int, count: int, r: int) -> np.ndarray:
    """Unit Gaussian directions in orthonormal n_P coordinates."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, r))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def sample_points(seed: int, count: int, r: int, radii) -> np.ndarray:
    """Every direction at every radius; rows ordered direction-major."""
    d = sample_directions(seed, count, r)
    radii = np.asarray(radii, dtype=float)
    return (d[:, None, :] * radii[None, :, None]).reshape(-1, r)


def oracle_discrepancies(module: CyclicModule, gs: GradedStructure, x) -> np.ndarray:
    """Relative |‖psi‖ - a_2rho| / a_2rho per sample, compared in log space.

    The oracle side uses the Householder LQ factorization, which stays
    accurate where g g^T is too ill conditioned for Cholesky.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    Z = psi_coords_batch(module, x)
    log_psi = 0.5 * np.log(np.einsum("ij,ij->j", Z, Z))
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        g = nilpotent_exp(gs.n_plus_matrix(xi))
        la = langlands_factorize(gs, g, method="householder").log_a_2rho
        out[i] = abs(math.expm1(log_psi[i] - la))
    return out


def sample_verify(module: Optional[CyclicModule], gs: GradedStructure,
                  cert: LowerBoundCertificate, config: VerifyConfig) -> VerificationReport:
    rep = VerificationReport(config=config.echo(), algebra=dict(cert.algebra),
                             blocks=list(cert.blocks), certified_m=cert.m_q)
    if gs.trivial or module is None:
        rep.trivial = True
        return rep
    tol = config.tolerances
    x = sample_points(config.seed, config.samples, gs.r, config.radii())
    rep.n_samples = len(x)

    slack = check_certificate_coords(module, cert, x, slack=tol["cert_slack"],
                                     raise_on_violation=False)
    rep.certificate_min_slack = slack.min_slack
    rep.certificate_min_ratio = slack.min_ratio
    rep.certificate_worst_x = slack.worst_x
    rep.violations = slack.violations
    rep.witnesses = slack.witnesses

    disc = oracle_discrepancies(module, gs, x)
    near = np.linalg.norm(x, axis=1) <= tol["oracle_radius"]
    if near.any():
        rep.oracle_max_discrepancy = float(disc[near].max())
    rep.oracle_near_samples = int(near.sum())
    if (~near).any():
        rep.oracle_max_log_discrepancy_far = float(np.log1p(disc[~near]).max())
    rep.oracle_far_samples = int((~near).sum())
    rep.oracle_within_tolerance = bool(
        rep.oracle_max_discrepancy < tol["oracle_rel"]
        and rep.oracle_max_log_discrepancy_far < tol["oracle_log_far"])

    rep.empirical_m, rep.empirical_m_by_radius = _empirical(module, gs, config)
    return rep


def _empirical(module, gs, config):
    d = sample_directions(config.seed, config.samples, gs.r)
    by_radius = []
    for R in config.radii():
        Z = psi_coords_batch(module, R * d)
        psi2 = np.einsum("ij,ij->j", Z, Z)
        if R > 0:
            by_radius.append([float(R), float(np.log(psi2.min()) / np.log1p(R * R))])
    return by_radius[-1][1], by_radius


def empirical_exponent(module: CyclicModule, gs: GradedStructure, config: VerifyConfig) -> float:
    """min over sampled directions of log ‖psi(R u)‖² / log(1 + R²) at the largest radius R."""
    return _empirical(module, gs, config)[0]


def counterexample_polynomial(x, y):
    """x² + (1 - xy)²: positive on R², yet tends to 0 along (1/t, t)."""
    return x * x + (1.0 - x * y) ** 2


def positivity_counterexample_demo(ts=(1.0, 10.0, 100.0, 1000.0), grid_half_width: float = 10.0,
                                   grid_points: int = 401) -> dict:
    trace = []
    for t in ts:
        x, y = 1.0 / t, t
        f = counterexample_polynomial(x, y)
        nrm = math.hypot(x, y)
        trace.append({"t": t, "point": [x, y], "f": f, "norm": nrm,
                      "log_f_over_log_1_plus_norm2": math.log(f) / math.log1p(nrm * nrm)})
    g = np.linspace(-grid_half_width, grid_half_width, grid_points)
    X, Y = np.meshgrid(g, g)
    F = counterexample_polynomial(X, Y)
    k = int(np.argmin(F))
    return {
        "polynomial": "f(x, y) = x^2 + (1 - x*y)^2",
        "curve": "(1/t, t)",
        "trace": trace,
        "grid": {"half_width": grid_half_width, "points": grid_points,
                 "min": float(F.flat[k]), "argmin": [float(X.flat[k]), float(Y.flat[k])]},
        "f_at_1_1": counterexample_polynomial(1.0, 1.0),
        "positive_on_grid": bool(F.min() > 0),
        "decays_along_curve": bool(trace[-1]["f"] <= 1e-5),
    }
