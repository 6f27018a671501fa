"""End-to-end acceptance criteria; each test records one PASS/FAIL line."""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from hcbound.certificate import check_certificate_coords, trivial_scalar_bound
from hcbound.cli import main
from hcbound.lie_core import elementary
from hcbound.oracle import langlands_factorize, nilpotent_exp
from hcbound.pipeline import build_pipeline, cached_pipeline
from hcbound.psi_map import _grade_slice, component_map_T, evaluate_psi, psi_coords_batch, smallest_singular_value
from hcbound.verify import positivity_counterexample_demo

from conftest import ALL_CASES, case_id, random_nplus

pytestmark = pytest.mark.acceptance


def test_oracle_equivalence(acceptance_line):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = {}
    for n, blocks in ALL_CASES:
        pipe = build_pipeline(n, blocks)
        gs = pipe.gs
        x = random_nplus(rng, gs, 1000, 10.0)
        Z = psi_coords_batch(pipe.module, x)
        log_psi = 0.5 * np.log(np.einsum("ij,ij->j", Z, Z))
        err = 0.0
        for v, lp in zip(x, log_psi):
            g = nilpotent_exp(gs.n_plus_matrix(v))
            for method in ("cholesky", "householder"):
                la = langlands_factorize(gs, g, method=method).log_a_2rho
                err = max(err, abs(math.expm1(lp - la)))
        worst[case_id((n, blocks))] = err
    elapsed = time.perf_counter() - start
    top = max(worst.values())
    ok = top < 1e-8 and elapsed < 60.0
    acceptance_line("1 oracle equivalence", ok,
                    f"{len(worst)} cases x 1000 samples, max rel err {top:.2e} (< 1e-8), "
                    f"{elapsed:.1f}s (< 60s)")
    assert ok, worst


def test_sl2_closed_form(acceptance_line):
    pipe = cached_pipeline(2, (1, 1))
    e_psi = e_orc = 0.0
    for x in (0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0):
        X = x * elementary(2, 0, 1)
        n2 = evaluate_psi(pipe.module, pipe.gs, X).norm2
        e_psi = max(e_psi, abs(n2 / (1 + x * x) ** 2 - 1))
        a = langlands_factorize(pipe.gs, nilpotent_exp(X)).a_2rho
        e_orc = max(e_orc, abs(a / (1 + x * x) - 1))
    ok = e_psi < 1e-10 and e_orc < 1e-10
    acceptance_line("2 sl(2) closed form", ok,
                    f"psi rel err {e_psi:.1e}, oracle rel err {e_orc:.1e} (< 1e-10)")
    assert ok


def test_setup_structure(acceptance_line):
    rng = np.random.default_rng(2)
    e0 = e1 = e_ind = e_route = 0.0
    lam_min = math.inf
    for n, blocks in ALL_CASES:
        pipe = cached_pipeline(n, blocks)
        mod, gs = pipe.module, pipe.gs
        x = random_nplus(rng, gs, 1000, 10.0)
        Z = psi_coords_batch(mod, x)
        e0 = max(e0, np.abs(Z[mod.grade_blocks[0]] - 1.0).max())
        T1 = component_map_T(mod, gs, 1)
        lin = T1 @ x[:, _grade_slice(gs, 1)].T
        e1 = max(e1, (np.abs(Z[mod.grade_blocks[1]] - lin) / np.maximum(1, np.abs(lin))).max())
        for j in range(1, gs.q + 1):
            lam_min = min(lam_min, smallest_singular_value(component_map_T(mod, gs, j)))
        for j in range(2, gs.q + 1):
            sl = _grade_slice(gs, j)
            T = component_map_T(mod, gs, j)
            y = x.copy()
            y[:, sl] = rng.standard_normal((len(x), sl.stop - sl.start)) * 5.0
            zs = mod.grade_blocks[j]
            Zy = psi_coords_batch(mod, y)
            u_x = Z[zs] - T @ x[:, sl].T
            u_y = Zy[zs] - T @ y[:, sl].T
            scale = np.maximum(1.0, np.linalg.norm(Z[zs], axis=0))
            e_ind = max(e_ind, (np.linalg.norm(u_x - u_y, axis=0) / scale).max())
            # second route: psi of the truncated X, read at grade j
            t = x.copy()
            t[:, sl.start:] = 0
            u_t = psi_coords_batch(mod, t)[zs]
            e_route = max(e_route, (np.linalg.norm(u_x - u_t, axis=0) / scale).max())
    ok = e0 < 1e-12 and e1 < 1e-10 and e_ind < 1e-9 and e_route < 1e-9 and lam_min > 1e-10
    acceptance_line("3 setup structure", ok,
                    f"|psi_0 - xi| {e0:.1e}, psi_1 err {e1:.1e}, u_j independence {e_ind:.1e}, "
                    f"u_j route gap {e_route:.1e}, min lambda_j {lam_min:.3f}")
    assert ok


def test_certificate_soundness(acceptance_line):
    rng = np.random.default_rng(4)
    total = violations = 0
    exact = True
    worst_ratio = math.inf
    for n, blocks in ALL_CASES:
        pipe = build_pipeline(n, blocks)
        gs, cert = pipe.gs, pipe.cert
        exact &= Fraction(cert.levels[-1].m_r_exact) == Fraction(1, math.factorial(gs.q))
        exact &= cert.m_q == 1 / math.factorial(gs.q)
        d = rng.standard_normal((10_000, gs.r))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        x = d * 10.0 ** rng.uniform(-3, 3, size=(10_000, 1))
        rep = check_certificate_coords(pipe.module, cert, x, raise_on_violation=False)
        total += rep.samples
        violations += rep.violations
        worst_ratio = min(worst_ratio, rep.min_ratio)
    ok = violations == 0 and exact
    acceptance_line("4 certificate soundness", ok,
                    f"{total} samples up to radius 1e3, {violations} violations, "
                    f"min psi/bound ratio {worst_ratio:.6f}, m_q = 1/q! exact: {exact}")
    assert ok


def test_scalar_inequality(acceptance_line):
    rng = np.random.default_rng(5)
    N = 1_000_000
    a = 1.0 + rng.exponential(10.0, N) * (rng.random(N) < 0.9) + 10.0 ** rng.uniform(0, 8, N) * (rng.random(N) < 0.1)
    b = np.where(rng.random(N) < 0.05, 0.0, 10.0 ** rng.uniform(-8, 8, N))
    m = 1.0 - rng.random(N)
    held = trivial_scalar_bound(a, b, m)
    fails = int(N - held.sum())
    ok = fails == 0
    acceptance_line("5 scalar inequality", ok, f"{N} triples, {fails} failures")
    assert ok


def test_oracle_invariance(acceptance_line):
    rng = np.random.default_rng(6)
    worst = {"householder": 0.0, "cholesky": 0.0}
    for n, blocks in ALL_CASES:
        gs = cached_pipeline(n, blocks).gs
        for _ in range(100):
            g = rng.standard_normal((n, n))
            if np.linalg.det(g) < 0:
                g[0] *= -1
            g /= np.linalg.det(g) ** (1.0 / n)
            nbar = nilpotent_exp(np.tensordot(rng.standard_normal(gs.r), gs.n_minus, axes=1))
            k, _ = np.linalg.qr(rng.standard_normal((n, n)))
            if np.linalg.det(k) < 0:
                k[:, 0] *= -1
            for method in worst:
                base = langlands_factorize(gs, g, method=method).log_a_2rho
                left = langlands_factorize(gs, nbar @ g, method=method).log_a_2rho
                right = langlands_factorize(gs, g @ k, method=method).log_a_2rho
                worst[method] = max(worst[method], abs(math.expm1(left - base)),
                                    abs(math.expm1(right - base)))
    ok = worst["householder"] < 1e-9
    acceptance_line("6 oracle invariance", ok,
                    f"{len(ALL_CASES)} cases x 100 trials, max rel change {worst['householder']:.1e} "
                    f"(< 1e-9); Cholesky route for reference {worst['cholesky']:.1e}")
    assert ok


def test_demo(acceptance_line):
    d = positivity_counterexample_demo()
    f_far = d["trace"][-1]["f"]
    ok = d["positive_on_grid"] and d["trace"][-1]["t"] == 1000.0 and f_far <= 1e-5
    acceptance_line("7 positivity demo", ok,
                    f"grid min {d['grid']['min']:.3g} > 0, f(1/t, t) at t=1e3 is {f_far:.1e} (<= 1e-5)")
    assert ok


def test_determinism(acceptance_line, tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"algebra": {"family": "sl", "n": 4}, "blocks": [1, 2, 1],
                               "seed": 17, "samples": 40,
                               "radii": {"min_exp": 0, "max_exp": 3, "count": 6}}))
    outputs = []
    for rep in range(2):
        out = str(tmp_path / f"out{rep}")
        assert main(["certify", "--config", str(cfg), "--out", out]) == 0
        cert_path = json.loads(capsys.readouterr().out.strip())["certificate"]
        assert main(["verify", cert_path, "--config", str(cfg), "--out", out]) == 0
        rep_path = json.loads(capsys.readouterr().out.strip())["report"]
        with open(cert_path, "rb") as fc, open(rep_path, "rb") as fr:
            outputs.append((fc.read(), fr.read()))
    ok = outputs[0] == outputs[1]
    acceptance_line("8 determinism", ok,
                    f"certificate.json identical: {outputs[0][0] == outputs[1][0]}, "
                    f"report.json identical: {outputs[0][1] == outputs[1][1]}")
    assert ok
