import numpy as np
import pytest

from hcbound.oracle import nilpotent_exp
from hcbound.pipeline import cached_pipeline, compositions

SL2_CASES = [(2, b) for b in compositions(2)]
SL3_CASES = [(3, b) for b in compositions(3)]
SL4_CASES = [(4, b) for b in compositions(4)]
ALL_CASES = SL2_CASES + SL3_CASES + SL4_CASES
SMALL_CASES = SL2_CASES + SL3_CASES + [(4, (2, 2)), (4, (1, 3)), (4, (3, 1))]


def case_id(case):
    n, blocks = case
    return f"sl{n}-" + "-".join(map(str, blocks))


def wedge_gram_norm2(gs, X):
    """‖psi(X)‖² as the Gram determinant of Ad(exp(-X)) applied to the n_bar basis.

    Works directly with n x n matrices and never touches the cyclic module.
    """
    g = nilpotent_exp(-np.asarray(X, dtype=float))
    gi = np.linalg.inv(g)
    V = np.array([g @ E @ gi for E in gs.n_minus])
    flat = V.reshape(len(V), -1)
    return float(np.linalg.det(flat @ flat.T))


def random_nplus(rng, gs, count, max_norm):
    d = rng.standard_normal((count, gs.r))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.uniform(0.0, max_norm, size=(count, 1))


@pytest.fixture(params=ALL_CASES, ids=case_id)
def any_pipeline(request):
    n, blocks = request.param
    return cached_pipeline(n, blocks)


@pytest.fixture(params=SMALL_CASES, ids=case_id)
def small_pipeline(request):
    n, blocks = request.param
    return cached_pipeline(n, blocks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
