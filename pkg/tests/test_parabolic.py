import numpy as np
import pytest

from hcbound.errors import InvalidBlocksError
from hcbound.lie_core import bracket, make_special_linear
from hcbound.parabolic import (
    block_grading_element,
    grade_decompose,
    grading_from_blocks,
    rho_value,
    trace_ad_H_on_nplus,
)


@pytest.mark.parametrize("blocks, diag", [
    ((1, 1), [0.5, -0.5]),
    ((1, 1, 1), [1.0, 0.0, -1.0]),
    ((2, 1), [1 / 3, 1 / 3, -2 / 3]),
    ((1, 2, 1), [1.0, 0.0, 0.0, -1.0]),
])
def test_grading_element(blocks, diag):
    H = block_grading_element(blocks)
    assert np.allclose(np.diag(H), diag)
    assert abs(np.trace(H)) < 1e-15


@pytest.mark.parametrize("n, blocks, q, r, rho", [
    (2, (1, 1), 1, 1, 0.5),
    (3, (1, 1, 1), 2, 3, 2.0),
    (3, (2, 1), 1, 2, 1.0),
    (4, (1, 1, 1, 1), 3, 6, 5.0),
    (4, (2, 2), 1, 4, 2.0),
    (4, (1, 2, 1), 2, 5, 3.0),
])
def test_structure_constants(n, blocks, q, r, rho):
    gs = grading_from_blocks(make_special_linear(n), blocks)
    assert (gs.q, gs.r) == (q, r)
    assert rho_value(gs) == pytest.approx(rho)
    assert trace_ad_H_on_nplus(gs) == pytest.approx(2 * rho)


def test_grades_are_brackets_compatible(any_pipeline):
    gs = any_pipeline.gs
    alg = gs.alg
    for i in gs.grade_list:
        for j in gs.grade_list:
            for X in gs.grades[i]:
                for Y in gs.grades[j][:2]:
                    Z = bracket(alg, X, Y)
                    if i + j not in gs.grades:
                        assert np.abs(Z).max() < 1e-12
                    else:
                        parts = grade_decompose(gs, Z)
                        assert np.allclose(parts[i + j], Z, atol=1e-12)


def test_theta_swaps_grades_and_dims(any_pipeline):
    gs = any_pipeline.gs
    for j in range(1, gs.q + 1):
        assert gs.dim_grade(j) == gs.dim_grade(-j)
        for X in gs.grades[j]:
            parts = grade_decompose(gs, gs.alg.theta(X))
            assert np.allclose(parts[-j], gs.alg.theta(X), atol=1e-12)


def test_decomposition_reconstructs(rng):
    gs = grading_from_blocks(make_special_linear(4), (1, 2, 1))
    X = gs.alg.from_coords(rng.standard_normal(gs.alg.dim))
    parts = grade_decompose(gs, X)
    assert np.allclose(sum(parts.values()), X)


def test_basis_ordering(any_pipeline):
    gs = any_pipeline.gs
    grades = gs.basis_grades
    assert np.all(np.diff(grades) >= 0)
    assert np.all(grades[:gs.r] < 0) and np.all(grades[-gs.r:] > 0)


def test_nplus_coords_round_trip(rng):
    gs = grading_from_blocks(make_special_linear(3), (1, 1, 1))
    x = rng.standard_normal(gs.r)
    X = gs.n_plus_matrix(x)
    assert np.allclose(np.tril(X), 0)
    assert np.allclose(gs.n_plus_coords(X), x)


def test_single_block_is_trivial():
    gs = grading_from_blocks(make_special_linear(3), (3,))
    assert gs.trivial and gs.r == 0 and gs.q == 0


@pytest.mark.parametrize("blocks", [(1, 1), (2, 2), (0, 3), (-1, 4), ()])
def test_bad_blocks(blocks):
    with pytest.raises(InvalidBlocksError):
        grading_from_blocks(make_special_linear(3), blocks)
