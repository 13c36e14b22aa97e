import numpy as np
import pytest

from qnewt.differential import NewtonDifferential, Selection
from qnewt.exceptions import EmptySelection, InsufficientData
from qnewt.solver import (
    SolveConfig,
    analyze_trace,
    banach_iterate,
    newton_solve,
    newton_step,
    rate_report_from_sequence,
)
from qnewt.spaces import EuclideanSpace, euclidean_bundle, linear_induced_map


def test_first_step_of_cubic(cubic):
    F, HF, _ = cubic
    y, idx = newton_step(F, HF, np.array([1.0]))
    assert y[0] == 4 / 3 and idx == 0


def test_cubic_converges_quadratically(cubic):
    F, HF, root = cubic
    tr = newton_solve(F, HF, np.array([1.0]), SolveConfig(reference_root=root))
    assert tr.stop_reason == "residual_tol"
    assert abs(tr.final[0] - root[0]) <= 1e-10
    assert len(tr.points) == len(tr.residual_norms) == len(tr.dists_to_ref) == tr.iterations + 1
    rep = analyze_trace(tr)
    assert rep.classification == "rate_gamma" and not rep.proxy


def test_proxy_rates_without_reference(cubic):
    F, HF, _ = cubic
    rep = analyze_trace(newton_solve(F, HF, np.array([1.0])))
    assert rep.proxy


def test_linear_problem_is_inconclusive_without_strict():
    R = EuclideanSpace(2)
    T = np.array([[2.0, 1.0], [0.0, 1.0]])
    xbar = np.array([1.0, -1.0])
    _, HF = euclidean_bundle(T=T)
    tr = newton_solve(lambda x: T @ (x - xbar), HF, np.zeros(2), SolveConfig(reference_root=xbar))
    assert tr.iterations == 1
    rep = analyze_trace(tr)
    assert rep.classification == "inconclusive" and "too short" in rep.note
    with pytest.raises(InsufficientData):
        analyze_trace(tr, strict=True)
    assert R.distance(tr.final, xbar) <= 1e-12


def test_singular_jacobian_stops_with_inverse_missing():
    F = lambda x: x ** 2 + 1  # noqa: E731
    _, HF = euclidean_bundle(F=F, jacobian=lambda x: [[2 * x[0]]], n=1)
    tr = newton_solve(F, HF, np.zeros(1))
    assert tr.stop_reason == "inverse_missing" and tr.iterations == 0


def test_empty_selection():
    R = EuclideanSpace(1)
    HF = NewtonDifferential(R, 1, lambda x: [])
    assert newton_solve(lambda x: x, HF, np.ones(1)).stop_reason == "empty_selection"
    with pytest.raises(EmptySelection):
        newton_step(lambda x: x, HF, np.ones(1))


def test_max_iters_and_divergence():
    F = lambda x: np.arctan(x)  # noqa: E731
    _, HF = euclidean_bundle(F=F, jacobian=lambda x: [[1 / (1 + x[0] ** 2)]], n=1)
    assert newton_solve(F, HF, np.array([1.0]), SolveConfig(max_iters=2)).stop_reason == "max_iters"
    # Newton on the cube root doubles |x| with alternating sign
    G = lambda x: np.cbrt(x)  # noqa: E731
    _, HG = euclidean_bundle(F=G, jacobian=lambda x: [[np.cbrt(x[0]) ** -2 / 3]], n=1)
    tr = newton_solve(G, HG, np.array([1.0]), SolveConfig(max_iters=200, divergence_factor=2.0))
    assert tr.stop_reason == "diverged"
    assert [p[0] for p in tr.points[:3]] == pytest.approx([1.0, -2.0, 4.0])
    nan = newton_solve(lambda x: x * np.inf, HG, np.array([1.0]))
    assert nan.stop_reason == "diverged"


def test_selection_policies():
    R = EuclideanSpace(1)
    F = lambda x: x - 1.0  # noqa: E731
    good = linear_induced_map(R, [[1.0]])
    bad = linear_induced_map(R, [[4.0]])
    HF = NewtonDifferential(R, 1, lambda x: [Selection(*bad), Selection(*good)])
    x0 = np.zeros(1)
    assert newton_step(F, HF, x0, "first") == (pytest.approx(np.array([0.25])), 0)
    y, idx = newton_step(F, HF, x0, "min_residual_lookahead")
    assert idx == 1 and y[0] == 1.0
    assert newton_step(F, HF, x0, 1)[1] == 1


def test_solve_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolveConfig(residual_tol=-1)
    with pytest.raises(ValueError):
        SolveConfig(selection_policy="random")


def test_banach_single_valued_and_fixed_point():
    R = EuclideanSpace(1)
    tr = banach_iterate(lambda x: x / 2, np.array([1.0]), R, reference=np.zeros(1))
    assert tr.stop_reason == "step_tol"
    assert analyze_trace(tr).classification == "linear"
    assert len(tr.residual_norms) == len(tr.points)
    fixed = banach_iterate(lambda x: x, np.array([3.0]), R)
    assert fixed.iterations == 1 and fixed.residual_norms == [0.0, 0.0]


def test_banach_set_valued_selection_rules():
    R = EuclideanSpace(1)
    T = lambda x: [x / 3 + 1, x / 2]  # noqa: E731
    first = banach_iterate(T, np.array([0.0]), R, max_iters=200)
    assert first.final[0] == pytest.approx(1.5)
    near = banach_iterate(T, np.array([0.0]), R, max_iters=200, selection="nearest_to_previous")
    assert all(i in (0, 1) for i in near.selection_index)
    with pytest.raises(ValueError):
        banach_iterate(T, np.zeros(1), R, selection="random")


def test_banach_max_iters():
    tr = banach_iterate(lambda x: -x, np.ones(1), EuclideanSpace(1), max_iters=5)
    assert tr.stop_reason == "max_iters" and tr.iterations == 5
    assert len(tr.residual_norms) == len(tr.points)


def test_rate_report_from_sequence_notes():
    rep = rate_report_from_sequence([0.5 ** (2 ** k) for k in range(6)])
    assert "order" in rep.note
    assert rate_report_from_sequence([1.0, 0.5]).classification == "inconclusive"
