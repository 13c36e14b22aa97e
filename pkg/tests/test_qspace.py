import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnewt.exceptions import EmptySet, InfiniteConstant, InsufficientData, InvalidRadii
from qnewt.qspace import (
    Ball,
    FunctionSpace,
    ball_intersection_singleton_check,
    check_axioms,
    classify_rate,
    dist_point_set,
    dist_set_set,
    is_cauchy,
    lipschitz_estimate,
    random_triples,
)
from qnewt.spaces import EuclideanSpace


def upper_line():
    """The asymmetric quasi-metric d(x, y) = max(y - x, 0) + 2 max(x - y, 0) on R."""
    return FunctionSpace(lambda x, y: max(y - x, 0.0) + 2 * max(x - y, 0.0), "upper line",
                         random_point=lambda rng: float(rng.normal()))


def test_ball_membership_measures_from_candidate():
    S = upper_line()
    # dist(1, 0) = 2, dist(0, 1) = 1
    assert Ball(0.0, 1.5).contains(S, -1.0)
    assert not Ball(0.0, 1.5).contains(S, 1.0)
    assert Ball(0.0, 2.0, closed=True).contains(S, 1.0)
    assert not Ball(0.0, 2.0).contains(S, 1.0)


def test_ball_rejects_negative_radius():
    with pytest.raises(ValueError):
        Ball(0.0, -1.0)


def test_point_set_distance_directions():
    S = upper_line()
    A = [1.0, 3.0]
    assert dist_point_set(S, 0.0, A) == 1.0
    assert dist_point_set(S, 0.0, A, "from_set") == 2.0
    with pytest.raises(EmptySet):
        dist_point_set(S, 0.0, [])
    with pytest.raises(ValueError):
        dist_point_set(S, 0.0, A, "sideways")


def test_set_distance_hand_computed():
    S = upper_line()
    # sup_a min_b d(a, b) = d(0, 1) = 1 ; sup_b min_a d(a, b) = d(0, 3) = 3
    assert dist_set_set(S, [0.0], [1.0, 3.0]) == 3.0
    assert dist_set_set(S, [1.0, 3.0], [1.0, 3.0]) == 0.0
    with pytest.raises(EmptySet):
        dist_set_set(S, [], [1.0])


def test_nested_balls_shrink_to_center():
    R = EuclideanSpace(2)
    c = np.zeros(2)
    probes = [np.array([1e-3, 0.0]), np.array([0.0, -1e-5]), c]
    assert ball_intersection_singleton_check(R, c, np.geomspace(1, 1e-8, 9), probes)
    assert not ball_intersection_singleton_check(R, c, [1.0, 0.5], probes)
    with pytest.raises(InvalidRadii):
        ball_intersection_singleton_check(R, c, [0.5, 1.0], probes)
    with pytest.raises(InvalidRadii):
        ball_intersection_singleton_check(R, c, [], probes)


def test_is_cauchy():
    R = EuclideanSpace(1)
    seq = [np.array([0.5 ** k]) for k in range(30)]
    assert is_cauchy(R, seq, 1e-3, 12)
    assert not is_cauchy(R, seq, 1e-3, 2)


# --------------------------------------------------------------------------- rates

def test_classify_linear_quadratic_superlinear():
    assert classify_rate([0.5 ** k for k in range(12)]).classification == "linear"
    rep = classify_rate([0.5 ** (2 ** k) for k in range(6)])
    assert rep.classification == "rate_gamma" and rep.gamma_estimate == pytest.approx(2.0, abs=0.05)
    assert classify_rate([1 / math.factorial(k) for k in range(1, 16)]).classification == "superlinear"


def test_classify_cubic_order():
    rep = classify_rate([0.5 ** (3 ** k) for k in range(5)])
    assert rep.classification in ("rate_gamma", "super_rate_gamma")
    assert rep.gamma_estimate == pytest.approx(3.0, abs=0.2)


def test_classify_diverged_and_short():
    assert classify_rate([2.0 ** k for k in range(8)]).classification == "diverged"
    with pytest.raises(InsufficientData):
        classify_rate([1.0, 0.5, 0.25])


def test_classify_exact_zero_truncates():
    rep = classify_rate([1.0, 0.5, 0.25, 0.125, 0.0, 0.0])
    assert rep.c_estimates[-1] == 0.0
    assert rep.classification == "linear"


def test_rate_report_serializes():
    d = classify_rate([0.5 ** k for k in range(8)]).to_dict()
    assert d["classification"] == "linear" and len(d["c_estimates"]) == 7


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.1, 10.0))
def test_classify_geometric_is_linear(c, scale):
    assert classify_rate([scale * c ** k for k in range(14)]).classification == "linear"


# --------------------------------------------------------------------------- Lipschitz

def test_lipschitz_of_linear_map_is_factor(rng):
    R = EuclideanSpace(3)
    pairs = [(R.random_point(rng), R.random_point(rng)) for _ in range(64)]
    est = lipschitz_estimate(R, lambda x: 0.4 * x, pairs)
    assert est.L == pytest.approx(0.4)
    assert est.alpha == pytest.approx(1.0)
    assert est.contraction


def test_lipschitz_pointwise_and_set_valued(rng):
    R = EuclideanSpace(1)
    xbar = np.zeros(1)
    pairs = [(np.array([r]), None) for r in np.geomspace(1e-3, 1, 10)]
    est = lipschitz_estimate(R, lambda x: [x / 2, x / 3], pairs, pointwise_at=xbar)
    assert est.L == pytest.approx(0.5)


def test_lipschitz_zero_distance_distinct_images():
    S = FunctionSpace(lambda x, y: 0.0 if x[0] == y[0] else 1.0)
    with pytest.raises(InfiniteConstant):
        lipschitz_estimate(S, lambda x: x[1], [((0, 1), (0, 2))], target=FunctionSpace(lambda a, b: abs(a - b)))


def test_lipschitz_square_root_holder_exponent():
    R = EuclideanSpace(1)
    pairs = [(np.array([r]), np.zeros(1)) for r in np.geomspace(1e-6, 1e-1, 12)]
    est = lipschitz_estimate(R, lambda x: np.sqrt(np.abs(x)), pairs)
    assert est.alpha == pytest.approx(0.5, abs=1e-6)


# --------------------------------------------------------------------------- axioms

def test_axioms_on_asymmetric_space(rng):
    S = upper_line()
    rep = check_axioms(S, random_triples(S, 500, rng))
    assert rep.ok and rep.symmetry_defect > 0


def test_axioms_detect_broken_triangle(rng):
    S = FunctionSpace(lambda x, y: (x - y) ** 2, random_point=lambda r: float(r.normal()))
    rep = check_axioms(S, random_triples(S, 500, rng))
    assert rep.qms3_violations > 0 and not rep.ok
    assert rep.to_dict()["QMS3_violations"] == rep.qms3_violations


def test_axioms_detect_zero_distance_between_distinct_points():
    S = FunctionSpace(lambda x, y: abs(round(x) - round(y)))
    rep = check_axioms(S, [(0.1, 0.2, 1.0)])
    assert rep.qms1_violations == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=9, max_size=9))
def test_euclidean_triangle_property(v):
    R = EuclideanSpace(3)
    x, y, z = (np.array(v[i:i + 3]) for i in (0, 3, 6))
    assert R.distance(x, z) <= R.distance(x, y) + R.distance(y, z) + 1e-9
