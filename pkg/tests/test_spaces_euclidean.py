import numpy as np
import pytest

from qnewt.exceptions import DimensionError, InvalidPoint
from qnewt.spaces import EuclideanSpace, euclidean_bundle, linear_induced_map


def test_distance_and_points():
    R = EuclideanSpace(2)
    assert R.distance([0, 0], [3, 4]) == 5.0
    with pytest.raises(InvalidPoint):
        R.point([1, 2, 3])
    assert R.from_spec(R.to_spec([1.5, -2])).tolist() == [1.5, -2.0]
    with pytest.raises(ValueError):
        EuclideanSpace(0)


def test_sample_at_distance(rng):
    R = EuclideanSpace(5)
    c = rng.normal(size=5)
    for r in (0.0, 1e-6, 0.3, 7.0):
        assert R.distance(R.sample_at_distance(c, r, rng), c) == pytest.approx(r, abs=1e-12)


def test_linear_map_and_inverse(rng):
    R = EuclideanSpace(3)
    T = rng.normal(size=(3, 3)) + 2 * np.eye(3)
    H, Hinv = linear_induced_map(R, T)
    x, y = rng.normal(size=3), rng.normal(size=3)
    assert np.allclose(H(x, y), T @ (y - x))
    v = rng.normal(size=3)
    assert np.allclose(T @ (Hinv(x, v) - x), v)
    assert Hinv(x, np.zeros(3)).tolist() == x.tolist()
    assert Hinv.norm_bound == pytest.approx(np.linalg.norm(np.linalg.inv(T), 2))


def test_singular_map_has_no_inverse():
    R = EuclideanSpace(2)
    _, Hinv = linear_induced_map(R, [[1.0, 2.0], [2.0, 4.0]])
    assert Hinv is None
    with pytest.raises(DimensionError):
        linear_induced_map(R, np.eye(3))


def test_bundle_with_jacobian():
    F = lambda x: np.array([x[0] ** 2 - x[1], x[1] - 1])  # noqa: E731
    space, HF = euclidean_bundle(F=F, jacobian=lambda x: [[2 * x[0], -1], [0, 1]], n=2)
    s = HF(np.array([1.0, 0.0]))[0]
    assert np.allclose(s.H(np.array([1.0, 0.0]), np.array([2.0, 1.0])), [1.0, 1.0])
    assert HF(np.array([0.0, 0.0]))[0].Hinv is None  # singular Jacobian


def test_bundle_argument_errors():
    with pytest.raises(ValueError):
        euclidean_bundle()
    with pytest.raises(ValueError):
        euclidean_bundle(jacobian=lambda x: [[1.0]])
    _, HF = euclidean_bundle(F=lambda x: x, jacobian=lambda x: [[1.0]], space=EuclideanSpace(2))
    with pytest.raises(DimensionError):
        HF(np.zeros(2))
    with pytest.raises(DimensionError):
        euclidean_bundle(F=lambda x: x, jacobian=lambda x: [[1.0]], n=1, space=EuclideanSpace(2))
