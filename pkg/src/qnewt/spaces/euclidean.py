"""R^n with the Euclidean metric and linear-map-induced pseudo-linear maps."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..differential import NewtonDifferential, Selection
from ..exceptions import DimensionError, InvalidPoint
from ..pseudolinear import PseudoLinearMap, QuasiInverse
from ..qspace import QuasiMetricSpace

# condition numbers above this are treated as singular
SINGULAR_COND = 1e14


class EuclideanSpace(QuasiMetricSpace):
    def __init__(self, n: int, scale: float = 1.0):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.n = int(n)
        self.scale = float(scale)
        self.name = f"R^{self.n}"

    def point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.n,):
            raise InvalidPoint(f"expected a point of R^{self.n}, got shape {x.shape}")
        return x

    def distance(self, x, y) -> float:
        return float(np.linalg.norm(self.point(y) - self.point(x)))

    def random_point(self, rng):
        return rng.normal(scale=self.scale, size=self.n)

    def sample_at_distance(self, center, r, rng):
        center = self.point(center)
        if r == 0:
            return center.copy()
        u = rng.standard_normal(self.n)
        return center + r * u / np.linalg.norm(u)

    def to_spec(self, x) -> list:
        return [float(v) for v in self.point(x)]

    def from_spec(self, spec) -> np.ndarray:
        return self.point(spec)


def linear_induced_map(space: EuclideanSpace, T, T_inv=None) -> tuple[PseudoLinearMap, QuasiInverse | None]:
    """``H(x, y) = T (y - x)`` and, for invertible ``T``, ``Hinv(x, v) = x + T^-1 v``.

    The declared norm bound of the quasi-inverse is the spectral norm of
    ``T^-1``. Returns ``(H, None)`` when ``T`` is singular.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if T.shape[1] != space.n:
        raise DimensionError(f"T has {T.shape[1]} columns, space has dimension {space.n}")
    m = T.shape[0]
    H = PseudoLinearMap(space, m, lambda x, y: T @ (space.point(y) - space.point(x)))
    if T_inv is None:
        if m != space.n or np.linalg.cond(T) > SINGULAR_COND:
            return H, None
        T_inv = np.linalg.inv(T)
    T_inv = np.atleast_2d(np.asarray(T_inv, dtype=float))
    norm = float(np.linalg.norm(T_inv, 2))
    Hinv = QuasiInverse(H, lambda x, v: space.point(x) + T_inv @ v, norm)
    return H, Hinv


def _solve_inverse(space: EuclideanSpace, H: PseudoLinearMap, J: np.ndarray) -> QuasiInverse | None:
    if J.shape != (space.n, space.n) or np.linalg.cond(J) > SINGULAR_COND:
        return None
    norm = 1.0 / float(np.linalg.svd(J, compute_uv=False).min())
    return QuasiInverse(H, lambda x, v: space.point(x) + np.linalg.solve(J, v), norm)


def euclidean_bundle(T=None, F: Callable | None = None, jacobian: Callable | None = None,
                     n: int | None = None,
                     space: EuclideanSpace | None = None) -> tuple[EuclideanSpace, NewtonDifferential]:
    """Assemble ``R^n`` with a Newton differential.

    With ``jacobian`` the differential at ``x`` is the singleton
    ``(y, z) -> J(x) (z - y)`` with quasi-inverse ``x + J(x)^-1 v`` (a linear
    solve). Without it, the constant differential induced by ``T`` is used.
    Pass ``space`` to share one space instance between several bundles.
    A singular Jacobian yields a selection without quasi-inverse, which the
    solver reports as ``inverse_missing``.
    """
    if jacobian is None and T is None:
        raise ValueError("need either T or a jacobian")
    if n is None and space is not None:
        n = space.n
    if n is None:
        n = np.atleast_2d(np.asarray(T)).shape[1] if T is not None else None
    if n is None:
        raise ValueError("dimension n is required when only a jacobian is given")
    if space is None:
        space = EuclideanSpace(n)
    elif space.n != n:
        raise DimensionError(f"space has dimension {space.n}, expected {n}")

    if jacobian is None:
        H, Hinv = linear_induced_map(space, T)
        return space, NewtonDifferential(space, H.n, lambda x: [Selection(H, Hinv)])

    def jac(x):
        J = np.atleast_2d(np.asarray(jacobian(space.point(x)), dtype=float))
        if J.shape[1] != n:
            raise DimensionError(f"jacobian has shape {J.shape}, expected (*, {n})")
        return J

    m = jac(np.zeros(n)).shape[0] if F is None else np.atleast_1d(F(np.zeros(n))).shape[0]

    def sels(x):
        J = jac(x)
        H = PseudoLinearMap(space, m, lambda y, z, J=J: J @ (space.point(z) - space.point(y)))
        return [Selection(H, _solve_inverse(space, H, J))]

    return space, NewtonDifferential(space, m, sels)
