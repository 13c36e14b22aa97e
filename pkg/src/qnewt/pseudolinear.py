"""Pseudo-linear maps, quasi-inverses and their empirical checks.

A pseudo-linear map ``H(x, y)`` plays the role of "a linear map applied to
the difference y - x" and only has to vanish on the diagonal. Its quasi-inverse
``Hinv(x, v)`` moves the point ``x`` by the vector ``v``. Throughout the
package ``H(x, y)`` approximates ``F(y) - F(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .exceptions import DimensionError, NormUnbounded
from .qspace import ZERO_FLOOR, QuasiMetricSpace

EXACT_TOL = 1e-9
SAMPLED_TOL = 1e-6


def _vec(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float))


@dataclass
class PseudoLinearMap:
    space: QuasiMetricSpace
    n: int
    eval: Callable[[Any, Any], Any]

    def __call__(self, x, y) -> np.ndarray:
        out = _vec(self.eval(x, y))
        if out.shape != (self.n,):
            raise DimensionError(f"expected output of length {self.n}, got shape {out.shape}")
        return out


@dataclass
class QuasiInverse:
    base: PseudoLinearMap
    eval_inv: Callable[[Any, np.ndarray], Any]
    norm_bound: float

    @property
    def space(self) -> QuasiMetricSpace:
        return self.base.space

    def __call__(self, x, v):
        v = _vec(v)
        if v.shape != (self.base.n,):
            raise DimensionError(f"expected a vector of length {self.base.n}, got shape {v.shape}")
        return self.eval_inv(x, v)


def check_pseudo_linear(H: PseudoLinearMap, samples: Sequence, tol: float = EXACT_TOL) -> bool:
    """True iff ``||H(x, x)|| <= tol`` on every sample."""
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    return all(np.linalg.norm(H(x, x)) <= tol for x in samples)


def estimate_operator_norm(Hinv: QuasiInverse, samples: Sequence[tuple], running: bool = False):
    """Empirical lower bound on the quasi-inverse norm.

    Returns the sup over ``(x, y, v, w)`` of
    ``dist(Hinv(x, v), Hinv(y, w)) / ||v - w - H(x, y)||``. Tuples with a
    vanishing ratio numerator and denominator are skipped. With
    ``running=True`` the running sup after each tuple is returned as well.
    """
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    H, space = Hinv.base, Hinv.space
    best, trail = 0.0, []
    for x, y, v, w in samples:
        v, w = _vec(v), _vec(w)
        den = float(np.linalg.norm(v - w - H(x, y)))
        num = space.distance(Hinv(x, v), Hinv(y, w))
        if den <= ZERO_FLOOR:
            if num > 1e-12:
                raise NormUnbounded(f"zero denominator with distance {num:g}")
        else:
            best = max(best, num / den)
        trail.append(best)
    return (best, trail) if running else best


def sample_norm_tuples(space: QuasiMetricSpace, n: int, count: int, rng: np.random.Generator,
                       radius: float = 1.0, centers: Sequence | None = None,
                       points: Sequence | None = None) -> list[tuple]:
    """Draw ``(x, y, v, w)`` tuples for :func:`estimate_operator_norm`.

    ``x, y`` come from ``points`` when given, else from ``space.random_point``.
    ``v, w`` are uniform in a ball of ``radius`` around a randomly chosen
    entry of ``centers`` (for instance F-values seen at the sampled points),
    or around the origin.
    """
    centers = [np.zeros(n)] if not centers else [_vec(c) for c in centers]
    out = []
    for _ in range(count):
        if points:
            x = points[rng.integers(len(points))]
            y = points[rng.integers(len(points))]
        else:
            x, y = space.random_point(rng), space.random_point(rng)
        vw = []
        for _ in range(2):
            u = rng.standard_normal(n)
            u *= radius * rng.random() ** (1.0 / n) / max(np.linalg.norm(u), ZERO_FLOOR)
            vw.append(centers[rng.integers(len(centers))] + u)
        out.append((x, y, vw[0], vw[1]))
    return out


@dataclass
class StrongCompatibilityReport:
    roundtrip_ok: bool
    fixed_point_implies_zero_ok: bool
    worst_roundtrip_residual: float
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.roundtrip_ok and self.fixed_point_implies_zero_ok


def check_strong_compatibility(Hinv: QuasiInverse, samples: Sequence[tuple], tol: float = EXACT_TOL,
                               scale: float = 1.0) -> StrongCompatibilityReport:
    """Check ``v = H(x, Hinv(x, v))`` and ``Hinv(x, v) = x  =>  v = 0``.

    The implication is probed contrapositively: a sample with
    ``dist(Hinv(x, v), x) <= tol`` but ``||v|| > tol * scale`` is a witness
    against it.
    """
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    H, space = Hinv.base, Hinv.space
    worst, witnesses = 0.0, []
    rt_ok = fp_ok = True
    for x, v in samples:
        v = _vec(v)
        y = Hinv(x, v)
        res = float(np.linalg.norm(v - H(x, y)))
        worst = max(worst, res)
        if res > tol:
            rt_ok = False
            witnesses.append(("roundtrip", x, v, res))
        if space.distance(y, x) <= tol and np.linalg.norm(v) > tol * scale:
            fp_ok = False
            witnesses.append(("fixed_point", x, v, float(np.linalg.norm(v))))
    return StrongCompatibilityReport(rt_ok, fp_ok, worst, witnesses)


@dataclass
class HSmoothReport:
    kappa: float
    alpha: float
    holds: bool
    worst_ratio_excess: float


def check_h_smooth(H_family: Callable[[Any], QuasiInverse], x0, kappa: float, alpha: float,
                   samples: Sequence[tuple], tol: float = SAMPLED_TOL) -> HSmoothReport:
    """Sampled check of pointwise h-smoothness at ``x0``.

    For each ``(x, y, z)`` compares ``dist(H(x)^-(x, H(x0)(z, y)), x)`` with
    ``(1 + kappa * dist(x, x0)**alpha) * dist(y, z)``.
    """
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    if kappa < 0 or alpha <= 0:
        raise ValueError("need kappa >= 0 and alpha > 0")
    H0 = H_family(x0).base
    space = H0.space
    worst = -np.inf
    for x, y, z in samples:
        lhs = space.distance(H_family(x)(x, H0(z, y)), x)
        rhs = (1.0 + kappa * space.distance(x, x0) ** alpha) * space.distance(y, z)
        worst = max(worst, lhs - rhs)
    return HSmoothReport(kappa, alpha, bool(worst <= tol), float(worst))


# ----------------------------------------------------------------------------
# algebra of pseudo-linear maps
# ----------------------------------------------------------------------------

def _same_space(H1: PseudoLinearMap, H2: PseudoLinearMap):
    if H1.space is not H2.space:
        raise DimensionError("maps live on different spaces")


def algebra_sum(H1: PseudoLinearMap, H2: PseudoLinearMap) -> PseudoLinearMap:
    _same_space(H1, H2)
    if H1.n != H2.n:
        raise DimensionError(f"cannot add maps of dimensions {H1.n} and {H2.n}")
    return PseudoLinearMap(H1.space, H1.n, lambda x, y: H1(x, y) + H2(x, y))


def algebra_inner(H1: PseudoLinearMap, H2: PseudoLinearMap) -> PseudoLinearMap:
    _same_space(H1, H2)
    if H1.n != H2.n:
        raise DimensionError(f"inner product of dimensions {H1.n} and {H2.n}")
    return PseudoLinearMap(H1.space, 1, lambda x, y: np.dot(H1(x, y), H2(x, y)))


def algebra_scale(s, H: PseudoLinearMap) -> PseudoLinearMap:
    """Product ``s . H`` with ``s`` a scalar map in ``S_1`` or a plain number."""
    if isinstance(s, PseudoLinearMap):
        _same_space(s, H)
        if s.n != 1:
            raise DimensionError("the scaling map must be scalar valued")
        return PseudoLinearMap(H.space, H.n, lambda x, y: s(x, y)[0] * H(x, y))
    s = float(s)
    return PseudoLinearMap(H.space, H.n, lambda x, y: s * H(x, y))


def algebra_direct_sum(H1: PseudoLinearMap, H2: PseudoLinearMap) -> PseudoLinearMap:
    _same_space(H1, H2)
    return PseudoLinearMap(H1.space, H1.n + H2.n, lambda x, y: np.concatenate([H1(x, y), H2(x, y)]))


def zero_map(space: QuasiMetricSpace, n: int) -> PseudoLinearMap:
    return PseudoLinearMap(space, n, lambda x, y: np.zeros(n))
