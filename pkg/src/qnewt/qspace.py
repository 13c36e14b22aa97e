"""Quasi-metric spaces: distances, balls, set distances and rate diagnostics.

Distances are never assumed symmetric. Every function here documents the
argument order it passes to ``space.distance`` because swapping the order
changes the result on a genuinely asymmetric space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .exceptions import EmptySet, InfiniteConstant, InsufficientData, InvalidRadii

ZERO_FLOOR = 1e-14


class QuasiMetricSpace:
    """Base class for a set with a (possibly asymmetric) distance.

    Subclasses implement :meth:`distance` and, when they are to be used by the
    sampling based checkers, :meth:`random_point` and :meth:`sample_at_distance`.
    """

    name = "quasi-metric space"

    def distance(self, x, y) -> float:
        raise NotImplementedError

    def same_point(self, x, y) -> bool:
        """Identity of points, decided without consulting the distance."""
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            return bool(np.array_equal(np.asarray(x), np.asarray(y)))
        return x == y

    def random_point(self, rng: np.random.Generator):
        raise NotImplementedError(f"{self.name} has no point generator")

    def sample_at_distance(self, center, r: float, rng: np.random.Generator):
        raise NotImplementedError(f"{self.name} has no shell sampler")

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


class FunctionSpace(QuasiMetricSpace):
    """Adapter turning a bare distance callable into a space.

    Handy for experimenting with asymmetric distances, e.g.
    ``d(x, y) = max(y - x, 0) + 2 * max(x - y, 0)`` on the real line.
    """

    def __init__(self, distance: Callable[[Any, Any], float], name: str = "function space",
                 random_point: Callable | None = None, sample_at_distance: Callable | None = None):
        self._distance = distance
        self.name = name
        self._random_point = random_point
        self._sample = sample_at_distance

    def distance(self, x, y):
        return float(self._distance(x, y))

    def random_point(self, rng):
        if self._random_point is None:
            return super().random_point(rng)
        return self._random_point(rng)

    def sample_at_distance(self, center, r, rng):
        if self._sample is None:
            return super().sample_at_distance(center, r, rng)
        return self._sample(center, r, rng)


@dataclass(frozen=True)
class Ball:
    """Open or closed ball. Membership measures ``dist(candidate, center)``."""

    center: Any
    radius: float
    closed: bool = False

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def contains(self, space: QuasiMetricSpace, y) -> bool:
        d = space.distance(y, self.center)
        return d <= self.radius if self.closed else d < self.radius


def dist_point_set(space: QuasiMetricSpace, x, A: Iterable, direction: str = "to_set") -> float:
    """Distance between a point and a finite set.

    ``direction="to_set"`` gives ``min_a dist(x, a)``; ``"from_set"`` gives
    ``min_a dist(a, x)``.
    """
    A = list(A)
    if not A:
        raise EmptySet("point/set distance needs a nonempty set")
    if direction == "to_set":
        return min(space.distance(x, a) for a in A)
    if direction == "from_set":
        return min(space.distance(a, x) for a in A)
    raise ValueError(f"unknown direction {direction!r}")


def dist_set_set(space: QuasiMetricSpace, A: Iterable, B: Iterable) -> float:
    """Hausdorff-style distance ``max(sup_a dist(a, B), sup_b dist(A, b))``.

    ``dist(a, B)`` uses ``distance(a, .)`` and ``dist(A, b)`` uses
    ``distance(., b)``, so both one-sided terms measure from A towards B.
    """
    A, B = list(A), list(B)
    if not A or not B:
        raise EmptySet("set/set distance needs nonempty sets")
    left = max(dist_point_set(space, a, B, "to_set") for a in A)
    right = max(dist_point_set(space, b, A, "from_set") for b in B)
    return max(left, right)


def ball_intersection_singleton_check(space: QuasiMetricSpace, center, radii: Sequence[float],
                                      probes: Iterable) -> bool:
    """True iff no probe distinct from ``center`` lies in every closed ball.

    The nested closed balls ``B_{r_k}[center]`` shrink to ``{center}`` when the
    radii tend to zero; this is the finite harness for that fact.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0:
        raise InvalidRadii("need a nonempty sequence of radii")
    if np.any(radii < 0) or np.any(np.diff(radii) >= 0):
        raise InvalidRadii("radii must be nonnegative and strictly decreasing")
    balls = [Ball(center, r, closed=True) for r in radii]
    for p in probes:
        if space.same_point(p, center):
            continue
        if all(b.contains(space, p) for b in balls):
            return False
    return True


def is_cauchy(space: QuasiMetricSpace, seq: Sequence, eps: float, start: int) -> bool:
    """Finite Cauchy test: ``dist(x^n, x^m) < eps`` for all ``n, m >= start``."""
    tail = list(seq)[start:]
    return all(space.distance(a, b) < eps for a in tail for b in tail)


# ----------------------------------------------------------------------------
# convergence rates
# ----------------------------------------------------------------------------

RATE_CLASSES = ("linear", "superlinear", "rate_gamma", "super_rate_gamma", "diverged", "inconclusive")


@dataclass
class RateReport:
    classification: str
    c_estimates: list[float]
    gamma_estimate: float | None = None
    proxy: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "c_estimates": [float(c) for c in self.c_estimates],
            "gamma_estimate": None if self.gamma_estimate is None else float(self.gamma_estimate),
            "proxy": self.proxy,
            "note": self.note,
        }


def _nonincreasing(v: np.ndarray, rel: float = 1e-9) -> bool:
    return bool(np.all(v[1:] <= v[:-1] * (1.0 + rel)))


def classify_rate(dists_to_limit: Sequence[float], tol: float = 0.15, c_tol: float = 1e-2,
                  zero_floor: float = ZERO_FLOOR) -> RateReport:
    """Classify the convergence order of a sequence of distances to a limit.

    Parameters
    ----------
    dists_to_limit : sequence of float
        ``d_k = dist(x^k, xbar)``; at least four entries.
    tol : float
        Margin on the log-log slope: a slope above ``1 + tol`` counts as a
        rate ``gamma > 1``. Also the relative drop of the per-step factors
        required to call a sequence superlinear.
    c_tol : float
        Tail mean of the per-step factors below which they are considered
        to have reached zero.
    zero_floor : float
        Entries at or below this value are exact convergence; they end the
        analyzed prefix.

    Returns
    -------
    RateReport
        ``c_estimates`` holds ``d_{k+1} / d_k`` over the analyzed prefix, with
        a trailing ``0.0`` when the sequence hit the zero floor.
    """
    d = np.asarray(dists_to_limit, dtype=float)
    if d.ndim != 1 or d.size < 4:
        raise InsufficientData(f"need at least 4 distances, got {d.size}")
    if np.any(~np.isfinite(d)) or np.any(d < 0):
        raise ValueError("distances must be finite and nonnegative")

    zeros = np.flatnonzero(d <= zero_floor)
    exact = zeros.size > 0
    if exact:
        d = d[: zeros[0]]
    c = list(d[1:] / d[:-1]) if d.size > 1 else []
    if exact and d.size > 0:
        c.append(0.0)

    if d.size < 3:
        return RateReport("inconclusive", c, note="too few nonzero distances before exact convergence")

    m = max(4, math.ceil(d.size / 2))
    tail = d[-m:]
    ct = tail[1:] / tail[:-1]

    if np.all(ct >= 1.0) and d[-1] > d[0]:
        return RateReport("diverged", c)

    X, Y = np.log(tail[:-1]), np.log(tail[1:])
    slope = None
    if X.size >= 2 and np.ptp(X) > 0:
        slope = float(np.polyfit(X, Y, 1)[0])

    if slope is not None and slope > 1.0 + tol and tail[-1] < tail[0]:
        q = tail[1:] / tail[:-1] ** slope
        if _nonincreasing(q) and q[-1] <= 1e-2 * q[0]:
            return RateReport("super_rate_gamma", c, gamma_estimate=slope)
        return RateReport("rate_gamma", c, gamma_estimate=slope)

    if ct[-1] < 1.0 and _nonincreasing(ct) and (ct.mean() < c_tol or ct[-1] <= (1.0 - tol) * ct[0]):
        return RateReport("superlinear", c)

    if max(c) < 1.0:
        return RateReport("linear", c)
    return RateReport("inconclusive", c, note="per-step factors not uniformly below 1")


# ----------------------------------------------------------------------------
# Lipschitz / Hoelder estimates
# ----------------------------------------------------------------------------

@dataclass
class LipschitzEstimate:
    L: float
    alpha: float
    ratios: list[float] = field(default_factory=list)

    @property
    def contraction(self) -> bool:
        return self.L < 1.0


def _images(T, x) -> list:
    y = T(x)
    return list(y) if isinstance(y, (list, tuple, set, frozenset)) else [y]


def lipschitz_estimate(space: QuasiMetricSpace, map: Callable, samples: Iterable[tuple],
                       pointwise_at=None, target: QuasiMetricSpace | None = None,
                       zero_floor: float = ZERO_FLOOR) -> LipschitzEstimate:
    """Empirical (pointwise) Lipschitz constant and Hoelder exponent.

    ``map`` may return a single point or a list of points (a finite set-valued
    map); the ratio then takes the sup over all image pairs. ``L`` is the sup
    of ``dist(y, ybar) / dist(x, xbar)``; ``alpha`` is the slope of
    ``log dist(y, ybar)`` against ``log dist(x, xbar)``, ``inf`` when every
    image distance vanishes, ``nan`` when fewer than two distinct scales were
    sampled.
    """
    target = target or space
    num, den = [], []
    for x, xb in samples:
        if pointwise_at is not None:
            xb = pointwise_at
        dx = space.distance(x, xb)
        dy = max(target.distance(y, yb) for y in _images(map, x) for yb in _images(map, xb))
        if dx <= zero_floor:
            if dy > zero_floor:
                raise InfiniteConstant("distinct images over a zero-distance pair")
            continue
        num.append(dy)
        den.append(dx)
    if not den:
        raise InsufficientData("no pair with positive distance")
    num, den = np.asarray(num), np.asarray(den)
    ratios = num / den
    L = float(ratios.max())
    pos = num > zero_floor
    if not pos.any():
        alpha = math.inf
    elif np.ptp(np.log(den[pos])) > 0 and pos.sum() >= 2:
        alpha = float(np.polyfit(np.log(den[pos]), np.log(num[pos]), 1)[0])
    else:
        alpha = math.nan
    return LipschitzEstimate(L, alpha, list(ratios))


# ----------------------------------------------------------------------------
# axiom suite
# ----------------------------------------------------------------------------

@dataclass
class AxiomReport:
    triples: int
    qms1_violations: int = 0
    qms2_violations: int = 0
    qms3_violations: int = 0
    symmetry_defect: float = 0.0
    worst_triangle_excess: float = -math.inf

    @property
    def ok(self) -> bool:
        return self.qms1_violations == self.qms2_violations == self.qms3_violations == 0

    def to_dict(self) -> dict:
        return {
            "triples": self.triples,
            "QMS1_violations": self.qms1_violations,
            "QMS2_violations": self.qms2_violations,
            "QMS3_violations": self.qms3_violations,
            "worst_triangle_excess": self.worst_triangle_excess,
            "symmetry_defect": self.symmetry_defect,
            "ok": self.ok,
        }


def check_axioms(space: QuasiMetricSpace, triples: Iterable[tuple], tol: float = 1e-12) -> AxiomReport:
    """Run QMS1-3 on every triple ``(x, y, z)``.

    QMS1 is only tested on pairs that are distinct points of the space, as
    decided by ``space.same_point``. Symmetry is measured but never enforced.
    """
    rep = AxiomReport(0)
    for x, y, z in triples:
        rep.triples += 1
        dxy, dyz, dxz = space.distance(x, y), space.distance(y, z), space.distance(x, z)
        for a, b, dab in ((x, y, dxy), (y, z, dyz), (x, z, dxz)):
            if not space.same_point(a, b) and not dab > 0:
                rep.qms1_violations += 1
        for a in (x, y, z):
            if abs(space.distance(a, a)) > tol:
                rep.qms2_violations += 1
        excess = dxz - dxy - dyz
        rep.worst_triangle_excess = max(rep.worst_triangle_excess, excess)
        if excess > tol:
            rep.qms3_violations += 1
        rep.symmetry_defect = max(rep.symmetry_defect, abs(dxy - space.distance(y, x)))
    return rep


def random_triples(space: QuasiMetricSpace, count: int, rng: np.random.Generator) -> list[tuple]:
    return [(space.random_point(rng), space.random_point(rng), space.random_point(rng))
            for _ in range(count)]
