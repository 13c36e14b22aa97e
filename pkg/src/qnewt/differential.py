"""Newton differentials as finite selection sets, their sampled verification
and the sum / product / chain / direct-sum calculus.

Sign convention: a selection ``H`` at ``x`` approximates ``F(y) - F(x)`` by
``H(x, y)`` (for Euclidean spaces ``H(x, y) = J(x) (y - x)``). The remainder
driving every check is therefore ``||F(xbar) - F(x) - H(x, xbar)||``, which is
exactly the quantity the Newton step ``Hinv(x, -F(x))`` is contracted by.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import DimensionError, SamplingError
from .pseudolinear import PseudoLinearMap, QuasiInverse, _vec
from .qspace import ZERO_FLOOR, QuasiMetricSpace

DEFAULT_RADII = tuple(np.geomspace(1e-1, 1e-4, 8))


class Selection(NamedTuple):
    H: PseudoLinearMap
    Hinv: QuasiInverse | None = None


@dataclass
class NewtonDifferential:
    """Set-valued map ``x -> {(H, Hinv), ...}`` into pseudo-linear maps.

    ``assumption_ok`` is cleared by combinators whose hypotheses failed a
    sampled check; reports built from such a differential are downgraded to
    ``inconclusive``. ``degenerate(x, xbar)`` flags sample pairs a check must
    skip (the chain rule cannot use pairs with ``F(x) = F(xbar)``).
    """

    space: QuasiMetricSpace
    n: int
    selections_at: Callable[[Any], list[Selection]]
    assumption_ok: bool = True
    degenerate: Callable[[Any, Any], bool] | None = None
    notes: list[str] = field(default_factory=list)

    def __call__(self, x) -> list[Selection]:
        return list(self.selections_at(x))

    def maps_at(self, x) -> list[PseudoLinearMap]:
        return [s.H for s in self(x)]


def singleton_differential(space, n, selection: Callable[[Any], Selection]) -> NewtonDifferential:
    return NewtonDifferential(space, n, lambda x: [selection(x)])


def zero_differential(space: QuasiMetricSpace, n: int) -> NewtonDifferential:
    Z = PseudoLinearMap(space, n, lambda x, y: np.zeros(n))
    return NewtonDifferential(space, n, lambda x: [Selection(Z)])


def remainder(F: Callable, H: PseudoLinearMap, x, xbar) -> float:
    """``||F(xbar) - F(x) - H(x, xbar)||``."""
    return float(np.linalg.norm(_vec(F(xbar)) - _vec(F(x)) - H(x, xbar)))


def sup_ratio(F, HF: NewtonDifferential, x, xbar, gamma: float = 1.0) -> float:
    d = HF.space.distance(x, xbar)
    sels = HF(x)
    if not sels:
        raise SamplingError("empty selection set at a sampled point")
    return max(remainder(F, s.H, x, xbar) for s in sels) / d ** gamma


@dataclass
class DiffabilityReport:
    mode: str
    limit_estimate: float
    gamma: float
    ratios: list[tuple[float, float]]
    skipped: int = 0
    deltas: dict = field(default_factory=dict)
    note: str = ""

    def ratio_at(self, radius: float) -> float:
        """Sup-ratio recorded at the shell closest to ``radius``."""
        r = np.asarray([a for a, _ in self.ratios])
        return self.ratios[int(np.argmin(np.abs(np.log(r) - math.log(radius))))][1]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "limit_estimate": self.limit_estimate,
            "gamma": self.gamma,
            "ratios": [[float(a), float(b)] for a, b in self.ratios],
            "skipped": self.skipped,
            "deltas": {str(k): v for k, v in self.deltas.items()},
            "note": self.note,
        }


def check_pointwise_diffability(F: Callable, HF: NewtonDifferential, xbar,
                                radii: Sequence[float] = DEFAULT_RADII, samples_per_radius: int = 32,
                                gamma: float = 1.0, seed: int = 0, slope_tol: float = 0.5,
                                zero_tol: float = 1e-12) -> DiffabilityReport:
    """Sampled (weak) pointwise Newton differentiability at ``xbar``.

    On each shell ``dist(x, xbar) ~ r`` the sup over samples and selections
    of ``||F(xbar) - F(x) - H(x, xbar)|| / dist(x, xbar)**gamma`` is recorded.
    The shell sups are ``pointwise`` when they vanish or decay with a log-log
    slope of at least ``slope_tol``, ``weak_pointwise`` when they stay
    bounded, ``inconclusive`` when they grow.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2 or np.any(np.diff(radii) >= 0) or np.any(radii <= 0):
        raise ValueError("radii must be positive and strictly decreasing")
    rng = np.random.default_rng(seed)
    space = HF.space
    shells, skipped = [], 0
    for r in radii:
        best, used = 0.0, 0
        for _ in range(samples_per_radius):
            x = space.sample_at_distance(xbar, r, rng)
            if space.distance(x, xbar) <= ZERO_FLOOR or (HF.degenerate and HF.degenerate(x, xbar)):
                skipped += 1
                continue
            best = max(best, sup_ratio(F, HF, x, xbar, gamma))
            used += 1
        if used == 0:
            raise SamplingError(f"no usable sample at radius {r:g}")
        shells.append((float(r), best))

    sups = np.array([s for _, s in shells])
    limit = float(sups[-2:].max())
    if np.all(sups[-2:] <= zero_tol):
        mode, note = "pointwise", "remainder vanishes"
    else:
        pos = sups > zero_tol
        slope = float(np.polyfit(np.log(radii[pos]), np.log(sups[pos]), 1)[0]) if pos.sum() >= 2 else 0.0
        if slope >= slope_tol and sups[-1] < sups[0]:
            mode, note = "pointwise", f"log-log slope {slope:.3f}"
        elif slope > -slope_tol:
            mode, note = "weak_pointwise", f"bounded, log-log slope {slope:.3f}"
        else:
            mode, note = "inconclusive", f"ratios grow, log-log slope {slope:.3f}"
    if not HF.assumption_ok:
        mode, note = "inconclusive", "hypothesis of a combinator failed: " + "; ".join(HF.notes)
    return DiffabilityReport(mode, limit, gamma, shells, skipped, note=note)


def check_uniform_diffability(F: Callable, HF: NewtonDifferential, V: Sequence,
                              epsilons: Sequence[float] = (1e-1, 1e-2, 1e-3),
                              deltas: Sequence[float] = tuple(np.geomspace(1.0, 1e-6, 13)),
                              samples_per_point: int = 16, seed: int = 0) -> DiffabilityReport:
    """Sampled uniform Newton differentiability on the finite set ``V``.

    For each epsilon the largest candidate delta is searched such that every
    sampled pair ``y in V``, ``dist(x, y) <= delta`` has
    ``sup_H ||F(y) - F(x) - H(x, y)|| / dist(x, y) < epsilon``. Mode is
    ``uniform`` when every epsilon finds a delta. Otherwise, if the ratios sit
    in the band ``|ratio - c| < epsilon`` around their observed limit ``c`` for
    the largest epsilon, the mode is ``uniform_weak``.
    """
    if len(V) == 0:
        raise ValueError("V must be nonempty")
    rng = np.random.default_rng(seed)
    space = HF.space
    deltas = sorted(deltas, reverse=True)

    def ratios_within(delta):
        out = []
        for y in V:
            for _ in range(samples_per_point):
                rho = delta * rng.uniform(0.05, 1.0)
                x = space.sample_at_distance(y, rho, rng)
                d = space.distance(x, y)
                if d <= ZERO_FLOOR or d > delta:
                    continue
                out.append(max(remainder(F, s.H, x, y) for s in HF(x)) / d)
        return np.asarray(out)

    per_delta = [(d, ratios_within(d)) for d in deltas]
    found, trace = {}, []
    for eps in epsilons:
        found[eps] = next((d for d, r in per_delta if r.size and r.max() < eps), None)
    for d, r in per_delta:
        trace.append((float(d), float(r.max()) if r.size else 0.0))
    c = trace[-1][1]
    if all(v is not None for v in found.values()):
        mode = "uniform"
    elif all(np.all(np.abs(r - c) < max(epsilons)) for _, r in per_delta[-3:] if r.size):
        mode = "uniform_weak"
    else:
        mode = "inconclusive"
    if not HF.assumption_ok:
        mode = "inconclusive"
    return DiffabilityReport(mode, c, 1.0, trace, deltas=found)


# ----------------------------------------------------------------------------
# calculus
# ----------------------------------------------------------------------------

def _check_pair(HF: NewtonDifferential, HG: NewtonDifferential, same_n: bool = True):
    if HF.space is not HG.space:
        raise DimensionError("differentials live on different spaces")
    if same_n and HF.n != HG.n:
        raise DimensionError(f"output dimensions differ: {HF.n} vs {HG.n}")


def combine_sum(HF: NewtonDifferential, HG: NewtonDifferential) -> NewtonDifferential:
    """All pairwise sums ``H_F + H_G``; quasi-inverses are dropped."""
    _check_pair(HF, HG)

    def sels(x):
        return [Selection(PseudoLinearMap(HF.space, HF.n, lambda y, z, a=a.H, b=b.H: a(y, z) + b(y, z)))
                for a, b in itertools.product(HF(x), HG(x))]

    return NewtonDifferential(HF.space, HF.n, sels, HF.assumption_ok and HG.assumption_ok,
                              notes=HF.notes + HG.notes)


def combine_direct_sum(HF: NewtonDifferential, HG: NewtonDifferential) -> NewtonDifferential:
    _check_pair(HF, HG, same_n=False)
    n = HF.n + HG.n

    def sels(x):
        return [Selection(PseudoLinearMap(HF.space, n,
                                          lambda y, z, a=a.H, b=b.H: np.concatenate([a(y, z), b(y, z)])))
                for a, b in itertools.product(HF(x), HG(x))]

    return NewtonDifferential(HF.space, n, sels, HF.assumption_ok and HG.assumption_ok,
                              notes=HF.notes + HG.notes)


def combine_product(HF: NewtonDifferential, HG: NewtonDifferential, F: Callable, G: Callable) -> NewtonDifferential:
    """Selections ``(y, z) -> H_F(y, z) G(x) + F(x) H_G(y, z)`` for scalar F, G."""
    _check_pair(HF, HG)
    if HF.n != 1:
        raise DimensionError("the product rule needs scalar valued functions")

    def sels(x):
        fx, gx = float(_vec(F(x))[0]), float(_vec(G(x))[0])
        return [Selection(PseudoLinearMap(HF.space, 1, lambda y, z, a=a.H, b=b.H: a(y, z) * gx + fx * b(y, z)))
                for a, b in itertools.product(HF(x), HG(x))]

    return NewtonDifferential(HF.space, 1, sels, HF.assumption_ok and HG.assumption_ok,
                              notes=HF.notes + HG.notes)


def chain_bound_excess(HF: NewtonDifferential, K: float, samples: Sequence[tuple]) -> float:
    """Worst ``||H(x)(y, z)|| - K dist(y, z)`` over ``(x, y, z)`` samples."""
    space = HF.space
    return max(float(np.linalg.norm(s.H(y, z))) - K * space.distance(y, z)
               for x, y, z in samples for s in HF(x))


def combine_chain(HG: NewtonDifferential, F: Callable, HF: NewtonDifferential | None = None,
                  K: float | None = None, bound_samples: Sequence[tuple] = (),
                  space: QuasiMetricSpace | None = None, tol: float = 1e-9) -> NewtonDifferential:
    """Differential of ``G o F``: ``(y, z) -> H_G(F(y), F(z))`` for ``H_G`` at ``F(x)``.

    ``HG`` lives on the Euclidean codomain of ``F``. When ``HF``, ``K`` and
    ``bound_samples`` are supplied, the bound ``||H_F(x)(y, z)|| <= K dist(y, z)``
    is checked on the samples; a violation warns and marks the result so that
    later reports are inconclusive.
    """
    if space is None:
        if HF is None:
            raise ValueError("pass the domain space or the inner differential")
        space = HF.space
    ok, notes = HG.assumption_ok, list(HG.notes)
    if HF is not None and K is not None and bound_samples:
        excess = chain_bound_excess(HF, K, bound_samples)
        if excess > tol:
            ok = False
            notes.append(f"chain bound with K={K:g} violated by {excess:.3g}")
            warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)

    def check_dim(u):
        u = _vec(u)
        if u.shape[0] != getattr(HG.space, "n", u.shape[0]):
            raise DimensionError("F's codomain does not match the outer differential's space")
        return u

    def sels(x):
        return [Selection(PseudoLinearMap(space, HG.n, lambda y, z, h=s.H: h(check_dim(F(y)), check_dim(F(z)))))
                for s in HG(check_dim(F(x)))]

    def degenerate(x, xbar):
        return bool(np.array_equal(_vec(F(x)), _vec(F(xbar))))

    return NewtonDifferential(space, HG.n, sels, ok, degenerate, notes)
