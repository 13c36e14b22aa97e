"""Kantorovich-type existence certificate.

A scalar majorant ``f`` on ``[0, t_bar]`` is iterated by Newton's method from
``t_0 = 0``; its increments ``t_{k+1} - t_k`` dominate the steps of the
Newton-type method on the space, which certifies that the iterates form a
Cauchy sequence with residuals bounded by ``f(t_k) / B``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .differential import NewtonDifferential, Selection
from .exceptions import BUnbounded, InvalidMajorant
from .pseudolinear import PseudoLinearMap, _vec
from .qspace import ZERO_FLOOR, QuasiMetricSpace
from .solver import IterationTrace, SolveConfig, newton_solve


@dataclass
class Majorant:
    f: Callable[[float], float]
    f_prime: Callable[[float], float]
    f_double_prime: Callable[[float], float]
    t_bar: float
    eta: float
    gamma: float
    L: float
    B: float

    def __post_init__(self):
        if not 1.0 <= self.gamma <= 2.0:
            raise InvalidMajorant("gamma must lie in [1, 2]")
        if self.L <= 0 or self.B <= 0:
            raise InvalidMajorant("L and B must be positive")
        if self.eta < 0 or self.t_bar < 0 or (self.eta > 0 and self.t_bar == 0):
            raise InvalidMajorant("need eta >= 0 and t_bar > 0 (t_bar = 0 only when eta = 0)")

    @property
    def degenerate(self) -> bool:
        return self.eta == 0.0

    @classmethod
    def quadratic(cls, L: float, B: float, eta: float) -> "Majorant":
        """``f(t) = (L B / 2) t^2 - t + eta`` with ``gamma = 2``.

        ``t_bar`` is the smaller root ``(1 - sqrt(1 - 2 L B eta)) / (L B)``;
        the family does not exist when ``2 L B eta > 1``.
        """
        a = L * B
        disc = 1.0 - 2.0 * a * eta
        if disc < 0:
            raise InvalidMajorant(f"2 L B eta = {2 * a * eta:.6g} > 1: quadratic majorant has no root")
        t_bar = (1.0 - math.sqrt(disc)) / a
        return cls(lambda t: 0.5 * a * t * t - t + eta, lambda t: a * t - 1.0, lambda t: a,
                   t_bar, eta, 2.0, L, B)


def scalar_newton_map(f: Majorant, t: float) -> float:
    """``N(t) = t - f(t) / f'(t)``."""
    d = f.f_prime(t)
    if not d < 0:
        raise InvalidMajorant(f"f'({t}) = {d} is not negative")
    return t - f.f(t) / d


def majorant_sequence(f: Majorant, count: int) -> list[float]:
    """``t_0 = 0, t_{k+1} = N(t_k)`` for ``count + 1`` terms."""
    t = [0.0]
    for _ in range(count):
        t.append(t[-1] if f.degenerate or t[-1] >= f.t_bar else scalar_newton_map(f, t[-1]))
    return t


@dataclass
class ConditionCheck:
    holds: bool
    worst_margin: float
    grid: int

    def to_dict(self) -> dict:
        return {"holds": self.holds, "worst_margin": self.worst_margin, "grid": self.grid}


def verify_majorant(f: Majorant, grid_size: int = 1024, tol: float = 1e-12) -> dict[str, ConditionCheck]:
    """Check conditions (a)-(d) on a uniform grid over ``[0, t_bar)``.

    Margins are signed so that nonnegative means satisfied:

    * a: ``f(N(t)) - (L B / 2) (-f / f')^gamma``
    * b: ``f(t) > 0`` inside, ``f(0) = eta``, ``f(t_bar) = 0``
    * c: ``-f'(t)`` and ``f'(t) + 1 / (1 + L t^(gamma - 1))``
    * d: ``f''(t)``
    """
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    if f.degenerate:
        ok = ConditionCheck(True, 0.0, 0)
        return {k: ok for k in "abcd"}
    ts = np.linspace(0.0, f.t_bar, grid_size, endpoint=False)
    fv = np.array([f.f(t) for t in ts])
    dv = np.array([f.f_prime(t) for t in ts])
    ddv = np.array([f.f_double_prime(t) for t in ts])

    with np.errstate(divide="ignore", invalid="ignore"):
        step = -fv / dv
        lhs = 0.5 * f.L * f.B * np.abs(step) ** f.gamma
        rhs = np.array([f.f(t + s) if np.isfinite(s) else -np.inf for t, s in zip(ts, step)])
    margin_a = float(np.min(rhs - lhs))

    margin_b = min(float(fv[1:].min()), tol - abs(f.f(0.0) - f.eta), tol - abs(f.f(f.t_bar)))
    holds_b = bool(fv[1:].min() > 0 and abs(f.f(0.0) - f.eta) <= tol and abs(f.f(f.t_bar)) <= tol)

    bound = -1.0 / (1.0 + f.L * ts ** (f.gamma - 1.0))
    margin_c = float(min((-dv).min(), (dv - bound).min()))
    holds_c = bool((dv < 0).all() and (dv - bound >= -tol).all())

    return {
        "a": ConditionCheck(margin_a >= -tol, margin_a, grid_size),
        "b": ConditionCheck(holds_b, margin_b, grid_size),
        "c": ConditionCheck(holds_c, margin_c, grid_size),
        "d": ConditionCheck(bool((ddv > 0).all()), float(ddv.min()), grid_size),
    }


# ----------------------------------------------------------------------------
# constants
# ----------------------------------------------------------------------------

def estimate_B(H0: PseudoLinearMap, samples: Sequence[tuple]) -> float:
    """Empirical ``sup dist(x, y) / ||H(x0)(x, y)||`` over distinct pairs."""
    space = H0.space
    best = 0.0
    for x, y in samples:
        d = space.distance(x, y)
        if d <= ZERO_FLOOR:
            continue
        h = float(np.linalg.norm(H0(x, y)))
        if h <= ZERO_FLOOR:
            raise BUnbounded(f"H(x0) vanishes on a pair at distance {d:g}")
        best = max(best, d / h)
    return best


def estimate_eta(F: Callable, selection: Callable[[Any], Selection], x0) -> float:
    """``dist(x0, Hinv_{x0}(x0, F(x0)))``."""
    s = selection(x0)
    return s.H.space.distance(x0, s.Hinv(x0, _vec(F(x0))))


def estimate_L(F: Callable, selection: Callable[[Any], Selection], x0, pairs: Sequence[tuple],
               triples: Sequence[tuple], gamma: float = 2.0) -> float:
    """Smallest ``L`` consistent with both Lipschitz-type hypotheses on samples.

    From ``pairs`` ``(x, y)``: ``||F(y) - F(x) - H(x)(x, y)|| <= L/2 dist(x, y)^gamma``.
    From ``triples`` ``(x, y, z)``: the h-smoothness bound
    ``dist(H(x)^-(x, H(x0)(z, y)), x) <= (1 + L dist(x, x0)^(gamma-1)) dist(y, z)``.
    """
    sel0 = selection(x0)
    space = sel0.H.space
    L = 0.0
    for x, y in pairs:
        d = space.distance(x, y)
        if d > ZERO_FLOOR:
            rem = float(np.linalg.norm(_vec(F(y)) - _vec(F(x)) - selection(x).H(x, y)))
            L = max(L, 2.0 * rem / d ** gamma)
    for x, y, z in triples:
        dyz, dx0 = space.distance(y, z), space.distance(x, x0)
        if dyz <= ZERO_FLOOR:
            continue
        lhs = space.distance(selection(x).Hinv(x, sel0.H(z, y)), x)
        excess = lhs / dyz - 1.0
        if excess > 1e-12:
            scale = dx0 ** (gamma - 1.0)
            L = max(L, excess / scale if scale > ZERO_FLOOR else math.inf)
    return L


def admissible_B(B: float) -> float:
    """Raise a measured ``B`` to at least 1.

    ``B`` only enters the certificate as an upper bound on
    ``dist(x, y) / ||H(x0)(x, y)||``, so any larger value is still valid, and
    the quadratic majorant satisfies condition (c) exactly when ``B >= 1``.
    """
    return max(float(B), 1.0)


# ----------------------------------------------------------------------------
# certificate
# ----------------------------------------------------------------------------

@dataclass
class MajorantCertificate:
    t_sequence: list[float]
    condition_checks: dict[str, ConditionCheck]
    sigma_membership: list[bool]
    step_checks: list[bool]
    residual_bounds: list[tuple[float, float, bool]]
    cauchy_ok: bool
    domain_ok: list[bool] = field(default_factory=list)
    failing_index: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return (all(c.holds for c in self.condition_checks.values()) and all(self.sigma_membership)
                and all(self.step_checks) and all(ok for _, _, ok in self.residual_bounds)
                and self.cauchy_ok and all(self.domain_ok))

    def cauchy_bound(self, m: int, n: int) -> float:
        """``t_m - t_n``, the certified bound on ``dist(x^m, x^n)``."""
        return self.t_sequence[m] - self.t_sequence[n]

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "t_sequence": self.t_sequence,
            "condition_checks": {k: v.to_dict() for k, v in self.condition_checks.items()},
            "sigma_membership": self.sigma_membership,
            "step_checks": self.step_checks,
            "residual_bounds": [{"residual": r, "f_t_over_B": b, "ok": ok} for r, b, ok in self.residual_bounds],
            "cauchy_ok": self.cauchy_ok,
            "domain_ok": self.domain_ok,
            "failing_index": self.failing_index,
            "notes": self.notes,
        }


def run_certified_newton(F: Callable, selection: Callable[[Any], Selection], x0, f: Majorant,
                         cfg: SolveConfig | None = None, space: QuasiMetricSpace | None = None,
                         in_domain: Callable[[Any], bool] | None = None,
                         tol: float = 1e-9, grid_size: int = 1024) -> tuple[IterationTrace, MajorantCertificate]:
    """Run the Newton-type method with the h-smooth ``selection`` next to the
    majorant iteration and check every inequality of the certificate.

    Per recorded index ``k`` the certificate checks
    ``dist(x^{k+1}, x^k) <= t_{k+1} - t_k``, membership of ``x^k`` in
    ``Sigma(t_k)`` (``dist(x^k, x^0) <= t_k`` and
    ``dist(x^k, Hinv_{x0}(x^k, F(x^k))) <= f(t_k)``), the residual bound
    ``||F(x^k)|| <= f(t_k) / B`` for ``k >= 1`` and the telescoped Cauchy
    bounds ``dist(x^m, x^n) <= t_m - t_n``. All comparisons allow ``tol``.
    """
    cfg = cfg or SolveConfig()
    sel0 = selection(x0)
    space = space or sel0.H.space
    checks = verify_majorant(f, grid_size)
    notes = []
    if in_domain is None:
        warnings.warn("no domain predicate given; every iterate is accepted", RuntimeWarning, stacklevel=2)
        in_domain = lambda x: True  # noqa: E731

    HF = NewtonDifferential(space, sel0.H.n, lambda x: [selection(x)])
    if f.degenerate:
        cfg = SolveConfig(**{**cfg.__dict__, "max_iters": 1})
        notes.append("eta = 0: x0 is a root")
    trace = newton_solve(F, HF, x0, cfg)
    if f.degenerate:
        trace.points, trace.residual_norms = trace.points[:1], trace.residual_norms[:1]
        trace.step_dists, trace.selection_index = [], []
        if trace.dists_to_ref:
            trace.dists_to_ref = trace.dists_to_ref[:1]
        trace.stop_reason = "residual_tol"

    K = len(trace.points) - 1
    t = majorant_sequence(f, K)
    pts = trace.points
    H0inv = sel0.Hinv

    sigma, steps, res, dom = [], [], [], []
    for k, x in enumerate(pts):
        fx = _vec(F(x))
        in_sigma = (space.distance(x, x0) <= t[k] + tol
                    and space.distance(x, H0inv(x, fx)) <= f.f(t[k]) + tol)
        sigma.append(bool(in_sigma))
        dom.append(bool(in_domain(x)))
        if k >= 1:
            steps.append(bool(space.distance(x, pts[k - 1]) <= t[k] - t[k - 1] + tol))
            bound = f.f(t[k]) / f.B
            r = float(np.linalg.norm(fx))
            res.append((r, bound, bool(r <= bound + tol)))
    cauchy = all(space.distance(pts[m], pts[n]) <= t[m] - t[n] + tol
                 for m in range(len(pts)) for n in range(m))

    cert = MajorantCertificate(t, checks, sigma, steps, res, cauchy, dom, notes=notes)
    bad = [k for k, ok in enumerate(sigma) if not ok]
    bad += [k + 1 for k, ok in enumerate(steps) if not ok]
    bad += [k + 1 for k, (_, _, ok) in enumerate(res) if not ok]
    bad += [k for k, ok in enumerate(dom) if not ok]
    cert.failing_index = min(bad) if bad else None
    return trace, cert
