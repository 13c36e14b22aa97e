"""Newton-type iteration ``x^{k+1} = Hinv(x^k, -F(x^k))`` and the set-valued
Banach iteration, both recording an :class:`IterationTrace`."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .differential import NewtonDifferential
from .exceptions import EmptySelection, InsufficientData, InverseMissing
from .pseudolinear import _vec
from .qspace import QuasiMetricSpace, RateReport, classify_rate

log = logging.getLogger(__name__)

STOP_REASONS = ("residual_tol", "step_tol", "max_iters", "empty_selection", "inverse_missing", "diverged")


@dataclass
class SolveConfig:
    max_iters: int = 100
    residual_tol: float = 1e-10
    step_tol: float = 1e-12
    selection_policy: Any = "first"
    reference_root: Any = None
    divergence_factor: float = 1e6
    divergence_window: int = 5

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.residual_tol <= 0 or self.step_tol <= 0:
            raise ValueError("tolerances must be positive")
        p = self.selection_policy
        if not (p in ("first", "min_residual_lookahead") or (isinstance(p, int) and p >= 0)):
            raise ValueError(f"unknown selection policy {p!r}")


@dataclass
class IterationTrace:
    space: QuasiMetricSpace
    points: list = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    step_dists: list[float] = field(default_factory=list)
    dists_to_ref: list[float] | None = None
    selection_index: list[int] = field(default_factory=list)
    stop_reason: str | None = None

    @property
    def iterations(self) -> int:
        return len(self.step_dists)

    @property
    def final(self):
        return self.points[-1]


def newton_step(F: Callable, HF: NewtonDifferential, x, policy="first") -> tuple[Any, int]:
    """One step ``Hinv(x, -F(x))`` using the selection chosen by ``policy``.

    ``"first"`` takes the first selection carrying a quasi-inverse,
    ``"min_residual_lookahead"`` tries them all and keeps the candidate with
    the smallest ``||F||`` (lowest index on ties), an integer picks that
    selection.
    """
    sels = HF(x)
    if not sels:
        raise EmptySelection("Newton differential is empty at the current point")
    usable = [(i, s) for i, s in enumerate(sels) if s.Hinv is not None]
    if not usable:
        raise InverseMissing("no selection at the current point has a quasi-inverse")
    v = -_vec(F(x))
    if policy == "first":
        i, s = usable[0]
        return s.Hinv(x, v), i
    if policy == "min_residual_lookahead":
        best = None
        for i, s in usable:
            y = s.Hinv(x, v)
            r = float(np.linalg.norm(_vec(F(y))))
            if best is None or r < best[0]:
                best = (r, y, i)
        return best[1], best[2]
    if sels[policy].Hinv is None:
        raise InverseMissing(f"selection {policy} has no quasi-inverse")
    return sels[policy].Hinv(x, v), policy


def newton_solve(F: Callable, HF: NewtonDifferential, x0, cfg: SolveConfig | None = None) -> IterationTrace:
    """Run the Newton-type method from ``x0`` until a stop condition fires.

    Conditions are tested in the order residual, step, iteration budget,
    divergence. Failures of a step (empty differential, missing quasi-inverse)
    end the run and are recorded as the stop reason.
    """
    cfg = cfg or SolveConfig()
    space = HF.space
    ref = cfg.reference_root
    tr = IterationTrace(space, [x0], [float(np.linalg.norm(_vec(F(x0))))])
    if ref is not None:
        tr.dists_to_ref = [space.distance(x0, ref)]
    while True:
        r = tr.residual_norms
        if r[-1] <= cfg.residual_tol:
            tr.stop_reason = "residual_tol"
        elif tr.step_dists and tr.step_dists[-1] <= cfg.step_tol:
            tr.stop_reason = "step_tol"
        elif tr.iterations >= cfg.max_iters:
            tr.stop_reason = "max_iters"
        elif not math.isfinite(r[-1]) or (
                len(r) > cfg.divergence_window
                and r[-1] > cfg.divergence_factor * r[-1 - cfg.divergence_window]):
            tr.stop_reason = "diverged"
        if tr.stop_reason:
            break
        x = tr.points[-1]
        try:
            y, idx = newton_step(F, HF, x, cfg.selection_policy)
        except EmptySelection:
            tr.stop_reason = "empty_selection"
            break
        except InverseMissing:
            tr.stop_reason = "inverse_missing"
            break
        tr.points.append(y)
        tr.selection_index.append(idx)
        tr.step_dists.append(space.distance(y, x))
        tr.residual_norms.append(float(np.linalg.norm(_vec(F(y)))))
        if ref is not None:
            tr.dists_to_ref.append(space.distance(y, ref))
    log.debug("newton_solve stopped after %d steps: %s", tr.iterations, tr.stop_reason)
    return tr


def banach_iterate(T: Callable, x0, space: QuasiMetricSpace, max_iters: int = 1000, tol: float = 1e-12,
                   selection: str = "first", reference=None) -> IterationTrace:
    """Fixed-point iteration ``x^{k+1} in T(x^k)`` for a finite set-valued ``T``.

    ``T`` returns a point or a list of points. ``residual_norms`` holds the
    fixed-point residual ``dist(x^{k+1}, x^k)`` of each iterate (the last one
    is evaluated once more so every point has a residual).
    """
    if selection not in ("first", "nearest_to_previous"):
        raise ValueError(f"unknown selection {selection!r}")

    def pick(x):
        imgs = T(x)
        imgs = list(imgs) if isinstance(imgs, (list, tuple)) else [imgs]
        if not imgs:
            raise EmptySelection("T has an empty image")
        if selection == "first":
            return imgs[0], 0
        d = [space.distance(y, x) for y in imgs]
        i = int(np.argmin(d))
        return imgs[i], i

    tr = IterationTrace(space, [x0])
    if reference is not None:
        tr.dists_to_ref = [space.distance(x0, reference)]
    x = x0
    while True:
        y, i = pick(x)
        step = space.distance(y, x)
        tr.residual_norms.append(step)
        if tr.iterations >= max_iters:
            tr.stop_reason = "max_iters"
            break
        tr.points.append(y)
        tr.selection_index.append(i)
        tr.step_dists.append(step)
        if reference is not None:
            tr.dists_to_ref.append(space.distance(y, reference))
        x = y
        if step <= tol:
            tr.residual_norms.append(space.distance(pick(x)[0], x))
            tr.stop_reason = "step_tol"
            break
    return tr


def analyze_trace(trace: IterationTrace, tol: float = 0.15, strict: bool = False) -> RateReport:
    """Rate diagnostics for a trace.

    Uses ``dists_to_ref`` when the run had a reference root, otherwise the
    step lengths as a proxy (flagged in the report). Traces too short to
    classify come back ``inconclusive`` unless ``strict`` is set, in which
    case :class:`InsufficientData` propagates.
    """
    proxy = trace.dists_to_ref is None
    seq = trace.step_dists if proxy else trace.dists_to_ref
    return rate_report_from_sequence(seq, tol, proxy, strict)


def rate_report_from_sequence(seq: Sequence[float], tol: float = 0.15, proxy: bool = False,
                              strict: bool = False) -> RateReport:
    try:
        rep = classify_rate(seq, tol)
    except InsufficientData as exc:
        if strict:
            raise
        return RateReport("inconclusive", [], proxy=proxy, note=f"too short: {exc}")
    rep.proxy = proxy
    if rep.classification in ("rate_gamma", "super_rate_gamma"):
        rep.note = f"order {rep.gamma_estimate:.3f} observed"
    elif rep.classification == "superlinear":
        rep.note = "per-step factors decrease to zero"
    return rep
