"""Command-line front end.

Exit codes: 0 success, 2 a check failed or a certificate is invalid, 1 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io as qio
from .config import ExperimentConfig, Problem, build_problem, load_config
from .differential import check_pointwise_diffability
from .exceptions import ConfigError, InvalidMajorant, QNewtError, SamplingError
from .kantorovich import (
    Majorant,
    admissible_B,
    estimate_B,
    estimate_eta,
    estimate_L,
    run_certified_newton,
)
from .pseudolinear import check_pseudo_linear
from .qspace import check_axioms, random_triples
from .solver import analyze_trace, banach_iterate, newton_solve, rate_report_from_sequence

log = logging.getLogger("qnewt")

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2


def parse_point_spec(text: str):
    """``1.2``, ``[1, 2]`` or ``{"node": "b_x", "x": 0.6}``."""
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"point spec {text!r} is not valid JSON") from exc
    return [spec] if isinstance(spec, (int, float)) else spec


def _x0(args, cfg: ExperimentConfig, prob: Problem):
    spec = parse_point_spec(args.x0) if getattr(args, "x0", None) else cfg.x0
    if spec is None:
        if prob.default_x0 is None:
            raise ConfigError("no starting point: give x0 in the config or --x0")
        return prob.default_x0
    return prob.point(spec)


def _out(args, cfg: ExperimentConfig):
    return args.out if getattr(args, "out", None) else cfg.output.get("path")


def _format(path, cfg: ExperimentConfig) -> str:
    if path and Path(path).suffix in (".csv", ".json"):
        return Path(path).suffix[1:]
    return cfg.output.get("format", "csv")


def _emit_trace(trace, args, cfg, extra: dict, t_seq=None, f_over_B=None):
    path = _out(args, cfg)
    if _format(path, cfg) == "csv":
        qio.write_text(qio.trace_to_csv(trace, t_seq, f_over_B), path)
    else:
        payload = {**extra, "rows": qio.trace_rows(trace, t_seq, f_over_B)}
        qio.write_text(qio.report_json("trace", payload), path)


def cmd_solve(args, cfg: ExperimentConfig, prob: Problem) -> int:
    if prob.F is None:
        raise ConfigError("this problem has no residual map; use the banach run")
    x0 = _x0(args, cfg, prob)
    trace = newton_solve(prob.F, prob.HF, x0, cfg.solve_config(prob.reference_root))
    rates = analyze_trace(trace)
    log.info("solve stopped after %d steps: %s (%s)", trace.iterations, trace.stop_reason, rates.classification)
    _emit_trace(trace, args, cfg, {"stop_reason": trace.stop_reason, "final": prob.space.to_spec(trace.final),
                                   "rates": rates.to_dict()})
    return EXIT_OK


def cmd_banach(args, cfg: ExperimentConfig, prob: Problem) -> int:
    if prob.T is None:
        raise ConfigError("this problem has no fixed-point map; use a banach problem")
    x0 = _x0(args, cfg, prob)
    s = cfg.solver
    trace = banach_iterate(prob.T, x0, prob.space, max_iters=s.get("max_iters", 1000),
                           tol=s.get("step_tol", 1e-12), selection=s.get("selection", "first"),
                           reference=prob.reference_root)
    rates = analyze_trace(trace)
    _emit_trace(trace, args, cfg, {"stop_reason": trace.stop_reason, "rates": rates.to_dict()})
    return EXIT_OK


def cmd_check_space(args, cfg: ExperimentConfig, prob: Problem) -> int:
    rng = np.random.default_rng(args.seed)
    count = int(cfg.checks.get("triples", 10_000))
    rep = check_axioms(prob.space, random_triples(prob.space, count, rng), tol=cfg.checks.get("tol", 1e-12))
    qio.write_text(qio.report_json("check_space", {"space": repr(prob.space), **rep.to_dict()}), _out(args, cfg))
    return EXIT_OK if rep.ok else EXIT_CHECK_FAILED


def cmd_check_differential(args, cfg: ExperimentConfig, prob: Problem) -> int:
    if prob.F is None:
        raise ConfigError("this problem has no residual map")
    at = prob.point(parse_point_spec(args.at)) if args.at else prob.reference_root
    if at is None:
        raise ConfigError("give the point to check with --at")
    rep = check_pointwise_diffability(prob.F, prob.HF, at, gamma=args.gamma, seed=args.seed,
                                      samples_per_radius=int(cfg.checks.get("samples_per_radius", 32)))
    rng = np.random.default_rng(args.seed)
    pts = [prob.space.sample_at_distance(at, r, rng) for r in rng.uniform(0.0, 0.1, 16)]
    pl_ok = all(check_pseudo_linear(s.H, pts) for p in pts for s in prob.HF(p))
    ok = rep.mode != "inconclusive" and pl_ok
    payload = {"at": prob.space.to_spec(at), "pseudo_linear": pl_ok, **rep.to_dict(), "ok": ok}
    qio.write_text(qio.report_json("check_differential", payload), _out(args, cfg))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _ball_samples(space, x0, radius: float, count: int, rng) -> list:
    pts = [x0]
    while len(pts) < count:
        try:
            pts.append(space.sample_at_distance(x0, radius * rng.random(), rng))
        except SamplingError:
            continue
    return pts


def cmd_kantorovich(args, cfg: ExperimentConfig, prob: Problem) -> int:
    if prob.F is None:
        raise ConfigError("this problem has no residual map")
    kc = cfg.kantorovich
    family = kc.get("family", "quadratic")
    if family != "quadratic":
        raise ConfigError(f"unknown majorant family {family!r}")
    radius, count = float(kc.get("radius", 0.5)), int(kc.get("samples", 256))
    x0 = _x0(args, cfg, prob)
    space = prob.space
    rng = np.random.default_rng(args.seed)
    pts = _ball_samples(space, x0, radius, count, rng)
    pairs = [(pts[i], pts[j]) for i, j in rng.integers(len(pts), size=(4 * count, 2))]
    triples = [tuple(pts[i] for i in ijk) for ijk in rng.integers(len(pts), size=(4 * count, 3))]
    eta = estimate_eta(prob.F, prob.selection, x0)
    B_meas = estimate_B(prob.selection(x0).H, pairs)
    L = max(estimate_L(prob.F, prob.selection, x0, pairs, triples), 1e-12)
    B = admissible_B(B_meas)
    consts = {"x0": space.to_spec(x0), "eta": eta, "L": L, "B_measured": B_meas, "B": B,
              "h": 2 * L * B * eta, "radius": radius}
    path = _out(args, cfg)
    try:
        f = Majorant.quadratic(L, B, eta)
    except InvalidMajorant as exc:
        payload = {**consts, "valid": False, "reason": str(exc)}
        qio.write_text(qio.report_json("kantorovich", payload), path)
        return EXIT_CHECK_FAILED
    trace, cert = run_certified_newton(prob.F, prob.selection, x0, f, cfg.solve_config(prob.reference_root),
                                       space=space, in_domain=lambda x: space.distance(x0, x) <= radius)
    payload = {**consts, "t_bar": f.t_bar, "final": space.to_spec(trace.final), **cert.to_dict()}
    if _format(path, cfg) == "csv" and path:
        fb = [f.f(t) / f.B for t in cert.t_sequence]
        qio.write_text(qio.trace_to_csv(trace, cert.t_sequence, fb), path)
        qio.write_text(qio.report_json("kantorovich", payload), None)
    else:
        qio.write_text(qio.report_json("kantorovich", payload), path)
    return EXIT_OK if cert.valid else EXIT_CHECK_FAILED


def cmd_rates(args) -> int:
    cols = qio.read_trace_csv(args.trace)
    ref = cols["dist_to_ref"]
    if ref and all(v is not None for v in ref):
        rep = rate_report_from_sequence(ref, args.tol)
    else:
        rep = rate_report_from_sequence([v for v in cols["step_dist"] if v is not None], args.tol, proxy=True)
    qio.write_text(qio.report_json("rates", rep.to_dict()), args.out)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "banach": cmd_banach,
    "check_space": cmd_check_space,
    "check_differential": cmd_check_differential,
    "kantorovich": cmd_kantorovich,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnewt", description="Newton-type methods on quasi-metric spaces.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="upper bound on worker threads (default: available CPUs)")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True)
        sp.add_argument("--seed", type=int, default=None, help="random seed (default: config seed, else 42)")
        sp.add_argument("--out", default=None)
        return sp

    with_config("run", "execute the run named in the config")
    sp = with_config("solve", "Newton-type iteration")
    sp.add_argument("--x0", default=None)
    sp = with_config("banach", "set-valued fixed-point iteration")
    sp.add_argument("--x0", default=None)
    with_config("check-space", "quasi-metric axiom suite")
    sp = with_config("check-differential", "sampled pointwise Newton differentiability")
    sp.add_argument("--at", default=None, help="point spec, e.g. '[0.3]' or '{\"node\": 0, \"x\": 0.5}'")
    sp.add_argument("--gamma", type=float, default=1.0)
    sp = with_config("kantorovich", "majorant certificate")
    sp.add_argument("--x0", default=None)
    sp = sub.add_parser("rates", help="rate diagnostics of a trace CSV")
    sp.add_argument("--trace", required=True)
    sp.add_argument("--tol", type=float, default=0.15)
    sp.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        if args.command == "rates":
            return cmd_rates(args)
        cfg = load_config(args.config)
        if args.seed is None:
            args.seed = cfg.seed
        name = cfg.run if args.command == "run" else args.command.replace("-", "_")
        for attr in ("x0", "at"):
            if not hasattr(args, attr):
                setattr(args, attr, None)
        if not hasattr(args, "gamma"):
            args.gamma = float(cfg.checks.get("gamma", 1.0))
        if name == "rates":
            raise ConfigError("use 'qnewt rates --trace <csv>' for rate runs")
        return COMMANDS[name](args, cfg, build_problem(cfg))
    except (QNewtError, ValueError, OSError) as exc:
        print(f"qnewt: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
