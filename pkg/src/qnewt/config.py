"""Experiment configuration: JSON files describing a space, a problem and a run.

Example::

    {
      "run": "solve",
      "space": {"type": "euclidean",
                "problem": {"kind": "polynomial", "coefficients": [1, 0, 0, -2]}},
      "x0": [1.0],
      "solver": {"max_iters": 50, "residual_tol": 1e-10},
      "reference_root": [1.2599210498948732],
      "output": {"path": "trace.csv", "format": "csv"},
      "seed": 42
    }

Tree spaces use ``{"type": "tree", "tree": {...}, "objective": {...}}`` where
the tree is ``{"example": true}``, ``{"generate": {"seed": s, "depth": d}}`` or
``{"file": path}`` and the objective is ``{"name": "exp", "a": 2}`` or
``{"name": "quadratic", "center": c, "k": k}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .differential import NewtonDifferential, Selection
from .exceptions import ConfigError, QNewtError
from .qspace import QuasiMetricSpace
from .solver import SolveConfig
from .spaces import BinaryTree, EuclideanSpace, TreeComplex, TreeObjective, euclidean_bundle
from .spaces.tree import exp_objective, quadratic_objective

RUNS = ("solve", "banach", "check_space", "check_differential", "kantorovich", "rates")
FORMATS = ("csv", "json")
EUCLIDEAN_KINDS = ("polynomial", "quadratic_system", "linear", "banach")
OBJECTIVES = {"exp": exp_objective, "quadratic": quadratic_objective}


@dataclass
class ExperimentConfig:
    run: str
    space: dict
    x0: Any = None
    solver: dict = field(default_factory=dict)
    reference_root: Any = None
    output: dict = field(default_factory=dict)
    seed: int = 42
    checks: dict = field(default_factory=dict)
    kantorovich: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.run not in RUNS:
            raise ConfigError(f"unknown run {self.run!r}; expected one of {RUNS}")
        fmt = self.output.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError(f"unknown output format {fmt!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.space.get("type") not in ("euclidean", "tree"):
            raise ConfigError("space.type must be 'euclidean' or 'tree'")
        try:
            self.solve_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad solver parameters: {exc}") from exc

    def solve_config(self, reference=None) -> SolveConfig:
        # "selection" only applies to banach runs
        params = {k: v for k, v in self.solver.items() if k != "selection"}
        return SolveConfig(**{**params, "reference_root": reference})


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = set(ExperimentConfig.__dataclass_fields__) - {"base_dir"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    if "run" not in data or "space" not in data:
        raise ConfigError("config needs 'run' and 'space'")
    return ExperimentConfig(**data, base_dir=path.parent)


@dataclass
class Problem:
    """A space with a residual map, its Newton differential and optional extras."""

    space: QuasiMetricSpace
    F: Callable | None = None
    HF: NewtonDifferential | None = None
    reference_root: Any = None
    T: Callable | None = None
    default_x0: Any = None
    objective: TreeObjective | None = None

    def selection(self, x) -> Selection:
        return self.HF(x)[0]

    def point(self, spec):
        return self.space.from_spec(spec)


def _euclidean(spec: dict) -> Problem:
    prob = spec.get("problem", {})
    kind = prob.get("kind")
    if kind not in EUCLIDEAN_KINDS:
        raise ConfigError(f"unknown euclidean problem kind {kind!r}; expected one of {EUCLIDEAN_KINDS}")
    if kind == "polynomial":
        c = np.asarray(prob.get("coefficients", []), dtype=float)
        if c.ndim != 1 or len(c) < 2:
            raise ConfigError("polynomial needs at least two coefficients (highest degree first)")
        dc = np.polyder(c)
        F = lambda x: np.polyval(c, x)  # noqa: E731
        space, HF = euclidean_bundle(F=F, jacobian=lambda x: [[np.polyval(dc, x[0])]], n=1)
        return Problem(space, F, HF)
    if kind == "quadratic_system":
        # x^2 + y^2 = r^2, x = y
        r2 = float(prob.get("radius", 2.0)) ** 2

        def F(x):
            return np.array([x[0] ** 2 + x[1] ** 2 - r2, x[0] - x[1]])

        space, HF = euclidean_bundle(F=F, jacobian=lambda x: [[2 * x[0], 2 * x[1]], [1.0, -1.0]], n=2)
        root = np.full(2, np.sqrt(r2 / 2))
        return Problem(space, F, HF, reference_root=root)
    if kind == "linear":
        try:
            T = np.atleast_2d(np.asarray(prob["T"], dtype=float))
            xbar = np.asarray(prob["xbar"], dtype=float)
        except KeyError as exc:
            raise ConfigError(f"linear problem needs {exc}") from exc
        if T.shape != (len(xbar), len(xbar)):
            raise ConfigError("T must be square and match xbar")
        space, HF = euclidean_bundle(T=T)
        return Problem(space, lambda x: T @ (x - xbar), HF, reference_root=xbar)
    factors = [float(a) for a in prob.get("factors", [0.5])]
    n = int(prob.get("n", 1))
    if not factors or n < 1:
        raise ConfigError("banach problem needs factors and a positive n")
    return Problem(EuclideanSpace(n), T=lambda x: [a * x for a in factors], reference_root=np.zeros(n))


def _tree(spec: dict, base_dir: Path) -> Problem:
    tspec = spec.get("tree", {"example": True})
    if tspec.get("example"):
        tree = BinaryTree.example()
    elif "generate" in tspec:
        g = tspec["generate"]
        depth = int(g.get("depth", 4))
        if not 1 <= depth <= 12:
            raise ConfigError("tree depth must lie in [1, 12]")
        tree = BinaryTree.random(int(g.get("seed", 0)), depth)
    elif "file" in tspec:
        p = base_dir / tspec["file"]
        if not p.exists():
            raise ConfigError(f"tree file {p} does not exist")
        tree = BinaryTree.load(p)
    else:
        raise ConfigError("tree needs 'example', 'generate' or 'file'")
    ospec = dict(spec.get("objective", {"name": "exp"}))
    name = ospec.pop("name", "exp")
    if name not in OBJECTIVES:
        raise ConfigError(f"unknown objective {name!r}; expected one of {sorted(OBJECTIVES)}")
    try:
        fn = OBJECTIVES[name](**ospec)
    except TypeError as exc:
        raise ConfigError(f"bad objective parameters: {exc}") from exc
    space = TreeComplex(tree)
    obj = TreeObjective(space, fn)
    root = obj.path_root() if fn.minimizer is not None and 0 < fn.minimizer < obj.d_max else None
    return Problem(space, obj.F, obj.differential(), reference_root=root, objective=obj,
                   default_x0=obj.path_pi(0.0))


def build_problem(cfg: ExperimentConfig) -> Problem:
    try:
        if cfg.space["type"] == "euclidean":
            prob = _euclidean(cfg.space)
        else:
            prob = _tree(cfg.space, cfg.base_dir)
        if cfg.reference_root is not None:
            prob.reference_root = prob.point(cfg.reference_root)
    except QNewtError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot build problem: {exc}") from exc
    return prob
