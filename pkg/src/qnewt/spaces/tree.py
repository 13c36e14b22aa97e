"""The binary-tree cubical complex and the Newton machinery built on it.

Every node ``b`` owns a unit interval: the edge from its parent down to ``b``.
A point ``(b, x)`` sits at offset ``x`` along that edge, ``x = 0`` at the
parent end and ``x = 1`` at ``b`` itself. The root owns the edge hanging from
an implicit anchor, so ``(r, 0)`` is the anchor and ``d_r(b, x) = depth(b) + x``.
The quotient glues ``(b, 1)`` to ``(c, 0)`` for every child ``c`` of ``b``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Hashable, NamedTuple

import numpy as np

from ..differential import NewtonDifferential, Selection
from ..exceptions import InvalidPoint, OutOfRange, SamplingError
from ..pseudolinear import PseudoLinearMap, QuasiInverse
from ..qspace import QuasiMetricSpace


class TreePoint(NamedTuple):
    node: Hashable
    x: float


class BinaryTree:
    """Rooted tree in which every node has at most two children."""

    def __init__(self, parent: dict, root: Hashable | None = None):
        roots = [b for b, p in parent.items() if p is None]
        if root is None:
            if len(roots) != 1:
                raise ValueError(f"expected exactly one root, found {len(roots)}")
            root = roots[0]
        if roots != [root]:
            raise ValueError("the designated root must be the only node without parent")
        self.root = root
        self.parent = dict(parent)
        self.children: dict = {b: [] for b in parent}
        for b, p in parent.items():
            if p is not None:
                if p not in self.children:
                    raise ValueError(f"parent {p!r} of {b!r} is not a node")
                self.children[p].append(b)
        for b, kids in self.children.items():
            if len(kids) > 2:
                raise ValueError(f"node {b!r} has {len(kids)} children")
        self.depth = {root: 0}
        stack = [root]
        while stack:
            b = stack.pop()
            for c in self.children[b]:
                self.depth[c] = self.depth[b] + 1
                stack.append(c)
        if len(self.depth) != len(parent):
            raise ValueError("tree is not connected to its root (cycle or orphan)")

    def __contains__(self, b) -> bool:
        return b in self.parent

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def nodes(self) -> list:
        return list(self.parent)

    def ancestors(self, b) -> list:
        """``[b, parent(b), ..., root]``."""
        out = [b]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    def is_ancestor(self, a, b) -> bool:
        """True when ``a`` lies on the root path of ``b`` (``a == b`` included)."""
        d = self.depth[b] - self.depth[a]
        if d < 0:
            return False
        for _ in range(d):
            b = self.parent[b]
        return a == b

    def lca(self, a, b):
        while self.depth[a] > self.depth[b]:
            a = self.parent[a]
        while self.depth[b] > self.depth[a]:
            b = self.parent[b]
        while a != b:
            a, b = self.parent[a], self.parent[b]
        return a

    def dist_B(self, a, b) -> int:
        """Edge count of the path between two nodes."""
        return self.depth[a] + self.depth[b] - 2 * self.depth[self.lca(a, b)]

    def path_to_deepest(self) -> list:
        """Root-to-leaf node path of maximal depth, lexicographically smallest on ties."""
        deepest = max(self.depth.values())
        leaves = [b for b, d in self.depth.items() if d == deepest]
        return min(list(reversed(self.ancestors(b))) for b in leaves)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {"root": self.root, "nodes": [{"id": b, "parent": p} for b, p in self.parent.items()]}

    @classmethod
    def from_json(cls, data: dict) -> "BinaryTree":
        try:
            parent = {n["id"]: n["parent"] for n in data["nodes"]}
            return cls(parent, data.get("root"))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed tree description: {exc}") from exc

    @classmethod
    def load(cls, path) -> "BinaryTree":
        return cls.from_json(json.loads(Path(path).read_text()))

    # -- constructors -------------------------------------------------------

    @classmethod
    def random(cls, seed: int, depth: int, split_prob: float = 0.6) -> "BinaryTree":
        """Seeded random tree of exact depth ``depth``.

        Internal nodes have exactly two children; the first-child chain is
        always grown to full depth, the other subtrees split with
        ``split_prob``. Node ids are integers in creation order.
        """
        rng = np.random.default_rng(seed)
        parent = {0: None}
        frontier = [(0, 0, True)]
        while frontier:
            b, d, spine = frontier.pop(0)
            if d < depth and (spine or rng.random() < split_prob):
                for i in range(2):
                    c = len(parent)
                    parent[c] = b
                    frontier.append((c, d + 1, spine and i == 0))
        return cls(parent, 0)

    @classmethod
    def example(cls) -> "BinaryTree":
        """The small example tree with the marked nodes r, b_x, b_1, b_2, b_y."""
        parent = {
            "r": None,
            "b_x": "r", "c_1": "r",
            "b_1": "b_x", "c_2": "b_x",
            "c_3": "b_1", "b_2": "b_1",
            "b_y": "b_2",
            "c_4": "c_1",
        }
        return cls(parent, "r")


class TreeComplex(QuasiMetricSpace):
    def __init__(self, tree: BinaryTree):
        self.tree = tree
        self.name = f"binary tree complex ({len(tree)} nodes)"

    def point(self, p) -> TreePoint:
        try:
            b, x = p
        except (TypeError, ValueError) as exc:
            raise InvalidPoint(f"not a tree point: {p!r}") from exc
        if b not in self.tree:
            raise InvalidPoint(f"node {b!r} is not in the tree")
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise InvalidPoint(f"coordinate {x} outside [0, 1]")
        return TreePoint(b, x)

    def gamma_aux(self, b0, b1, x: float) -> float:
        """Offset from ``(b0, x)`` to the end of b0's edge facing ``b1``.

        ``1 - x`` when the path to ``b1`` starts downwards (towards a child),
        ``x`` when it starts upwards. This is the convention reproducing the
        worked distances 3.15 and 1.6 on :meth:`BinaryTree.example`.
        """
        descends = b0 != b1 and self.tree.is_ancestor(b0, b1)
        return 1.0 - x if descends else x

    def distance(self, p, q) -> float:
        p, q = self.point(p), self.point(q)
        if p.node == q.node:
            return abs(p.x - q.x)
        t = self.tree
        # a path that climbs to the common ancestor and descends again passes
        # through the junction below it, saving one edge
        turn = 0 if (t.is_ancestor(p.node, q.node) or t.is_ancestor(q.node, p.node)) else 1
        return (self.gamma_aux(p.node, q.node, p.x) + self.gamma_aux(q.node, p.node, q.x)
                + t.dist_B(p.node, q.node) - 1 - turn)

    def d_r(self, p) -> float:
        p = self.point(p)
        return self.tree.depth[p.node] + p.x

    def canonical(self, p) -> tuple:
        """Quotient class key: glued endpoints map to the junction they share."""
        p = self.point(p)
        if p.x == 1.0 and self.tree.children[p.node]:
            return ("junction", p.node)
        if p.x == 0.0 and self.tree.parent[p.node] is not None:
            return ("junction", self.tree.parent[p.node])
        return ("point", p.node, p.x)

    def same_point(self, p, q) -> bool:
        return self.canonical(p) == self.canonical(q)

    def random_point(self, rng):
        nodes = self.tree.nodes
        return TreePoint(nodes[rng.integers(len(nodes))], float(rng.random()))

    def sample_at_distance(self, center, r, rng, attempts: int = 200):
        """Endpoint of a random non-backtracking walk of length ``r``.

        Non-backtracking walks in a tree are geodesics, so the endpoint lies at
        distance exactly ``r``. Walks that run into a leaf or past the anchor
        are retried.
        """
        center = self.point(center)
        if r < 0:
            raise SamplingError("negative radius")
        if r == 0:
            return center
        t = self.tree
        for _ in range(attempts):
            b, x, down = center.node, center.x, bool(rng.random() < 0.5)
            left = float(r)
            while True:
                room = 1.0 - x if down else x
                if left <= room:
                    x = x + left if down else x - left
                    q = TreePoint(b, min(max(x, 0.0), 1.0))
                    if abs(self.distance(q, center) - r) <= 0.1 * r:
                        return q
                    break
                left -= room
                if down:
                    kids = t.children[b]
                    if not kids:
                        break
                    b, x = kids[rng.integers(len(kids))], 0.0
                else:
                    p = t.parent[b]
                    if p is None:
                        break
                    options = [(p, 1.0, False)] + [(s, 0.0, True) for s in t.children[p] if s != b]
                    b, x, down = options[rng.integers(len(options))]
        raise SamplingError(f"no point at distance {r:g} from {center}")

    def to_spec(self, p) -> dict:
        p = self.point(p)
        return {"node": p.node, "x": p.x}

    def from_spec(self, spec) -> TreePoint:
        if isinstance(spec, dict):
            try:
                return self.point((spec["node"], spec["x"]))
            except KeyError as exc:
                raise InvalidPoint(f"tree point spec needs 'node' and 'x': {spec!r}") from exc
        return self.point(spec)


@dataclass
class ScalarFunction:
    """A scalar C^2 function given by its value and first two derivatives."""

    f: Callable[[float], float]
    fp: Callable[[float], float]
    fpp: Callable[[float], float]
    name: str = "f"
    minimizer: float | None = None


def exp_objective(a: float = 2.0) -> ScalarFunction:
    """``f(s) = e^s - a s``; strongly convex on [0, inf), minimizer ``ln a``."""
    return ScalarFunction(lambda s: math.exp(s) - a * s, lambda s: math.exp(s) - a, math.exp,
                          f"exp(s) - {a:g} s", math.log(a))


def quadratic_objective(center: float = 1.5, k: float = 1.0) -> ScalarFunction:
    return ScalarFunction(lambda s: 0.5 * k * (s - center) ** 2, lambda s: k * (s - center),
                          lambda s: k, f"{k:g}/2 (s - {center:g})^2", center)


class TreeObjective:
    """``F(p) = f'(d_r(p))`` with its singleton Newton differential.

    The quasi-inverse moves along the distinguished root-to-``m`` path:
    ``Hinv_p(q, v) = pi(clamp(d_r(q) + v / f''(d_r(p))))``.
    """

    def __init__(self, space: TreeComplex, fn: ScalarFunction):
        self.space = space
        self.fn = fn
        self.path = space.tree.path_to_deepest()
        self.m = self.path[-1]

    @cached_property
    def d_max(self) -> float:
        """``d_r(m, 1)``, the largest value of ``d_r`` on the complex."""
        return float(len(self.path))

    def path_pi(self, t: float) -> TreePoint:
        """Point at arclength ``t`` along the distinguished path."""
        if not -1e-12 <= t <= self.d_max + 1e-12:
            raise OutOfRange(f"t = {t} outside [0, {self.d_max}]")
        t = min(max(t, 0.0), self.d_max)
        k = min(int(math.floor(t)), len(self.path) - 1)
        return TreePoint(self.path[k], t - k)

    def clamp_range(self, t: float) -> float:
        return min(max(t, 0.0), self.d_max)

    def on_path(self, q, tol: float = 1e-12) -> bool:
        q = self.space.point(q)
        return self.space.distance(q, self.path_pi(self.space.d_r(q))) <= tol

    def F(self, p) -> np.ndarray:
        return np.array([self.fn.fp(self.space.d_r(p))])

    def selection(self, p) -> Selection:
        d_r = self.space.d_r
        curv = self.fn.fpp(d_r(p))
        H = PseudoLinearMap(self.space, 1, lambda y, z: curv * (d_r(z) - d_r(y)))
        Hinv = QuasiInverse(H, lambda y, v: self.path_pi(self.clamp_range(d_r(y) + v[0] / curv)),
                            1.0 / abs(curv))
        return Selection(H, Hinv)

    def differential(self) -> NewtonDifferential:
        return NewtonDifferential(self.space, 1, lambda p: [self.selection(p)])

    def roots(self) -> list[TreePoint]:
        """Every point with ``d_r = argmin f``, one per edge reaching that level."""
        s = self.fn.minimizer
        if s is None or not 0 < s < self.d_max:
            return []
        k = int(math.floor(s))
        return [TreePoint(b, s - k) for b, d in self.space.tree.depth.items() if d == k]

    def path_root(self) -> TreePoint:
        return self.path_pi(self.fn.minimizer)
