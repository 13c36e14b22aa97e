import json
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnewt.exceptions import InvalidPoint, OutOfRange
from qnewt.qspace import check_axioms, random_triples
from qnewt.solver import SolveConfig, newton_solve
from qnewt.spaces import (
    BinaryTree,
    TreeComplex,
    TreeObjective,
    TreePoint,
    exp_objective,
    quadratic_objective,
)

ANCHOR = ("anchor",)


def geodesic_oracle(tree: BinaryTree):
    """Shortest paths in the metric graph, points resolved via their edge ends."""
    G = nx.Graph()
    for b, p in tree.parent.items():
        G.add_edge(ANCHOR if p is None else p, b, weight=1.0)
    sp = dict(nx.all_pairs_dijkstra_path_length(G))

    def ends(pt):
        b, x = pt
        p = tree.parent[b]
        return [(ANCHOR if p is None else p, x), (b, 1.0 - x)]

    def dist(p, q):
        if p[0] == q[0]:
            return abs(p[1] - q[1])
        return min(a + sp[u][v] + c for u, a in ends(p) for v, c in ends(q))

    return dist


def test_example_tree_worked_distances(ex_tree):
    assert ex_tree.distance(("b_x", 0.6), ("b_y", 0.75)) == pytest.approx(3.15, abs=1e-12)
    assert ex_tree.distance(("r", 0.0), ("b_x", 0.6)) == pytest.approx(1.6, abs=1e-12)


def test_same_edge_and_single_edge_paths(ex_tree):
    assert ex_tree.distance(("b_1", 0.2), ("b_1", 0.9)) == pytest.approx(0.7)
    # parent / child: up the rest of b_x's edge, then down into b_1
    assert ex_tree.distance(("b_x", 0.3), ("b_1", 0.4)) == pytest.approx(1.1)
    # siblings meet at their parent's end
    assert ex_tree.distance(("b_1", 0.3), ("c_2", 0.5)) == pytest.approx(0.8)


@pytest.mark.parametrize("seed", range(6))
def test_distance_matches_networkx_oracle(seed):
    rng = np.random.default_rng(seed)
    tree = BinaryTree.random(seed, int(rng.integers(1, 7)))
    space, oracle = TreeComplex(tree), geodesic_oracle(tree)
    for _ in range(400):
        p, q = space.random_point(rng), space.random_point(rng)
        assert space.distance(p, q) == pytest.approx(oracle(p, q), abs=1e-12)


def test_distance_matches_oracle_on_example_tree(ex_tree, rng):
    oracle = geodesic_oracle(ex_tree.tree)
    nodes = ex_tree.tree.nodes
    for b in nodes:
        for c in nodes:
            for x, y in rng.random((5, 2)):
                assert ex_tree.distance((b, x), (c, y)) == pytest.approx(oracle((b, x), (c, y)), abs=1e-12)


def test_glued_points_are_identified(ex_tree):
    assert ex_tree.distance(("b_x", 1.0), ("b_1", 0.0)) == 0.0
    assert ex_tree.distance(("b_1", 0.0), ("c_2", 0.0)) == 0.0
    assert ex_tree.same_point(("b_1", 0.0), ("c_2", 0.0))
    assert not ex_tree.same_point(("b_y", 1.0), ("b_y", 0.999))
    # a leaf end is glued to nothing
    assert ex_tree.canonical(("b_y", 1.0)) == ("point", "b_y", 1.0)


def test_axioms_on_random_trees(rng):
    for seed in range(5):
        space = TreeComplex(BinaryTree.random(seed, 5))
        rep = check_axioms(space, random_triples(space, 400, rng))
        assert rep.ok, rep.to_dict()
        assert rep.symmetry_defect <= 1e-12


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 50), st.integers(1, 6), st.lists(st.floats(0, 1), min_size=3, max_size=3),
       st.lists(st.integers(0, 10 ** 6), min_size=3, max_size=3))
def test_triangle_inequality_property(seed, depth, xs, picks):
    tree = BinaryTree.random(seed, depth)
    nodes = tree.nodes
    space = TreeComplex(tree)
    p, q, r = (TreePoint(nodes[k % len(nodes)], x) for k, x in zip(picks, xs))
    assert space.distance(p, r) <= space.distance(p, q) + space.distance(q, r) + 1e-12


def test_invalid_points(ex_tree):
    with pytest.raises(InvalidPoint):
        ex_tree.distance(("zz", 0.5), ("r", 0.0))
    with pytest.raises(InvalidPoint):
        ex_tree.point(("r", 1.5))
    with pytest.raises(InvalidPoint):
        ex_tree.from_spec({"node": "r"})


def test_sample_at_distance_is_exact(rng):
    space = TreeComplex(BinaryTree.random(3, 5))
    for _ in range(100):
        c = space.random_point(rng)
        r = float(rng.uniform(0, 0.8))
        q = space.sample_at_distance(c, r, rng)
        assert space.distance(q, c) == pytest.approx(r, abs=1e-12)


def test_random_tree_shape():
    for seed in range(10):
        t = BinaryTree.random(seed, 4)
        assert max(t.depth.values()) == 4
        assert all(len(k) in (0, 2) for k in t.children.values())
    assert BinaryTree.random(5, 4).parent == BinaryTree.random(5, 4).parent


def test_tree_json_round_trip(tmp_path):
    t = BinaryTree.random(9, 4)
    path = tmp_path / "tree.json"
    path.write_text(json.dumps(t.to_json()))
    assert BinaryTree.load(path).parent == t.parent
    with pytest.raises(ValueError):
        BinaryTree.from_json({"nodes": [{"id": 1}]})


def test_tree_rejects_bad_structure():
    with pytest.raises(ValueError):
        BinaryTree({0: None, 1: 0, 2: 0, 3: 0})
    with pytest.raises(ValueError):
        BinaryTree({0: None, 1: None})
    with pytest.raises(ValueError):
        BinaryTree({0: None, 1: 2, 2: 1})


def test_distinguished_path_tie_break(ex_tree):
    assert ex_tree.tree.path_to_deepest() == ["r", "b_x", "b_1", "b_2", "b_y"]
    twin = BinaryTree({"r": None, "b": "r", "a": "r"})
    assert twin.path_to_deepest() == ["r", "a"]


def test_path_parameterization(ex_tree):
    obj = TreeObjective(ex_tree, exp_objective())
    assert obj.d_max == 5.0
    assert obj.path_pi(0.0) == TreePoint("r", 0.0)
    assert obj.path_pi(2.25) == TreePoint("b_1", 0.25)
    assert obj.path_pi(5.0) == TreePoint("b_y", 1.0)
    assert obj.clamp_range(-3) == 0.0 and obj.clamp_range(9) == 5.0
    for t in np.linspace(0, 5, 23):
        assert ex_tree.d_r(obj.path_pi(t)) == pytest.approx(t)
    with pytest.raises(OutOfRange):
        obj.path_pi(5.5)
    assert obj.on_path(("b_2", 0.3)) and not obj.on_path(("c_3", 0.3))


def test_objective_roots_and_newton_oracle(ex_tree):
    obj = TreeObjective(ex_tree, exp_objective())
    roots = obj.roots()
    assert [r.node for r in roots] == ["r"]
    assert roots[0].x == pytest.approx(math.log(2))
    for s0 in (0.1, 0.5, 1.2, 2.0):
        tr = newton_solve(obj.F, obj.differential(), obj.path_pi(s0), SolveConfig(residual_tol=1e-14))
        s = s0
        for x in tr.points[1:]:
            s = min(max(s - (math.exp(s) - 2) / math.exp(s), 0.0), obj.d_max)
            assert ex_tree.d_r(x) == pytest.approx(s, abs=1e-12)
        assert ex_tree.d_r(tr.final) == pytest.approx(math.log(2), abs=1e-12)


def test_quadratic_objective_one_step(ex_tree):
    obj = TreeObjective(ex_tree, quadratic_objective(center=2.5))
    tr = newton_solve(obj.F, obj.differential(), obj.path_pi(0.3))
    assert tr.iterations == 1
    assert tr.final == TreePoint("b_1", 0.5)
    assert sorted(r.node for r in obj.roots()) == ["b_1", "c_2", "c_4"]


def test_off_path_start_lands_on_path(ex_tree):
    obj = TreeObjective(ex_tree, exp_objective())
    tr = newton_solve(obj.F, obj.differential(), TreePoint("c_4", 0.5))
    assert obj.on_path(tr.points[1])
    assert ex_tree.d_r(tr.final) == pytest.approx(math.log(2), abs=1e-10)
