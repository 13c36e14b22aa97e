
import numpy as np
import pytest

from qnewt.spaces import BinaryTree, EuclideanSpace, TreeComplex, TreeObjective, euclidean_bundle, exp_objective


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ex_tree():
    return TreeComplex(BinaryTree.example())


@pytest.fixture
def R1():
    return EuclideanSpace(1)


@pytest.fixture
def tree_problem():
    space = TreeComplex(BinaryTree.random(11, 4))
    return TreeObjective(space, exp_objective())


@pytest.fixture
def cubic():
    F = lambda x: x ** 3 - 2  # noqa: E731
    space, HF = euclidean_bundle(F=F, jacobian=lambda x: [[3 * x[0] ** 2]], n=1)
    return F, HF, np.array([2 ** (1 / 3)])
