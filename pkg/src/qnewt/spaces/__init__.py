from .euclidean import EuclideanSpace, euclidean_bundle, linear_induced_map
from .tree import (
    BinaryTree,
    ScalarFunction,
    TreeComplex,
    TreeObjective,
    TreePoint,
    exp_objective,
    quadratic_objective,
)

__all__ = [
    "EuclideanSpace",
    "euclidean_bundle",
    "linear_induced_map",
    "BinaryTree",
    "ScalarFunction",
    "TreeComplex",
    "TreeObjective",
    "TreePoint",
    "exp_objective",
    "quadratic_objective",
]
