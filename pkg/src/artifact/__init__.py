"""Crossed products of C*-algebras by actions of C*-tensor categories, in finite dimensions."""

__version__ = "0.1.0"

from .cstar import AlgebraElement, MatrixCStarAlgebra
from .bimodule import FgpBimodule, hom_dimension, relative_tensor, watatani_index
from .tensor_cat import CategoryData
from .algebra_object import GradedAlgebraObject, build_group_algebra_object, galois_lattice
from .crossed_product import BimoduleAction, CrossedElement, CrossedProduct, WindowOverflowError

__all__ = [
    "AlgebraElement", "MatrixCStarAlgebra", "FgpBimodule", "hom_dimension", "relative_tensor",
    "watatani_index", "CategoryData", "GradedAlgebraObject", "build_group_algebra_object",
    "galois_lattice", "BimoduleAction", "CrossedElement", "CrossedProduct", "WindowOverflowError",
]
