"""Finite-dimensional C*-algebras as direct sums of full matrix blocks.

An algebra ``A = M_{d_1} + ... + M_{d_m}`` is described by its block sizes and a
vector of positive trace weights.  The weighted trace
``tau(x) = sum_r w_r Tr(x_r)`` is faithful and is the pairing used throughout the
package to define adjoints of homomorphisms (and hence left inner products of
bimodules).  Elements are immutable: every operation returns a fresh value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class ParentMismatchError(ValueError):
    """Raised when two elements of different algebras are combined."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MatrixCStarAlgebra:
    """Direct sum of matrix blocks ``M_{d_1} + ... + M_{d_m}`` with trace weights."""

    block_dims: tuple[int, ...]
    label: str = "A"
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d <= 0 for d in dims):
            raise ValueError(f"block dimensions must be positive, got {self.block_dims}")
        object.__setattr__(self, "block_dims", dims)
        w = tuple(float(x) for x in self.weights) if self.weights else (1.0,) * len(dims)
        if len(w) != len(dims) or any(x <= 0 for x in w):
            raise ValueError("trace weights must be positive, one per block")
        object.__setattr__(self, "weights", w)

    # structure -------------------------------------------------------------
    @property
    def n_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dim(self) -> int:
        return sum(d * d for d in self.block_dims)

    @property
    def center_dim(self) -> int:
        return self.n_blocks

    def same_as(self, other: "MatrixCStarAlgebra") -> bool:
        return self.block_dims == other.block_dims and self.weights == other.weights

    # constructors ----------------------------------------------------------
    def element(self, blocks: Sequence[np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self, tuple(blocks))

    def zero(self) -> "AlgebraElement":
        return self.element([np.zeros((d, d)) for d in self.block_dims])

    def identity(self) -> "AlgebraElement":
        return self.element([np.eye(d) for d in self.block_dims])

    def scalar(self, z: complex) -> "AlgebraElement":
        return self.element([z * np.eye(d) for d in self.block_dims])

    def matrix_unit(self, s: int, i: int, j: int) -> "AlgebraElement":
        blocks = [np.zeros((d, d)) for d in self.block_dims]
        blocks[s][i, j] = 1.0
        return self.element(blocks)

    def central_projection(self, s: int) -> "AlgebraElement":
        blocks = [np.zeros((d, d)) for d in self.block_dims]
        blocks[s] = np.eye(self.block_dims[s])
        return self.element(blocks)

    def matrix_units(self) -> Iterator[tuple[int, int, int]]:
        for s, d in enumerate(self.block_dims):
            for i in range(d):
                for j in range(d):
                    yield s, i, j

    def basis(self) -> list["AlgebraElement"]:
        return [self.matrix_unit(s, i, j) for s, i, j in self.matrix_units()]

    def center_basis(self) -> list["AlgebraElement"]:
        return [self.central_projection(s) for s in range(self.n_blocks)]

    def generators(self) -> list["AlgebraElement"]:
        """A small set generating the algebra: per block a diagonal and a shift.

        The diagonal carries distinct entries so its commutant is diagonal, and the
        cyclic shift then forces scalars; central projections separate blocks.
        """
        gens = []
        for s, d in enumerate(self.block_dims):
            diag = np.zeros((d, d), dtype=complex)
            diag[np.arange(d), np.arange(d)] = np.arange(1, d + 1)
            shift = np.roll(np.eye(d), 1, axis=0)
            for m in (diag, shift):
                blocks = [np.zeros((e, e)) for e in self.block_dims]
                blocks[s] = m
                gens.append(self.element(blocks))
        return gens

    def random(self, rng: np.random.Generator, hermitian: bool = False) -> "AlgebraElement":
        blocks = []
        for d in self.block_dims:
            m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            if hermitian:
                m = (m + m.conj().T) / 2
            blocks.append(m)
        return self.element(blocks)

    def random_unitary(self, rng: np.random.Generator) -> "AlgebraElement":
        blocks = []
        for d in self.block_dims:
            z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            q, r = np.linalg.qr(z)
            ph = np.diag(r) / np.abs(np.diag(r))
            blocks.append(q * ph)
        return self.element(blocks)

    def from_vector(self, v: np.ndarray) -> "AlgebraElement":
        blocks, k = [], 0
        for d in self.block_dims:
            blocks.append(np.asarray(v[k:k + d * d]).reshape(d, d))
            k += d * d
        return self.element(blocks)

    # functionals -------------------------------------------------------------
    def trace(self, x: "AlgebraElement") -> complex:
        return complex(sum(w * np.trace(b) for w, b in zip(self.weights, x.blocks)))

    def __repr__(self) -> str:
        dims = " + ".join(f"M{d}" for d in self.block_dims)
        return f"MatrixCStarAlgebra({dims}, label={self.label!r})"


class AlgebraElement:
    """An element of a :class:`MatrixCStarAlgebra`, stored blockwise."""

    __slots__ = ("parent", "blocks")

    def __init__(self, parent: MatrixCStarAlgebra, blocks: tuple):
        if len(blocks) != parent.n_blocks:
            raise ValueError("wrong number of blocks")
        frozen = []
        for b, d in zip(blocks, parent.block_dims):
            b = _frozen(b)
            if b.shape != (d, d):
                raise ValueError(f"block of shape {b.shape} does not match size {d}")
            frozen.append(b)
        self.parent = parent
        self.blocks = tuple(frozen)

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement) or not self.parent.same_as(other.parent):
            raise ParentMismatchError("elements belong to different algebras")

    # arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgebraElement(self.parent, tuple(-a for a in self.blocks))

    def __mul__(self, z):
        if isinstance(z, AlgebraElement):
            raise TypeError("use @ for the algebra product")
        return AlgebraElement(self.parent, tuple(z * a for a in self.blocks))

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adj(self) -> "AlgebraElement":
        return AlgebraElement(self.parent, tuple(a.conj().T for a in self.blocks))

    # analysis -------------------------------------------------------------------
    def norm(self) -> float:
        return operator_norm(self)

    def is_positive(self, tol: float = DEFAULT_TOL) -> bool:
        return is_positive(self, tol)

    def is_selfadjoint(self, tol: float = DEFAULT_TOL) -> bool:
        return (self - self.adj()).norm() <= tol

    def close(self, other: "AlgebraElement", tol: float = DEFAULT_TOL) -> bool:
        return (self - other).norm() <= tol

    def commutes_with(self, other: "AlgebraElement", tol: float = DEFAULT_TOL) -> bool:
        return (self @ other - other @ self).norm() <= tol

    def is_central(self, tol: float = DEFAULT_TOL) -> bool:
        return all(self.commutes_with(g, tol) for g in self.parent.generators())

    def scalar_value(self, tol: float = 1e-8) -> complex:
        """Return z if the element equals z*1 within ``tol``; raise otherwise."""
        z = self.blocks[0][0, 0]
        if not self.close(self.parent.scalar(z), tol):
            raise ValueError("element is not a scalar multiple of the identity")
        return complex(z)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def trace(self) -> complex:
        return self.parent.trace(self)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> "AlgebraElement":
        """Functional calculus for self-adjoint elements (f acts on eigenvalues)."""
        out = []
        for b in self.blocks:
            h = (b + b.conj().T) / 2
            w, v = np.linalg.eigh(h)
            out.append((v * f(w)) @ v.conj().T)
        return AlgebraElement(self.parent, tuple(out))

    def __repr__(self) -> str:
        return f"AlgebraElement({self.parent.label}, norm={self.norm():.3g})"


def mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x @ y


def operator_norm(x: AlgebraElement) -> float:
    return max((float(np.linalg.norm(b, 2)) if b.size else 0.0) for b in x.blocks)


def is_positive(x: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    for b in x.blocks:
        if np.linalg.norm(b - b.conj().T, 2) > tol:
            return False
        if np.linalg.eigvalsh((b + b.conj().T) / 2).min(initial=0.0) < -tol:
            return False
    return True


def pinv_sqrt(x: AlgebraElement, tol: float = 1e-10) -> AlgebraElement:
    """Moore-Penrose inverse square root of a positive element."""
    return x.apply(lambda w: np.where(w > tol, 1.0 / np.sqrt(np.clip(w, tol, None)), 0.0))


def support_projection(x: AlgebraElement, tol: float = 1e-10) -> AlgebraElement:
    return x.apply(lambda w: (w > tol).astype(float))


def center_dimension(algebra: MatrixCStarAlgebra, tol: float = 1e-9) -> int:
    """Dimension of the center, computed as the null space of the commutator map."""
    basis = algebra.basis()
    rows = []
    for g in algebra.generators():
        rows.append(np.stack([(g @ b - b @ g).to_vector() for b in basis], axis=1))
    m = np.vstack(rows)
    s = np.linalg.svd(m, compute_uv=False)
    return int(len(basis) - np.sum(s > tol * max(1.0, s.max(initial=0.0))))
