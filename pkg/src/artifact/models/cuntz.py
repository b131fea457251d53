"""Truncated models of the Cuntz algebra ``O_n`` and its gauge-fixed core.

The core ``A`` is the UHF algebra ``M_n^{(x) infinity}``.  Level ``k`` is the matrix
algebra ``M_{n^k}`` whose matrix unit in row ``nu`` and column ``mu`` (words of
length ``k``, first letter most significant) stands for ``s_nu s_mu^*``.  The
inclusion into level ``k + 1`` is ``a -> a (x) 1_n``.

On the core:

* ``lambda(a) = sum_i s_i a s_i^* = 1_n (x) a``,
* ``lambda_1(a) = s_1 a s_1^* = e_11 (x) a``,
* ``L(x) = sum_i s_i^* x s_i`` is the partial trace over the first letter,
* ``L_1(x) = s_1^* x s_1`` is the first diagonal block.

Generator indices are zero-based in code, so ``s_1`` is letter ``0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..algebra_object import build_cuntz_algebra_object
from ..bimodule import (BimoduleVector, FgpBimodule, hom_dimension,
                        left_reconstruction_defect, right_reconstruction_defect, watatani_index)
from ..cstar import AlgebraElement, MatrixCStarAlgebra
from ..tensor_cat import CategoryData


class SizeOverflowError(MemoryError):
    """The requested truncation exceeds the configured matrix size."""


MAX_MATRIX_SIZE = 3 ** 6


# ---------------------------------------------------------------- UHF elements
class UHF:
    """An element of the UHF core stored at some finite level."""

    __slots__ = ("n", "depth", "mat")

    def __init__(self, n: int, depth: int, mat: np.ndarray):
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (n ** depth, n ** depth):
            raise ValueError(f"level {depth} needs a {n ** depth}-square matrix, got {mat.shape}")
        self.n, self.depth, self.mat = n, depth, mat

    @classmethod
    def scalar(cls, n: int, z: complex = 1.0) -> "UHF":
        return cls(n, 0, np.array([[z]], dtype=complex))

    @classmethod
    def unit(cls, n: int, depth: int, row: int, col: int) -> "UHF":
        m = np.zeros((n ** depth, n ** depth), dtype=complex)
        m[row, col] = 1.0
        return cls(n, depth, m)

    @classmethod
    def letter(cls, n: int, position: int, x: int, y: int) -> "UHF":
        """``e_xy`` acting on letter ``position`` (1-based)."""
        e = np.zeros((n, n), dtype=complex)
        e[x, y] = 1.0
        return cls(n, position, np.kron(np.eye(n ** (position - 1)), e))

    @classmethod
    def random(cls, n: int, depth: int, rng: np.random.Generator) -> "UHF":
        d = n ** depth
        return cls(n, depth, rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))

    def promote(self, depth: int) -> "UHF":
        if depth < self.depth:
            raise ValueError("cannot lower the level of an element")
        if depth == self.depth:
            return self
        return UHF(self.n, depth, np.kron(self.mat, np.eye(self.n ** (depth - self.depth))))

    def _pair(self, other: "UHF") -> tuple[np.ndarray, np.ndarray, int]:
        if other.n != self.n:
            raise ValueError("elements of different UHF algebras")
        d = max(self.depth, other.depth)
        return self.promote(d).mat, other.promote(d).mat, d

    def __add__(self, other: "UHF") -> "UHF":
        a, b, d = self._pair(other)
        return UHF(self.n, d, a + b)

    def __sub__(self, other: "UHF") -> "UHF":
        a, b, d = self._pair(other)
        return UHF(self.n, d, a - b)

    def __neg__(self) -> "UHF":
        return UHF(self.n, self.depth, -self.mat)

    def __mul__(self, z) -> "UHF":
        return UHF(self.n, self.depth, self.mat * z)

    __rmul__ = __mul__

    def __matmul__(self, other: "UHF") -> "UHF":
        a, b, d = self._pair(other)
        return UHF(self.n, d, a @ b)

    def adj(self) -> "UHF":
        return UHF(self.n, self.depth, self.mat.conj().T)

    def norm(self) -> float:
        return float(np.linalg.norm(self.mat, 2)) if self.mat.size else 0.0

    def trace(self) -> complex:
        """Normalized trace (compatible with the inclusions)."""
        return complex(np.trace(self.mat)) / self.n ** self.depth

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.mat + self.mat.conj().T) / 2)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues().min())

    def is_positive(self, tol: float = 1e-9) -> bool:
        h = (self.mat - self.mat.conj().T)
        return bool(np.linalg.norm(h) <= tol * max(1.0, self.norm()) and self.min_eigenvalue() >= -tol)

    def inv_sqrt(self, tol: float = 1e-12) -> "UHF":
        w, V = np.linalg.eigh((self.mat + self.mat.conj().T) / 2)
        f = np.where(w > tol, 1.0 / np.sqrt(np.clip(w, tol, None)), 0.0)
        return UHF(self.n, self.depth, (V * f) @ V.conj().T)

    def close(self, other: "UHF", tol: float = 1e-9) -> bool:
        return (self - other).norm() <= tol

    def flat(self, depth: int) -> np.ndarray:
        return self.promote(depth).mat.reshape(-1)

    def __repr__(self) -> str:
        return f"UHF(n={self.n}, level={self.depth}, norm={self.norm():.3g})"


def corner(n: int, m: int) -> UHF:
    """``p_m = s_1^m s_1^{*m}``: the projection onto words starting with ``m`` copies of letter 0."""
    return UHF.unit(n, m, 0, 0) if m else UHF.scalar(n)


def shift(x: UHF) -> UHF:
    """``lambda(x) = 1_n (x) x``."""
    return UHF(x.n, x.depth + 1, np.kron(np.eye(x.n), x.mat))


def shift1(x: UHF, times: int = 1) -> UHF:
    """``lambda_1^times(x) = e_11^{(x) times} (x) x``."""
    if not times:
        return x
    e = np.zeros((x.n ** times, x.n ** times), dtype=complex)
    e[0, 0] = 1.0
    return UHF(x.n, x.depth + times, np.kron(e, x.mat))


def partial_trace(x: UHF) -> UHF:
    """``L(x) = sum_i s_i^* x s_i``."""
    if x.depth == 0:
        x = x.promote(1)
    d = x.n ** (x.depth - 1)
    blocks = x.mat.reshape(x.n, d, x.n, d)
    return UHF(x.n, x.depth - 1, np.einsum("iaib->ab", blocks))


def corner_block(x: UHF, times: int = 1) -> UHF:
    """``L_1^times(x) = s_1^{*times} x s_1^times``."""
    for _ in range(times):
        if x.depth == 0:
            x = x.promote(1)
        d = x.n ** (x.depth - 1)
        x = UHF(x.n, x.depth - 1, x.mat[:d, :d])
    return x


def gauge_expectation(words: dict) -> dict:
    """``E(s_nu s_mu^*) = [|nu| = |mu|] s_nu s_mu^*`` on word expressions."""
    return {k: v for k, v in words.items() if len(k[0]) == len(k[1])}


# ---------------------------------------------------------------- tower model
@dataclass
class CuntzCore:
    """``_lambda A`` between consecutive levels ``A_{k-1} -> A_k`` of the core."""

    n: int
    depth: int
    lower: MatrixCStarAlgebra
    upper: MatrixCStarAlgebra
    bimodule: FgpBimodule
    left_basis: list[BimoduleVector]
    corners: list[FgpBimodule]

    def embed(self, a: AlgebraElement) -> AlgebraElement:
        """Inclusion ``A_{k-1} -> A_k``."""
        return self.upper.element([np.kron(a.blocks[0], np.eye(self.n))])

    def shift(self, a: AlgebraElement) -> AlgebraElement:
        return self.upper.element([np.kron(np.eye(self.n), a.blocks[0])])

    def basis_vector(self, i: int, j: int) -> BimoduleVector:
        """``s_i s_j^*`` as a vector of ``_lambda A``."""
        return self.bimodule.vector([UHF.letter(self.n, 1, i, j).promote(self.depth).mat])

    def index(self) -> AlgebraElement:
        return watatani_index(self.bimodule, self.left_basis, embed=self.embed)

    def basis_gram_defect(self) -> float:
        """Max deviation of ``A<s_j s_i^*, s_k s_l^*>`` from ``delta_jk delta_il 1``."""
        K, n = self.bimodule, self.n
        one = self.lower.identity()
        err = 0.0
        for j in range(n):
            for i in range(n):
                for k in range(n):
                    for l in range(n):
                        g = K.left_inner(self.basis_vector(j, i), self.basis_vector(k, l))
                        want = one * float(j == k and i == l)
                        err = max(err, (g - want).norm())
        return err

    def reconstruction_defects(self, samples: int = 20, seed: int = 0) -> dict:
        rng = np.random.default_rng(seed)
        K = self.bimodule
        left = right = 0.0
        for _ in range(samples):
            xi = K.random_vector(rng)
            left = max(left, left_reconstruction_defect(K, xi, self.left_basis))
            right = max(right, right_reconstruction_defect(K, xi))
        return {"left": left, "right": right}

    def end_dimension(self) -> int:
        return hom_dimension(self.bimodule, self.bimodule)

    def shift_identity_defect(self, samples: int = 5, seed: int = 0) -> float:
        """``L(lambda(a)) = n a`` on random elements."""
        rng = np.random.default_rng(seed)
        err = 0.0
        for _ in range(samples):
            a = UHF.random(self.n, self.depth - 1, rng)
            err = max(err, (partial_trace(shift(a)) - a * self.n).norm())
        return err

    def corner_pairings(self) -> dict:
        """Evaluation ``bar(eta) (x) xi -> <eta|xi>`` between corners.

        On equal corners the pairing is an isometry onto ``A``; on distinct
        corners it vanishes identically.
        """
        out = {}
        rng = np.random.default_rng(0)
        for i, Ki in enumerate(self.corners):
            for j, Kj in enumerate(self.corners):
                worst = 0.0
                for _ in range(4):
                    eta, xi = Ki.random_vector(rng), Kj.random_vector(rng)
                    worst = max(worst, np.linalg.norm(eta.blocks[0].conj().T @ xi.blocks[0], 2))
                out[(i, j)] = worst
        return out

    def corner_generation(self, samples: int = 5, seed: int = 0) -> bool:
        """Every sampled nonzero corner vector generates its corner as a bimodule."""
        from ..bimodule import generates
        rng = np.random.default_rng(seed)
        return all(generates(K, K.random_vector(rng)) for K in self.corners for _ in range(samples))

    def report(self) -> dict:
        ind = self.index()
        one = self.upper.identity()
        return {
            "n": self.n, "depth": self.depth,
            "index_scalar": complex(ind.scalar_value()).real,
            "index_defect": (ind - one * self.n ** 2).norm(),
            "left_basis_gram_defect": self.basis_gram_defect(),
            "reconstruction": self.reconstruction_defects(),
            "end_dimension": self.end_dimension(),
            "shift_identity_defect": self.shift_identity_defect(),
        }


def build_cuntz_core(n: int, depth: int, max_size: int = MAX_MATRIX_SIZE) -> CuntzCore:
    """``A_{depth-1}``, ``A_depth`` and the bimodule ``_lambda A`` with its corners.

    The left inner product of the bimodule is the trace dual of ``lambda``
    for the unnormalized traces, which is ``L(xi eta^*)``.
    """
    if n < 2 or depth < 2:
        raise ValueError("need n >= 2 and depth >= 2")
    if n ** depth > max_size:
        raise SizeOverflowError(f"M_{n ** depth} exceeds the configured bound M_{max_size}")
    lower = MatrixCStarAlgebra((n ** (depth - 1),), label=f"A{depth - 1}")
    upper = MatrixCStarAlgebra((n ** depth,), label=f"A{depth}")
    K = FgpBimodule.from_homomorphism(lower, upper, 1, lambda a: [np.kron(np.eye(n), a.blocks[0])],
                                      label="lambda", validate=True)
    left_basis = []
    for j in range(n):
        for i in range(n):
            left_basis.append(K.vector([UHF.letter(n, 1, j, i).promote(depth).mat]))
    corners = []
    for i in range(n):
        P = UHF.letter(n, 1, i, i).promote(depth).mat
        corners.append(FgpBimodule.from_homomorphism(
            lower, upper, 1, lambda a, P=P: [P @ np.kron(np.eye(n), a.blocks[0])],
            label=f"corner{i}", validate=True))
    return CuntzCore(n, depth, lower, upper, K, left_basis, corners)


# ---------------------------------------------------------------- crossed-product action
class CuntzAction:
    """The outer action ``m -> F(m)`` of the integers on the core, at finite level.

    ``F(m)`` for ``m >= 0`` consists of ``s_1^{*m} xi`` with ``xi = p_m xi``;
    for ``m = -b < 0`` of ``xi s_1^b`` with ``xi = xi p_b``.  Coefficients are
    stored as :class:`UHF` elements ``xi``.
    """

    def __init__(self, n: int, window: int, depth: int | None = None, flat_depth: int | None = None):
        self.n = n
        self.window = window
        self.depth = max(window, 1) if depth is None else depth
        if self.depth < window:
            raise ValueError("coefficient level must be at least the window")
        self.flat_depth = self.depth + 2 * window + 1 if flat_depth is None else flat_depth
        self.category = CategoryData.integers(window)
        self.obj = build_cuntz_algebra_object(window)

    # coefficients -------------------------------------------------------------
    def zero(self, c) -> UHF:
        return UHF.scalar(self.n, 0.0)

    def _constrain(self, c, x: UHF) -> UHF:
        return corner(self.n, c) @ x if c >= 0 else x @ corner(self.n, -c)

    def random(self, c, rng) -> UHF:
        return self._constrain(c, UHF.random(self.n, self.depth, rng))

    def basis(self, c) -> list[UHF]:
        d, n, b = self.depth, self.n, abs(c)
        size, block = n ** d, n ** (d - b)
        out = []
        for r in range(size):
            for s in range(size):
                if (c >= 0 and r < block) or (c < 0 and s < block):
                    out.append(UHF.unit(n, d, r, s))
        return out

    def coefficient_dim(self, c) -> int:
        return self.n ** (2 * self.depth - abs(c))

    def flat(self, c, x: UHF) -> np.ndarray:
        if x.depth > self.flat_depth:
            raise ValueError(f"coefficient at level {x.depth} exceeds the flattening level {self.flat_depth}")
        return x.flat(self.flat_depth)

    def flat_many(self, c, xs: Sequence[UHF]) -> np.ndarray:
        """Columns for several coefficients promoted to their common level."""
        level = max((x.depth for x in xs), default=0)
        return np.stack([x.flat(level) for x in xs], axis=1)

    def metric(self, c) -> np.ndarray:
        scale = self.n ** abs(c) if c < 0 else 1
        return np.full(self.n ** (2 * self.flat_depth), scale / self.n ** self.flat_depth)

    def coeff_norm(self, c, x: UHF) -> float:
        return x.norm()

    def tensor(self, l, m, c, alpha, x: UHF, y: UHF) -> UHF:
        if l >= 0 and m >= 0:
            return shift1(x, m) @ y
        if l < 0 and m < 0:
            return x @ shift1(y, -l)
        if l >= 0:
            b, z = -m, x @ y
            return corner_block(z, b) if l >= b else corner_block(z, l)
        a = -l
        if a >= m:
            return x @ shift1(y, a - m)
        return shift1(x, m - a) @ y

    def conj(self, c, x: UHF) -> UHF:
        return x.adj()

    def left(self, a: UHF, c, x: UHF) -> UHF:
        return shift1(a, c) @ x if c >= 0 else a @ x

    def right(self, x: UHF, c, a: UHF) -> UHF:
        return x @ a if c >= 0 else x @ shift1(a, -c)

    def inner(self, c, x: UHF, y: UHF) -> UHF:
        z = x.adj() @ y
        return z if c >= 0 else corner_block(z, -c)

    def from_algebra(self, a: UHF) -> UHF:
        return a

    def to_algebra(self, x: UHF) -> UHF:
        return x

    # algebra ------------------------------------------------------------------
    def algebra_generators(self) -> list[UHF]:
        """Letter-local matrix units on letters ``1 .. depth + 1``.

        The extra letter below the coefficient level rules out solutions of
        relation systems that only commute with a finite stage of the core.
        """
        n = self.n
        return [UHF.letter(n, p, x, y) for p in range(1, self.depth + 2) for x in range(n) for y in range(n)]

    def algebra_spanning_set(self, level: int = 1) -> list[UHF]:
        size = self.n ** level
        return [UHF.unit(self.n, level, r, s) for r in range(size) for s in range(size)]

    def algebra_random(self, rng) -> UHF:
        return UHF.random(self.n, self.depth, rng)

    def algebra_one(self) -> UHF:
        return UHF.scalar(self.n)

    def trace(self, a: UHF) -> complex:
        return a.trace()

    def algebra_flat(self, a: UHF) -> np.ndarray:
        return a.flat(self.flat_depth)

    # cyclic presentation ------------------------------------------------------
    def cyclic_vector(self, c) -> UHF:
        return corner(self.n, abs(c))

    def relations(self, c) -> list[list[tuple]]:
        one = UHF.scalar(self.n)
        p = corner(self.n, abs(c))
        if c >= 0:
            rels = [[(one, p), (-one, one)]]
            rels += [[(a, one), (-one, shift1(a, c))] for a in self.algebra_generators()]
        else:
            rels = [[(p, one), (-one, one)]]
            rels += [[(one, a), (-shift1(a, -c), one)] for a in self.algebra_generators()]
        return rels


def cuntz_crossed_product(n: int, window: int, depth: int | None = None):
    """The windowed crossed product ``A x| C[Z]`` realizing the Cuntz algebra."""
    from ..crossed_product import CrossedProduct
    act = CuntzAction(n, window, depth)
    return CrossedProduct(act, act.obj)


# ---------------------------------------------------------------- word oracle
Word = tuple[int, ...]


def word_product(x: dict, y: dict) -> dict:
    """Product of word expressions ``{(nu, mu): c}`` meaning ``sum c s_nu s_mu^*``.

    Uses only ``s_i^* s_j = delta_ij``: in ``(s_nu s_mu^*)(s_alpha s_beta^*)``
    the middle ``s_mu^* s_alpha`` cancels letter by letter.
    """
    out: dict = {}
    for (nu, mu), c in x.items():
        for (al, be), d in y.items():
            k = min(len(mu), len(al))
            if mu[:k] != al[:k]:
                continue
            if len(mu) <= len(al):
                key = (nu + al[len(mu):], be)
            else:
                key = (nu, be + mu[len(al):])
            out[key] = out.get(key, 0) + c * d
    return {k: v for k, v in out.items() if v != 0}


def word_star(x: dict) -> dict:
    return {(mu, nu): np.conj(c) for (nu, mu), c in x.items()}


def cuntz_word_oracle(w1: dict, w2: dict) -> dict:
    """Normal-form product of two word expressions."""
    return word_product(w1, w2)


def s(i: int) -> dict:
    """The generator ``s_i`` (zero-based) as a word expression."""
    return {((i,), ()): 1}


def s_star(i: int) -> dict:
    return {((), (i,)): 1}


def normal_form(x: dict, n: int, length: int | None = None) -> dict:
    """Expand with ``1 = sum_i s_i s_i^*`` until every ``mu`` has the given length.

    Two expressions are equal in ``O_n`` exactly when their normal forms at a
    common length agree.
    """
    if length is None:
        length = max((len(mu) for (_, mu) in x), default=0)
    out: dict = {}
    for (nu, mu), c in x.items():
        extra = length - len(mu)
        if extra < 0:
            raise ValueError("normal-form length shorter than a word")
        for tail in np.ndindex(*([n] * extra)):
            key = (nu + tuple(tail), mu + tuple(tail))
            out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if abs(v) > 0}


def words_distance(x: dict, y: dict, n: int) -> float:
    L = max([len(mu) for (_, mu) in list(x) + list(y)] + [0])
    a, b = normal_form(x, n, L), normal_form(y, n, L)
    return float(max((abs(a.get(k, 0) - b.get(k, 0)) for k in set(a) | set(b)), default=0.0))


def crossed_to_words(P, x) -> dict:
    """Word expression of a crossed element of :func:`cuntz_crossed_product`."""
    n = P.action.n
    out: dict = {}
    for m, (xi,) in x.terms.items():
        d = xi.depth
        words = list(np.ndindex(*([n] * d)))
        core = {}
        for r, nu in enumerate(words):
            for c, mu in enumerate(words):
                if xi.mat[r, c] != 0:
                    core[(tuple(nu), tuple(mu))] = xi.mat[r, c]
        if m >= 0:
            term = word_product({((), (0,) * m): 1}, core)
        else:
            term = word_product(core, {((0,) * (-m), ()): 1})
        for k, v in term.items():
            out[k] = out.get(k, 0) + v
    return out
