"""Finitely generated projective Hilbert bimodules ``K = p.B^n`` over block algebras.

A bimodule is stored in *standard form*.  For every block ``r`` of the right
algebra ``B`` we keep an isometry ``W_r`` from ``sum_s C^{d_s} (x) C^{mu[s, r]}``
onto the range of ``p_r`` inside ``C^{n d_r}``, and the left action is

    phi_r(a) = W_r (sum_s a_s (x) 1_{mu[s, r]}) W_r^*.

Every unital *-homomorphism ``A -> p M_n(B) p`` has this shape, so nothing is
lost, and the multiplicity matrix ``mu`` makes intertwiner spaces, isotypic
decompositions and isomorphism tests explicit.  Columns of ``W_r`` are ordered by
left block ``s``, then matrix index ``i < d_s``, then copy ``k < mu[s, r]``.

Vectors live in the ambient module ``B^n``: block ``r`` of a vector is an
``(n d_r) x d_r`` matrix fixed by ``p_r``.  The right inner product is
``<xi|eta> = xi^* eta``; the left inner product is the trace dual of the left
action, ``A<xi, eta> = phi^dagger(xi eta^*)``, where the adjoint is taken with
respect to the weighted traces of the two algebras.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .cstar import AlgebraElement, MatrixCStarAlgebra, pinv_sqrt


class NotLeftFgpError(RuntimeError):
    """The candidate vectors do not left-generate the bimodule."""


class BimoduleError(ValueError):
    """Invalid bimodule data (non-projection, non-homomorphism, mismatched algebras)."""


def _isometry_from_projection(P: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    w, v = np.linalg.eigh((P + P.conj().T) / 2)
    return v[:, w > 0.5] if w.size else v[:, :0]


class FgpBimodule:
    """An ``A``-``B`` bimodule ``p.B^n`` with left action in standard form."""

    def __init__(self, left: MatrixCStarAlgebra, right: MatrixCStarAlgebra, n: int,
                 W: Sequence[np.ndarray], mult: np.ndarray, label: str = "K",
                 check: bool = True):
        self.left = left
        self.right = right
        self.n = int(n)
        self.mult = np.asarray(mult, dtype=int).reshape(left.n_blocks, right.n_blocks)
        self.label = label
        Ws = []
        for r, d in enumerate(right.block_dims):
            w = np.asarray(W[r], dtype=complex)
            cols = int(sum(left.block_dims[s] * self.mult[s, r] for s in range(left.n_blocks)))
            if w.shape != (self.n * d, cols):
                raise BimoduleError(f"block {r}: expected isometry of shape {(self.n * d, cols)}, got {w.shape}")
            w.setflags(write=False)
            Ws.append(w)
        self.W = tuple(Ws)
        self._offsets = [np.concatenate([[0], np.cumsum([left.block_dims[s] * self.mult[s, r]
                                                       for s in range(left.n_blocks)])]).astype(int)
                         for r in range(right.n_blocks)]
        if check:
            for r, w in enumerate(self.W):
                if w.size and np.linalg.norm(w.conj().T @ w - np.eye(w.shape[1])) > 1e-8:
                    raise BimoduleError(f"block {r}: standard-form columns are not orthonormal")

    # ------------------------------------------------------------------ basics
    def __repr__(self) -> str:
        return f"FgpBimodule({self.label!r}, {self.left.label}-{self.right.label}, n={self.n})"

    @property
    def ambient_dims(self) -> list[int]:
        return [self.n * d for d in self.right.block_dims]

    @property
    def dim(self) -> int:
        """Dimension over the complex numbers."""
        return int(sum(w.shape[1] * d for w, d in zip(self.W, self.right.block_dims)))

    def projection(self) -> list[np.ndarray]:
        return [w @ w.conj().T for w in self.W]

    def columns(self, r: int, s: int, k: int) -> np.ndarray:
        """The ``d_s`` columns of ``W_r`` forming copy ``k`` of the left block ``s``."""
        mu = self.mult[s, r]
        if not 0 <= k < mu:
            raise IndexError("copy index out of range")
        idx = self._offsets[r][s] + np.arange(self.left.block_dims[s]) * mu + k
        return self.W[r][:, idx]

    def _rep(self, a: AlgebraElement, r: int) -> np.ndarray:
        parts = []
        for s, d in enumerate(self.left.block_dims):
            mu = self.mult[s, r]
            if mu:
                parts.append(np.kron(a.blocks[s], np.eye(mu)))
        if not parts:
            return np.zeros((0, 0), dtype=complex)
        out = np.zeros((sum(p.shape[0] for p in parts),) * 2, dtype=complex)
        k = 0
        for p in parts:
            out[k:k + p.shape[0], k:k + p.shape[0]] = p
            k += p.shape[0]
        return out

    def phi(self, a: AlgebraElement) -> list[np.ndarray]:
        """Image of ``a`` in ``M_n(B)``, blockwise."""
        return [w @ self._rep(a, r) @ w.conj().T for r, w in enumerate(self.W)]

    def phi_adjoint(self, X: Sequence[np.ndarray]) -> AlgebraElement:
        """Trace-dual of the left action: the element ``y`` with
        ``tau_A(a^* y) = tau_B^{(n)}(phi(a)^* X)`` for all ``a``."""
        out = [np.zeros((d, d), dtype=complex) for d in self.left.block_dims]
        for r, w in enumerate(self.W):
            if not w.shape[1]:
                continue
            R = w.conj().T @ X[r] @ w
            wr = self.right.weights[r]
            for s, d in enumerate(self.left.block_dims):
                mu = self.mult[s, r]
                if not mu:
                    continue
                o = self._offsets[r][s]
                sub = R[o:o + d * mu, o:o + d * mu].reshape(d, mu, d, mu)
                out[s] += wr * np.einsum("ikjk->ij", sub)
        return self.left.element([b / w for b, w in zip(out, self.left.weights)])

    # ---------------------------------------------------------------- vectors
    def vector(self, blocks: Sequence[np.ndarray], project: bool = False) -> "BimoduleVector":
        blocks = [np.asarray(b, dtype=complex) for b in blocks]
        if project:
            blocks = [w @ (w.conj().T @ b) for w, b in zip(self.W, blocks)]
        return BimoduleVector(self, blocks)

    def zero_vector(self) -> "BimoduleVector":
        return BimoduleVector(self, [np.zeros((self.n * d, d), dtype=complex) for d in self.right.block_dims])

    def random_vector(self, rng: np.random.Generator) -> "BimoduleVector":
        blocks = []
        for w, d in zip(self.W, self.right.block_dims):
            z = rng.standard_normal((w.shape[1], d)) + 1j * rng.standard_normal((w.shape[1], d))
            blocks.append(w @ z)
        return BimoduleVector(self, blocks)

    def scalar_basis(self) -> list["BimoduleVector"]:
        """A basis over the complex numbers, orthonormal for ``tau_B(<.|.>)`` up to weights."""
        out = []
        for r, (w, d) in enumerate(zip(self.W, self.right.block_dims)):
            for c in range(w.shape[1]):
                for l in range(d):
                    blocks = [np.zeros((self.n * e, e), dtype=complex) for e in self.right.block_dims]
                    blocks[r][:, l] = w[:, c]
                    out.append(BimoduleVector(self, blocks))
        return out

    def right_pp_basis(self) -> list["BimoduleVector"]:
        """Columns of ``p``: ``xi = sum_i u_i <u_i|xi>`` for every ``xi``."""
        P = self.projection()
        out = []
        for k in range(self.n):
            blocks = [p[:, k * d:(k + 1) * d] for p, d in zip(P, self.right.block_dims)]
            out.append(BimoduleVector(self, blocks))
        return out

    def right_inner(self, xi: "BimoduleVector", eta: "BimoduleVector") -> AlgebraElement:
        return self.right.element([x.conj().T @ y for x, y in zip(xi.blocks, eta.blocks)])

    def left_inner(self, xi: "BimoduleVector", eta: "BimoduleVector") -> AlgebraElement:
        return self.phi_adjoint([x @ y.conj().T for x, y in zip(xi.blocks, eta.blocks)])

    def left_act(self, a: AlgebraElement, xi: "BimoduleVector") -> "BimoduleVector":
        return BimoduleVector(self, [f @ x for f, x in zip(self.phi(a), xi.blocks)])

    def right_act(self, xi: "BimoduleVector", b: AlgebraElement) -> "BimoduleVector":
        return BimoduleVector(self, [x @ bb for x, bb in zip(xi.blocks, b.blocks)])

    def norm(self, xi: "BimoduleVector") -> float:
        return float(np.sqrt(max(self.right_inner(xi, xi).norm(), 0.0)))

    # ------------------------------------------------------------ validation
    def check_left_action(self, tol: float = 1e-8) -> float:
        """Max defect of multiplicativity, *-preservation and unitality onto ``p``
        on algebra generators."""
        gens = self.left.generators()
        one = self.phi(self.left.identity())
        P = self.projection()
        err = max(np.linalg.norm(a - b) for a, b in zip(one, P)) if P else 0.0
        for x in gens:
            fx = self.phi(x)
            fxa = self.phi(x.adj())
            err = max(err, max((np.linalg.norm(a.conj().T - b) for a, b in zip(fx, fxa)), default=0.0))
            for y in gens:
                fy = self.phi(y)
                fxy = self.phi(x @ y)
                err = max(err, max((np.linalg.norm(a @ b - c) for a, b, c in zip(fx, fy, fxy)), default=0.0))
        return float(err)

    def multiplicities(self) -> dict[tuple[int, int], int]:
        return {(s, r): int(m) for (s, r), m in np.ndenumerate(self.mult) if m}

    # ------------------------------------------------------------ constructors
    @classmethod
    def from_images(cls, left: MatrixCStarAlgebra, right: MatrixCStarAlgebra, n: int,
                    image: Callable[[int, int, int], Sequence[np.ndarray]], label: str = "K",
                    validate: bool = True, tol: float = 1e-8) -> "FgpBimodule":
        """Build the standard form from images of matrix units ``e^s_{ij}``.

        ``image(s, i, j)`` returns the blocks of ``phi(e^s_{ij})`` in ``M_n(B)``.
        Only the units ``e^s_{i0}`` are needed to build the form; with
        ``validate`` the homomorphism relations are checked on all units.
        """
        nb = right.n_blocks
        mult = np.zeros((left.n_blocks, nb), dtype=int)
        cols: list[list[np.ndarray]] = [[] for _ in range(nb)]
        for s, d in enumerate(left.block_dims):
            e00 = [np.asarray(b, dtype=complex) for b in image(s, 0, 0)]
            Q = [_isometry_from_projection(b) for b in e00]
            imgs = [e00] + [[np.asarray(b, dtype=complex) for b in image(s, i, 0)] for i in range(1, d)]
            for r in range(nb):
                mu = Q[r].shape[1]
                mult[s, r] = mu
                if mu:
                    block = np.stack([imgs[i][r] @ Q[r] for i in range(d)], axis=1)
                    cols[r].append(block.reshape(n * right.block_dims[r], d * mu))
        W = [np.hstack(c) if c else np.zeros((n * right.block_dims[r], 0), dtype=complex)
             for r, c in enumerate(cols)]
        K = cls(left, right, n, W, mult, label, check=False)
        if validate:
            K._validate_images(image, tol)
        return K

    def _validate_images(self, image, tol: float, exhaustive_up_to: int = 32) -> None:
        """Compare ``phi`` with ``image`` on matrix units.

        Blocks up to ``exhaustive_up_to`` are checked on every unit; larger ones
        on the generating units ``e_{i0}``, ``e_{0j}`` and a seeded sample.
        """
        rng = np.random.default_rng(0)
        for s, d in enumerate(self.left.block_dims):
            if d <= exhaustive_up_to:
                units = [(i, j) for i in range(d) for j in range(d)]
            else:
                units = ([(i, 0) for i in range(d)] + [(0, j) for j in range(1, d)]
                         + [tuple(int(v) for v in rng.integers(d, size=2)) for _ in range(4 * d)])
            for i, j in units:
                got = self.phi(self.left.matrix_unit(s, i, j))
                want = image(s, i, j)
                err = max((np.linalg.norm(a - np.asarray(b)) for a, b in zip(got, want)), default=0.0)
                if err > tol:
                    raise BimoduleError(
                        f"left action is not a *-homomorphism at unit ({s},{i},{j}): defect {err:.2e}")
        for w in self.W:
            if w.size and np.linalg.norm(w.conj().T @ w - np.eye(w.shape[1])) > tol:
                raise BimoduleError("left action is not a *-homomorphism (range isometry fails)")

    @classmethod
    def from_homomorphism(cls, left: MatrixCStarAlgebra, right: MatrixCStarAlgebra, n: int,
                          func: Callable[[AlgebraElement], Sequence[np.ndarray]], label: str = "K",
                          validate: bool = True) -> "FgpBimodule":
        """Build from a linear map ``func: A -> M_n(B)`` (blockwise output)."""
        def image(s, i, j):
            return func(left.matrix_unit(s, i, j))

        K = cls.from_images(left, right, n, image, label, validate=validate)
        if validate:
            one = K.phi(left.identity())
            want = func(left.identity())
            if max(np.linalg.norm(a - np.asarray(b)) for a, b in zip(one, want)) > 1e-8:
                raise BimoduleError("left action is not additive on the identity")
        return K

    @classmethod
    def from_copies(cls, left: MatrixCStarAlgebra, right: MatrixCStarAlgebra, n: int,
                    copies: dict[tuple[int, int], list[np.ndarray]], label: str = "K") -> "FgpBimodule":
        """Assemble from isotypic copies: ``copies[(s, r)]`` is a list of
        ``(n d_r) x d_s`` isometries, one per copy of left block ``s``."""
        mult = np.zeros((left.n_blocks, right.n_blocks), dtype=int)
        W = []
        for r, dr in enumerate(right.block_dims):
            parts = []
            for s, ds in enumerate(left.block_dims):
                cs = copies.get((s, r), [])
                mult[s, r] = len(cs)
                if cs:
                    stack = np.stack([np.asarray(c, dtype=complex) for c in cs], axis=2)  # N x d_s x mu
                    parts.append(stack.reshape(n * dr, ds * len(cs)))
            W.append(np.hstack(parts) if parts else np.zeros((n * dr, 0), dtype=complex))
        return cls(left, right, n, W, mult, label)

    def copies(self) -> dict[tuple[int, int], list[np.ndarray]]:
        return {(s, r): [self.columns(r, s, k) for k in range(m)] for (s, r), m in self.multiplicities().items()}

    def relabel(self, label: str) -> "FgpBimodule":
        return FgpBimodule(self.left, self.right, self.n, self.W, self.mult, label, check=False)


def trivial_bimodule(A: MatrixCStarAlgebra) -> FgpBimodule:
    """The identity bimodule ``_A A_A``."""
    return FgpBimodule(A, A, 1, [np.eye(d) for d in A.block_dims], np.eye(A.n_blocks, dtype=int),
                       label=f"{A.label}", check=False)


def irreducible_bimodule(A: MatrixCStarAlgebra, B: MatrixCStarAlgebra, s: int, r: int) -> FgpBimodule:
    """The irreducible ``A``-``B`` bimodule connecting left block ``s`` to right block ``r``."""
    ds, dr = A.block_dims[s], B.block_dims[r]
    n = -(-ds // dr)
    return FgpBimodule.from_copies(A, B, n, {(s, r): [np.eye(n * dr)[:, :ds]]}, label=f"E[{s},{r}]")


class BimoduleVector:
    """A vector of an :class:`FgpBimodule` in ambient coordinates."""

    __slots__ = ("parent", "blocks")

    def __init__(self, parent: FgpBimodule, blocks: Sequence[np.ndarray]):
        self.parent = parent
        self.blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)

    def __add__(self, other):
        return BimoduleVector(self.parent, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        return BimoduleVector(self.parent, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return BimoduleVector(self.parent, [-a for a in self.blocks])

    def __mul__(self, z):
        return BimoduleVector(self.parent, [z * a for a in self.blocks])

    __rmul__ = __mul__

    @property
    def coords(self) -> list[AlgebraElement]:
        """The column of ``n`` elements of ``B`` (only meaningful when blocks align)."""
        B = self.parent.right
        out = []
        for k in range(self.parent.n):
            out.append(B.element([b[k * d:(k + 1) * d, :] for b, d in zip(self.blocks, B.block_dims)]))
        return out

    def flat(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks]) if self.blocks else np.zeros(0)

    def norm(self) -> float:
        return self.parent.norm(self)

    def defect(self) -> float:
        """Distance from the range of ``p``."""
        return float(max((np.linalg.norm(b - w @ (w.conj().T @ b)) for w, b in zip(self.parent.W, self.blocks)),
                         default=0.0))


def vector_distance(x: BimoduleVector, y: BimoduleVector) -> float:
    d = x - y
    return d.norm()


# ---------------------------------------------------------------- amplification
def amplify(L: FgpBimodule, X: Sequence[np.ndarray], a: int, b: int) -> list[np.ndarray]:
    """Apply the left action of ``L`` entrywise to an ``a x b`` matrix over ``L.left``.

    ``X[r]`` is the ``(a d_r) x (b d_r)`` block of the matrix at block ``r`` of the
    left algebra of ``L``.  The result is an ``a x b`` matrix over ``L.right``
    whose entries are further matrices over ``L``'s ambient module, i.e.
    ``(a m e_t) x (b m e_t)`` blocks, with the outer index most significant.
    """
    A = L.left
    out = []
    for t, et in enumerate(L.right.block_dims):
        N = L.n * et
        acc = np.zeros((a, N, b, N), dtype=complex)
        w = L.W[t]
        for r, dr in enumerate(A.block_dims):
            nu = L.mult[r, t]
            if not nu:
                continue
            o = L._offsets[t][r]
            V = w[:, o:o + dr * nu].reshape(N, dr, nu)
            Xr = np.asarray(X[r]).reshape(a, dr, b, dr)
            T = np.tensordot(V, Xr, axes=([1], [1]))  # x l A B j
            acc += np.tensordot(T, V.conj(), axes=([1, 4], [2, 1])).transpose(1, 0, 2, 3)
        out.append(acc.reshape(a * N, b * N))
    return out


def tensor_vectors(KL: "TensorProduct", xi: BimoduleVector, eta: BimoduleVector) -> BimoduleVector:
    """Coordinates of the simple tensor ``xi (x) eta`` in ``K (x)_B L``."""
    K, L = KL.first, KL.second
    amp = amplify(L, xi.blocks, K.n, 1)
    return BimoduleVector(KL.module, [m @ e for m, e in zip(amp, eta.blocks)])


@dataclass(frozen=True)
class TensorProduct:
    first: FgpBimodule
    second: FgpBimodule
    module: FgpBimodule

    def vector(self, xi: BimoduleVector, eta: BimoduleVector) -> BimoduleVector:
        return tensor_vectors(self, xi, eta)


def relative_tensor(K: FgpBimodule, L: FgpBimodule, label: str | None = None) -> TensorProduct:
    """Interior tensor product ``K (x)_B L`` realized inside ``C^{n_K n_L}``.

    The simple tensor ``xi (x) eta`` has coordinates ``(psi(xi_k) eta)_k`` where
    ``psi`` is the left action of ``L``; these coordinates are strictly
    associative, so iterated products need no associator.
    """
    if not K.right.same_as(L.left):
        raise BimoduleError("right algebra of the first factor must be the left algebra of the second")
    A, C = K.left, L.right
    n = K.n * L.n
    W, mult = [], np.zeros((A.n_blocks, C.n_blocks), dtype=int)
    for t, et in enumerate(C.block_dims):
        N = L.n * et
        Z = {}
        for r, dr in enumerate(K.right.block_dims):
            nu = L.mult[r, t]
            if not nu or not K.W[r].shape[1]:
                continue
            o = L._offsets[t][r]
            V = L.W[t][:, o:o + dr * nu].reshape(N, dr, nu)
            WK = K.W[r].reshape(K.n, dr, -1)
            Z[r] = np.einsum("Aic,xil->Axcl", WK, V).reshape(K.n * N, -1, nu)
        parts = []
        for s, ds in enumerate(A.block_dims):
            per_i = [[] for _ in range(ds)]
            for r, z in Z.items():
                mu = K.mult[s, r]
                if not mu:
                    continue
                o = K._offsets[r][s]
                for i in range(ds):
                    idx = o + i * mu + np.arange(mu)
                    per_i[i].append(z[:, idx, :].reshape(K.n * N, -1))
            if per_i[0]:
                parts.append(np.hstack([np.hstack(p) for p in per_i]))
                mult[s, t] = parts[-1].shape[1] // ds
        W.append(np.hstack(parts) if parts else np.zeros((n * et, 0), dtype=complex))
    module = FgpBimodule(A, C, n, W, mult, label or f"({K.label}*{L.label})", check=False)
    return TensorProduct(K, L, module)


def tensor_power(K: FgpBimodule, d: int) -> FgpBimodule:
    if d == 0:
        return trivial_bimodule(K.left)
    out = K
    for _ in range(d - 1):
        out = relative_tensor(K, out).module
    return out


def direct_sum(K: FgpBimodule, L: FgpBimodule, label: str | None = None) -> FgpBimodule:
    if not (K.left.same_as(L.left) and K.right.same_as(L.right)):
        raise BimoduleError("direct sum needs common algebras")
    n = K.n + L.n
    copies: dict = {}
    for (s, r), cs in K.copies().items():
        dr = K.right.block_dims[r]
        for c in cs:
            copies.setdefault((s, r), []).append(_embed_rows(c, K.n, 0, n, dr))
    for (s, r), cs in L.copies().items():
        dr = L.right.block_dims[r]
        for c in cs:
            copies.setdefault((s, r), []).append(_embed_rows(c, L.n, K.n, n, dr))
    return FgpBimodule.from_copies(K.left, K.right, n, copies, label or f"({K.label}+{L.label})")


def _embed_rows(c: np.ndarray, n_small: int, start: int, n_big: int, d: int) -> np.ndarray:
    out = np.zeros((n_big * d, c.shape[1]), dtype=complex)
    out[start * d:(start + n_small) * d] = c
    return out


# ----------------------------------------------------------------- intertwiners
class Intertwiner:
    """A bimodule map ``K -> L``, i.e. left multiplication by a matrix over ``B``."""

    def __init__(self, source: FgpBimodule, target: FgpBimodule, blocks: Sequence[np.ndarray]):
        if not (source.left.same_as(target.left) and source.right.same_as(target.right)):
            raise BimoduleError("intertwiners need common algebras")
        self.source = source
        self.target = target
        self.blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)

    def __call__(self, xi: BimoduleVector) -> BimoduleVector:
        return BimoduleVector(self.target, [m @ x for m, x in zip(self.blocks, xi.blocks)])

    def adj(self) -> "Intertwiner":
        return Intertwiner(self.target, self.source, [m.conj().T for m in self.blocks])

    def __matmul__(self, other: "Intertwiner") -> "Intertwiner":
        return Intertwiner(other.source, self.target, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __add__(self, other):
        return Intertwiner(self.source, self.target, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        return Intertwiner(self.source, self.target, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, z):
        return Intertwiner(self.source, self.target, [z * a for a in self.blocks])

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(max((np.linalg.norm(m, 2) for m in self.blocks if m.size), default=0.0))

    def scalar_trace(self) -> complex:
        """Trace as a linear map on the complex vector space of the source."""
        return complex(sum(np.trace(m) * d for m, d in zip(self.blocks, self.source.right.block_dims)))

    def bimodularity_defect(self) -> float:
        """Max defect of ``f(a.xi) = a.f(xi)`` on generators, and of ``f = q f p``."""
        P, Q = self.source.projection(), self.target.projection()
        err = max((np.linalg.norm(q @ m @ p - m) for q, m, p in zip(Q, self.blocks, P)), default=0.0)
        for g in self.source.left.generators():
            fs, ft = self.source.phi(g), self.target.phi(g)
            err = max(err, max((np.linalg.norm(m @ a - b @ m) for m, a, b in zip(self.blocks, fs, ft)),
                               default=0.0))
        return float(err)

    def is_isometry(self, tol: float = 1e-8) -> bool:
        P = self.source.projection()
        return all(np.linalg.norm(m.conj().T @ m - p) <= tol for m, p in zip(self.blocks, P))

    def is_unitary(self, tol: float = 1e-8) -> bool:
        return self.is_isometry(tol) and self.adj().is_isometry(tol)


def identity_map(K: FgpBimodule) -> Intertwiner:
    return Intertwiner(K, K, K.projection())


def hs_inner(f: Intertwiner, g: Intertwiner) -> complex:
    """The scalar ``(f|g)`` with ``f^* g = (f|g) id`` when the source is irreducible;
    in general the normalized trace of ``f^* g``."""
    fg = f.adj() @ g
    return fg.scalar_trace() / identity_map(f.source).scalar_trace()


def intertwiner_space(K: FgpBimodule, L: FgpBimodule) -> list[Intertwiner]:
    """Basis of the bimodule maps ``K -> L``.

    Maps ``K -> L`` correspond, for each isotypic pair (left block ``s``, right
    block ``r``), to arbitrary ``mu^L x mu^K`` matrices; the returned basis uses
    matrix units and is orthonormal for :func:`hs_inner` when ``K`` is irreducible.
    """
    if not (K.left.same_as(L.left) and K.right.same_as(L.right)):
        raise BimoduleError("intertwiner spaces need common algebras")
    out = []
    for r in range(K.right.n_blocks):
        for s in range(K.left.n_blocks):
            for a in range(K.mult[s, r]):
                ca = K.columns(r, s, a)
                for b in range(L.mult[s, r]):
                    cb = L.columns(r, s, b)
                    blocks = [np.zeros((L.n * d, K.n * d), dtype=complex) for d in K.right.block_dims]
                    blocks[r] = cb @ ca.conj().T
                    out.append(Intertwiner(K, L, blocks))
    return out


def hom_dimension(K: FgpBimodule, L: FgpBimodule) -> int:
    return int(np.sum(K.mult * L.mult))


def is_irreducible(K: FgpBimodule) -> bool:
    return hom_dimension(K, K) == 1


def isomorphism(K: FgpBimodule, L: FgpBimodule, tol: float = 1e-8) -> Intertwiner | None:
    """A unitary ``K -> L`` if one exists (certified by ``u^*u = 1``, ``uu^* = 1``)."""
    if not (K.left.same_as(L.left) and K.right.same_as(L.right)):
        return None
    if not np.array_equal(K.mult, L.mult):
        return None
    blocks = [np.zeros((L.n * d, K.n * d), dtype=complex) for d in K.right.block_dims]
    for (s, r), m in K.multiplicities().items():
        for k in range(m):
            blocks[r] += L.columns(r, s, k) @ K.columns(r, s, k).conj().T
    u = Intertwiner(K, L, blocks)
    return u if u.is_unitary(tol) else None


def decompose_irreducibles(K: FgpBimodule) -> list[tuple[FgpBimodule, int]]:
    """Irreducible summands with multiplicities, ``K ~ sum_j K_j^{n_j}``."""
    return [(irreducible_bimodule(K.left, K.right, s, r), m) for (s, r), m in sorted(K.multiplicities().items())]


def isotypic_embeddings(K: FgpBimodule) -> list[tuple[FgpBimodule, Intertwiner]]:
    """Every copy of every irreducible summand with its isometric embedding into ``K``."""
    out = []
    for (s, r), m in sorted(K.multiplicities().items()):
        E = irreducible_bimodule(K.left, K.right, s, r)
        ce = E.columns(r, s, 0)
        for k in range(m):
            blocks = [np.zeros((K.n * d, E.n * d), dtype=complex) for d in K.right.block_dims]
            blocks[r] = K.columns(r, s, k) @ ce.conj().T
            out.append((E, Intertwiner(E, K, blocks)))
    return out


def subbimodule(K: FgpBimodule, f: Intertwiner, label: str | None = None) -> FgpBimodule:
    """The range of an isometric intertwiner ``f: E -> K`` as a bimodule in ``K``'s coordinates."""
    copies = {}
    for (s, r), cs in f.source.copies().items():
        copies[(s, r)] = [f.blocks[r] @ c for c in cs]
    return FgpBimodule.from_copies(K.left, K.right, K.n, copies, label or f"{K.label}'")


# ------------------------------------------------------------------ PP bases
def left_pp_basis(K: FgpBimodule, candidates: Iterable[BimoduleVector] | None = None,
                  seed: int = 0, max_random: int = 64, tol: float = 1e-9,
                  fallback: bool = True) -> list[BimoduleVector]:
    """Left Pimsner-Popa basis by Gram-Schmidt for the left inner product.

    Each accepted vector ``v`` has ``A<v, v>`` a projection and distinct vectors
    are orthogonal, so ``xi = sum_j A<xi, v_j> . v_j``.  Candidates are tried in
    order, followed (if ``fallback``) by seeded random vectors and then a
    complex basis.  Raises :class:`NotLeftFgpError` when the candidates cannot
    reach the full dimension.
    """
    target = K.dim
    basis: list[BimoduleVector] = []
    spanned = 0

    def stream():
        if candidates is not None:
            yield from candidates
        if fallback:
            rng = np.random.default_rng(seed)
            for _ in range(max_random):
                yield K.random_vector(rng)
            yield from K.scalar_basis()

    for w in stream():
        if spanned >= target:
            break
        r = w
        for _ in range(2):
            for v in basis:
                r = r - K.left_act(K.left_inner(r, v), v)
        h = K.left_inner(r, r)
        scale = max(1.0, K.left_inner(w, w).norm())
        if h.norm() <= tol * scale:
            continue
        inv = pinv_sqrt(h, tol=1e-9 * h.norm())
        v = K.left_act(inv, r)
        q = K.left_inner(v, v)
        rank = sum(d * int(np.sum(np.linalg.eigvalsh((b + b.conj().T) / 2) > 0.5))
                   for d, b in zip(K.left.block_dims, q.blocks))
        if rank == 0:
            continue
        basis.append(v)
        spanned += rank
    if spanned != target:
        raise NotLeftFgpError(f"not left fgp at this truncation: spanned {spanned} of {target}")
    return basis


def right_reconstruction_defect(K: FgpBimodule, xi: BimoduleVector, basis: Sequence[BimoduleVector] | None = None) -> float:
    basis = basis if basis is not None else K.right_pp_basis()
    acc = K.zero_vector()
    for u in basis:
        acc = acc + K.right_act(u, K.right_inner(u, xi))
    return (acc - xi).norm()


def left_reconstruction_defect(K: FgpBimodule, xi: BimoduleVector, basis: Sequence[BimoduleVector]) -> float:
    acc = K.zero_vector()
    for v in basis:
        acc = acc + K.left_act(K.left_inner(xi, v), v)
    return (acc - xi).norm()


def right_index(K: FgpBimodule) -> AlgebraElement:
    """``sum_i A<u_i, u_i>`` over the right basis (an element of the left algebra)."""
    acc = K.left.zero()
    for u in K.right_pp_basis():
        acc = acc + K.left_inner(u, u)
    return acc


def left_index(K: FgpBimodule, basis: Sequence[BimoduleVector] | None = None) -> AlgebraElement:
    """``sum_j <v_j|v_j>`` over a left basis (an element of the right algebra)."""
    basis = basis if basis is not None else left_pp_basis(K)
    acc = K.right.zero()
    for v in basis:
        acc = acc + K.right_inner(v, v)
    return acc


def watatani_index(K: FgpBimodule, left_basis: Sequence[BimoduleVector] | None = None,
                   embed: Callable[[AlgebraElement], AlgebraElement] | None = None) -> AlgebraElement:
    """Watatani index ``(sum_i A<u_i,u_i>) (sum_j <v_j|v_j>)``.

    When the two algebras differ, ``embed`` carries the left factor into the
    right algebra (for example the inclusion of one level of a tower into the next).
    """
    r_ind = right_index(K)
    l_ind = left_index(K, left_basis)
    if embed is None:
        if not K.left.same_as(K.right):
            raise BimoduleError("an embedding of the left algebra is needed when the algebras differ")
        return r_ind @ l_ind
    return embed(r_ind) @ l_ind


# ------------------------------------------------------------------ conjugates
@dataclass
class Conjugate:
    """The conjugate bimodule ``Kbar`` together with the bar map and duality maps."""

    source: FgpBimodule
    module: FgpBimodule
    basis: list[BimoduleVector]

    def bar(self, xi: BimoduleVector) -> BimoduleVector:
        """Coordinates of ``xibar``: the column ``(A<v_j, xi>)_j`` (conjugate linear in xi)."""
        K, C = self.source, self.module
        blocks = []
        for s, d in enumerate(K.left.block_dims):
            blocks.append(np.vstack([K.left_inner(v, xi).blocks[s] for v in self.basis]))
        return BimoduleVector(C, blocks)

    def unbar(self, zeta: BimoduleVector) -> BimoduleVector:
        """Inverse of :meth:`bar`: ``sum_j (coord_j)^* . v_j``."""
        K = self.source
        acc = K.zero_vector()
        A = K.left
        for j, v in enumerate(self.basis):
            c = A.element([b[j * d:(j + 1) * d, :] for b, d in zip(zeta.blocks, A.block_dims)])
            acc = acc + K.left_act(c.adj(), v)
        return acc

    def ev(self) -> tuple[TensorProduct, Intertwiner]:
        """``ev: Kbar (x) K -> B``, ``ev(etabar (x) xi) = <eta|xi>``."""
        KK = relative_tensor(self.module, self.source)
        B = self.source.right
        blocks = []
        for r, d in enumerate(B.block_dims):
            blocks.append(np.hstack([v.blocks[r].conj().T for v in self.basis]))
        return KK, Intertwiner(KK.module, trivial_bimodule(B), blocks)

    def coev(self) -> tuple[TensorProduct, Intertwiner]:
        """``coev: A -> K (x) Kbar``, ``coev(a) = a . sum_i u_i (x) ubar_i``."""
        KK = relative_tensor(self.source, self.module)
        acc = KK.module.zero_vector()
        for u in self.source.right_pp_basis():
            acc = acc + KK.vector(u, self.bar(u))
        return KK, Intertwiner(trivial_bimodule(self.source.left), KK.module, acc.blocks)


def conjugate(K: FgpBimodule, left_basis: Sequence[BimoduleVector] | None = None,
              label: str | None = None, validate: bool = False) -> Conjugate:
    """Conjugate bimodule realized through a left Pimsner-Popa basis ``{v_j}``.

    ``Kbar`` sits in ``A^M`` via ``xibar -> (A<v_j, xi>)_j``; the left action of
    ``b`` in ``B`` has entries ``A<v_j . b, v_k>``.
    """
    basis = list(left_basis) if left_basis is not None else left_pp_basis(K)
    M = len(basis)
    A, B = K.left, K.right

    def image(r, i, j):
        e = B.matrix_unit(r, i, j)
        moved = [K.right_act(v, e) for v in basis]
        rows = []
        for vj in moved:
            rows.append([K.left_inner(vj, vk) for vk in basis])
        return [np.block([[rows[a][b].blocks[s] for b in range(M)] for a in range(M)])
                for s in range(A.n_blocks)]

    C = FgpBimodule.from_images(B, A, M, image, label or f"conj({K.label})", validate=validate)
    return Conjugate(K, C, basis)


def zigzag_defects(cj: Conjugate) -> tuple[float, float]:
    """Defects of ``(id (x) ev)(coev (x) id) = id_K`` and ``(ev (x) id)(id (x) coev) = id_Kbar``."""
    K, Kb = cj.source, cj.module
    _, ev = cj.ev()
    _, coev = cj.coev()
    # (coev (x) id_K): A (x) K = K -> (K Kbar) K, amplified through K's left action.
    c_id = amplify(K, coev.blocks, K.n * Kb.n, 1)
    id_e = [np.kron(np.eye(K.n), m) for m in ev.blocks]
    first = max(np.linalg.norm(a @ b - p) for a, b, p in zip(id_e, c_id, K.projection()))
    # (id_Kbar (x) coev): Kbar (x) A = Kbar -> Kbar (K Kbar); then ev (x) id_Kbar.
    id_c = [np.kron(np.eye(Kb.n), m) for m in coev.blocks]
    e_id = amplify(Kb, ev.blocks, 1, Kb.n * K.n)
    second = max(np.linalg.norm(a @ b - p) for a, b, p in zip(e_id, id_c, Kb.projection()))
    return float(first), float(second)


# ------------------------------------------------------------ tensoring maps
def tensor_maps_left(f: Intertwiner, M: FgpBimodule) -> list[np.ndarray]:
    """Blocks of ``f (x) id_M`` in the coordinates of ``(source (x) M) -> (target (x) M)``."""
    return amplify(M, f.blocks, f.target.n, f.source.n)


def tensor_maps_right(K: FgpBimodule, g: Intertwiner) -> list[np.ndarray]:
    """Blocks of ``id_K (x) g``."""
    return [np.kron(np.eye(K.n), m) for m in g.blocks]


# ------------------------------------------------------------------ probes
def generates(K: FgpBimodule, xi: BimoduleVector, tol: float = 1e-8) -> bool:
    """Whether ``span{a . xi . b}`` is all of ``K``.

    The span is grown from ``xi`` by applying generators of both algebras to
    each newly found direction until nothing new appears.
    """
    ops = ([lambda v, g=g: K.left_act(g, v) for g in K.left.generators()]
           + [lambda v, g=g: K.right_act(v, g) for g in K.right.generators()])
    scale = max(xi.norm(), 1e-300)
    Q = np.zeros((xi.flat().size, 0), dtype=complex)
    frontier = [xi]
    while frontier and Q.shape[1] < K.dim:
        new = []
        for v in frontier:
            f = v.flat()
            r = f - Q @ (Q.conj().T @ f)
            r = r - Q @ (Q.conj().T @ r)
            nr = np.linalg.norm(r)
            if nr > tol * max(scale, np.linalg.norm(f)):
                Q = np.hstack([Q, (r / nr)[:, None]])
                new.append(v)
        frontier = [op(v) for v in new for op in ops]
    return Q.shape[1] == K.dim


def generator_probe(K: FgpBimodule, samples: int, seed: int = 0) -> dict:
    """Sample random vectors and record how many generate ``K`` algebraically.

    Whether every nonzero vector of an irreducible bimodule generates it is an
    open question; this only reports the observed fraction.
    """
    rng = np.random.default_rng(seed)
    hits = sum(generates(K, K.random_vector(rng)) for _ in range(samples))
    return {"samples": samples, "generating": int(hits), "seed": seed}


def left_generates(K: FgpBimodule, vectors: Sequence[BimoduleVector], tol: float = 1e-9) -> bool:
    """Whether the vectors left-generate ``K`` (Gram-Schmidt with no fallback)."""
    try:
        left_pp_basis(K, candidates=vectors, fallback=False, tol=tol)
    except NotLeftFgpError:
        return False
    return True


def mostow_radius(K: FgpBimodule, basis: Sequence[BimoduleVector], seed: int = 0,
                  hi: float = 10.0, steps: int = 30) -> float:
    """Bisection for the largest perturbation size along a fixed random direction
    under which the perturbed basis still reconstructs (left-generates) ``K``."""
    rng = np.random.default_rng(seed)
    dirs = []
    for _ in basis:
        d = K.random_vector(rng)
        dirs.append(d * (1.0 / max(d.norm(), 1e-300)))

    def ok(t):
        return left_generates(K, [v + d * t for v, d in zip(basis, dirs)])

    lo = 0.0
    if ok(hi):
        return hi
    for _ in range(steps):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
