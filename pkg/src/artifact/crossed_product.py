"""The algebraic crossed product ``(A x| B)`` of an action by a graded algebra object.

Elements are finite sums ``sum_c sum_i x_{c,i} (x) e_{c,i}`` with ``x_{c,i}`` in the
bimodule ``F(c)`` and ``e_{c,i}`` the standard basis of the fiber ``B(c)``.  The
product runs over the chosen isometries of the category:

    (x (x) f)(y (x) g) = sum_{e, alpha} alpha^*(x (x) y) (x) B(alpha^*) m(f (x) g).

All bimodule work is delegated to an *action* object (see :class:`BimoduleAction`
and :class:`artifact.models.cuntz.CuntzAction`) so that concrete models may use
their own coordinates for ``F(c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra_object import GradedAlgebraObject, SubObject
from .bimodule import BimoduleVector, FgpBimodule
from .cstar import AlgebraElement, pinv_sqrt
from .tensor_cat import CategoryData


class WindowOverflowError(RuntimeError):
    """A product or star would leave the grading window."""


# ---------------------------------------------------------------- actions
class BimoduleAction:
    """Action of a category whose simples are realized as :class:`FgpBimodule` objects."""

    def __init__(self, category: CategoryData):
        if not category.simples:
            raise ValueError("category has no realized simples")
        self.category = category
        self.algebra = category.simples[category.unit].left

    # coefficients -------------------------------------------------------------
    def zero(self, c) -> BimoduleVector:
        return self.category.simples[c].zero_vector()

    def random(self, c, rng: np.random.Generator) -> BimoduleVector:
        return self.category.simples[c].random_vector(rng)

    def basis(self, c) -> list[BimoduleVector]:
        return self.category.simples[c].scalar_basis()

    def flat(self, c, x: BimoduleVector) -> np.ndarray:
        return x.flat()

    def coeff_norm(self, c, x: BimoduleVector) -> float:
        return self.category.simples[c].norm(x)

    def tensor(self, a, b, c, alpha, x: BimoduleVector, y: BimoduleVector) -> BimoduleVector:
        cat = self.category
        T = cat.tensors[(a, b)]
        iso = cat.isometries[(a, b)][c][alpha]
        return iso.adj()(T.vector(x, y))

    def conj(self, c, x: BimoduleVector) -> BimoduleVector:
        J = self.category.conj_maps.get(c)
        if J is None:
            raise NotImplementedError("category carries no conjugation maps")
        target = self.category.simples[self.category.dual[c]]
        val = J(self._as_algebra(x))
        return target.vector(val.blocks)

    def left(self, a: AlgebraElement, c, x: BimoduleVector) -> BimoduleVector:
        return self.category.simples[c].left_act(a, x)

    def right(self, x: BimoduleVector, c, a: AlgebraElement) -> BimoduleVector:
        return self.category.simples[c].right_act(x, a)

    def inner(self, c, x: BimoduleVector, y: BimoduleVector) -> AlgebraElement:
        return self.category.simples[c].right_inner(x, y)

    def from_algebra(self, a: AlgebraElement) -> BimoduleVector:
        return self.category.simples[self.category.unit].vector(a.blocks)

    def to_algebra(self, x: BimoduleVector) -> AlgebraElement:
        return self._as_algebra(x)

    def _as_algebra(self, x: BimoduleVector) -> AlgebraElement:
        if x.parent.n != 1:
            raise NotImplementedError("only rank-one coordinates identify with algebra elements")
        return self.algebra.element(list(x.blocks))

    # algebra ------------------------------------------------------------------
    def algebra_generators(self) -> list[AlgebraElement]:
        return self.algebra.generators()

    def algebra_random(self, rng) -> AlgebraElement:
        return self.algebra.random(rng)

    def algebra_one(self) -> AlgebraElement:
        return self.algebra.identity()

    def trace(self, a: AlgebraElement) -> float:
        return complex(self.algebra.trace(a))

    def algebra_flat(self, a: AlgebraElement) -> np.ndarray:
        return a.to_vector()

    def coefficient_dim(self, c) -> int:
        return self.category.simples[c].dim

    def metric(self, c) -> np.ndarray:
        """Weights ``w`` with ``tau(<x|y>) = sum conj(flat x) w flat y``."""
        K = self.category.simples[c]
        return np.concatenate([np.full(K.n * d * d, w) for d, w in zip(K.right.block_dims, K.right.weights)])

    # cyclic presentation ----------------------------------------------------------
    def cyclic_vector(self, c) -> BimoduleVector:
        K = self.category.simples[c]
        if K.n != 1:
            raise NotImplementedError("cyclic presentation needs rank-one bimodules")
        return K.right_pp_basis()[0]

    def relations(self, c) -> list[list[tuple]]:
        """Relations ``sum x zeta y = 0`` satisfied by the cyclic vector ``p`` of ``F(c)``.

        ``a . p = p . phi(a)`` for generators ``a`` and ``p . p = p``; these present
        ``F(c)`` as a cyclic bimodule, so intertwiners out of it are exactly the
        vectors satisfying the same relations.
        """
        K = self.category.simples[c]
        if K.n != 1:
            raise NotImplementedError("cyclic presentation needs rank-one bimodules")
        A = self.algebra
        p = A.element(K.projection())
        one = A.identity()
        rels = [[(one, p), (-one, one)]]
        for a in A.generators():
            rels.append([(a, one), (-one, A.element(K.phi(a)))])
        return rels


# ---------------------------------------------------------------- elements
@dataclass(frozen=True)
class CrossedElement:
    parent: "CrossedProduct"
    terms: dict

    def __add__(self, other: "CrossedElement") -> "CrossedElement":
        return self.parent._combine(self, other, 1.0)

    def __sub__(self, other: "CrossedElement") -> "CrossedElement":
        return self.parent._combine(self, other, -1.0)

    def __mul__(self, z) -> "CrossedElement":
        return CrossedElement(self.parent, {c: tuple(v * z for v in vs) for c, vs in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "CrossedElement") -> "CrossedElement":
        return self.parent.mul(self, other)

    def adj(self) -> "CrossedElement":
        return self.parent.star(self)

    @property
    def support(self) -> list:
        return [c for c in self.parent.category.labels if c in self.terms]

    def coefficient_norms(self) -> dict:
        act = self.parent.action
        return {c: max((act.coeff_norm(c, v) for v in vs), default=0.0) for c, vs in self.terms.items()}

    def max_coefficient(self) -> float:
        return max(self.coefficient_norms().values(), default=0.0)


class CrossedProduct:
    """``(A x|_F B)`` restricted to the labels of ``window`` (default: all labels)."""

    def __init__(self, action, obj: GradedAlgebraObject, window: Iterable | None = None):
        self.action = action
        self.obj = obj
        self.category = obj.category
        labels = obj.support if window is None else [c for c in window if obj.dims.get(c, 0)]
        self.window = [c for c in self.category.labels if c in set(labels)]
        u = obj.unit
        self._unit_scale = complex(u[0]) if obj.dims[self.category.unit] == 1 else 1.0

    # construction -----------------------------------------------------------------
    def element(self, terms: dict) -> CrossedElement:
        clean = {}
        for c, vs in terms.items():
            if c not in self.window:
                raise WindowOverflowError(f"label {c} lies outside the window")
            vs = tuple(vs)
            if len(vs) != self.obj.dims[c]:
                raise ValueError(f"label {c} needs {self.obj.dims[c]} coefficients")
            clean[c] = vs
        return CrossedElement(self, clean)

    def zero(self) -> CrossedElement:
        return CrossedElement(self, {})

    def from_algebra(self, a) -> CrossedElement:
        u0 = self.category.unit
        return CrossedElement(self, {u0: (self.action.from_algebra(a) * self._unit_scale,)})

    def one(self) -> CrossedElement:
        return self.from_algebra(self.action.algebra_one())

    def homogeneous(self, c, x, i: int = 0) -> CrossedElement:
        vs = [self.action.zero(c) for _ in range(self.obj.dims[c])]
        vs[i] = x
        return self.element({c: vs})

    def random_element(self, rng: np.random.Generator, labels: Sequence | None = None) -> CrossedElement:
        labels = self.window if labels is None else labels
        return self.element({c: [self.action.random(c, rng) for _ in range(self.obj.dims[c])] for c in labels})

    def basis(self, labels: Sequence | None = None) -> list[CrossedElement]:
        """A complex basis of the windowed crossed product (restricted to ``labels``)."""
        out = []
        for c in (self.window if labels is None else labels):
            for i in range(self.obj.dims[c]):
                for x in self.action.basis(c):
                    out.append(self.homogeneous(c, x, i))
        return out

    def flat(self, x: CrossedElement, labels: Sequence | None = None) -> np.ndarray:
        parts = []
        for c in (self.window if labels is None else labels):
            vs = x.terms.get(c)
            for i in range(self.obj.dims[c]):
                v = vs[i] if vs is not None else self.action.zero(c)
                parts.append(self.action.flat(c, v))
        return np.concatenate(parts) if parts else np.zeros(0)

    def _combine(self, x: CrossedElement, y: CrossedElement, s: float) -> CrossedElement:
        terms = dict(x.terms)
        for c, vs in y.terms.items():
            if c in terms:
                terms[c] = tuple(a + b * s for a, b in zip(terms[c], vs))
            else:
                terms[c] = tuple(b * s for b in vs)
        return CrossedElement(self, terms)

    # algebra ------------------------------------------------------------------------
    def mul(self, x: CrossedElement, y: CrossedElement) -> CrossedElement:
        cat, obj, act = self.category, self.obj, self.action
        acc: dict = {}
        for a, xs in x.terms.items():
            for b, ys in y.terms.items():
                chans = cat.channels(a, b)
                if not chans and getattr(cat, "window", None) is not None:
                    if any(act.coeff_norm(a, v) for v in xs) and any(act.coeff_norm(b, v) for v in ys):
                        raise WindowOverflowError(f"product of labels {a} and {b} leaves the window")
                for c, al in chans:
                    if not obj.dims.get(c, 0):
                        continue
                    if c not in self.window:
                        if any(act.coeff_norm(a, v) for v in xs) and any(act.coeff_norm(b, v) for v in ys):
                            raise WindowOverflowError(f"product of labels {a} and {b} leaves the window")
                        continue
                    M = obj.component(a, b, c, al)
                    out = acc.setdefault(c, [None] * obj.dims[c])
                    for i, xi in enumerate(xs):
                        for j, yj in enumerate(ys):
                            col = M[:, i, j]
                            if not np.any(col):
                                continue
                            t = act.tensor(a, b, c, al, xi, yj)
                            for k in np.nonzero(col)[0]:
                                term = t * col[k]
                                out[k] = term if out[k] is None else out[k] + term
        terms = {c: tuple(v if v is not None else act.zero(c) for v in vs) for c, vs in acc.items()}
        return CrossedElement(self, terms)

    def star(self, x: CrossedElement) -> CrossedElement:
        cat, obj, act = self.category, self.obj, self.action
        terms = {}
        for c, xs in x.terms.items():
            cb = cat.dual[c]
            if cb not in self.window:
                raise WindowOverflowError(f"dual label {cb} lies outside the window")
            S = obj.star[c]
            J = [act.conj(c, v) for v in xs]
            vs = []
            for jp in range(obj.dims[cb]):
                acc = act.zero(cb)
                for j, Jv in enumerate(J):
                    if S[jp, j]:
                        acc = acc + Jv * S[jp, j]
                vs.append(acc)
            terms[cb] = tuple(vs)
        return CrossedElement(self, terms)

    def left_mul(self, a, x: CrossedElement) -> CrossedElement:
        return CrossedElement(self, {c: tuple(self.action.left(a, c, v) for v in vs) for c, vs in x.terms.items()})

    def right_mul(self, x: CrossedElement, a) -> CrossedElement:
        return CrossedElement(self, {c: tuple(self.action.right(v, c, a) for v in vs) for c, vs in x.terms.items()})

    def expectation(self, x: CrossedElement):
        """The unit component as an element of ``A``."""
        u0 = self.category.unit
        if u0 not in x.terms:
            return self.action.to_algebra(self.action.zero(u0)) * 0
        return self.action.to_algebra(x.terms[u0][0] * (1.0 / self._unit_scale))

    def inner(self, x: CrossedElement, y: CrossedElement):
        """``<x|y>_A = E(x^* y)``."""
        return self.expectation(self.mul(self.star(x), y))

    def module_inner(self, x: CrossedElement, y: CrossedElement):
        """``sum_c sum_ij (e_ci|e_cj) <x_ci|y_cj>``: equals ``E(x^* y)`` without forming products."""
        act = self.action
        acc = None
        for c in self.window:
            if c not in x.terms or c not in y.terms:
                continue
            G = self.obj.fiber_gram(c)
            for i, xi in enumerate(x.terms[c]):
                for j, yj in enumerate(y.terms[c]):
                    if abs(G[i, j]) < 1e-15:
                        continue
                    t = act.inner(c, xi, yj) * G[i, j]
                    acc = t if acc is None else acc + t
        return acc if acc is not None else self.expectation(self.zero())

    def close(self, x: CrossedElement, y: CrossedElement, tol: float = 1e-9) -> bool:
        return coefficient_distance(x, y) <= tol


def coefficient_distance(x: CrossedElement, y: CrossedElement) -> float:
    """Max Hilbert-module norm over the coefficients of ``x - y``."""
    return (x - y).max_coefficient()


# ---------------------------------------------------------------- norm estimates
def windowed_gram(P: CrossedProduct, basis: Sequence[CrossedElement]) -> np.ndarray:
    """Gram matrix ``tau(E(x_i^* x_j))``."""
    act = P.action
    n = len(basis)
    G = np.zeros((n, n), dtype=complex)
    for i, x in enumerate(basis):
        sx = P.star(x)
        for j in range(i, n):
            if len(x.terms) == 1 and len(basis[j].terms) == 1 and set(x.terms) != set(basis[j].terms):
                continue  # distinct gradings are orthogonal
            v = act.trace(P.expectation(P.mul(sx, basis[j])))
            G[i, j] = v
            G[j, i] = np.conj(v)
    return G


def correspondence_dimension(P: CrossedProduct, labels: Sequence | None = None, tol: float = 1e-9) -> int:
    """Rank of the Gram matrix of the windowed basis."""
    G = windowed_gram(P, P.basis(labels))
    w = np.linalg.eigvalsh((G + G.conj().T) / 2)
    return int(np.sum(w > tol * max(1.0, w.max(initial=0.0))))


def hilbert_coordinates(P: CrossedProduct, x: CrossedElement, labels: Sequence) -> np.ndarray:
    """Coordinates in which ``tau(E(x^* y))`` is the standard inner product.

    Uses ``E((xi (x) f)^* (eta (x) g)) = <xi|eta> (f|g)`` with ``(f|g)`` the
    canonical fiber form, so different labels are orthogonal.
    """
    act = P.action
    parts = []
    for c in labels:
        d = P.obj.dims[c]
        w = np.sqrt(act.metric(c))
        vs = x.terms.get(c)
        F = np.stack([act.flat(c, vs[i] if vs is not None else act.zero(c)) * w for i in range(d)])
        G = P.obj.fiber_gram(c)
        ev, U = np.linalg.eigh((G + G.conj().T) / 2)
        root = (U * np.sqrt(np.clip(ev, 0, None))) @ U.conj().T
        parts.append((root.T @ F).reshape(-1))
    return np.concatenate(parts) if parts else np.zeros(0)


def operator_norm_estimate(P: CrossedProduct, y: CrossedElement, labels: Sequence | None = None) -> dict:
    """Lower bound for the reduced norm of ``y`` from its action on windowed vectors.

    Uses the Hilbert norm ``tau(E(x^* x))`` on basis vectors whose products with
    ``y`` stay in the window; the window used is returned with the estimate.
    """
    cat = P.category
    if labels is None:
        labels = []
        for c in P.window:
            ok = True
            for d in y.support:
                for e, _ in cat.channels(d, c):
                    if P.obj.dims.get(e, 0) and e not in P.window:
                        ok = False
                if getattr(cat, "window", None) is not None and abs(d + c) > cat.window:
                    ok = False
            if ok:
                labels.append(c)
    basis = P.basis(labels)
    out_labels = list(P.window)
    X = np.stack([hilbert_coordinates(P, x, out_labels) for x in basis], axis=1)
    Y = np.stack([hilbert_coordinates(P, P.mul(y, x), out_labels) for x in basis], axis=1)
    G = X.conj().T @ X
    H = Y.conj().T @ Y
    w, V = np.linalg.eigh((G + G.conj().T) / 2)
    keep = w > 1e-10 * max(1.0, w.max(initial=0.0))
    Q = V[:, keep] / np.sqrt(w[keep])
    R = Q.conj().T @ H @ Q
    top = float(np.linalg.eigvalsh((R + R.conj().T) / 2).max(initial=0.0))
    return {"norm_lower_bound": float(np.sqrt(max(top, 0.0))), "labels": list(labels), "basis_size": len(basis)}


def multiplier_bound(P: CrossedProduct, y: CrossedElement) -> float:
    """Upper bound ``C_y`` with ``E(x^* y^* y x) <= C_y E(x^* x)``.

    Each homogeneous term ``x_{c,i} (x) e_{c,i}`` acts by a block operator from
    fiber ``d`` to fiber ``e`` with norm at most ``||x_{c,i}|| ||M(e_i (x) -)||``;
    the Schur test bounds the block operator, and the terms are summed.
    """
    cat, obj, act = P.category, P.obj, P.action
    total = 0.0
    for c, xs in y.terms.items():
        for i, xi in enumerate(xs):
            nx = act.coeff_norm(c, xi)
            if not nx:
                continue
            blocks: dict = {}
            for d in P.obj.support:
                for e, al in cat.channels(c, d):
                    if not obj.dims.get(e, 0):
                        continue
                    M = obj.component(c, d, e, al)[:, i, :]
                    blocks[(e, d)] = blocks.get((e, d), 0.0) + float(np.linalg.norm(M, 2))
            rows: dict = {}
            cols: dict = {}
            for (e, d), v in blocks.items():
                rows[e] = rows.get(e, 0.0) + v
                cols[d] = cols.get(d, 0.0) + v
            schur = np.sqrt(max(rows.values(), default=0.0) * max(cols.values(), default=0.0))
            total += nx * schur
    return float(total ** 2)


# ---------------------------------------------------------------- Pimsner-Popa
def pp_inequality_check(P: CrossedProduct, K: FgpBimodule, embed: Callable, samples: int = 100,
                        seed: int = 0, slack: float = 1e-9, right_basis=None, f_norm: float | None = None) -> dict:
    """Check ``(||f|| / ||S||^{1/2}) ||fcheck(k)|| <= ||k||_A <= ||fcheck(k)|| / ||f||``.

    ``embed(k)`` returns the crossed element ``fcheck(k)`` with ``fcheck(k) Omega = f(k)``;
    ``S = sum_i fcheck(u_i) fcheck(u_i)^*`` over a right basis ``u_i`` of ``K``.
    ``||f||`` is computed from ``<f(k)|f(k)> = ||f||^2 <k|k>`` unless supplied.
    Operator norms are windowed lower bounds, which only weakens the left-hand
    side; the right-hand side uses ``||fcheck(k)|| >= ||E(fcheck(k)^* fcheck(k))||^{1/2}``.
    """
    rng = np.random.default_rng(seed)
    basis = right_basis if right_basis is not None else K.right_pp_basis()
    if f_norm is None:
        k0 = K.random_vector(rng)
        fk = embed(k0)
        num = P.inner(fk, fk).norm()
        den = K.right_inner(k0, k0).norm()
        f_norm = float(np.sqrt(num / den))
    if f_norm <= 1e-14:
        raise ValueError("f is zero")
    S = P.zero()
    for u in basis:
        fu = embed(u)
        S = S + P.mul(fu, P.star(fu))
    S_norm = operator_norm_estimate(P, S)["norm_lower_bound"]
    commutes = max(coefficient_distance(P.mul(P.from_algebra(a), S), P.mul(S, P.from_algebra(a)))
                   for a in P.action.algebra_generators())
    sym = coefficient_distance(S, P.star(S))
    worst_left, worst_right = -np.inf, -np.inf
    for _ in range(samples):
        k = K.random_vector(rng)
        fk = embed(k)
        op = operator_norm_estimate(P, fk)["norm_lower_bound"]
        kn = K.norm(k)
        left = f_norm / np.sqrt(S_norm) * op - kn
        right = kn - op / f_norm
        worst_left = max(worst_left, left)
        worst_right = max(worst_right, right)
    return {
        "f_norm": f_norm, "basis_sum_norm": S_norm, "basis_sum_commutator": commutes,
        "basis_sum_selfadjoint_defect": sym,
        "max_left_violation": float(worst_left), "max_right_violation": float(worst_right),
        "samples": samples, "seed": seed,
        "passed": bool(worst_left <= slack and worst_right <= slack and commutes < 1e-8),
    }


# ---------------------------------------------------------------- relation systems
def _solve_relations(P: CrossedProduct, rels: list, labels: Sequence, use_product: bool,
                     tol: float = 1e-8) -> tuple[np.ndarray, list[CrossedElement]]:
    """Null space of ``zeta -> (sum x zeta y)_rel`` over the windowed crossed product.

    With ``use_product`` the terms are computed with the crossed-product
    multiplication, otherwise with the bimodule actions on each coefficient.
    """
    basis = P.basis(labels)
    images = []
    for rel in rels:
        row = []
        for z in basis:
            acc = None
            for x, y in rel:
                if use_product:
                    t = P.mul(P.mul(P.from_algebra(x), z), P.from_algebra(y))
                else:
                    t = P.right_mul(P.left_mul(x, z), y)
                acc = t if acc is None else acc + t
            row.append(acc)
        images.append(row)
    M = np.vstack([flat_many(P, row, labels) for row in images]) if basis else np.zeros((0, 0))
    if M.size == 0:
        return np.zeros((len(basis), 0)), basis
    if M.shape[0] > M.shape[1]:
        M = np.linalg.qr(M, mode="r")
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    scale = max(1.0, s.max(initial=0.0))
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T, basis


def flat_many(P: CrossedProduct, xs: Sequence[CrossedElement], labels: Sequence) -> np.ndarray:
    """Columns of coordinates for several crossed elements, in a common frame."""
    act = P.action
    blocks = []
    for c in labels:
        for i in range(P.obj.dims[c]):
            coeffs = [x.terms[c][i] if c in x.terms else act.zero(c) for x in xs]
            if hasattr(act, "flat_many"):
                blocks.append(act.flat_many(c, coeffs))
            else:
                blocks.append(np.stack([act.flat(c, v) for v in coeffs], axis=1))
    return np.vstack(blocks) if blocks else np.zeros((0, len(xs)))


def _combine_basis(P: CrossedProduct, basis: Sequence[CrossedElement], coeffs: np.ndarray) -> CrossedElement:
    acc = P.zero()
    for b, z in zip(basis, coeffs):
        if abs(z) > 1e-15:
            acc = acc + b * z
    return acc


def _subspace_gap(U: np.ndarray, V: np.ndarray) -> float:
    """Largest distance of a unit vector of one span from the other span."""
    if U.shape[1] == 0 and V.shape[1] == 0:
        return 0.0
    if U.shape[1] == 0 or V.shape[1] == 0:
        return 1.0
    Qu, _ = np.linalg.qr(U)
    Qv, _ = np.linalg.qr(V)
    a = np.linalg.norm(Qu - Qv @ (Qv.conj().T @ Qu), 2)
    b = np.linalg.norm(Qv - Qu @ (Qu.conj().T @ Qv), 2)
    return float(max(a, b))


def frobenius_dim_check(P: CrossedProduct, c, labels: Sequence | None = None, relations=None,
                        normalizer: int = 1, tol: float = 1e-8) -> dict:
    """Compare the two sides of Frobenius reciprocity for ``K = F(c)`` at truncation.

    The diamond space of bimodule maps ``K -> B`` is the solution space of the
    cyclic relations of ``K`` computed through the bimodule actions on each
    coefficient; the right-module maps ``K (x) B -> B`` are determined by the
    image of ``1 (x) 1``, which solves the same relations computed with the
    crossed-product multiplication.  Round trips compare the two solution
    spaces and the values ``f(k)`` produced by each side on random vectors.
    """
    labels = P.window if labels is None else labels
    rels = P.action.relations(c) if relations is None else relations
    N1, basis = _solve_relations(P, rels, labels, use_product=False, tol=tol)
    N2, _ = _solve_relations(P, rels, labels, use_product=True, tol=tol)
    gap = _subspace_gap(N1, N2)
    # Evaluate both realizations of each solution on k = a . p . b.
    rng = np.random.default_rng(0)
    roundtrip = 0.0
    for j in range(N1.shape[1]):
        zeta = _combine_basis(P, basis, N1[:, j])
        for _ in range(3):
            a, b = P.action.algebra_random(rng), P.action.algebra_random(rng)
            via_modules = P.right_mul(P.left_mul(a, zeta), b)
            via_product = P.mul(P.mul(P.from_algebra(a), zeta), P.from_algebra(b))
            roundtrip = max(roundtrip, coefficient_distance(via_modules, via_product))
    d1, d2 = N1.shape[1], N2.shape[1]
    per_label = {}
    offset = 0
    for lab in labels:
        size = P.obj.dims[lab] * len(P.action.basis(lab))
        sub1 = N1[offset:offset + size]
        per_label[lab] = int(np.linalg.matrix_rank(sub1, tol=1e-8)) if sub1.size else 0
        offset += size
    return {
        "label": c, "diamond_dim": d1, "intertwiner_dim": d2,
        "normalized_dims": (d1 / normalizer, d2 / normalizer),
        "per_label_rank": per_label,
        "subspace_gap": gap, "roundtrip_defect": roundtrip,
        "passed": bool(d1 == d2 and gap < tol * 1e2 and roundtrip < tol),
    }


def central_vectors(P: CrossedProduct, c, labels: Sequence | None = None, tol: float = 1e-8) -> list[CrossedElement]:
    """Basis of ``{zeta : a zeta = zeta phi_c(a)}`` in the window (via crossed products)."""
    labels = P.window if labels is None else labels
    N, basis = _solve_relations(P, P.action.relations(c), labels, use_product=True, tol=tol)
    return [_combine_basis(P, basis, N[:, j]) for j in range(N.shape[1])]


def peter_weyl_report(P: CrossedProduct, labels: Sequence | None = None, normalizer: int = 1,
                      fiber_dims: dict | None = None) -> dict:
    """Multiplicities ``n_c = dim Hom(F(c) -> B) / normalizer`` for each window label.

    ``normalizer`` is the dimension of the endomorphisms of a simple (the
    center of ``A`` for the permutation models, 1 otherwise).  The relative
    commutant profile lists ``n_c^2`` per isotypic block.
    """
    labels = P.window if labels is None else labels
    mult = {}
    for c in labels:
        N, _ = _solve_relations(P, P.action.relations(c), labels, use_product=True)
        mult[c] = N.shape[1] / normalizer
    fib = fiber_dims if fiber_dims is not None else {c: P.obj.dims.get(c, 0) for c in labels}
    total = sum(mult[c] * P.action.coefficient_dim(c) for c in labels)
    corr = correspondence_dimension(P, labels)
    names = P.category.names
    return {
        "multiplicities": {names[c]: mult[c] for c in labels},
        "fiber_dims": {names[c]: fib[c] for c in labels},
        "matches_fibers": bool(all(abs(mult[c] - fib[c]) < 1e-9 for c in labels)),
        "weighted_sum": total, "correspondence_dim": corr,
        "complete": bool(abs(total - corr) < 1e-9),
        "relative_commutant_profile": [int(round(mult[c])) for c in labels if mult[c]],
        "relative_commutant_dim": float(sum(m ** 2 for m in mult.values())),
    }


def delta_roundtrip_check(P: CrossedProduct, labels: Sequence | None = None, samples: int = 3,
                          seed: int = 0, normalizer: int = 1, tol: float = 1e-8) -> dict:
    """Recover fiber dimensions and structure constants from central vectors.

    For each label the central vectors ``zeta`` with ``a zeta = zeta phi_c(a)``
    span the recovered fiber ``Hom(F(c) -> B)``.  The recovered intertwiner
    ``f_c(x . p . y) = x . zeta_c . y`` is fixed by the gauge choice
    ``zeta_c = p (x) e_c`` (the residual of that choice is reported).  The
    recovered product constant ``t_ab`` is read off from
    ``f_a(k) f_b(l) = t_ab f_c(k (x) l)`` on random ``k, l`` and compared with
    the multiplication of ``B``.  Only pointed, multiplicity-free pairs are
    compared entrywise.
    """
    labels = P.window if labels is None else labels
    cat, obj, act = P.category, P.obj, P.action
    rng = np.random.default_rng(seed)
    zetas, dims, gauge = {}, {}, 0.0
    for c in labels:
        N, basis = _solve_relations(P, act.relations(c), labels, use_product=True, tol=tol)
        dims[c] = N.shape[1]
        if not N.shape[1]:
            continue
        canon = P.homogeneous(c, act.cyclic_vector(c))
        B = flat_many(P, [_combine_basis(P, basis, N[:, j]) for j in range(N.shape[1])] + [canon], labels)
        coef, *_ = np.linalg.lstsq(B[:, :-1], B[:, -1], rcond=None)
        gauge = max(gauge, float(np.linalg.norm(B[:, :-1] @ coef - B[:, -1])))
        zetas[c] = canon
    defect, residual, compared = 0.0, 0.0, 0

    def vec(c):
        x, y = act.algebra_random(rng), act.algebra_random(rng)
        k = act.left(x, c, act.right(act.cyclic_vector(c), c, y))
        return k, P.left_mul(x, P.right_mul(zetas[c], y))

    for a in zetas:
        for b in zetas:
            chans = [(e, al) for e, al in cat.channels(a, b) if e in zetas]
            if len(chans) != 1 or obj.dims[a] != 1 or obj.dims[b] != 1:
                continue
            e, al = chans[0]
            m = complex(obj.component(a, b, e, al)[0, 0, 0])
            for _ in range(samples):
                k, fk = vec(a)
                l, fl = vec(b)
                lhs = flat_many(P, [P.mul(fk, fl), P.homogeneous(e, act.tensor(a, b, e, al, k, l))], labels)
                L, R = lhs[:, 0], lhs[:, 1]
                rr = np.vdot(R, R)
                if abs(rr) < 1e-20:
                    continue
                t = np.vdot(R, L) / rr
                residual = max(residual, float(np.linalg.norm(L - t * R) / max(1.0, np.linalg.norm(L))))
                defect = max(defect, abs(t - m))
            compared += 1
    return {"recovered_dims": {cat.names[c]: dims[c] / normalizer for c in labels},
            "fiber_dims": {cat.names[c]: obj.dims.get(c, 0) for c in labels},
            "gauge_residual": gauge, "proportionality_residual": residual,
            "multiplication_defect": float(defect), "pairs_compared": compared,
            "dims_match": bool(all(dims[c] == normalizer * obj.dims.get(c, 0) for c in labels)),
            "passed": bool(max(defect, residual, gauge) < tol
                           and all(dims[c] == normalizer * obj.dims.get(c, 0) for c in labels))}


def _inv_sqrt(x):
    if isinstance(x, AlgebraElement):
        return pinv_sqrt(x, tol=1e-12)
    return x.inv_sqrt()


# ---------------------------------------------------------------- PQN reports
def pqn_membership_report(P: CrossedProduct, x: CrossedElement, labels: Sequence | None = None,
                          tol: float = 1e-9) -> dict:
    """The bimodule ``K_x = span(A x A)`` inside the window, with its isotypic profile."""
    labels = P.window if labels is None else labels
    act = P.action
    gens = _algebra_spanning_set(act)
    elems = []
    for a in gens:
        ax = P.left_mul(a, x)
        for b in gens:
            elems.append(P.right_mul(ax, b))
    elems.append(x)
    full = flat_many(P, elems, labels)
    M, xv = full[:, :-1], full[:, -1]
    scale = max(1.0, np.abs(M).max(initial=0.0))
    rank = int(np.linalg.matrix_rank(M, tol=tol * scale))
    profile = {}
    for c in labels:
        Mc = flat_many(P, elems[:-1], [c])
        r = int(np.linalg.matrix_rank(Mc, tol=tol * scale)) if Mc.size else 0
        if r:
            profile[P.category.names[c]] = {"dim": r, "ratio_to_fiber": r / act.coefficient_dim(c)}
    coef, *_ = np.linalg.lstsq(M, xv, rcond=None)
    member = float(np.linalg.norm(M @ coef - xv))
    return {"dim": rank, "components": profile, "x_in_Kx_residual": member,
            "generates_labels": sorted(profile)}


def _algebra_spanning_set(act) -> list:
    if hasattr(act, "algebra_spanning_set"):
        return act.algebra_spanning_set()
    A = act.algebra
    return A.basis()


# ---------------------------------------------------------------- Galois compatibility
def subobject_projection(P: CrossedProduct, D: SubObject, x: CrossedElement) -> CrossedElement:
    """Fiberwise orthogonal projection onto ``D``: ``x_c -> x_c . P_D(c)``."""
    terms = {}
    for c, vs in x.terms.items():
        Pc = D.projector(c)
        if not np.any(Pc):
            continue
        out = []
        for k in range(len(vs)):
            acc = P.action.zero(c)
            for i, v in enumerate(vs):
                if Pc[k, i]:
                    acc = acc + v * Pc[k, i]
            out.append(acc)
        terms[c] = tuple(out)
    return CrossedElement(P, terms)


def galois_compatibility(P: CrossedProduct, D: SubObject, samples: int = 20, seed: int = 0) -> dict:
    """Check ``E o P_D = E``, idempotence, ``D``-bimodularity, star and contractivity."""
    rng = np.random.default_rng(seed)
    act = P.action
    err = {"expectation": 0.0, "idempotent": 0.0, "bimodular": 0.0, "star": 0.0, "contractive": 0.0}
    Dlabels = [c for c in D.support if c in P.window]
    for _ in range(samples):
        x = P.random_element(rng)
        px = subobject_projection(P, D, x)
        err["expectation"] = max(err["expectation"], (P.expectation(px) - P.expectation(x)).norm())
        err["idempotent"] = max(err["idempotent"], coefficient_distance(subobject_projection(P, D, px), px))
        err["star"] = max(err["star"], coefficient_distance(subobject_projection(P, D, P.star(x)), P.star(px)))
        lhs = P.inner(px, px)
        rhs = P.inner(x, x)
        gap = rhs - lhs
        eig = min(float(np.linalg.eigvalsh((b + b.conj().T) / 2).min()) for b in gap.blocks) \
            if isinstance(gap, AlgebraElement) else gap.min_eigenvalue()
        err["contractive"] = max(err["contractive"], max(0.0, -eig))
        if Dlabels:
            c = Dlabels[rng.integers(len(Dlabels))]
            V = D.spaces[c]
            if V.shape[1]:
                f = V[:, 0]
                d = P.element({c: [act.random(c, rng) * f[i] for i in range(P.obj.dims[c])]})
                try:
                    lhs = subobject_projection(P, D, P.mul(d, x))
                    rhs = P.mul(d, px)
                    err["bimodular"] = max(err["bimodular"], coefficient_distance(lhs, rhs))
                except WindowOverflowError:
                    pass
    return {"defects": err, "passed": bool(all(v < 1e-8 for v in err.values()))}


# ---------------------------------------------------------------- freeness
def freeness_estimate(K: FgpBimodule, xi: BimoduleVector, trials: int = 20, partition_size: int = 3,
                      seed: int = 0) -> dict:
    """Upper bound for ``inf || sum_i a_i^* . xi . a_i ||`` over partitions ``sum a_i^* a_i = 1``.

    Families: rank-one projections, their conjugates by random unitaries,
    central projections (point indicators), and random ``a_i = X_i S^{-1/2}``.
    """
    A = K.left
    if not (K.left.same_as(K.right)):
        raise ValueError("freeness is defined for A-A bimodules")
    rng = np.random.default_rng(seed)

    def value(parts):
        acc = K.zero_vector()
        for a in parts:
            acc = acc + K.right_act(K.left_act(a.adj(), xi), a)
        return K.norm(acc)

    families = {}
    rank_one = [A.matrix_unit(s, i, i) for s in range(A.n_blocks) for i in range(A.block_dims[s])]
    families["rank_one_projections"] = value(rank_one)
    families["central_projections"] = value(A.center_basis())
    best_u = np.inf
    for _ in range(trials):
        u = A.random_unitary(rng)
        best_u = min(best_u, value([u @ p @ u.adj() for p in rank_one]))
    families["unitary_conjugates"] = float(best_u)
    best_r = np.inf
    for _ in range(trials):
        X = [A.random(rng) for _ in range(partition_size)]
        S = X[0].adj() @ X[0]
        for x in X[1:]:
            S = S + x.adj() @ x
        Sinv = pinv_sqrt(S, tol=1e-14)
        best_r = min(best_r, value([x @ Sinv for x in X]))
    families["random_partitions"] = float(best_r)
    return {"estimate": float(min(families.values())), "families": families, "seed": seed}
