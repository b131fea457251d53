"""Finite groups, scalar 2-cocycles and group actions on block algebras.

Groups are stored by multiplication table with the identity at index 0.  An
action on ``A`` is given by a block permutation ``pi_g`` together with a unitary
``U_g``: ``alpha_g(a) = U_g P_g(a) U_g^*`` where ``P_g`` moves block ``s`` to block
``pi_g(s)``.  Inner actions on a single matrix block use only ``U_g`` (a
projective representation); permutation actions use only ``pi_g``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..cstar import AlgebraElement, MatrixCStarAlgebra
from ..bimodule import FgpBimodule


class CocycleError(ValueError):
    def __init__(self, triple, defect):
        super().__init__(f"cocycle identity fails at {triple} (defect {defect:.3e})")
        self.triple = triple
        self.defect = defect


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by its Cayley table; element 0 is the identity."""

    table: tuple[tuple[int, ...], ...]
    name: str = "G"
    names: tuple[str, ...] = ()

    def __post_init__(self):
        t = np.asarray(self.table)
        n = t.shape[0]
        if t.shape != (n, n) or not np.array_equal(t[0], np.arange(n)) or not np.array_equal(t[:, 0], np.arange(n)):
            raise ValueError("table must be square with identity at index 0")
        for row in t:
            if sorted(row) != list(range(n)):
                raise ValueError("table rows must be permutations")
        if not self.names:
            object.__setattr__(self, "names", tuple(str(i) for i in range(n)))

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> range:
        return range(self.order)

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def inv(self, g: int) -> int:
        return self.table[g].index(0)

    def power(self, g: int, k: int) -> int:
        out = 0
        for _ in range(k):
            out = self.mul(out, g)
        return out

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = self.mul(x, g)
            k += 1
        return k

    def is_abelian(self) -> bool:
        t = np.asarray(self.table)
        return bool(np.array_equal(t, t.T))

    # constructors -------------------------------------------------------------
    @classmethod
    def from_elements(cls, elements: Sequence, op: Callable, identity, name: str = "G") -> "FiniteGroup":
        elems = list(elements)
        idx = {e: i for i, e in enumerate(elems)}
        if elems[0] != identity:
            i0 = idx[identity]
            elems[0], elems[i0] = elems[i0], elems[0]
            idx = {e: i for i, e in enumerate(elems)}
        table = tuple(tuple(idx[op(a, b)] for b in elems) for a in elems)
        return cls(table, name, tuple(str(e) for e in elems))

    @classmethod
    def generated_by(cls, gens: Sequence, op: Callable, identity, name: str = "G") -> "FiniteGroup":
        """Closure of hashable generators under ``op`` (breadth first, deterministic)."""
        elems = [identity]
        seen = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = op(x, g)
                    if y not in seen:
                        seen.add(y)
                        elems.append(y)
                        nxt.append(y)
            frontier = nxt
        return cls.from_elements(elems, op, identity, name)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls.from_elements(range(n), lambda a, b: (a + b) % n, 0, f"Z{n}")

    @classmethod
    def abelian(cls, orders: Sequence[int]) -> "FiniteGroup":
        orders = tuple(orders)
        elems = list(itertools.product(*[range(m) for m in orders]))
        op = lambda a, b: tuple((x + y) % m for x, y, m in zip(a, b, orders))
        return cls.from_elements(elems, op, tuple(0 for _ in orders), "x".join(f"Z{m}" for m in orders))

    @classmethod
    def dihedral(cls, n: int) -> "FiniteGroup":
        """Symmetries of the n-gon, order 2n, as pairs (rotation, flip)."""
        def op(a, b):
            r1, f1 = a
            r2, f2 = b
            return ((r1 + (-r2 if f1 else r2)) % n, f1 ^ f2)
        elems = [(r, f) for f in (0, 1) for r in range(n)]
        return cls.from_elements(elems, op, (0, 0), f"D{2 * n}")

    @classmethod
    def symmetric(cls, n: int) -> "FiniteGroup":
        elems = list(itertools.permutations(range(n)))
        op = lambda a, b: tuple(a[b[i]] for i in range(n))
        return cls.from_elements(elems, op, tuple(range(n)), f"S{n}")

    @classmethod
    def alternating(cls, n: int) -> "FiniteGroup":
        def even(p):
            inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
            return inv % 2 == 0
        elems = [p for p in itertools.permutations(range(n)) if even(p)]
        op = lambda a, b: tuple(a[b[i]] for i in range(n))
        return cls.from_elements(elems, op, tuple(range(n)), f"A{n}")

    @classmethod
    def quaternion(cls) -> "FiniteGroup":
        mats = {
            "i": ((1j, 0), (0, -1j)),
            "j": ((0, 1), (-1, 0)),
        }
        return cls._matrix_group([mats["i"], mats["j"]], "Q8", modulus=None)

    @classmethod
    def sl23(cls) -> "FiniteGroup":
        return cls._matrix_group([((1, 1), (0, 1)), ((0, 1), (2, 0))], "SL(2,3)", modulus=3)

    @classmethod
    def _matrix_group(cls, gens, name, modulus):
        def norm(m):
            m = np.asarray(m)
            if modulus is not None:
                return tuple(tuple(int(x) % modulus for x in row) for row in m)
            return tuple(tuple(complex(round(x.real), round(x.imag)) for x in row) for row in m.astype(complex))

        def op(a, b):
            return norm(np.asarray(a) @ np.asarray(b))

        ident = norm(np.eye(2, dtype=int if modulus else complex))
        return cls.generated_by([norm(g) for g in gens], op, ident, name)

    @classmethod
    def direct_product(cls, G: "FiniteGroup", H: "FiniteGroup") -> "FiniteGroup":
        elems = [(g, h) for g in G.elements for h in H.elements]
        op = lambda a, b: (G.mul(a[0], b[0]), H.mul(a[1], b[1]))
        return cls.from_elements(elems, op, (0, 0), f"{G.name}x{H.name}")

    @classmethod
    def by_name(cls, name: str) -> "FiniteGroup":
        """Parse names like ``Z4``, ``Z2xZ2``, ``S3``, ``D8``, ``A4``, ``Q8``, ``SL23``."""
        key = name.replace(" ", "")
        special = {"Q8": cls.quaternion, "SL23": cls.sl23, "SL(2,3)": cls.sl23}
        if key in special:
            return special[key]()
        parts = key.split("x")
        if len(parts) > 1:
            groups = [cls.by_name(p) for p in parts]
            if all(p.startswith("Z") for p in parts):
                return cls.abelian([int(p[1:]) for p in parts])
            out = groups[0]
            for g in groups[1:]:
                out = cls.direct_product(out, g)
            return out
        kind, num = key[0], key[1:]
        if not num.isdigit():
            raise ValueError(f"unknown group name {name!r}")
        m = int(num)
        if kind == "Z":
            return cls.cyclic(m)
        if kind == "S":
            return cls.symmetric(m)
        if kind == "A":
            return cls.alternating(m)
        if kind == "D":
            if m % 2:
                raise ValueError("dihedral groups are named by their order, e.g. D6 for S3")
            return cls.dihedral(m // 2)
        raise ValueError(f"unknown group name {name!r}")


def subgroups(G: FiniteGroup, within: Sequence[int] | None = None) -> list[frozenset]:
    """All subgroups of ``G`` contained in ``within`` (default: ``G``).

    Every subgroup is a join of cyclic subgroups, so the set is the closure of
    the cyclic subgroups under pairwise joins.
    """
    allowed = set(G.elements if within is None else within)

    def cyclic(g):
        out, x = {0}, g
        while x:
            out.add(x)
            x = G.mul(x, g)
        return frozenset(out)

    def join(a, b):
        out, frontier = set(a | b), list(a | b)
        while frontier:
            x = frontier.pop()
            for y in list(out):
                for z in (G.mul(x, y), G.mul(y, x)):
                    if z not in out:
                        out.add(z)
                        frontier.append(z)
        return frozenset(out)

    found = {cyclic(g) for g in allowed}
    found = {H for H in found if H <= allowed}
    grew = True
    while grew:
        grew = False
        for a in list(found):
            for b in list(found):
                j = join(a, b)
                if j <= allowed and j not in found:
                    found.add(j)
                    grew = True
    return sorted(found, key=lambda H: (len(H), sorted(H)))


# ---------------------------------------------------------------- cocycles
Cocycle = Callable[[int, int], complex]


def trivial_cocycle(G: FiniteGroup) -> np.ndarray:
    return np.ones((G.order, G.order), dtype=complex)


def check_cocycle(G: FiniteGroup, omega: np.ndarray, tol: float = 1e-12) -> None:
    """Raise :class:`CocycleError` unless ``omega`` is a normalized U(1) 2-cocycle."""
    omega = np.asarray(omega)
    if omega.shape != (G.order, G.order):
        raise ValueError("cocycle must be a |G| x |G| table")
    if np.max(np.abs(np.abs(omega) - 1)) > tol:
        raise ValueError("cocycle values must lie on the unit circle")
    if np.max(np.abs(omega[0] - 1)) > tol or np.max(np.abs(omega[:, 0] - 1)) > tol:
        raise ValueError("cocycle must be normalized")
    for g in G.elements:
        for h in G.elements:
            gh = G.mul(g, h)
            for k in G.elements:
                lhs = omega[g, h] * omega[gh, k]
                rhs = omega[h, k] * omega[g, G.mul(h, k)]
                if abs(lhs - rhs) > tol:
                    raise CocycleError((g, h, k), abs(lhs - rhs))


def restrict_cocycle(omega: np.ndarray, subset: Sequence[int]) -> np.ndarray:
    return np.asarray(omega)[np.ix_(subset, subset)]


def bicharacter_cocycle(G: FiniteGroup, coords: Callable[[int], Sequence[int]], form: np.ndarray,
                        orders: Sequence[int]) -> np.ndarray:
    """``omega(g, h) = prod exp(2 pi i F_ab g_a h_b / gcd)`` for an abelian group in coordinates."""
    form = np.asarray(form)
    out = np.ones((G.order, G.order), dtype=complex)
    for g in G.elements:
        cg = coords(g)
        for h in G.elements:
            ch = coords(h)
            phase = 0.0
            for a, b in zip(*np.nonzero(form)):
                m = np.gcd(orders[a], orders[b])
                phase += form[a, b] * cg[a] * ch[b] / m
            out[g, h] = np.exp(2j * np.pi * phase)
    return out


def klein_sign_cocycle(G: FiniteGroup | None = None) -> tuple[FiniteGroup, np.ndarray]:
    """The nontrivial cocycle ``(-1)^{g_1 h_2}`` on ``Z2 x Z2``."""
    G = G or FiniteGroup.abelian([2, 2])
    coords = lambda g: tuple(int(x) for x in G.names[g].strip("()").split(","))
    return G, bicharacter_cocycle(G, coords, np.array([[0, 1], [0, 0]]), (2, 2))


def projective_representation(G: FiniteGroup, omega: np.ndarray, d: int | None = None,
                              seed: int = 0) -> list[np.ndarray]:
    """An ``omega``-projective unitary representation ``U_g U_h = omega(g, h) U_gh``.

    Built as the twisted left regular representation on ``l^2(G)``, optionally
    tensored with a random unitary conjugation to avoid accidental diagonality.
    """
    n = G.order
    U = []
    for g in G.elements:
        m = np.zeros((n, n), dtype=complex)
        for x in G.elements:
            m[G.mul(g, x), x] = omega[g, x]
        U.append(m)
    if d is not None and d != n:
        raise ValueError("the regular projective representation has dimension |G|")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(z)
    return [q @ u @ q.conj().T for u in U]


# ---------------------------------------------------------------- actions
@dataclass
class GroupActionModel:
    """A group acting on a block algebra by ``alpha_g(a) = U_g P_g(a) U_g^*``."""

    group: FiniteGroup
    algebra: MatrixCStarAlgebra
    block_perm: list[tuple[int, ...]]
    unitaries: list[AlgebraElement]
    cocycle: np.ndarray = field(default=None)
    kind: str = "inner"

    def __post_init__(self):
        if self.cocycle is None:
            self.cocycle = trivial_cocycle(self.group)

    def alpha(self, g: int, a: AlgebraElement) -> AlgebraElement:
        perm = self.block_perm[g]
        blocks = [None] * self.algebra.n_blocks
        for s, b in enumerate(a.blocks):
            blocks[perm[s]] = b
        u = self.unitaries[g]
        return u @ self.algebra.element(blocks) @ u.adj()

    def check(self, tol: float = 1e-10) -> float:
        """Max defect of ``alpha_g alpha_h = alpha_gh`` and multiplicativity on generators."""
        G, A = self.group, self.algebra
        err = 0.0
        gens = A.generators()
        for g in G.elements:
            for h in G.elements:
                for x in gens:
                    err = max(err, (self.alpha(g, self.alpha(h, x)) - self.alpha(G.mul(g, h), x)).norm())
            for x in gens:
                for y in gens:
                    err = max(err, (self.alpha(g, x @ y) - self.alpha(g, x) @ self.alpha(g, y)).norm())
        return err

    def bimodule(self, g: int) -> FgpBimodule:
        """``_g A``: the right module ``A`` with left action ``alpha_{g^-1}``."""
        ginv = self.group.inv(g)
        return FgpBimodule.from_homomorphism(self.algebra, self.algebra, 1,
                                             lambda a: self.alpha(ginv, a).blocks,
                                             label=f"{self.group.names[g]}", validate=True)

    @property
    def is_free(self) -> bool:
        """Whether distinct group elements give non-isomorphic bimodules."""
        return all(tuple(self.block_perm[g]) != tuple(range(self.algebra.n_blocks))
                   for g in self.group.elements if g)

    @property
    def acts_freely(self) -> bool:
        """Whether every ``g != e`` moves every block (a free action on the blocks)."""
        return all(all(self.block_perm[g][s] != s for s in range(self.algebra.n_blocks))
                   for g in self.group.elements if g)

    # builders -----------------------------------------------------------------
    @classmethod
    def inner(cls, G: FiniteGroup, omega: np.ndarray | None = None, seed: int = 0) -> "GroupActionModel":
        """``G`` acting on ``M_|G|`` by conjugation with a projective regular representation."""
        omega = trivial_cocycle(G) if omega is None else np.asarray(omega)
        U = projective_representation(G, omega, seed=seed)
        A = MatrixCStarAlgebra((G.order,), label=f"M{G.order}")
        ident = tuple([0])
        return cls(G, A, [ident] * G.order, [A.element([u]) for u in U], omega, "inner")

    @classmethod
    def permutation(cls, G: FiniteGroup, block_dim: int = 1, omega: np.ndarray | None = None,
                    points: Sequence[int] | None = None, action: Callable[[int, int], int] | None = None
                    ) -> "GroupActionModel":
        """``G`` permuting the blocks of ``sum_x M_d``.

        By default the blocks are indexed by ``G`` itself with left translation, a
        free action.  A custom action on ``points`` may be supplied instead.
        """
        pts = list(points) if points is not None else list(G.elements)
        act = action or G.mul
        A = MatrixCStarAlgebra(tuple([block_dim] * len(pts)), label=f"C{len(pts)}" if block_dim == 1
                               else f"{len(pts)}M{block_dim}")
        index = {x: i for i, x in enumerate(pts)}
        perms = [tuple(index[act(g, x)] for x in pts) for g in G.elements]
        one = A.identity()
        omega = trivial_cocycle(G) if omega is None else np.asarray(omega)
        return cls(G, A, perms, [one] * G.order, omega, "permutation")


def natural_permutation_model(n: int, omega: np.ndarray | None = None) -> GroupActionModel:
    """``S_n`` permuting the ``n`` blocks of ``C^n`` (not free for ``n >= 3``)."""
    G = FiniteGroup.symmetric(n)
    perms = [tuple(int(x) for x in G.names[g].strip("()").split(",")) for g in G.elements]
    return GroupActionModel.permutation(G, omega=omega, points=range(n), action=lambda g, x: perms[g][x])


def twisted_convolution(model: GroupActionModel, x: dict[int, AlgebraElement],
                        y: dict[int, AlgebraElement]) -> dict[int, AlgebraElement]:
    """Product of ``sum_g u_g x_g`` and ``sum_h u_h y_h`` with ``u_g u_h = omega(g,h) u_gh``
    and ``a u_h = u_h alpha_{h^-1}(a)``."""
    G, w = model.group, model.cocycle
    out: dict[int, AlgebraElement] = {}
    for g, a in x.items():
        for h, b in y.items():
            gh = G.mul(g, h)
            term = w[g, h] * (model.alpha(G.inv(h), a) @ b)
            out[gh] = out[gh] + term if gh in out else term
    return out


def twisted_adjoint(model: GroupActionModel, x: dict[int, AlgebraElement]) -> dict[int, AlgebraElement]:
    """``(u_g a)^* = conj(omega(g^-1, g)) u_{g^-1} alpha_g(a^*)``."""
    G, w = model.group, model.cocycle
    return {G.inv(g): np.conj(w[G.inv(g), g]) * model.alpha(g, a.adj()) for g, a in x.items()}


def group_crossed_oracle(model: GroupActionModel, obj, samples: int = 2, seed: int = 0) -> dict:
    """Compare crossed-product tables with :func:`twisted_convolution`.

    Pairs ``(u_g a, u_h b)`` run over the support of ``obj`` and over ``a, b`` in
    the identity, the algebra generators and ``samples`` random elements.  The
    object must be the (twisted) group algebra of a subgroup, built over the
    category of ``model``.
    """
    from ..crossed_product import BimoduleAction, CrossedProduct

    cat = obj.category
    P = CrossedProduct(BimoduleAction(cat), obj)
    act = P.action
    A = model.algebra
    rng = np.random.default_rng(seed)
    coeffs = [A.identity()] + A.generators() + [A.random(rng) for _ in range(samples)]
    sup = obj.support

    def crossed(g, a):
        return P.element({g: [act.from_algebra(a)]})

    def as_dict(x):
        return {g: act.to_algebra(vs[0]) for g, vs in x.terms.items()}

    mul_err = star_err = exp_err = 0.0
    pairs = 0
    for g in sup:
        for a in coeffs:
            x = crossed(g, a)
            want = twisted_adjoint(model, {g: a})
            got = as_dict(P.star(x))
            star_err = max(star_err, max((want[k] - got[k]).norm() for k in want))
            e = P.expectation(x)
            exp_err = max(exp_err, (e - (a if g == cat.unit else A.zero())).norm())
            for h in sup:
                for b in coeffs:
                    want = twisted_convolution(model, {g: a}, {h: b})
                    got = as_dict(P.mul(x, crossed(h, b)))
                    mul_err = max(mul_err, max((want[k] - got.get(k, A.zero())).norm() for k in want))
                    pairs += 1
    return {"group": model.group.name, "kind": model.kind, "pairs": pairs,
            "multiplication_defect": float(mul_err), "star_defect": float(star_err),
            "expectation_defect": float(exp_err)}
