"""Connected graded *-algebra objects with finite-dimensional fibers.

A :class:`GradedAlgebraObject` over a :class:`~artifact.tensor_cat.CategoryData`
assigns a space ``B(c) = C^{m_c}`` to each simple label.  The multiplication is
stored per fusion channel: ``mult[(a, b, c, alpha)]`` is an ``m_c x m_a x m_b``
array giving the ``alpha`` component of ``B(a) (x) B(b) -> B(a (x) b)``.  The star
is stored as matrices ``S^c`` with ``j_c(f) = S^c conj(f)`` in ``B(cbar)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .models.groups import CocycleError
from .tensor_cat import CategoryData


class LatticeOverflowError(RuntimeError):
    """The subobject search exceeded its configured budget."""


@dataclass
class GradedAlgebraObject:
    category: CategoryData
    dims: dict
    mult: dict
    unit: np.ndarray
    star: dict
    name: str = "B"
    kappa: float = 1.0

    @property
    def support(self) -> list:
        return [c for c in self.category.labels if self.dims.get(c, 0) > 0]

    def component(self, a, b, c, alpha) -> np.ndarray:
        m = self.mult.get((a, b, c, alpha))
        if m is None:
            return np.zeros((self.dims.get(c, 0), self.dims.get(a, 0), self.dims.get(b, 0)), dtype=complex)
        return m

    def multiply(self, a, f: np.ndarray, b, g: np.ndarray) -> dict:
        """Components ``(c, alpha) -> B(alpha^*) m(f (x) g)`` of a product of homogeneous vectors."""
        out = {}
        for c, alpha in self.category.channels(a, b):
            if self.dims.get(c, 0):
                out[(c, alpha)] = np.einsum("kij,i,j->k", self.component(a, b, c, alpha), f, g)
        return out

    def j(self, c, f: np.ndarray) -> np.ndarray:
        return self.star[c] @ np.conj(f)

    def fiber_gram(self, c) -> np.ndarray:
        """Matrix of the canonical form ``(f|g) = kappa m(j_c f (x) g)`` at the unit."""
        cat = self.category
        cb = cat.dual[c]
        ch = [al for (e, al) in cat.channels(cb, c) if e == cat.unit]
        if not ch:
            raise ValueError(f"no unit channel in {cb} (x) {c}")
        M = self.component(cb, c, cat.unit, ch[0])
        u = self.unit
        vals = np.einsum("plk,lj->pjk", M, self.star[c])
        return self.kappa * np.einsum("pjk,p->jk", vals, np.conj(u)) / np.vdot(u, u).real

    # ---------------------------------------------------------------- report
    def describe(self) -> dict:
        names = self.category.names
        return {
            "name": self.name,
            "fibers": {names[c]: int(self.dims[c]) for c in self.support},
            "multiplication": {f"{names[a]}*{names[b]}->{names[c]}[{al}]": np.round(m, 12).tolist()
                               for (a, b, c, al), m in sorted(self.mult.items(), key=lambda kv: str(kv[0]))
                               if m.size},
            "star": {names[c]: np.round(self.star[c], 12).tolist() for c in self.support},
        }


# ------------------------------------------------------------------ builders
def trivial_object(category: CategoryData) -> GradedAlgebraObject:
    u = category.unit
    dims = {c: (1 if c == u else 0) for c in category.labels}
    return GradedAlgebraObject(category, dims, {(u, u, u, 0): np.ones((1, 1, 1), dtype=complex)},
                               np.ones(1, dtype=complex), {u: np.ones((1, 1), dtype=complex)}, name="1")


def build_group_algebra_object(category: CategoryData, subgroup: Sequence[int] | None = None,
                               cocycle: np.ndarray | None = None, tol: float = 1e-12) -> GradedAlgebraObject:
    """``C_omega[Lambda]`` as an algebra object in the pointed category of a group.

    ``cocycle`` is a table on the whole group (only its restriction to the
    subgroup matters); it is validated there and a violating triple is reported.
    """
    labels = list(category.labels)
    sub = sorted(set(labels if subgroup is None else subgroup))
    prod = {(g, h): next(iter(category.fusion[(g, h)])) for g in labels for h in labels}
    if category.unit not in sub:
        raise ValueError("subgroup must contain the identity")
    for g in sub:
        for h in sub:
            if prod[(g, h)] not in sub:
                raise ValueError(f"{sub} is not closed under multiplication ({g}*{h})")
    n = len(labels)
    w = np.ones((n, n), dtype=complex) if cocycle is None else np.asarray(cocycle, dtype=complex)
    for g in sub:
        for h in sub:
            gh = prod[(g, h)]
            for k in sub:
                lhs = w[g, h] * w[gh, k]
                rhs = w[h, k] * w[g, prod[(h, k)]]
                if abs(lhs - rhs) > tol:
                    raise CocycleError((g, h, k), abs(lhs - rhs))
    dims = {c: int(c in sub) for c in labels}
    mult = {(g, h, prod[(g, h)], 0): np.full((1, 1, 1), w[g, h], dtype=complex) for g in sub for h in sub}
    star = {g: np.full((1, 1), np.conj(w[category.dual[g], g]), dtype=complex) for g in sub}
    twisted = cocycle is not None and not np.allclose(w[np.ix_(sub, sub)], 1)
    name = ("C_w[" if twisted else "C[") + ",".join(category.names[g] for g in sub) + "]"
    return GradedAlgebraObject(category, dims, mult, np.ones(1, dtype=complex), star, name=name)


def build_cuntz_algebra_object(window: int) -> GradedAlgebraObject:
    """``C[Z]`` in the windowed integer category: fibers spanned by ``L_{(s_1^*)^m}``."""
    cat = CategoryData.integers(window)
    dims = {m: 1 for m in cat.labels}
    mult = {(l, m, l + m, 0): np.ones((1, 1, 1), dtype=complex)
            for l in cat.labels for m in cat.labels if abs(l + m) <= window}
    star = {m: np.ones((1, 1), dtype=complex) for m in cat.labels}
    return GradedAlgebraObject(cat, dims, mult, np.ones(1, dtype=complex), star, name=f"C[Z]_{window}")


# ------------------------------------------------------------------ checks
def check_algebra_object(B: GradedAlgebraObject, tol: float = 1e-10) -> dict:
    """Max defect of each axiom; ``passed`` is true iff every defect is below ``tol``."""
    cat = B.category
    sup = B.support
    u0 = cat.unit
    defects: dict[str, float] = {}

    defects["connected"] = float(abs(B.dims.get(u0, 0) - 1))

    err = 0.0
    for a in sup:
        m = B.dims[a]
        for first in (True, False):
            pair = (u0, a) if first else (a, u0)
            ch = [al for (c, al) in cat.channels(*pair) if c == a]
            if not ch:
                err = max(err, 1.0)
                continue
            M = B.component(*pair, a, ch[0])
            act = np.einsum("kpj,p->kj", M, B.unit) if first else np.einsum("kjp,p->kj", M, B.unit)
            err = max(err, float(np.linalg.norm(act - np.eye(m))))
    defects["unit"] = err

    err = 0.0
    for a in sup:
        for b in sup:
            for c in sup:
                if not cat._inside(a, b, c):
                    continue
                for h in sup:
                    F = cat.associator(a, b, c, h)
                    if not F:
                        continue
                    lefts = sorted({l for l, _ in F}, key=str)
                    rights = sorted({r for _, r in F}, key=str)
                    for (f, ga, de) in rights:
                        rhs = np.einsum("kiq,qjl->kijl", B.component(a, f, h, de), B.component(b, c, f, ga))
                        lhs = np.zeros_like(rhs)
                        for (e, al, be) in lefts:
                            coef = np.conj(F[((e, al, be), (f, ga, de))])
                            if coef:
                                lhs = lhs + coef * np.einsum("kpl,pij->kijl", B.component(e, c, h, be),
                                                             B.component(a, b, e, al))
                        err = max(err, float(np.linalg.norm(lhs - rhs)))
    defects["associativity"] = err

    err = 0.0
    for c in sup:
        cb = cat.dual[c]
        if cb not in B.star:
            err = max(err, 1.0)
            continue
        err = max(err, float(np.linalg.norm(B.star[cb] @ np.conj(B.star[c]) - np.eye(B.dims[c]))))
    defects["star_involutive"] = err
    defects["star_unital"] = float(np.linalg.norm(B.j(u0, B.unit) - B.unit))

    err = 0.0
    for a in sup:
        for b in sup:
            if not cat._inside(a, b):
                continue
            for c, al in cat.channels(a, b):
                if not B.dims.get(c, 0):
                    continue
                M = B.component(a, b, c, al)
                lhs = np.einsum("xk,kij->xij", B.star[c], np.conj(M))
                R = cat.star_coefficients(a, b, c)
                rhs = np.zeros_like(lhs)
                bb, ab, cb = cat.dual[b], cat.dual[a], cat.dual[c]
                betas = [be for (e, be) in cat.channels(bb, ab) if e == cb]
                for be in betas:
                    Mb = B.component(bb, ab, cb, be)
                    rhs = rhs + R[be, al] * np.einsum("xqp,qj,pi->xij", Mb, B.star[b], B.star[a])
                err = max(err, float(np.linalg.norm(lhs - rhs)))
    defects["star_monoidal"] = err

    err = 0.0
    for c in sup:
        G = B.fiber_gram(c)
        herm = float(np.linalg.norm(G - G.conj().T))
        lo = float(np.linalg.eigvalsh((G + G.conj().T) / 2).min())
        err = max(err, herm, max(0.0, 1e-10 - lo))
    defects["fiber_positivity"] = err

    err = 0.0
    for c in sup:
        bound = cat.index_norms.get(c)
        if bound is not None:
            err = max(err, max(0.0, B.dims[c] - bound - 1e-9))
    defects["dimension_bound"] = err

    return {"object": B.name, "tol": tol, "defects": defects,
            "passed": bool(all(v < tol for v in defects.values()))}


def fiber_gram_min_eigenvalues(B: GradedAlgebraObject) -> dict:
    return {c: float(np.linalg.eigvalsh((G + G.conj().T) / 2).min())
            for c in B.support for G in [B.fiber_gram(c)]}


# ------------------------------------------------------------------ Galois lattice
def _orth(vectors: list[np.ndarray], dim: int, tol: float = 1e-9) -> np.ndarray:
    if not vectors:
        return np.zeros((dim, 0), dtype=complex)
    m = np.stack(vectors, axis=1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s.max(initial=0.0))))
    return u[:, :r]


@dataclass
class SubObject:
    """A graded subspace ``D(c) <= B(c)`` closed under multiplication and star."""

    parent: GradedAlgebraObject
    spaces: dict

    @property
    def dims(self) -> dict:
        return {c: int(v.shape[1]) for c, v in self.spaces.items()}

    @property
    def support(self) -> list:
        return [c for c in self.parent.category.labels if self.spaces[c].shape[1]]

    def projector(self, c) -> np.ndarray:
        v = self.spaces[c]
        return v @ v.conj().T

    def key(self) -> tuple:
        parts = []
        for c in self.parent.category.labels:
            v = self.spaces[c]
            if v.shape[1] == 0 or v.shape[1] == v.shape[0]:
                parts.append((c, v.shape[1]))
            else:
                parts.append((c, v.shape[1], tuple(np.round(self.projector(c), 8).ravel().tolist())))
        return tuple(parts)

    def contains(self, other: "SubObject", tol: float = 1e-8) -> bool:
        for c in self.parent.category.labels:
            w = other.spaces[c]
            if w.shape[1] and np.linalg.norm(w - self.projector(c) @ w) > tol:
                return False
        return True

    def as_algebra_object(self) -> GradedAlgebraObject:
        B = self.parent
        mult = {}
        for (a, b, c, al), M in B.mult.items():
            Va, Vb, Vc = self.spaces.get(a), self.spaces.get(b), self.spaces.get(c)
            if Va is None or Vb is None or Vc is None or not (Va.shape[1] and Vb.shape[1] and Vc.shape[1]):
                continue
            mult[(a, b, c, al)] = np.einsum("xk,kij,ip,jq->xpq", Vc.conj().T, M, Va, Vb)
        star = {}
        for c in self.support:
            cb = B.category.dual[c]
            star[c] = self.spaces[cb].conj().T @ B.star[c] @ np.conj(self.spaces[c])
        u0 = B.category.unit
        unit = self.spaces[u0].conj().T @ B.unit
        return GradedAlgebraObject(B.category, self.dims, mult, unit, star,
                                   name="{" + ",".join(B.category.names[c] for c in self.support) + "}")


def closure(B: GradedAlgebraObject, seeds: dict) -> SubObject:
    """Smallest graded subspace containing the unit and ``seeds`` closed under product and star."""
    cat = B.category
    u0 = cat.unit
    spaces = {c: np.zeros((B.dims.get(c, 0), 0), dtype=complex) for c in cat.labels}
    pending: dict = {c: [] for c in cat.labels}
    pending[u0].append(B.unit / np.linalg.norm(B.unit))
    for c, vs in seeds.items():
        pending[c].extend(vs)
    while any(pending.values()):
        for c in cat.labels:
            if pending[c]:
                cur = [spaces[c][:, i] for i in range(spaces[c].shape[1])]
                spaces[c] = _orth(cur + pending[c], B.dims.get(c, 0))
                pending[c] = []
        for a in cat.labels:
            Va = spaces[a]
            if not Va.shape[1]:
                continue
            ab = cat.dual[a]
            if ab in B.star or a in B.star:
                img = B.star[a] @ np.conj(Va)
                if np.linalg.norm(img - spaces[ab] @ (spaces[ab].conj().T @ img)) > 1e-9:
                    pending[ab].extend(img[:, i] for i in range(img.shape[1]))
            for b in cat.labels:
                Vb = spaces[b]
                if not Vb.shape[1] or not cat._inside(a, b):
                    continue
                for c, al in cat.channels(a, b):
                    if not B.dims.get(c, 0):
                        continue
                    img = np.einsum("kij,ip,jq->kpq", B.component(a, b, c, al), Va, Vb).reshape(B.dims[c], -1)
                    res = img - spaces[c] @ (spaces[c].conj().T @ img)
                    if np.linalg.norm(res) > 1e-9:
                        pending[c].extend(res[:, i] for i in range(res.shape[1]))
    return SubObject(B, spaces)


@dataclass
class GaloisLattice:
    nodes: list
    edges: list
    closures: int
    iso_classes: list = field(default_factory=list)

    def supports(self) -> list[frozenset]:
        return [frozenset(n.support) for n in self.nodes]

    def report(self) -> dict:
        names = self.nodes[0].parent.category.names if self.nodes else {}
        return {
            "nodes": [[names[c] for c in n.support] for n in self.nodes],
            "dims": [[n.dims[c] for c in n.support] for n in self.nodes],
            "hasse_edges": [list(e) for e in self.edges],
            "closures": self.closures,
            "isomorphism_classes": self.iso_classes,
        }


def galois_lattice(B: GradedAlgebraObject, cap: int = 2 ** 20) -> GaloisLattice:
    """Intermediate subobjects ``1 <= D <= B`` generated by fiber basis vectors.

    Breadth-first search from the trivial subobject: each node is extended by
    one basis vector of one fiber and closed.  For pointed multiplicity-free
    objects every subobject arises this way.  ``cap`` bounds the number of
    closure computations.
    """
    if B.dims.get(B.category.unit, 0) != 1:
        raise ValueError("galois_lattice needs a connected object")
    total = sum(B.dims.values())
    root = closure(B, {})
    nodes = [root]
    seen = {root.key(): 0}
    queue = deque([root])
    count = 1
    while queue:
        D = queue.popleft()
        for c in B.support:
            for i in range(B.dims[c]):
                e = np.zeros(B.dims[c], dtype=complex)
                e[i] = 1
                V = D.spaces[c]
                if V.shape[1] and np.linalg.norm(e - V @ (V.conj().T @ e)) < 1e-9:
                    continue
                count += 1
                if count > cap:
                    raise LatticeOverflowError(
                        f"subobject search exceeded {cap} closures (support {len(B.support)}, total fiber dim {total})")
                E = closure(B, _seed_union(D, c, e))
                k = E.key()
                if k not in seen:
                    seen[k] = len(nodes)
                    nodes.append(E)
                    queue.append(E)
    order = sorted(range(len(nodes)), key=lambda i: (sum(nodes[i].dims.values()), nodes[i].key()))
    nodes = [nodes[i] for i in order]
    below = [[j for j in range(len(nodes)) if j != i and nodes[i].contains(nodes[j])] for i in range(len(nodes))]
    edges = []
    for i in range(len(nodes)):
        for j in below[i]:
            if not any(k in below[i] and j in below[k] for k in below[i] if k != j):
                edges.append((j, i))
    classes: dict = {}
    for i, n in enumerate(nodes):
        sig = tuple(sorted(n.dims.items(), key=lambda kv: str(kv[0])))
        classes.setdefault(sig, []).append(i)
    return GaloisLattice(nodes, sorted(edges), count, [v for _, v in sorted(classes.items(), key=lambda kv: kv[1])])


def _seed_union(D: SubObject, c, e: np.ndarray) -> dict:
    seeds = {x: [D.spaces[x][:, j] for j in range(D.spaces[x].shape[1])] for x in D.spaces if D.spaces[x].shape[1]}
    seeds.setdefault(c, []).append(e)
    return seeds
