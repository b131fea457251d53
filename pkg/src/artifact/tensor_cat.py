"""Unitary tensor category data extracted from concrete bimodules.

A :class:`CategoryData` records the simple labels (unit first), the fusion
multiplicities, the duality involution and, when the simples are realized as
bimodules, a chosen family of isometries ``c -> a (x) b`` for every fusion
channel.  Three sources are supported:

* :func:`generate_category` closes a list of bimodules under tensor product
  and conjugation;
* :meth:`CategoryData.from_group_model` packages ``g -> _gA`` for a group action,
  with the canonical tensorator as isometry;
* :meth:`CategoryData.integers` describes the pointed category of ``Z`` restricted
  to a window, used for the Cuntz model.

Over an algebra with nontrivial center the endomorphisms of any nonzero
bimodule contain the center, so no bimodule has one-dimensional endomorphism
space.  Generation therefore splits bimodules into *centrally simple* pieces,
those whose multiplicity matrix is a permutation (invertible bimodules), and
all intertwiner counts are normalized by the dimension of the center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bimodule import (BimoduleError, FgpBimodule, Intertwiner, conjugate, hs_inner,
                       identity_map, isomorphism, relative_tensor, tensor_maps_left, tensor_maps_right,
                       trivial_bimodule, watatani_index)


class IsometryError(RuntimeError):
    """Failure to orthonormalize an isometry family; carries a conditioning report."""


@dataclass
class CategoryData:
    labels: list
    names: dict
    fusion: dict
    dual: dict
    simples: dict = field(default_factory=dict)
    isometries: dict = field(default_factory=dict)
    conj_maps: dict = field(default_factory=dict)
    index_norms: dict = field(default_factory=dict)
    strict: bool = False
    complete: bool = True
    unit: Hashable = 0
    name: str = "C"
    tensors: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    # ------------------------------------------------------------ fusion ring
    def N(self, a, b, c) -> int:
        return int(self.fusion.get((a, b), {}).get(c, 0))

    def channels(self, a, b) -> list[tuple[Hashable, int]]:
        """All ``(c, alpha)`` with ``alpha < N_ab^c``, in label order."""
        row = self.fusion.get((a, b), {})
        return [(c, k) for c in self.labels if c in row for k in range(row[c])]

    def fusion_matrix(self, a) -> np.ndarray:
        """``L_a[c, b] = N_ab^c`` (left multiplication by ``a``)."""
        idx = {c: i for i, c in enumerate(self.labels)}
        m = np.zeros((len(self.labels),) * 2, dtype=int)
        for b in self.labels:
            for c, n in self.fusion.get((a, b), {}).items():
                if c in idx:
                    m[idx[c], idx[b]] = n
        return m

    def check_fusion_associativity(self) -> list[tuple]:
        """Return every ``(a, b, c, d)`` where the two bracketings disagree."""
        bad = []
        for a in self.labels:
            for b in self.labels:
                for c in self.labels:
                    for d in self.labels:
                        lhs = sum(self.N(a, b, e) * self.N(e, c, d) for e in self.labels)
                        rhs = sum(self.N(b, c, f) * self.N(a, f, d) for f in self.labels)
                        if lhs != rhs and self._inside(a, b, c, d):
                            bad.append((a, b, c, d))
        return bad

    def _inside(self, *labels) -> bool:
        """For windowed categories, identities are only claimed well inside the window."""
        return True

    def check_unit(self) -> bool:
        u = self.unit
        return all(self.N(u, a, b) == (a == b) and self.N(a, u, b) == (a == b)
                   for a in self.labels for b in self.labels)

    def check_duality(self) -> bool:
        ok = all(self.dual[self.dual[a]] == a for a in self.labels)
        for a in self.labels:
            for b in self.labels:
                if self._inside(a, b):
                    ok &= self.N(a, b, self.unit) == (b == self.dual[a])
        return bool(ok)

    def frobenius_perron_defect(self) -> float:
        """Defect of ``L_a v = d_a v`` for ``v = (sqrt ||Ind_W(c)||)_c``."""
        if not self.index_norms:
            return float("nan")
        v = np.array([np.sqrt(self.index_norms[c]) for c in self.labels])
        err = 0.0
        for a in self.labels:
            if not self._inside(a):
                continue
            w = self.fusion_matrix(a) @ v
            keep = np.array([self._inside(a, c) for c in self.labels])
            err = max(err, float(np.max(np.abs(w - v[self.labels.index(a)] * v)[keep], initial=0.0)))
        return err

    # --------------------------------------------------------------- coherence
    def associator(self, a, b, c, h) -> dict:
        """Change-of-basis coefficients ``F[(e, al, be), (f, ga, de)] = (R | L)``.

        ``L = (al (x) id_c) be`` and ``R = (id_a (x) ga) de`` both map ``h`` into the
        strictly associative coordinates of ``a b c``; strict categories return 1
        on the unique pair.
        """
        left = [(e, al, be) for e, al in self.channels(a, b) for (hh, be) in self.channels(e, c) if hh == h]
        right = [(f, ga, de) for f, ga in self.channels(b, c) for (hh, de) in self.channels(a, f) if hh == h]
        if self.strict:
            return {(l, r): complex(l == left[0] and r == right[0]) for l in left for r in right} if left else {}
        if not self.isometries:
            raise BimoduleError("associator needs realized isometries")
        out = {}
        for (e, al, be) in left:
            A_ = self.isometries[(a, b)][e][al]
            B_ = self.isometries[(e, c)][h][be]
            L = tensor_maps_left(A_, self.simples[c])
            Lm = [x @ y for x, y in zip(L, B_.blocks)]
            for (f, ga, de) in right:
                G_ = self.isometries[(b, c)][f][ga]
                D_ = self.isometries[(a, f)][h][de]
                R = tensor_maps_right(self.simples[a], G_)
                Rm = [x @ y for x, y in zip(R, D_.blocks)]
                num = sum(np.trace(r.conj().T @ l) * d for r, l, d in
                          zip(Rm, Lm, self.simples[h].right.block_dims))
                den = identity_map(self.simples[h]).scalar_trace()
                out[((e, al, be), (f, ga, de))] = complex(num / den)
        return out

    def star_coefficients(self, a, b, c) -> np.ndarray:
        """Matrix ``R[beta, alpha]`` relating ``jbar`` of channel ``alpha: c -> a b`` to
        channels ``beta: cbar -> bbar abar``; identity for the strict pointed models."""
        n_ab = self.N(a, b, c)
        n_ba = self.N(self.dual[b], self.dual[a], self.dual[c])
        if self.strict:
            return np.eye(n_ba, n_ab, dtype=complex)
        raise BimoduleError("star coefficients are only available for strict realized categories")

    # --------------------------------------------------------------- reporting
    def report(self) -> dict:
        return {
            "name": self.name,
            "labels": [self.names[c] for c in self.labels],
            "complete": self.complete,
            "fusion": {f"{self.names[a]}*{self.names[b]}": {self.names[c]: n for c, n in sorted(
                row.items(), key=lambda kv: self.labels.index(kv[0]))}
                for (a, b), row in sorted(self.fusion.items(),
                                           key=lambda kv: (self.labels.index(kv[0][0]), self.labels.index(kv[0][1])))},
            "dual": {self.names[a]: self.names[self.dual[a]] for a in self.labels},
            "watatani_index_norms": {self.names[a]: self.index_norms.get(a) for a in self.labels},
            "notes": list(self.notes),
        }

    # ------------------------------------------------------------ constructors
    @classmethod
    def from_group_model(cls, model) -> "CategoryData":
        """``g -> _gA`` with tensorator ``xi (x) eta -> alpha_{h^-1}(xi) eta``.

        In the interior tensor coordinates of this package the tensorator is
        the identity matrix, so each isometry ``_{gh}A -> _gA (x) _hA`` is stored
        as the identity.
        """
        G = model.group
        simples = {g: model.bimodule(g) for g in G.elements}
        labels = list(G.elements)
        fusion = {(g, h): {G.mul(g, h): 1} for g in labels for h in labels}
        dual = {g: G.inv(g) for g in labels}
        isometries, tensors = {}, {}
        for g in labels:
            for h in labels:
                T = relative_tensor(simples[g], simples[h])
                tensors[(g, h)] = T
                gh = G.mul(g, h)
                isometries[(g, h)] = {gh: [Intertwiner(simples[gh], T.module, identity_map(simples[gh]).blocks)]}

        def make_conj(g):
            return lambda xi: model.alpha(g, xi.adj())

        data = cls(labels, {g: G.names[g] for g in labels}, fusion, dual, simples, isometries,
                   {g: make_conj(g) for g in labels}, {g: 1.0 for g in labels}, strict=True,
                   name=f"Vec({G.name})")
        data.tensors = tensors
        data.index_norms = {g: watatani_index(simples[g]).norm() for g in labels}
        return data

    @classmethod
    def integers(cls, window: int) -> "WindowedIntegers":
        return WindowedIntegers.build(window)


@dataclass
class WindowedIntegers(CategoryData):
    """The pointed category of ``Z`` seen through the window ``[-k, k]``."""

    window: int = 0

    @classmethod
    def build(cls, k: int) -> "WindowedIntegers":
        labels = list(range(-k, k + 1))
        fusion = {(a, b): ({a + b: 1} if abs(a + b) <= k else {}) for a in labels for b in labels}
        data = cls(labels, {m: str(m) for m in labels}, fusion, {m: -m for m in labels},
                   strict=True, name=f"Hilb(Z)[{-k},{k}]", window=k)
        data.index_norms = {m: 1.0 for m in labels}
        data.notes.append("fusion truncated at the window; identities checked only inside it")
        return data

    def _inside(self, *labels) -> bool:
        return sum(abs(x) for x in labels) <= self.window


# ---------------------------------------------------------------- generation
def central_pieces(K: FgpBimodule) -> tuple[list[tuple[FgpBimodule, Intertwiner]], bool]:
    """Split ``K`` into pieces with permutation multiplicity matrices.

    Returns the pieces with isometric embeddings into ``K`` and a flag telling
    whether every piece is a full permutation (centrally simple).  The split is
    a perfect-matching decomposition of the multiplicity matrix; when none
    exists the remaining copies are returned as maximal partial matchings.
    """
    mu = K.mult.copy()
    used = np.zeros_like(mu)
    pieces, pointed = [], True
    A, B = K.left, K.right
    while mu.sum():
        rows, cols = linear_sum_assignment(-(mu > 0).astype(float))
        pairs = [(s, r) for s, r in zip(rows, cols) if mu[s, r] > 0]
        if len(pairs) != A.n_blocks or A.n_blocks != B.n_blocks:
            pointed = False
        n = max(-(-A.block_dims[s] // B.block_dims[r]) for s, r in pairs)
        copies = {(s, r): [np.eye(n * B.block_dims[r])[:, :A.block_dims[s]]] for s, r in pairs}
        P = FgpBimodule.from_copies(A, B, n, copies, label=f"{K.label}[{len(pieces)}]")
        blocks = [np.zeros((K.n * d, n * d), dtype=complex) for d in B.block_dims]
        for s, r in pairs:
            blocks[r] += K.columns(r, s, used[s, r]) @ P.columns(r, s, 0).conj().T
            used[s, r] += 1
            mu[s, r] -= 1
        pieces.append((P, Intertwiner(P, K, blocks)))
    return pieces, pointed


def _classify(piece: FgpBimodule, simples: dict) -> tuple[Hashable, Intertwiner] | None:
    for c, S in simples.items():
        u = isomorphism(S, piece)
        if u is not None:
            return c, u
    return None


def generate_category(generators: Sequence[FgpBimodule], max_simples: int = 32,
                      name: str = "C") -> CategoryData:
    """Close ``generators`` under tensor product and conjugation.

    Labels are assigned in order of discovery with the unit at 0.  If more
    than ``max_simples`` classes appear, generation stops and the result is
    flagged incomplete.
    """
    if not generators:
        raise ValueError("need at least one generator")
    A = generators[0].left
    for g in generators:
        if not (g.left.same_as(A) and g.right.same_as(A)):
            raise BimoduleError("generators must be bimodules over one algebra")
    unit = trivial_bimodule(A)
    simples: dict[int, FgpBimodule] = {0: unit.relabel("1")}
    notes: list[str] = []
    pointed_all = True
    complete = True

    def absorb(K: FgpBimodule) -> list[tuple[int, Intertwiner]]:
        nonlocal pointed_all, complete
        pieces, pointed = central_pieces(K)
        pointed_all &= pointed
        out = []
        for P, emb in pieces:
            hit = _classify(P, simples)
            if hit is None:
                if len(simples) >= max_simples:
                    complete = False
                    continue
                c = len(simples)
                simples[c] = P.relabel(f"X{c}")
                hit = (c, identity_map(simples[c]))
            c, u = hit
            out.append((c, emb @ u))
        return out

    for g in generators:
        absorb(g)
    fusion, isometries, tensors, dual = {}, {}, {}, {}
    done: set = set()
    changed = True
    while changed and complete:
        changed = False
        for a in list(simples):
            if a not in dual:
                cj = conjugate(simples[a])
                found = absorb(cj.module)
                if len(found) != 1:
                    notes.append(f"conjugate of label {a} is not centrally simple")
                dual[a] = found[0][0] if found else a
                changed = True
            for b in list(simples):
                if (a, b) in done:
                    continue
                T = relative_tensor(simples[a], simples[b])
                before = len(simples)
                found = absorb(T.module)
                done.add((a, b))
                tensors[(a, b)] = T
                row: dict = {}
                fam: dict = {}
                for c, iso in found:
                    row[c] = row.get(c, 0) + 1
                    fam.setdefault(c, []).append(Intertwiner(simples[c], T.module, iso.blocks))
                fusion[(a, b)] = row
                isometries[(a, b)] = fam
                changed |= len(simples) != before
            if not complete:
                break
    if not pointed_all:
        notes.append("some pieces are not centrally simple (multiplicity matrix admits no perfect matching)")
    labels = sorted(simples)
    data = CategoryData(labels, {c: simples[c].label for c in labels}, fusion, dual, simples, isometries,
                        {}, {}, strict=False, complete=complete, name=name)
    data.tensors = tensors
    data.notes = notes
    center = A.n_blocks
    data.notes.append(f"intertwiner counts normalized by center dimension {center}")
    for c in labels:
        try:
            data.index_norms[c] = watatani_index(simples[c]).norm()
        except Exception as exc:  # pragma: no cover - reported, not raised
            data.notes.append(f"index of {c} unavailable: {exc}")
    return data


def choose_isometries(data: CategoryData, a, b, tol: float = 1e-8) -> dict:
    """The stored isometry families for the pair ``(a, b)``, re-orthonormalized.

    Families are checked for ``alpha^* beta = delta id`` and completeness
    ``sum alpha alpha^* = id``; a failure raises :class:`IsometryError` with the
    smallest singular value of the Gram matrix as conditioning report.
    """
    fam = data.isometries.get((a, b))
    if fam is None:
        raise IsometryError(f"no isometries recorded for ({a}, {b})")
    out = {}
    for c, maps in fam.items():
        gram = np.array([[hs_inner(f, g) for g in maps] for f in maps])
        ev = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
        if ev.min(initial=1.0) < 1e-6:
            raise IsometryError(f"family for {c} in ({a}, {b}) is ill conditioned: min eigenvalue {ev.min():.2e}")
        # Gram-Schmidt in the fixed order.
        ortho: list[Intertwiner] = []
        for f in maps:
            for g in ortho:
                f = f - g * hs_inner(g, f)
            f = f * (1.0 / np.sqrt(hs_inner(f, f).real))
            ortho.append(f)
        out[c] = ortho
    return out


def isometry_defects(data: CategoryData, a, b) -> dict[str, float]:
    """Orthonormality and resolution-of-identity defects of the family for ``(a, b)``."""
    fam = data.isometries[(a, b)]
    T = data.tensors[(a, b)].module
    ortho = 0.0
    total = [np.zeros((T.n * d, T.n * d), dtype=complex) for d in T.right.block_dims]
    for c, maps in fam.items():
        for i, f in enumerate(maps):
            for j, g in enumerate(maps):
                m = f.adj() @ g
                want = identity_map(f.source).blocks if i == j else [np.zeros_like(x) for x in m.blocks]
                ortho = max(ortho, max(np.linalg.norm(x - y) for x, y in zip(m.blocks, want)))
            total = [t + x @ x.conj().T for t, x in zip(total, f.blocks)]
    res = max(np.linalg.norm(t - p) for t, p in zip(total, T.projection()))
    return {"orthonormality": float(ortho), "resolution": float(res)}


def coevaluation_isometry(data: CategoryData, a) -> Intertwiner:
    """The normalized coevaluation ``1 -> a (x) abar`` moved onto the chosen dual representative."""
    K = data.simples[a]
    cj = conjugate(K)
    _, coev = cj.coev()
    norm_sq = (coev.adj() @ coev)
    # coev^* coev is central in End(1) = Z(A); normalize blockwise.
    scale = [np.real(np.trace(m)) / m.shape[0] for m in norm_sq.blocks]
    coev = Intertwiner(coev.source, coev.target,
                       [m / np.sqrt(s) if s > 0 else m for m, s in zip(coev.blocks, scale)])
    u = isomorphism(data.simples[data.dual[a]], cj.module)
    if u is None:
        raise IsometryError(f"dual representative of {a} is not isomorphic to its conjugate")
    move = tensor_maps_right(K, u.adj())
    T = data.tensors.get((a, data.dual[a])) or relative_tensor(K, data.simples[data.dual[a]])
    return Intertwiner(coev.source, T.module, [m @ c for m, c in zip(move, coev.blocks)])
