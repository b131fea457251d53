"""Independent reference computations used by the tests.

Nothing here calls into the crossed-product, algebra-object or Fock-space
code of the package: each oracle rebuilds the quantity from first principles
(regular representations, brute-force enumeration, explicit word rewriting).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.linalg import block_diag


# ---------------------------------------------------------------- groups
def dense(a) -> np.ndarray:
    """Block-diagonal algebra element as one dense matrix."""
    return block_diag(*a.blocks)


def regular_representation(model, terms: dict) -> np.ndarray:
    """Operator of ``sum_g u_g a_g`` on ``l2(G) (x) C^N``.

    ``(pi(a) f)(x) = alpha_{x^-1}(a) f(x)`` and
    ``(lambda_g f)(x) = omega(g, g^-1 x) f(g^-1 x)``; ``u_g a`` acts as
    ``lambda_g pi(a)``.
    """
    G, w = model.group, model.cocycle
    N = sum(model.algebra.block_dims)
    n = G.order
    out = np.zeros((n * N, n * N), dtype=complex)
    for g, a in terms.items():
        for x in G.elements:
            y = G.mul(G.inv(g), x)
            blk = w[g, y] * dense(model.alpha(G.inv(y), a))
            out[x * N:(x + 1) * N, y * N:(y + 1) * N] += blk
    return out


def identity_block(model, op: np.ndarray) -> np.ndarray:
    """The ``(e, e)`` block of a regular-representation operator."""
    N = sum(model.algebra.block_dims)
    return op[:N, :N]


def subgroups_by_extension(G) -> set[frozenset]:
    """Every subgroup, reached from the trivial one by adjoining one element at a time."""

    def generated(gens):
        out = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = G.mul(x, g)
                if y not in out:
                    out.add(y)
                    frontier.append(y)
        return frozenset(out)

    found = {frozenset({0})}
    todo = [frozenset({0})]
    while todo:
        H = todo.pop()
        for g in G.elements:
            if g not in H:
                K = generated(set(H) | {g})
                if K not in found:
                    found.add(K)
                    todo.append(K)
    return found


def subgroups_by_subsets(G) -> set[frozenset]:
    """Brute force over all subsets containing the identity (small groups only)."""
    rest = [g for g in G.elements if g]
    out = set()
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            S = frozenset((0,) + combo)
            if all(G.mul(a, G.inv(b)) in S for a in S for b in S):
                out.add(S)
    return out


# ---------------------------------------------------------------- cuntz
def word_mul(x: dict, y: dict) -> dict:
    """Multiply ``{(nu, mu): c}`` expressions of ``s_nu s_mu^*`` letter by letter.

    Each product is expanded into the raw word ``nu mu^* alpha beta^*`` and
    reduced with ``s_i^* s_j = delta_ij`` using a stack.
    """
    out: dict = {}
    for (nu, mu), c in x.items():
        for (al, be), d in y.items():
            stars = list(reversed(mu))  # innermost star letter last
            plain = list(al)
            ok = True
            while stars and plain:
                if stars.pop() != plain.pop(0):
                    ok = False
                    break
            if not ok:
                continue
            key = (tuple(nu) + tuple(plain), tuple(be) + tuple(reversed(stars)))
            out[key] = out.get(key, 0) + c * d
    return out


def word_adj(x: dict) -> dict:
    return {(mu, nu): np.conj(c) for (nu, mu), c in x.items()}


def word_close(x: dict, y: dict, n: int, tol: float = 1e-10) -> bool:
    """Compare after padding with ``1 = sum_i s_i s_i^*`` to a common star length."""
    L = max([len(mu) for (_, mu) in list(x) + list(y)] + [0])

    def pad(z):
        out: dict = {}
        for (nu, mu), c in z.items():
            for tail in itertools.product(range(n), repeat=L - len(mu)):
                k = (tuple(nu) + tail, tuple(mu) + tail)
                out[k] = out.get(k, 0) + c
        return out

    a, b = pad(x), pad(y)
    return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol for k in set(a) | set(b))


# ---------------------------------------------------------------- semicircular
@lru_cache(maxsize=None)
def noncrossing_pairings(m: int) -> int:
    """Count non-crossing pair partitions of ``{0, ..., m - 1}`` by enumerating all pairings."""
    if m % 2:
        return 0

    def pairings(points):
        if not points:
            yield []
            return
        a = points[0]
        for k in range(1, len(points)):
            b = points[k]
            for rest in pairings(points[1:k] + points[k + 1:]):
                yield [(a, b)] + rest

    def crossing(p, q):
        (a, b), (c, d) = sorted(p), sorted(q)
        return a < c < b < d or c < a < d < b

    return sum(1 for P in pairings(list(range(m)))
               if not any(crossing(p, q) for p, q in itertools.combinations(P, 2)))
