"""Operator-valued semicircular systems on a truncated Fock space.

A covariance is a completely positive matrix ``eta = (eta_ij)`` of maps on
``A = M_d`` indexed by a finite set ``I``.  Writing ``eta_ij(x) = sum_l K_li^* x K_lj``
(Kraus operators read off the Choi matrix), the bimodule ``T`` is spanned by
``xi_i = (K_li)_l`` inside ``Hom(C^d, C^d (x) C^r)`` with left action ``a (x) 1_r``, so
``<xi_i | a xi_j> = eta_ij(a)``.  Level ``k`` of the Fock space is
``Hom(C^d, C^d (x) C^{r^k})``; creation by ``xi`` sends ``zeta`` to ``(xi (x) 1) zeta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class DegreeOverflowError(ValueError):
    """A moment needs more Fock levels than the truncation keeps."""


MAX_FOCK_DIM = 4096


@dataclass
class SemicircularModel:
    """Covariance ``eta_ij`` on ``M_d`` for ``i, j`` in ``index_set``."""

    d: int
    index_set: tuple
    eta: Callable[[int, int, np.ndarray], np.ndarray]
    degree_cap: int = 4
    trace: Callable[[np.ndarray], complex] | None = None
    name: str = "semicircular"

    @property
    def size(self) -> int:
        return len(self.index_set)

    def eta_matrix(self, x: np.ndarray) -> np.ndarray:
        """The packaged map ``x -> (eta_ij(x))_{ij}`` as a ``|I| d`` square matrix."""
        m, d = self.size, self.d
        out = np.zeros((m * d, m * d), dtype=complex)
        for a, i in enumerate(self.index_set):
            for b, j in enumerate(self.index_set):
                out[a * d:(a + 1) * d, b * d:(b + 1) * d] = self.eta(i, j, np.asarray(x, dtype=complex))
        return out

    def choi(self) -> np.ndarray:
        """``sum_ab e_ab (x) eta(e_ab)``: positive exactly when ``eta`` is completely positive."""
        d = self.d
        n = self.size * d
        C = np.zeros((d * n, d * n), dtype=complex)
        for a in range(d):
            for b in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[a, b] = 1.0
                C[a * n:(a + 1) * n, b * n:(b + 1) * n] = self.eta_matrix(e)
        return C

    def cp_defect(self) -> float:
        """Size of the most negative Choi eigenvalue (0 when completely positive)."""
        C = self.choi()
        herm = np.linalg.norm(C - C.conj().T)
        return float(max(herm, -np.linalg.eigvalsh((C + C.conj().T) / 2).min(), 0.0))

    def kraus(self, tol: float = 1e-12) -> list[list[np.ndarray]]:
        """Kraus blocks ``K_li`` with ``eta_ij(x) = sum_l K_li^* x K_lj``."""
        if self.cp_defect() > 1e-9:
            raise ValueError("covariance is not completely positive")
        C = self.choi()
        w, V = np.linalg.eigh((C + C.conj().T) / 2)
        d, n = self.d, self.size * self.d
        out = []
        for lam, v in zip(w, V.T):
            if lam <= tol * max(1.0, w.max()):
                continue
            W = np.sqrt(lam) * v.conj().reshape(d, n)
            out.append([W[:, a * d:(a + 1) * d] for a in range(self.size)])
        return out

    def trace_compatibility_defect(self, samples: int = 5, seed: int = 0) -> float | None:
        """Max of ``|tau(eta_ij(x) y) - tau(x eta_ji(y))|`` (``None`` without a trace)."""
        if self.trace is None:
            return None
        rng = np.random.default_rng(seed)
        err = 0.0
        for _ in range(samples):
            x = rng.standard_normal((self.d, self.d)) + 1j * rng.standard_normal((self.d, self.d))
            y = rng.standard_normal((self.d, self.d)) + 1j * rng.standard_normal((self.d, self.d))
            for i in self.index_set:
                for j in self.index_set:
                    err = max(err, abs(self.trace(self.eta(i, j, x) @ y) - self.trace(x @ self.eta(j, i, y))))
        return float(err)

    # builders -------------------------------------------------------------------
    @classmethod
    def scalar(cls, degree_cap: int = 6) -> "SemicircularModel":
        """``A = C`` with a single variable of variance one."""
        return cls(1, (0,), lambda i, j, x: np.asarray(x, dtype=complex).copy(), degree_cap,
                   trace=lambda x: complex(np.trace(x)), name="scalar")

    @classmethod
    def block_example(cls, degree_cap: int = 2, w: np.ndarray | None = None) -> "SemicircularModel":
        """Two variables over ``M_2``.

        ``eta(x) = [[x, x w], [w^* x, w^* x w]] + tau(x) 1``, a sum of a
        compression ``V^* (x (x) 1) V`` and the completely depolarizing map.
        """
        w = np.array([[0.0, 1.0], [1.0j, 0.5]]) if w is None else np.asarray(w, dtype=complex)
        tr = lambda x: complex(np.trace(x)) / 2

        def eta(i, j, x):
            x = np.asarray(x, dtype=complex)
            left = np.eye(2) if i == 0 else w.conj().T
            right = np.eye(2) if j == 0 else w
            return left @ x @ right + (tr(x) * np.eye(2) if i == j else 0)

        return cls(2, (0, 1), eta, degree_cap, trace=None, name="M2-block")

    @classmethod
    def from_kraus(cls, blocks: Sequence[Sequence[np.ndarray]], degree_cap: int = 2) -> "SemicircularModel":
        """``eta_ij(x) = sum_l K_li^* x K_lj`` from ``blocks[l][i]``."""
        blocks = [[np.asarray(K, dtype=complex) for K in row] for row in blocks]
        d = blocks[0][0].shape[0]
        m = len(blocks[0])

        def eta(i, j, x):
            return sum(row[i].conj().T @ x @ row[j] for row in blocks)

        return cls(d, tuple(range(m)), eta, degree_cap, name="kraus")


# ---------------------------------------------------------------- Fock space
class FockModel:
    """Truncated Fock space ``sum_{k <= cap} T^{(x) k}`` with the operators ``X_i``."""

    def __init__(self, model: SemicircularModel, max_dim: int = MAX_FOCK_DIM):
        self.model = model
        self.K = model.kraus()
        self.r = len(self.K)
        d, cap = model.d, model.degree_cap
        if cap < 2:
            raise ValueError("degree cap must be at least 2")
        self.level_dims = [d * self.r ** k for k in range(cap + 1)]
        self.dim = sum(self.level_dims)
        if self.dim > max_dim:
            raise DegreeOverflowError(f"Fock space of dimension {self.dim} exceeds the bound {max_dim}")
        self.offsets = np.concatenate([[0], np.cumsum(self.level_dims)])
        self.V = [self._stack(a) for a in range(model.size)]
        self._X = [self._semicircular(a) for a in range(model.size)]

    def _stack(self, a: int) -> np.ndarray:
        """``xi_a`` as a ``(d r) x d`` matrix with the Kraus index least significant."""
        d, r = self.model.d, self.r
        V = np.zeros((d * r, d), dtype=complex)
        for l in range(r):
            V[l::r] = self.K[l][a]
        return V

    def creation(self, a: int) -> np.ndarray:
        """``l(xi_a)``: level ``k`` to level ``k + 1`` by ``xi_a (x) 1_{r^k}``."""
        L = np.zeros((self.dim, self.dim), dtype=complex)
        for k in range(len(self.level_dims) - 1):
            blk = np.kron(self.V[a], np.eye(self.r ** k))
            o0, o1 = self.offsets[k], self.offsets[k + 1]
            L[o1:o1 + blk.shape[0], o0:o0 + blk.shape[1]] = blk
        return L

    def _semicircular(self, a: int) -> np.ndarray:
        L = self.creation(a)
        return L + L.conj().T

    def X(self, i) -> np.ndarray:
        return self._X[self.model.index_set.index(i)]

    def left(self, x: np.ndarray) -> np.ndarray:
        """Left action of ``x`` in ``A``: ``x (x) 1_{r^k}`` on each level."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, n in enumerate(self.level_dims):
            o = self.offsets[k]
            out[o:o + n, o:o + n] = np.kron(np.asarray(x, dtype=complex), np.eye(self.r ** k))
        return out

    def vacuum(self) -> np.ndarray:
        """``1^`` as a ``dim x d`` column of the Fock module."""
        v = np.zeros((self.dim, self.model.d), dtype=complex)
        v[:self.model.d] = np.eye(self.model.d)
        return v

    def expectation(self, op: np.ndarray) -> np.ndarray:
        """``E(x) = <1^ | x 1^>``."""
        d = self.model.d
        return op[:d, :d].copy()

    def word(self, letters: Sequence) -> np.ndarray:
        """Product of generators (index-set entries) and algebra elements (arrays).

        Refuses words with more generators than the degree cap.
        """
        gens = sum(1 for t in letters if not isinstance(t, np.ndarray))
        if gens > self.model.degree_cap:
            raise DegreeOverflowError(f"{gens} generators exceed the degree cap {self.model.degree_cap}")
        op = np.eye(self.dim, dtype=complex)
        for t in letters:
            op = op @ (self.left(t) if isinstance(t, np.ndarray) else self.X(t))
        return op

    def moment(self, letters: Sequence) -> np.ndarray:
        return self.expectation(self.word(letters))

    def covariance_defect(self, samples: int = 3, seed: int = 0) -> float:
        """Max of ``||E(X_i a X_j) - eta_ij(a)||`` over random ``a``."""
        rng = np.random.default_rng(seed)
        d = self.model.d
        err = 0.0
        for _ in range(samples):
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            for i in self.model.index_set:
                for j in self.model.index_set:
                    got = self.moment([i, a, j])
                    err = max(err, float(np.linalg.norm(got - self.model.eta(i, j, a), 2)))
        return err

    # structure -----------------------------------------------------------------
    def central_vector_dims(self, tol: float = 1e-9) -> list[int]:
        """Dimension of ``{zeta in level k : a zeta = zeta a}`` for each level."""
        d = self.model.d
        out = []
        units = []
        for p in range(d):
            for q in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[p, q] = 1.0
                units.append(e)
        for k, n in enumerate(self.level_dims):
            amp = np.eye(self.r ** k)
            rows = []
            for e in units:
                # zeta (n x d), vec row-major: (E (x) 1) zeta - zeta E
                rows.append(np.kron(np.kron(e, amp), np.eye(d)) - np.kron(np.eye(n), e.T))
            M = np.vstack(rows)
            s = np.linalg.svd(M, compute_uv=False)
            out.append(int(n * d - np.sum(s > tol * max(1.0, s.max()))))
        return out

    def discreteness_witness(self, i, tol: float = 1e-9) -> dict:
        """Compare ``span(a X_i 1^ b)`` with ``A (x)_{eta_ii} A``.

        The first is computed inside the Fock space; the second is the rank of
        the form ``tau(b^* eta_ii(a^* c) d)`` on pairs of matrix units.
        """
        d = self.model.d
        units = []
        for p in range(d):
            for q in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[p, q] = 1.0
                units.append(e)
        Xv = self.X(i) @ self.vacuum()
        vecs = [(self.left(a) @ Xv @ b).reshape(-1) for a in units for b in units]
        fock_dim = int(np.linalg.matrix_rank(np.stack(vecs, axis=1), tol=tol))
        pairs = [(a, b) for a in units for b in units]
        G = np.zeros((len(pairs), len(pairs)), dtype=complex)
        for s, (a, b) in enumerate(pairs):
            for t, (c, e) in enumerate(pairs):
                G[s, t] = np.trace(b.conj().T @ self.model.eta(i, i, a.conj().T @ c) @ e)
        w = np.linalg.eigvalsh((G + G.conj().T) / 2)
        kernel_dim = int(np.sum(w > tol * max(1.0, w.max())))
        return {"fock_span_dim": fock_dim, "relative_tensor_dim": kernel_dim, "equal": fock_dim == kernel_dim}


def fock_build(model: SemicircularModel, max_dim: int = MAX_FOCK_DIM) -> FockModel:
    return FockModel(model, max_dim)
