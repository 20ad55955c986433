"""Liftings and deformations of a residual representation to finite
Artinian test rings, found by exhaustive search.

A test ring is tabulated once (addition and multiplication tables on element
indices), after which matrices are integer arrays and whole batches of
candidate liftings are multiplied with numpy fancy indexing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .cohomology import GModule, Representation, adjoint_module, cohomology
from .groups import FiniteGroup
from .matrix import Matrix
from .rings import (CoeffRing, Elt, PolyQuotient, TruncatedPolynomialRing,
                    integers_mod, prime_field)

DEFAULT_BUDGET = 20_000_000


class DeformationError(ValueError):
    """Inconsistent problem data or a search that exceeds its budget."""


# ---------------------------------------------------------------------------
# Test rings
# ---------------------------------------------------------------------------

class ArtinianTestRing:
    """A finite local ring with residue field ``F_p``, fully tabulated."""

    def __init__(self, ring: CoeffRing, name: str | None = None):
        if not ring.is_finite:
            raise DeformationError("test rings must be finite")
        self.ring = ring
        self.name = name or repr(ring)
        self.elements = list(ring.elements())
        self.index = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        self.size = n
        self.add = np.empty((n, n), dtype=np.int32)
        self.mul = np.empty((n, n), dtype=np.int32)
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                self.add[i, j] = self.index[a + b]
                self.mul[i, j] = self.index[a * b]
        self.zero = self.index[ring.zero]
        self.one = self.index[ring.one]
        self.neg = np.array([self.index[-a] for a in self.elements], dtype=np.int32)
        self.units = np.array([a.is_unit() for a in self.elements])
        self.maximal_ideal = np.nonzero(~self.units)[0]
        p = self._residue_characteristic()
        self.p = p
        self.residue_field = prime_field(p)
        if n // len(self.maximal_ideal) != p:
            raise DeformationError("test rings must have residue field F_p")
        self.residue = np.empty(n, dtype=np.int64)
        section = {}
        for c in range(p):
            section[c] = self.index[ring(c)]
        self.section = np.array([section[c] for c in range(p)], dtype=np.int32)
        mset = set(self.maximal_ideal.tolist())
        for i in range(n):
            for c in range(p):
                if int(self.add[i, self.neg[self.section[c]]]) in mset:
                    self.residue[i] = c
                    break
        inv = np.full(n, -1, dtype=np.int32)
        for i in np.nonzero(self.units)[0]:
            row = np.nonzero(self.mul[i] == self.one)[0]
            inv[i] = row[0]
        self.inv = inv
        self._check_local()

    def _residue_characteristic(self) -> int:
        char = self.ring.characteristic
        for q in range(2, char + 1):
            if char % q == 0:
                return q
        raise DeformationError("could not determine residue characteristic")

    def _check_local(self):
        m = self.maximal_ideal
        mset = set(m.tolist())
        sums = self.add[np.ix_(m, m)]
        if not all(int(x) in mset for x in np.unique(sums)):
            raise DeformationError(f"{self.name} is not local")

    def __repr__(self):
        return f"ArtinianTestRing({self.name}, |A|={self.size})"

    @property
    def m_size(self) -> int:
        return len(self.maximal_ideal)

    def is_field(self) -> bool:
        return self.m_size == 1

    def __call__(self, x) -> int:
        return self.index[self.ring(x)]

    def elt(self, i: int) -> Elt:
        return self.elements[int(i)]

    def additive_generators_of_m(self) -> list[int]:
        """A minimal-ish generating set of the maximal ideal as an abelian group."""
        gens: list[int] = []
        span = {self.zero}
        for x in self.maximal_ideal:
            x = int(x)
            if x in span:
                continue
            gens.append(x)
            frontier = list(span)
            new = set(span)
            for s in frontier:
                cur = s
                while True:
                    cur = int(self.add[cur, x])
                    if cur in new:
                        break
                    new.add(cur)
            # close under addition
            changed = True
            while changed:
                changed = False
                for a in list(new):
                    for g in gens:
                        b = int(self.add[a, g])
                        if b not in new:
                            new.add(b)
                            changed = True
            span = new
            if len(span) == self.m_size:
                break
        return gens

    def teichmuller(self, c: int) -> int:
        """The unique root of unity of order prime to p lifting ``c`` in ``F_p^x``."""
        c %= self.p
        if c == 0:
            return self.zero
        x = int(self.section[c])
        for _ in range(64):
            y = x
            for _ in range(self.p - 1):
                y = int(self.mul[y, x])
            # y = x^p; iterate x -> x^p until stable
            if y == x:
                return x
            x = y
        raise DeformationError("Teichmuller iteration did not stabilise")

    # batched matrix arithmetic on index arrays ------------------------------
    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        n = A.shape[-1]
        shape = np.broadcast_shapes(A.shape, B.shape)
        out = np.empty(shape, dtype=np.int32)
        for i in range(n):
            for j in range(B.shape[-1]):
                acc = self.mul[A[..., i, 0], B[..., 0, j]]
                for k in range(1, n):
                    acc = self.add[acc, self.mul[A[..., i, k], B[..., k, j]]]
                out[..., i, j] = acc
        return out

    def det(self, A: np.ndarray) -> np.ndarray:
        n = A.shape[-1]
        if n == 1:
            return A[..., 0, 0]
        if n == 2:
            return self.add[self.mul[A[..., 0, 0], A[..., 1, 1]],
                            self.neg[self.mul[A[..., 0, 1], A[..., 1, 0]]]]
        total = None
        for perm in itertools.permutations(range(n)):
            sign = _perm_sign(perm)
            term = A[..., 0, perm[0]]
            for r in range(1, n):
                term = self.mul[term, A[..., r, perm[r]]]
            if sign < 0:
                term = self.neg[term]
            total = term if total is None else self.add[total, term]
        return total

    def trace(self, A: np.ndarray) -> np.ndarray:
        acc = A[..., 0, 0]
        for i in range(1, A.shape[-1]):
            acc = self.add[acc, A[..., i, i]]
        return acc

    def identity(self, n: int) -> np.ndarray:
        out = np.full((n, n), self.zero, dtype=np.int32)
        np.fill_diagonal(out, self.one)
        return out

    def reduce(self, A: np.ndarray) -> np.ndarray:
        return self.residue[A]

    def lift(self, Abar) -> np.ndarray:
        return self.section[np.asarray(Abar, dtype=np.int64) % self.p]

    def to_matrix(self, A: np.ndarray) -> Matrix:
        return Matrix(self.ring, [[self.elements[int(x)] for x in row] for row in A])

    def from_matrix(self, M: Matrix) -> np.ndarray:
        return np.array([[self.index[x] for x in row] for row in M.rows], dtype=np.int32)

    def kernel_elements(self, n: int) -> np.ndarray:
        """All of ``ker(GL_n(A) -> GL_n(F))`` as an ``(|m|^(n^2), n, n)`` array."""
        m = self.maximal_ideal.astype(np.int32)
        count = len(m) ** (n * n)
        if count > DEFAULT_BUDGET:
            raise DeformationError(f"kernel subgroup has {count} elements; over budget")
        grids = np.array(list(itertools.product(range(len(m)), repeat=n * n)), dtype=np.int64)
        mats = m[grids].reshape(-1, n, n)
        eye = self.identity(n)
        return self.add[mats, eye[None]]

    def power(self, A: np.ndarray, e: int) -> np.ndarray:
        n = A.shape[-1]
        out = np.broadcast_to(self.identity(n), A.shape).copy()
        base = A
        while e:
            if e & 1:
                out = self.matmul(out, base)
            base = self.matmul(base, base)
            e >>= 1
        return out

    def inverse_matrix(self, A: np.ndarray) -> np.ndarray:
        return self.from_matrix(self.to_matrix(A).inverse())


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def dual_numbers(p: int) -> ArtinianTestRing:
    return ArtinianTestRing(PolyQuotient(prime_field(p), (0, 0, 1), name="eps", label=f"F_{p}[eps]/(eps^2)"))


def truncated_eps(p: int, k: int) -> ArtinianTestRing:
    mod = [0] * k + [1]
    return ArtinianTestRing(PolyQuotient(prime_field(p), tuple(mod), name="eps", label=f"F_{p}[eps]/(eps^{k})"))


def galois_test_ring(p: int, k: int = 2) -> ArtinianTestRing:
    return ArtinianTestRing(integers_mod(p ** k), f"Z/{p}^{k}")


def two_eps(p: int) -> ArtinianTestRing:
    return ArtinianTestRing(TruncatedPolynomialRing(prime_field(p), 2, 2), f"F_{p}[e1,e2]/(e1,e2)^2")


def residue_test_ring(p: int) -> ArtinianTestRing:
    return ArtinianTestRing(prime_field(p), f"F_{p}")


def eps_element(A: ArtinianTestRing) -> int:
    """The distinguished nilpotent generator of ``F[eps]/(eps^k)``."""
    R = A.ring
    if isinstance(R, PolyQuotient):
        return A.index[R.gen]
    if isinstance(R, TruncatedPolynomialRing):
        return A.index[R.var(0)]
    return A(A.p)


# ---------------------------------------------------------------------------
# Problems and liftings
# ---------------------------------------------------------------------------

Word = tuple[int, ...]


def presentation_from_group(G: FiniteGroup) -> list[tuple[Word, Word]]:
    """Relations ``w_x * s_k = w_(x s_k)`` for every non-tree Cayley edge.

    Together with the BFS words these present ``G`` on its generators; every
    relation is a pair of positive words, so no inverses are needed.
    """
    words = {0: ()}
    for x in range(1, G.order):
        y, k = G.parent[x]
        words[x] = words[y] + (k,)
    rels = []
    for x, k, y in G.edges():
        rels.append((words[x] + (k,), words[y]))
    for k, g in enumerate(G.gens):
        rels.append(((k,) * G.element_order(g), ()))
    return rels


@dataclass
class LiftingProblem:
    """``(G, rhobar, chi)`` with ``G`` presented by positive-word relations."""

    group: FiniteGroup
    p: int
    rhobar: list  # one n x n integer matrix per generator
    fixed_det: bool = False
    chi: Sequence[int] | None = None  # residual values; lifted Teichmuller-wise
    relations: list | None = None
    name: str = "problem"

    def __post_init__(self):
        self.rhobar = [np.asarray(m, dtype=np.int64) % self.p for m in self.rhobar]
        self.n = self.rhobar[0].shape[0]
        if len(self.rhobar) != len(self.group.gens):
            raise DeformationError("one residual matrix per generator is required")
        if self.relations is None:
            self.relations = presentation_from_group(self.group)
        for lhs, rhs in self.relations:
            if not np.array_equal(self._eval_residual(lhs), self._eval_residual(rhs)):
                raise DeformationError(f"rhobar violates the relation {lhs} = {rhs}")
        if self.fixed_det:
            dets = [int(round(np.linalg.det(m))) % self.p for m in self.rhobar]
            if self.chi is None:
                self.chi = dets
            elif [c % self.p for c in self.chi] != dets:
                raise DeformationError("chi mod p differs from det rhobar")

    def _eval_residual(self, word):
        out = np.eye(self.n, dtype=np.int64)
        for k in word:
            out = (out @ self.rhobar[k]) % self.p
        return out

    def representation(self) -> Representation:
        return Representation.from_generators(self.group, self.p, self.rhobar, self.name)

    def adjoint(self) -> GModule:
        return adjoint_module(self.representation(), fixed_det=self.fixed_det)


@dataclass
class Lifting:
    problem: LiftingProblem
    ring: ArtinianTestRing
    images: np.ndarray  # (k, n, n) indices into ring.elements

    def matrices(self) -> list[Matrix]:
        return [self.ring.to_matrix(a) for a in self.images]

    def all_elements(self) -> np.ndarray:
        return evaluate_on_group(self.ring, self.problem.group, self.images[None])[0]

    def verify(self) -> bool:
        """Independent check with ring-level matrix arithmetic."""
        mats = self.matrices()
        R = self.ring.ring
        n = self.problem.n
        for lhs, rhs in self.problem.relations:
            a = Matrix.identity(R, n)
            for k in lhs:
                a = a * mats[k]
            b = Matrix.identity(R, n)
            for k in rhs:
                b = b * mats[k]
            if a != b:
                return False
        for k, m in enumerate(mats):
            red = np.array([[self.ring.residue[self.ring.index[x]] for x in row] for row in m.rows])
            if not np.array_equal(red % self.problem.p, self.problem.rhobar[k]):
                return False
            if self.problem.fixed_det:
                if m.det() != self.ring.elt(self.ring.teichmuller(self.problem.chi[k])):
                    return False
        return True

    def key(self) -> bytes:
        return self.images.astype(np.int32).tobytes()


class LiftingSet(Sequence):
    """All liftings of a problem to one ring, stored as a stacked array."""

    def __init__(self, problem: LiftingProblem, ring: ArtinianTestRing, images: np.ndarray):
        self.problem = problem
        self.ring = ring
        self.images = images.astype(np.int32)

    def __len__(self):
        return self.images.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [Lifting(self.problem, self.ring, self.images[j]) for j in range(*i.indices(len(self)))]
        return Lifting(self.problem, self.ring, self.images[i])

    def keys(self) -> list[bytes]:
        flat = self.images.reshape(len(self), -1)
        return [row.tobytes() for row in flat]


def evaluate_word(A: ArtinianTestRing, images: np.ndarray, word: Word) -> np.ndarray:
    """``images`` has shape (N, k, n, n); returns the (N, n, n) product."""
    N, _, n, _ = images.shape
    if not word:
        return np.broadcast_to(A.identity(n), (N, n, n))
    out = images[:, word[0]]
    for k in word[1:]:
        out = A.matmul(out, images[:, k])
    return out


def evaluate_on_group(A: ArtinianTestRing, G: FiniteGroup, images: np.ndarray) -> np.ndarray:
    """Extend generator images along the BFS tree: shape (N, |G|, n, n)."""
    N, k, n, _ = images.shape
    out = np.empty((N, G.order, n, n), dtype=np.int32)
    out[:, 0] = A.identity(n)
    for x in range(1, G.order):
        y, s = G.parent[x]
        out[:, x] = A.matmul(out[:, y], images[:, s])
    return out


def enumerate_liftings(problem: LiftingProblem, A: ArtinianTestRing,
                       budget: int = DEFAULT_BUDGET) -> LiftingSet:
    """Every lifting of ``problem.rhobar`` to ``A``, in a deterministic order.

    Candidates for each generator are ``lift(rhobar(s)) * k`` with ``k`` in
    the kernel subgroup; relations are checked as soon as all of their
    generators have been assigned.
    """
    n = problem.n
    k = len(problem.rhobar)
    K = A.kernel_elements(n)
    if K.shape[0] ** 1 > budget:
        raise DeformationError("kernel subgroup over budget")
    rels_by_gen: dict[int, list] = {j: [] for j in range(k)}
    for lhs, rhs in problem.relations:
        top = max(list(lhs) + list(rhs) + [0])
        rels_by_gen[top].append((lhs, rhs))
    partial = np.zeros((1, 0, n, n), dtype=np.int32)
    for j in range(k):
        base = A.lift(problem.rhobar[j]).astype(np.int32)
        cand = A.matmul(np.broadcast_to(base, K.shape), K)
        if problem.fixed_det:
            target = A.teichmuller(problem.chi[j])
            cand = cand[A.det(cand) == target]
        # single-generator relations first
        single = [r for r in rels_by_gen[j] if set(r[0]) | set(r[1]) <= {j}]
        if single:
            probe = np.zeros((cand.shape[0], j + 1, n, n), dtype=np.int32)
            probe[:, j] = cand
            keep = np.ones(cand.shape[0], dtype=bool)
            for lhs, rhs in single:
                keep &= np.all(evaluate_word(A, probe, lhs) == evaluate_word(A, probe, rhs), axis=(1, 2))
            cand = cand[keep]
        multi = [r for r in rels_by_gen[j] if not (set(r[0]) | set(r[1]) <= {j})]
        total = partial.shape[0] * cand.shape[0]
        if total > budget:
            raise DeformationError(f"search space of {total} candidate tuples exceeds budget {budget}")
        survivors = []
        chunk = max(1, 200_000 // max(1, cand.shape[0]))
        for s in range(0, partial.shape[0], chunk):
            part = partial[s:s + chunk]
            P, C = part.shape[0], cand.shape[0]
            combo = np.empty((P * C, j + 1, n, n), dtype=np.int32)
            combo[:, :j] = np.repeat(part, C, axis=0)
            combo[:, j] = np.tile(cand, (P, 1, 1))
            keep = np.ones(P * C, dtype=bool)
            for lhs, rhs in multi:
                idx = np.nonzero(keep)[0]
                if idx.size == 0:
                    break
                sub = combo[idx]
                ok = np.all(evaluate_word(A, sub, lhs) == evaluate_word(A, sub, rhs), axis=(1, 2))
                keep[idx[~ok]] = False
            survivors.append(combo[keep])
        partial = np.concatenate(survivors) if survivors else np.zeros((0, j + 1, n, n), dtype=np.int32)
    return LiftingSet(problem, A, partial)


def verify_liftings_on_group(liftings: LiftingSet) -> bool:
    """Re-check every lifting by extending along the Cayley tree and testing all edges."""
    A, G = liftings.ring, liftings.problem.group
    if len(liftings) == 0:
        return True
    allv = evaluate_on_group(A, G, liftings.images)
    for k in range(len(G.gens)):
        lhs = allv[:, G.rgen[:, k]]
        rhs = A.matmul(allv, liftings.images[:, k][:, None])
        if not np.array_equal(lhs, rhs):
            return False
    red = A.residue[liftings.images]
    for k, m in enumerate(liftings.problem.rhobar):
        if not np.all(red[:, k] == m[None]):
            return False
    return True


# ---------------------------------------------------------------------------
# Deformations
# ---------------------------------------------------------------------------

def kernel_generators(A: ArtinianTestRing, n: int) -> list[np.ndarray]:
    """``1 + t E_ij`` for ``t`` in additive generators of the maximal ideal."""
    gens = []
    for t in A.additive_generators_of_m():
        for i in range(n):
            for j in range(n):
                g = A.identity(n)
                g[i, j] = A.add[g[i, j], t]
                gens.append(g)
    return gens


def kernel_group_size(A: ArtinianTestRing, n: int, limit: int = 200_000) -> int | None:
    """Size of the group generated by :func:`kernel_generators` (None if too large)."""
    gens = kernel_generators(A, n)
    start = A.identity(n)
    seen = {start.tobytes()}
    frontier = [start]
    while frontier:
        batch = np.array(frontier)
        frontier = []
        for g in gens:
            prods = A.matmul(batch, g[None])
            for m in prods:
                key = m.tobytes()
                if key not in seen:
                    seen.add(key)
                    frontier.append(m)
                    if len(seen) > limit:
                        return None
    return len(seen)


@dataclass
class DeformationOrbits:
    orbits: list  # list of index arrays into the lifting set
    liftings: LiftingSet

    def __len__(self):
        return len(self.orbits)


def deformation_classes(liftings: LiftingSet) -> DeformationOrbits:
    """Orbits of the lifting set under conjugation by ``ker(GL_n(A) -> GL_n(F))``."""
    A = liftings.ring
    n = liftings.problem.n
    N = len(liftings)
    if N == 0:
        return DeformationOrbits([], liftings)
    keys = liftings.keys()
    pos = {k: i for i, k in enumerate(keys)}
    rows, cols = [np.arange(N)], [np.arange(N)]
    for g in kernel_generators(A, n):
        ginv = A.inverse_matrix(g)
        conj = A.matmul(A.matmul(g[None, None], liftings.images), ginv[None, None])
        flat = conj.reshape(N, -1)
        tgt = np.array([pos[r.tobytes()] for r in flat.astype(np.int32)], dtype=np.int64)
        rows.append(np.arange(N))
        cols.append(tgt)
    graph = coo_matrix((np.ones(sum(len(r) for r in rows)), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(N, N))
    ncomp, labels = connected_components(graph, directed=True, connection="weak")
    orbits = [np.nonzero(labels == c)[0] for c in range(ncomp)]
    orbits.sort(key=lambda o: int(o[0]))
    return DeformationOrbits(orbits, liftings)


def tangent_report(problem: LiftingProblem) -> dict:
    """Dimensions of ``Z^1``, ``H^1``, ``H^0`` and the framed-minus-unframed gap."""
    M = problem.adjoint()
    G = problem.group
    h0 = cohomology(G, M, 0).dim
    h1res = cohomology(G, M, 1)
    z1 = h1res.cocycle_dim
    ambient = M.dim
    gap = ambient - h0
    ok = z1 == h1res.dim + ambient - h0
    return {
        "module": "ad0" if problem.fixed_det else "ad",
        "dim_Z1": z1,
        "dim_H1": h1res.dim,
        "dim_H0": h0,
        "framed_minus_unframed": gap,
        "identity_holds": ok,
        "identity": f"{z1} = {h1res.dim} + {ambient} - {h0}",
    }


def hensel_count(problem: LiftingProblem, A: ArtinianTestRing) -> int:
    """Lifting count predicted when ``H^1 = H^2 = 0`` and rhobar is semisimple."""
    M = problem.adjoint()
    h0 = cohomology(problem.group, M, 0).dim
    return A.m_size ** (M.dim - h0)


@dataclass
class CarayolResult:
    conjugator: np.ndarray | None
    witness: int | None  # group element where traces differ
    reason: str = ""


def carayol_conjugator(rho1: Lifting, rho2: Lifting) -> CarayolResult:
    """Search the kernel subgroup for ``a`` with ``rho2 = a rho1 a^-1``."""
    A = rho1.ring
    if rho2.ring is not A:
        raise DeformationError("liftings over different rings")
    prob = rho1.problem
    if not prob.representation().is_absolutely_irreducible():
        raise DeformationError("rhobar is not absolutely irreducible; Carayol's lemma does not apply")
    t1 = A.trace(rho1.all_elements())
    t2 = A.trace(rho2.all_elements())
    diff = np.nonzero(t1 != t2)[0]
    if diff.size:
        return CarayolResult(None, int(diff[0]), "traces differ")
    K = A.kernel_elements(prob.n)
    ok = np.ones(K.shape[0], dtype=bool)
    for s in range(len(prob.rhobar)):
        lhs = A.matmul(K, np.broadcast_to(rho1.images[s], K.shape))
        rhs = A.matmul(np.broadcast_to(rho2.images[s], K.shape), K)
        ok &= np.all(lhs == rhs, axis=(1, 2))
    hits = np.nonzero(ok)[0]
    if hits.size == 0:
        return CarayolResult(None, None, "no conjugator in the kernel subgroup")
    return CarayolResult(K[hits[0]], None, "found")


def non_schur_diagnostic(problem: LiftingProblem, A: ArtinianTestRing) -> dict:
    """Compare the orbit count with ``|m_A|^dim H^1`` (the count a smooth hull would give)."""
    lifts = enumerate_liftings(problem, A)
    orbits = deformation_classes(lifts)
    rep = tangent_report(problem)
    predicted = A.m_size ** rep["dim_H1"]
    schur = rep["dim_H0"] == (0 if problem.fixed_det else 1)
    return {
        "liftings": len(lifts),
        "orbits": len(orbits),
        "h1_prediction": predicted,
        "schur": schur,
        "coarser_than_h1": len(orbits) < predicted,
    }
