"""Group cohomology of enumerated finite groups with coefficients in
finite-dimensional ``F_p``-modules.

Cochains are normalized inhomogeneous cochains: they vanish whenever an
argument is the identity, so ``dim C^i = (|G| - 1)^i * dim M``.  Degree one
is computed from generator values (a cocycle is determined by its values on
generators, extended along the BFS tree of the Cayley graph; non-tree edges
give the constraints).  The full bar complex is also available and serves as
an independent route in degrees 0-3.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .groups import FiniteGroup, Subgroup, element_arrays
from .linalg import RowSpace, nullspace_mod_p, rank_mod_p, solve_mod_p
from .rings import prime_field

DEFAULT_BUDGET = 4_000_000


class CohomologyError(ValueError):
    """Budget exceeded or incompatible module data."""


def batch_inverse_mod_p(mats: np.ndarray, p: int) -> np.ndarray:
    """Inverse of every matrix in an ``(N, d, d)`` stack over ``F_p``."""
    a = np.asarray(mats, dtype=np.int64) % p
    N, d, _ = a.shape
    aug = np.concatenate([a, np.broadcast_to(np.eye(d, dtype=np.int64), (N, d, d))], axis=2).copy()
    inv_table = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        inv_table[x] = pow(x, -1, p)
    idx = np.arange(N)
    for c in range(d):
        sub = aug[:, c:, c]
        has = sub != 0
        if not np.all(has.any(axis=1)):
            raise CohomologyError("singular matrix in batch inverse")
        piv = c + np.argmax(has, axis=1)
        rows_c = aug[idx, c].copy()
        aug[idx, c] = aug[idx, piv]
        aug[idx, piv] = rows_c
        scale = inv_table[aug[:, c, c]]
        aug[:, c] = (aug[:, c] * scale[:, None]) % p
        for r in range(d):
            if r == c:
                continue
            f = aug[:, r, c].copy()
            aug[:, r] = (aug[:, r] - f[:, None] * aug[:, c]) % p
    return aug[:, :, d:]


# ---------------------------------------------------------------------------
# Modules and representations
# ---------------------------------------------------------------------------

class GModule:
    """``F_p[G]``-module of finite dimension given by one matrix per element.

    ``mats[g]`` acts on column vectors.  ``field_degree`` records a module that
    is really over ``F_{p^f}`` and has been restricted to ``F_p``; reported
    dimensions are then divided by ``f``.
    """

    def __init__(self, group: FiniteGroup, p: int, mats: np.ndarray, name: str = "M",
                 field_degree: int = 1):
        self.group = group
        self.p = p
        self.mats = np.asarray(mats, dtype=np.int64) % p
        if self.mats.shape[0] != group.order:
            raise CohomologyError("need one matrix per group element")
        self.dim = self.mats.shape[1]
        self.name = name
        self.field_degree = field_degree
        self.coefficient = prime_field(p)

    def __repr__(self):
        return f"GModule({self.name}, dim={self.dim}, p={self.p}, {self.group.name})"

    @classmethod
    def from_generators(cls, group: FiniteGroup, p: int, gen_mats: Sequence, name: str = "M",
                        field_degree: int = 1) -> "GModule":
        """Extend generator images along the BFS tree and verify every Cayley edge."""
        gm = [np.asarray(m, dtype=np.int64) % p for m in gen_mats]
        if len(gm) != len(group.gens):
            raise CohomologyError("one matrix per generator is required")
        d = gm[0].shape[0]
        n = group.order
        mats = np.zeros((n, d, d), dtype=np.int64)
        mats[0] = np.eye(d, dtype=np.int64)
        for x in range(1, n):
            y, k = group.parent[x]
            mats[x] = (mats[y] @ gm[k]) % p
        for k in range(len(gm)):
            lhs = mats[group.rgen[:, k]]
            rhs = np.einsum("nij,jk->nik", mats, gm[k]) % p
            if not np.array_equal(lhs, rhs):
                raise CohomologyError("generator images do not define a homomorphism")
        return cls(group, p, mats, name, field_degree)

    @classmethod
    def trivial(cls, group: FiniteGroup, p: int, dim: int = 1, name: str = "F_p") -> "GModule":
        mats = np.broadcast_to(np.eye(dim, dtype=np.int64), (group.order, dim, dim)).copy()
        return cls(group, p, mats, name)

    def check_homomorphism(self) -> bool:
        G = self.group
        for k, g in enumerate(G.gens):
            lhs = self.mats[G.rgen[:, k]]
            rhs = np.einsum("nij,jk->nik", self.mats, self.mats[g]) % self.p
            if not np.array_equal(lhs, rhs):
                return False
        return True

    def twist(self, chi: np.ndarray, name: str | None = None) -> "GModule":
        chi = np.asarray(chi, dtype=np.int64) % self.p
        return GModule(self.group, self.p, self.mats * chi[:, None, None], name or f"{self.name}(chi)",
                       self.field_degree)

    def dual(self) -> "GModule":
        inv = batch_inverse_mod_p(self.mats, self.p)
        return GModule(self.group, self.p, np.transpose(inv, (0, 2, 1)), f"{self.name}^*", self.field_degree)

    def restrict(self, sub: Subgroup) -> "GModule":
        return GModule(sub.group, self.p, self.mats[sub.inclusion], f"{self.name}|{sub.group.name}",
                       self.field_degree)

    def inflate(self, quotient_map: np.ndarray, big: FiniteGroup) -> "GModule":
        return GModule(big, self.p, self.mats[np.asarray(quotient_map)], f"Inf({self.name})",
                       self.field_degree)

    def act(self, g: int, v) -> np.ndarray:
        return (self.mats[g] @ np.asarray(v, dtype=np.int64)) % self.p

    def invariants(self) -> np.ndarray:
        G = self.group
        eqs = np.vstack([self.mats[g] - np.eye(self.dim, dtype=np.int64) for g in G.gens]) % self.p
        return nullspace_mod_p(eqs, self.p)


class Representation:
    """A homomorphism ``G -> GL_n(F_p)`` stored elementwise."""

    def __init__(self, group: FiniteGroup, p: int, mats: np.ndarray, name: str = "rho"):
        self.group = group
        self.p = p
        self.mats = np.asarray(mats, dtype=np.int64) % p
        self.n = self.mats.shape[1]
        self.name = name

    @classmethod
    def from_generators(cls, group: FiniteGroup, p: int, gen_mats, name: str = "rho") -> "Representation":
        M = GModule.from_generators(group, p, gen_mats, name)
        return cls(group, p, M.mats, name)

    @classmethod
    def tautological(cls, group: FiniteGroup, name: str = "rho") -> "Representation":
        """The inclusion of a matrix group over ``F_p``."""
        ring = group.matrix_ring
        if not ring.is_field or getattr(ring, "p", None) != ring.n:
            raise CohomologyError("tautological representation needs a prime field matrix group")
        return cls(group, ring.n, element_arrays(group), name)

    def as_module(self) -> GModule:
        return GModule(self.group, self.p, self.mats, self.name)

    def det(self) -> np.ndarray:
        if self.n == 1:
            return self.mats[:, 0, 0] % self.p
        if self.n == 2:
            m = self.mats
            return (m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]) % self.p
        return np.array([int(round(np.linalg.det(m))) for m in self.mats]) % self.p

    def is_absolutely_irreducible(self) -> bool:
        """Burnside: the span of the image is all of ``M_n``."""
        flat = self.mats.reshape(self.group.order, -1)
        return rank_mod_p(flat, self.p) == self.n * self.n

    def restrict(self, sub: Subgroup) -> "Representation":
        return Representation(sub.group, self.p, self.mats[sub.inclusion], self.name)


def character_from_generators(group: FiniteGroup, p: int, values: Sequence[int]) -> np.ndarray:
    M = GModule.from_generators(group, p, [[[v]] for v in values], "chi")
    return M.mats[:, 0, 0].copy()


def trace_zero_basis(n: int) -> list[tuple[int, int]]:
    """Coordinate labels for ad^0: off-diagonal (i, j) and diagonal (i, i), i < n-1."""
    labels = [(i, j) for i in range(n) for j in range(n) if i != j]
    labels += [(i, i) for i in range(n - 1)]
    return labels


def adjoint_module(rho: Representation, fixed_det: bool = False, twist: np.ndarray | None = None) -> GModule:
    """``ad rho`` (or ``ad^0 rho`` when ``fixed_det``), optionally twisted.

    Coordinates of ``ad`` are the matrix entries in row-major order.  For
    ``ad^0`` they are the off-diagonal entries followed by ``Y_ii`` for
    ``i < n-1``, i.e. the basis ``E_ij`` and ``E_ii - E_nn``.
    """
    p, n = rho.p, rho.n
    if fixed_det and n % p == 0:
        raise CohomologyError(f"p = {p} divides n = {n}; ad^0 is not a direct summand")
    inv = batch_inverse_mod_p(rho.mats, p)
    # vec(g X g^-1) = (g kron g^-T) vec(X) in row-major order
    ad = np.einsum("gik,gjl->gijkl", rho.mats, np.transpose(inv, (0, 2, 1))) % p
    ad = ad.reshape(rho.group.order, n * n, n * n)
    name = "ad"
    if fixed_det:
        labels = trace_zero_basis(n)
        emb = np.zeros((n * n, len(labels)), dtype=np.int64)  # ad^0 coords -> ad coords
        for c, (i, j) in enumerate(labels):
            emb[i * n + j, c] = 1
            if i == j:
                emb[(n - 1) * n + (n - 1), c] = p - 1
        proj = np.zeros((len(labels), n * n), dtype=np.int64)
        for c, (i, j) in enumerate(labels):
            proj[c, i * n + j] = 1
        ad = np.einsum("ab,gbc,cd->gad", proj, ad, emb) % p
        name = "ad0"
    M = GModule(rho.group, p, ad, f"{name}({rho.name})")
    if twist is not None:
        M = M.twist(twist, f"{M.name}(1)")
    return M


def ad_pairing(n: int, p: int, fixed_det: bool) -> np.ndarray:
    """Trace pairing ``(X, Y) -> tr(XY)`` as a tensor of shape (1, d, d)."""
    if fixed_det:
        labels = trace_zero_basis(n)

        def mat(c):
            m = np.zeros((n, n), dtype=np.int64)
            i, j = labels[c]
            m[i, j] = 1
            if i == j:
                m[n - 1, n - 1] = -1
            return m
        mats = [mat(c) for c in range(len(labels))]
    else:
        mats = []
        for i in range(n):
            for j in range(n):
                m = np.zeros((n, n), dtype=np.int64)
                m[i, j] = 1
                mats.append(m)
    d = len(mats)
    B = np.zeros((1, d, d), dtype=np.int64)
    for a in range(d):
        for b in range(d):
            B[0, a, b] = np.trace(mats[a] @ mats[b]) % p
    return B


def invariant_subspaces(M: GModule, limit: int | None = None) -> list[np.ndarray]:
    """Exhaustively enumerate proper nonzero invariant subspaces (RREF bases)."""
    p, d = M.p, M.dim
    gens = [M.mats[g] for g in M.group.gens]
    found = []
    for k in range(1, d):
        for pivots in itertools.combinations(range(d), k):
            free_slots = [(r, c) for r in range(k) for c in range(d)
                          if c > pivots[r] and c not in pivots]
            for vals in itertools.product(range(p), repeat=len(free_slots)):
                W = np.zeros((k, d), dtype=np.int64)
                for r, c in enumerate(pivots):
                    W[r, c] = 1
                for (r, c), v in zip(free_slots, vals):
                    W[r, c] = v
                if all(rank_mod_p(np.vstack([W, (g @ W.T).T % p]), p) == k for g in gens):
                    found.append(W)
                    if limit and len(found) >= limit:
                        return found
    return found


def is_irreducible_exhaustive(M: GModule) -> bool:
    return not invariant_subspaces(M, limit=1)


# ---------------------------------------------------------------------------
# Cochains
# ---------------------------------------------------------------------------

@dataclass
class CohomologyClass:
    """A cocycle representing a class in ``H^degree(G, M)``.

    ``values`` is the full cochain: shape ``(d,)`` in degree 0, ``(n, d)`` in
    degree 1, ``(n, n, d)`` in degree 2.
    """

    degree: int
    module: GModule
    values: np.ndarray

    def is_cocycle(self) -> bool:
        return not np.any(coboundary_of(self.module, self.degree, self.values))

    def is_coboundary(self) -> bool:
        return is_coboundary(self.module, self.degree, self.values)

    def __add__(self, other: "CohomologyClass") -> "CohomologyClass":
        return CohomologyClass(self.degree, self.module, (self.values + other.values) % self.module.p)

    def scale(self, c: int) -> "CohomologyClass":
        return CohomologyClass(self.degree, self.module, (self.values * c) % self.module.p)


def coboundary_of(M: GModule, degree: int, values: np.ndarray) -> np.ndarray:
    """Apply the bar differential to a full cochain (small groups only for degree 2)."""
    p = M.p
    G = M.group
    if degree == 0:
        return (np.einsum("gij,j->gi", M.mats, values) - values[None, :]) % p
    if degree == 1:
        t = G.table
        gh = t  # (g, h) -> gh
        out = (np.einsum("gij,hj->ghi", M.mats, values) - values[gh] + values[:, None, :]) % p
        return out
    if degree == 2:
        t = G.table
        n = G.order
        g = np.arange(n)
        term1 = np.einsum("gij,hkj->ghki", M.mats, values)
        term2 = values[t[:, :, None], np.broadcast_to(g[None, None, :], (n, n, n))]
        term3 = values[np.broadcast_to(g[:, None, None], (n, n, n)), t[None, :, :]]
        term4 = values[:, :, None, :]
        return (term1 - term2 + term3 - term4) % p
    raise CohomologyError("coboundary_of supports degrees 0-2")


def is_coboundary(M: GModule, degree: int, values: np.ndarray) -> bool:
    p, d = M.p, M.dim
    G = M.group
    if degree == 0:
        return not np.any(values % p)
    if degree == 1:
        # values[g] = g m - m for some m
        A = (M.mats - np.eye(d, dtype=np.int64)[None]).reshape(-1, d) % p
        return solve_mod_p(A, values.reshape(-1) % p, p) is not None
    if degree == 2:
        n = G.order
        d1 = bar_coboundary(G, M, 1).tocsc()
        vec = normalized_vector(values, 2, n, d)
        rs = RowSpace(d1.shape[0], p)
        rs.add(d1.T.toarray())
        return rs.contains(vec)
    raise CohomologyError("degree must be 0, 1 or 2")


def normalized_vector(values: np.ndarray, degree: int, n: int, d: int) -> np.ndarray:
    """Restrict a full cochain to non-identity arguments and flatten."""
    if degree == 0:
        return values.reshape(-1)
    sl = (slice(1, None),) * degree
    return values[sl].reshape(-1)


def full_cochain(vec: np.ndarray, degree: int, n: int, d: int) -> np.ndarray:
    if degree == 0:
        return vec.reshape(d)
    out = np.zeros((n,) * degree + (d,), dtype=np.int64)
    out[(slice(1, None),) * degree] = vec.reshape((n - 1,) * degree + (d,))
    return out


def cochain_dim(n: int, d: int, degree: int) -> int:
    return (n - 1) ** degree * d


def bar_coboundary(G: FiniteGroup, M: GModule, degree: int) -> sp.csr_matrix:
    """Sparse matrix of ``d: C^degree -> C^(degree+1)`` on normalized cochains."""
    n, d, p = G.order, M.dim, M.p
    i = degree
    m = n - 1
    rows_dim = cochain_dim(n, d, i + 1)
    cols_dim = cochain_dim(n, d, i)
    if i + 1 > 0 and m == 0:
        return sp.csr_matrix((rows_dim, cols_dim), dtype=np.int64)
    # all (i+1)-tuples of non-identity elements, lexicographic
    tup = np.array(list(itertools.product(range(1, n), repeat=i + 1)), dtype=np.int64).reshape(-1, i + 1)
    N = tup.shape[0]
    table = G.table if i >= 1 else None
    weights = m ** np.arange(i - 1, -1, -1) if i > 0 else np.zeros(0, dtype=np.int64)

    def idx_of(args):  # args shape (N, i), entries >= 1 assumed
        if i == 0:
            return np.zeros(args.shape[0], dtype=np.int64)
        return ((args - 1) * weights).sum(axis=1)

    blocks_r, blocks_c, blocks_v = [], [], []
    ar = np.arange(d)

    def add_block(mask, col_idx, mats_or_sign):
        rows = np.nonzero(mask)[0]
        if rows.size == 0:
            return
        if isinstance(mats_or_sign, int):
            r = (rows[:, None] * d + ar[None, :]).ravel()
            c = (col_idx[rows][:, None] * d + ar[None, :]).ravel()
            blocks_r.append(r)
            blocks_c.append(c)
            blocks_v.append(np.full(r.shape, mats_or_sign % p, dtype=np.int64))
        else:
            mats = mats_or_sign[rows]
            r = (rows[:, None, None] * d + ar[None, :, None] + 0 * ar[None, None, :]).ravel()
            c = (col_idx[rows][:, None, None] * d + 0 * ar[None, :, None] + ar[None, None, :]).ravel()
            blocks_r.append(r)
            blocks_c.append(c)
            blocks_v.append(mats.reshape(-1) % p)

    # g1 . f(g2..g_{i+1})
    add_block(np.ones(N, dtype=bool), idx_of(tup[:, 1:]), M.mats[tup[:, 0]])
    # sum_j (-1)^j f(.., g_j g_{j+1}, ..)
    for j in range(i):
        prod = table[tup[:, j], tup[:, j + 1]]
        args = np.concatenate([tup[:, :j], prod[:, None], tup[:, j + 2:]], axis=1)
        mask = prod != 0
        safe = np.where(args == 0, 1, args)
        add_block(mask, idx_of(safe), 1 if (j + 1) % 2 == 0 else -1)
    # (-1)^(i+1) f(g1..g_i)
    add_block(np.ones(N, dtype=bool), idx_of(tup[:, :i]), 1 if (i + 1) % 2 == 0 else -1)
    r = np.concatenate(blocks_r)
    c = np.concatenate(blocks_c)
    v = np.concatenate(blocks_v)
    mat = sp.coo_matrix((v, (r, c)), shape=(rows_dim, cols_dim)).tocsr()
    mat.data %= p
    mat.eliminate_zeros()
    return mat


def sparse_rowspace(mat: sp.spmatrix, p: int, chunk: int = 2048) -> RowSpace:
    mat = mat.tocsr()
    rs = RowSpace(mat.shape[1], p, chunk)
    for s in range(0, mat.shape[0], chunk):
        block = mat[s:s + chunk].toarray() % p
        rs.add(block)
        if rs.rank == mat.shape[1]:
            break
    return rs


def sparse_column_space(mat: sp.spmatrix, p: int) -> RowSpace:
    """Row space of the transpose, i.e. the image of ``mat``."""
    return sparse_rowspace(mat.T.tocsr(), p)


# ---------------------------------------------------------------------------
# Cohomology
# ---------------------------------------------------------------------------

@dataclass
class CohomologyResult:
    degree: int
    dim: int
    basis: list
    cocycle_dim: int
    coboundary_dim: int
    field_degree: int = 1

    @property
    def dimension(self) -> int:
        """Dimension over the module's field (``F_p`` dimension / ``f``)."""
        return self.dim // self.field_degree


def _h1_generators(G: FiniteGroup, M: GModule):
    """Cocycles as generator values; returns (A, Z basis, B basis) in gen coords."""
    p, d = M.p, M.dim
    n, k = G.order, len(G.gens)
    A = np.zeros((n, d, k * d), dtype=np.int64)
    for x in range(1, n):
        y, s = G.parent[x]
        A[x] = A[y]
        A[x][:, s * d:(s + 1) * d] = (A[x][:, s * d:(s + 1) * d] + M.mats[y]) % p
    rs = RowSpace(k * d, p)
    for s in range(k):
        block = -A[G.rgen[:, s]] + A
        block[:, :, s * d:(s + 1) * d] += M.mats
        rs.add(block.reshape(n * d, k * d) % p)
    Z = rs.kernel()
    eye = np.eye(d, dtype=np.int64)
    Bgen = np.concatenate([M.mats[g] - eye for g in G.gens], axis=0) % p  # (k d, d)
    B = Bgen.T  # rows: images of basis vectors of M
    return A, Z, B


def cocycle_from_generator_values(G: FiniteGroup, M: GModule, x: np.ndarray, A: np.ndarray | None = None):
    if A is None:
        A = _h1_generators(G, M)[0]
    return np.einsum("nij,j->ni", A, x) % M.p


def _complement(sub_rows: np.ndarray, rows: np.ndarray, p: int, width: int) -> list[np.ndarray]:
    rs = RowSpace(width, p)
    if sub_rows.size:
        rs.add(sub_rows)
    picked = []
    for r in rows:
        if not rs.contains(r):
            picked.append(r % p)
            rs.add(r)
    return picked


def cohomology(G: FiniteGroup, M: GModule, i: int, budget: int = DEFAULT_BUDGET,
               method: str = "auto") -> CohomologyResult:
    """Dimension and representing cocycles of ``H^i(G, M)`` for ``i = 0, 1, 2``.

    ``method`` is ``"generators"`` (degree 1 only), ``"bar"`` or ``"auto"``.
    """
    if M.group is not G:
        raise CohomologyError("module is for a different group")
    p, d, n = M.p, M.dim, G.order
    if i == 0:
        inv = M.invariants()
        basis = [CohomologyClass(0, M, v) for v in inv]
        return CohomologyResult(0, len(basis), basis, len(basis), 0, M.field_degree)
    if i == 1 and method in ("auto", "generators"):
        A, Z, B = _h1_generators(G, M)
        rb = rank_mod_p(B, p) if B.size else 0
        reps = _complement(B, Z, p, len(G.gens) * d)
        basis = [CohomologyClass(1, M, cocycle_from_generator_values(G, M, z, A)) for z in reps]
        return CohomologyResult(1, len(reps), basis, Z.shape[0], rb, M.field_degree)
    if i in (1, 2):
        cells = cochain_dim(n, d, i + 1)
        if cells > budget:
            raise CohomologyError(f"H^{i} needs {cells} cochain cells; budget is {budget}")
        dn = bar_coboundary(G, M, i)
        rs_z = sparse_rowspace(dn, p)
        Z = rs_z.kernel()
        dprev = bar_coboundary(G, M, i - 1)
        Bimg = dprev.T.toarray() % p
        rb = rank_mod_p(Bimg, p) if Bimg.size else 0
        reps = _complement(Bimg, Z, p, cochain_dim(n, d, i))
        basis = [CohomologyClass(i, M, full_cochain(z, i, n, d)) for z in reps]
        return CohomologyResult(i, len(reps), basis, Z.shape[0], rb, M.field_degree)
    raise CohomologyError("degree must be 0, 1 or 2")


def h1_dimension(G: FiniteGroup, M: GModule) -> int:
    return cohomology(G, M, 1).dim


# ---------------------------------------------------------------------------
# Functoriality and products
# ---------------------------------------------------------------------------

@dataclass
class QuotientMap:
    """Surjection ``G -> Q`` as an array of ``Q`` indices, one per element of ``G``."""

    source: FiniteGroup
    target: FiniteGroup
    images: np.ndarray

    def check(self) -> bool:
        G = self.source
        im = self.images
        return all(im[G.rgen[x, k]] == self.target.mul(int(im[x]), int(im[G.gens[k]]))
                   for x in range(G.order) for k in range(len(G.gens)))


def restrict_inflate(c: CohomologyClass, along, module: GModule | None = None) -> CohomologyClass:
    """Restriction to a :class:`Subgroup` or inflation along a :class:`QuotientMap`."""
    M = c.module
    if isinstance(along, Subgroup):
        if along.ambient is not M.group:
            raise CohomologyError("subgroup of a different group")
        inc = along.inclusion
        target = module or M.restrict(along)
        if not np.array_equal(target.mats, M.mats[inc]):
            raise CohomologyError("module action does not match the restriction")
        vals = c.values
        if c.degree == 1:
            vals = vals[inc]
        elif c.degree == 2:
            vals = vals[np.ix_(inc, inc)]
        return CohomologyClass(c.degree, target, vals)
    if isinstance(along, QuotientMap):
        if along.target is not M.group:
            raise CohomologyError("class lives on a different quotient")
        im = along.images
        target = module or M.inflate(im, along.source)
        if not np.array_equal(target.mats, M.mats[im]):
            raise CohomologyError("module action is not inflated from the quotient")
        vals = c.values
        if c.degree == 1:
            vals = vals[im]
        elif c.degree == 2:
            vals = vals[np.ix_(im, im)]
        return CohomologyClass(c.degree, target, vals)
    raise CohomologyError("expected a Subgroup or a QuotientMap")


def check_equivariant_pairing(M1: GModule, M2: GModule, M3: GModule, B: np.ndarray) -> bool:
    p = M1.p
    for g in M1.group.gens:
        lhs = np.einsum("cab,ai,bj->cij", B, M1.mats[g], M2.mats[g]) % p
        rhs = np.einsum("ck,kij->cij", M3.mats[g], B) % p
        if not np.array_equal(lhs, rhs):
            return False
    return True


def cup_product(c1: CohomologyClass, c2: CohomologyClass, pairing: np.ndarray, target: GModule) -> CohomologyClass:
    """``(c1 u c2)(g, h) = B(c1(g), g . c2(h))`` for degree-one classes."""
    if c1.degree != 1 or c2.degree != 1:
        raise CohomologyError("cup_product is implemented for two degree-one classes")
    M1, M2 = c1.module, c2.module
    if not check_equivariant_pairing(M1, M2, target, pairing):
        raise CohomologyError("pairing is not G-equivariant")
    p = M1.p
    gc2 = np.einsum("gij,hj->ghi", M2.mats, c2.values) % p
    vals = np.einsum("cab,ga,ghb->ghc", pairing, c1.values, gc2) % p
    return CohomologyClass(2, target, vals)


def tensor_pairing(d1: int, d2: int) -> np.ndarray:
    """Identity pairing ``M1 x M2 -> M1 (x) M2``."""
    B = np.zeros((d1 * d2, d1, d2), dtype=np.int64)
    for a in range(d1):
        for b in range(d2):
            B[a * d2 + b, a, b] = 1
    return B


def tensor_module(M1: GModule, M2: GModule) -> GModule:
    mats = np.einsum("gik,gjl->gijkl", M1.mats, M2.mats).reshape(M1.group.order, M1.dim * M2.dim,
                                                                  M1.dim * M2.dim) % M1.p
    return GModule(M1.group, M1.p, mats, f"{M1.name}(x){M2.name}")
