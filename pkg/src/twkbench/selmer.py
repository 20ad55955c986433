"""Selmer complexes with local conditions, their long exact sequence and
dual Selmer groups.

Cochains are normalized (arguments range over non-identity elements), the
global complex uses ``ad`` in degree 0 and ``ad^0`` above, and every complex
stops at degree 3 (brutal truncation).  All cohomology computed here is
therefore cohomology of the truncated complexes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .cohomology import (CohomologyClass, GModule, Representation, adjoint_module, ad_pairing, bar_coboundary,
                         check_equivariant_pairing, cochain_dim, cohomology, cup_product, normalized_vector,
                         sparse_rowspace, trace_zero_basis)
from .groups import FiniteGroup, Subgroup
from .linalg import RowSpace, complement_projection, nullspace_mod_p, rank_mod_p, rref_mod_p

TOP = 3
DEFAULT_BUDGET = 20_000


class SelmerError(ValueError):
    """Malformed setup or a complex above the size budget."""


@dataclass
class Place:
    label: str
    sub: Subgroup
    archimedean: bool = False

    def __post_init__(self):
        if self.archimedean and self.sub.order > 2:
            raise SelmerError(f"archimedean stand-in {self.label} must have order at most 2")


@dataclass
class SelmerSetup:
    """Global group, module ``ad^0`` (with ``ad`` for degree 0), places and local conditions.

    ``conditions[v]`` is ``"full"``, ``"zero"`` or a list of degree-one
    classes on ``G_v`` spanning ``L_v``; places in ``T`` need no condition.
    ``proj`` maps ``ad`` coordinates to ``ad^0`` coordinates on trace-zero input.
    """

    group: FiniteGroup
    module: GModule
    module_ad: GModule
    proj: np.ndarray
    places: list[Place]
    T: set[str]
    conditions: dict = field(default_factory=dict)
    chi: np.ndarray | None = None  # cyclotomic stand-in for M(1)
    rho: Representation | None = None
    name: str = "setup"

    def __post_init__(self):
        labels = [v.label for v in self.places]
        if len(set(labels)) != len(labels):
            raise SelmerError("place labels must be distinct")
        for v in self.places:
            if v.sub.ambient is not self.group:
                raise SelmerError(f"place {v.label} is not a subgroup of the global group")
        if not set(self.T) <= {v.label for v in self.finite_places}:
            raise SelmerError("T must be a subset of the finite places")
        for v in self.finite_places:
            if v.label not in self.T and v.label not in self.conditions:
                raise SelmerError(f"place {v.label} outside T needs a local condition")

    @property
    def p(self) -> int:
        return self.module.p

    @property
    def finite_places(self) -> list[Place]:
        return [v for v in self.places if not v.archimedean]

    @property
    def archimedean_places(self) -> list[Place]:
        return [v for v in self.places if v.archimedean]

    def twisted(self) -> GModule:
        chi = self.chi if self.chi is not None else np.ones(self.group.order, dtype=np.int64)
        return self.module.twist(chi, f"{self.module.name}(1)")


def ad_projection(n: int) -> np.ndarray:
    """``ad`` (row-major entries) to ``ad^0`` coordinates, exact on trace-zero matrices."""
    labels = trace_zero_basis(n)
    P = np.zeros((len(labels), n * n), dtype=np.int64)
    for c, (i, j) in enumerate(labels):
        P[c, i * n + j] = 1
    return P


def setup_from_representation(rho: Representation, places: Sequence[tuple], T: Sequence[str] = (),
                              conditions: dict | None = None, chi: np.ndarray | None = None,
                              name: str = "setup") -> SelmerSetup:
    """``places`` holds ``(label, generator indices in G[, archimedean])`` tuples."""
    G = rho.group
    M = adjoint_module(rho, fixed_det=True)
    M0 = adjoint_module(rho, fixed_det=False)
    pl = []
    for entry in places:
        label, gens = entry[0], entry[1]
        arch = bool(entry[2]) if len(entry) > 2 else False
        pl.append(Place(label, G.subgroup(gens, name=label), arch))
    return SelmerSetup(G, M, M0, ad_projection(rho.n), pl, set(T), dict(conditions or {}), chi, rho, name)


# ---------------------------------------------------------------------------
# Generic truncated complexes over F_p
# ---------------------------------------------------------------------------

def _csr(a) -> sp.csr_matrix:
    m = sp.csr_matrix(a, dtype=np.int64)
    return m


class Complex:
    """``C^0 -> ... -> C^top`` with sparse differentials ``d[i]: C^i -> C^(i+1)``."""

    def __init__(self, dims: list[int], diffs: list[sp.spmatrix], p: int, name: str = "C"):
        if len(diffs) != len(dims) - 1:
            raise SelmerError("need one differential between consecutive degrees")
        for i, d in enumerate(diffs):
            if d.shape != (dims[i + 1], dims[i]):
                raise SelmerError(f"differential {i} has shape {d.shape}, expected {(dims[i + 1], dims[i])}")
        self.dims = dims
        self.diffs = [_mod(d, p) for d in diffs]
        self.p = p
        self.name = name
        self._rank: dict[int, int] = {}
        self._z: dict[int, sp.csr_matrix] = {}

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def d(self, i: int) -> sp.csr_matrix:
        if 0 <= i < self.top:
            return self.diffs[i]
        rows = self.dims[i + 1] if 0 <= i + 1 <= self.top else 0
        cols = self.dims[i] if 0 <= i <= self.top else 0
        return sp.csr_matrix((rows, cols), dtype=np.int64)

    def d_squared_zero(self) -> bool:
        for i in range(self.top - 1):
            prod = _mod(self.diffs[i + 1] @ self.diffs[i], self.p)
            if prod.nnz:
                return False
        return True

    def rank(self, i: int) -> int:
        """Rank of ``d[i]``."""
        if i not in self._rank:
            d = self.d(i)
            self._rank[i] = 0 if d.shape[0] == 0 or d.shape[1] == 0 or d.nnz == 0 else \
                sparse_rowspace(d, self.p).rank
        return self._rank[i]

    def h_dim(self, i: int) -> int:
        return self.dims[i] - self.rank(i) - self.rank(i - 1)

    def cocycles(self, i: int) -> sp.csr_matrix:
        """Rows spanning ``Z^i``."""
        if i not in self._z:
            d = self.d(i)
            if d.shape[0] == 0 or d.nnz == 0:
                self._z[i] = sp.identity(self.dims[i], dtype=np.int64, format="csr")
            else:
                self._z[i] = _csr(sparse_rowspace(d, self.p).kernel())
        return self._z[i]

    def coboundaries(self, i: int) -> sp.csr_matrix:
        """Rows spanning ``B^i`` (the columns of ``d[i-1]``)."""
        return self.d(i - 1).T.tocsr()

    def euler(self) -> int:
        return sum((-1) ** i * n for i, n in enumerate(self.dims))

    def euler_h(self) -> int:
        return sum((-1) ** i * self.h_dim(i) for i in range(self.top + 1))

    def h_basis(self, i: int) -> np.ndarray:
        """Cocycle rows representing a basis of ``H^i``."""
        Z = self.cocycles(i).toarray() % self.p
        B = self.coboundaries(i)
        rs = RowSpace(self.dims[i], self.p)
        if B.shape[0] and B.nnz:
            rs.add(B.toarray())
        reps = []
        for z in Z:
            if not rs.contains(z):
                reps.append(z)
                rs.add(z)
        return np.array(reps, dtype=np.int64).reshape(-1, self.dims[i])


def _rows(a, w: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    return a.reshape((a.size // w if w else 0, w))


def _mod(m, p: int) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=np.int64)
    m.data %= p
    m.eliminate_zeros()
    return m


def _span_rank(blocks: list[sp.spmatrix], width: int, p: int) -> int:
    blocks = [b for b in blocks if b.shape[0] and b.nnz]
    if not blocks or width == 0:
        return 0
    stack = sp.vstack(blocks).tocsr()
    if stack.shape[0] < width:
        # row rank equals column rank; keep the RowSpace narrow
        stack = stack.T.tocsr()
    return sparse_rowspace(stack, p).rank


def image_dimension(f: sp.spmatrix, src: Complex, dst: Complex, i: int) -> int:
    """Rank of the map ``H^i(src) -> H^i(dst)`` induced by the cochain map ``f``."""
    Z = src.cocycles(i)
    fz = (Z @ f.T).tocsr() if Z.shape[0] else sp.csr_matrix((0, dst.dims[i]))
    B = dst.coboundaries(i)
    return _span_rank([_mod(fz, dst.p), B], dst.dims[i], dst.p) - _span_rank([B], dst.dims[i], dst.p)


# ---------------------------------------------------------------------------
# The Selmer complex
# ---------------------------------------------------------------------------

def _restriction_matrix(G: FiniteGroup, sub: Subgroup, d: int, degree: int) -> sp.csr_matrix:
    """Normalized ``C^degree(G, M) -> C^degree(G_v, M)``."""
    n, m = G.order, sub.order
    if degree == 0:
        return sp.identity(d, dtype=np.int64, format="csr")
    inc = sub.inclusion
    tup = np.array(list(itertools.product(range(1, m), repeat=degree)), dtype=np.int64).reshape(-1, degree)
    if tup.shape[0] == 0:
        return sp.csr_matrix((0, cochain_dim(n, d, degree)), dtype=np.int64)
    gt = inc[tup] - 1
    w = (n - 1) ** np.arange(degree - 1, -1, -1)
    gidx = (gt * w).sum(axis=1)
    ar = np.arange(d)
    rows = (np.arange(tup.shape[0])[:, None] * d + ar[None]).ravel()
    cols = (gidx[:, None] * d + ar[None]).ravel()
    return sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)),
                         shape=(tup.shape[0] * d, cochain_dim(n, d, degree)))


def _d0_projected(G: FiniteGroup, M0: GModule, proj: np.ndarray) -> sp.csr_matrix:
    """``C^0(G, ad) -> C^1(G, ad^0)``: ``X -> (g X g^-1 - X)`` in ``ad^0`` coordinates."""
    raw = bar_coboundary(G, M0, 0)
    P = sp.kron(sp.identity(G.order - 1, dtype=np.int64), sp.csr_matrix(proj))
    return (P @ raw).tocsr()


@dataclass
class LocalData:
    place: Place
    in_T: bool
    module: GModule
    module_ad: GModule
    quotient: np.ndarray | None  # rows: C^1 -> C^1 / L~
    section: np.ndarray | None
    dim_L: int
    dim_H1: int
    h0: int
    h0_ad: int


def _local_data(setup: SelmerSetup, v: Place) -> LocalData:
    G_v = v.sub.group
    Mv = setup.module.restrict(v.sub)
    M0v = setup.module_ad.restrict(v.sub)
    p, d = setup.p, Mv.dim
    h0 = cohomology(G_v, Mv, 0).dim
    h0_ad = cohomology(G_v, M0v, 0).dim
    m = G_v.order
    c1 = cochain_dim(m, d, 1)
    B = bar_coboundary(G_v, Mv, 0).T.toarray() % p
    d1 = bar_coboundary(G_v, Mv, 1)
    Zrows = sparse_rowspace(d1, p).kernel() if d1.shape[0] and d1.nnz else np.eye(c1, dtype=np.int64)
    rb = rank_mod_p(B, p) if B.size else 0
    dim_H1 = Zrows.shape[0] - rb
    if v.label in setup.T:
        return LocalData(v, True, Mv, M0v, None, None, 0, dim_H1, h0, h0_ad)
    cond = setup.conditions[v.label]
    if isinstance(cond, str):
        if cond == "full":
            Lt = Zrows
        elif cond == "zero":
            Lt = B
        else:
            raise SelmerError(f"unknown condition {cond!r}")
    else:
        vecs = []
        for c in cond:
            vals = c.values if isinstance(c, CohomologyClass) else np.asarray(c)
            vec = normalized_vector(np.asarray(vals) % p, 1, m, d)
            if (d1 @ vec % p).any():
                raise SelmerError(f"condition at {v.label} contains a non-cocycle")
            vecs.append(vec)
        Lt = np.vstack([B] + [np.array(vecs).reshape(-1, c1)]) if vecs else B
    rl = rank_mod_p(Lt, p) if Lt.size else 0
    Q = complement_projection(Lt, c1, p)
    Q, piv = rref_mod_p(Q, p) if Q.size else (Q, [])
    S = np.zeros((c1, Q.shape[0]), dtype=np.int64)
    for j, c in enumerate(piv):
        S[c, j] = 1
    return LocalData(v, False, Mv, M0v, Q.reshape(-1, c1), S, rl - rb, dim_H1, h0, h0_ad)


@dataclass
class SelmerComplex:
    setup: SelmerSetup
    global_complex: Complex  # C_0
    local_complex: Complex  # C_loc in degrees 0..2
    shifted_local: Complex  # C_loc[-1] in degrees 0..3
    total: Complex  # C_{S,T}
    restriction: list  # res^i: C_0^i -> C_loc^i
    locals: list[LocalData]

    def iota(self, i: int) -> sp.csr_matrix:
        a, b = self.global_complex.dims[i], self.shifted_local.dims[i]
        return sp.vstack([sp.csr_matrix((a, b), dtype=np.int64), sp.identity(b, dtype=np.int64)]).tocsr()

    def pi(self, i: int) -> sp.csr_matrix:
        a, b = self.global_complex.dims[i], self.shifted_local.dims[i]
        return sp.hstack([sp.identity(a, dtype=np.int64), sp.csr_matrix((a, b), dtype=np.int64)]).tocsr()

    def delta(self, i: int) -> sp.csr_matrix:
        """Cochain-level connecting map ``C_0^i -> C_loc[-1]^(i+1)``: the local part of ``d(z, 0)``."""
        return self.restriction[i] if i < len(self.restriction) else \
            sp.csr_matrix((0, self.global_complex.dims[i]), dtype=np.int64)


def build_selmer_complex(setup: SelmerSetup, budget: int = DEFAULT_BUDGET) -> SelmerComplex:
    G, M, M0, p = setup.group, setup.module, setup.module_ad, setup.p
    n, d = G.order, M.dim
    dims0 = [M0.dim] + [cochain_dim(n, d, i) for i in range(1, TOP + 1)]
    if max(dims0) > budget:
        raise SelmerError(f"global cochains of dimension {max(dims0)} exceed the budget {budget}")
    d0 = [_d0_projected(G, M0, setup.proj), bar_coboundary(G, M, 1), bar_coboundary(G, M, 2)]
    C0 = Complex(dims0, d0, p, "C_0")

    locs = [_local_data(setup, v) for v in setup.finite_places]
    # local cochain blocks per degree 0..2
    loc_dims = [[], [], []]
    loc_diff = [[], []]  # block-diagonal pieces
    res = [[], [], []]
    for L in locs:
        Gv, Mv = L.place.sub.group, L.module
        m = Gv.order
        r1 = _restriction_matrix(G, L.place.sub, d, 1)
        r2 = _restriction_matrix(G, L.place.sub, d, 2)
        b1 = bar_coboundary(Gv, Mv, 1)
        if L.in_T:
            loc_dims[0].append(M0.dim)
            loc_dims[1].append(cochain_dim(m, d, 1))
            loc_diff[0].append(_d0_projected(Gv, L.module_ad, setup.proj))
            loc_diff[1].append(b1)
            res[0].append(sp.identity(M0.dim, dtype=np.int64, format="csr"))
            res[1].append(r1)
        else:
            k = L.quotient.shape[0]
            loc_dims[0].append(0)
            loc_dims[1].append(k)
            loc_diff[0].append(sp.csr_matrix((k, 0), dtype=np.int64))
            loc_diff[1].append(_mod(b1 @ sp.csr_matrix(L.section), p))
            res[0].append(sp.csr_matrix((0, M0.dim), dtype=np.int64))
            res[1].append(_mod(sp.csr_matrix(L.quotient) @ r1, p))
        loc_dims[2].append(cochain_dim(m, d, 2))
        res[2].append(r2)
    Ldims = [sum(x) for x in loc_dims]
    if max(Ldims + [0]) > budget:
        raise SelmerError("local cochains exceed the budget")

    def bdiag(blocks, rows, cols):
        if not blocks:
            return sp.csr_matrix((rows, cols), dtype=np.int64)
        return sp.block_diag(blocks, format="csr", dtype=np.int64)

    def vst(blocks, cols):
        if not blocks:
            return sp.csr_matrix((0, cols), dtype=np.int64)
        return sp.vstack(blocks).tocsr()

    Ldiff = [bdiag(loc_diff[0], Ldims[1], Ldims[0]), bdiag(loc_diff[1], Ldims[2], Ldims[1])]
    Cloc = Complex(Ldims, Ldiff, p, "C_loc")
    R = [vst(res[i], dims0[i]) for i in range(3)]
    R = [_mod(r, p) for r in R]
    # shifted local complex, degrees 0..3, differential -d_loc
    Sdims = [0] + Ldims
    Sdiff = [sp.csr_matrix((Ldims[0], 0), dtype=np.int64)] + [_mod(-x, p) for x in Ldiff]
    Cs = Complex(Sdims, Sdiff, p, "C_loc[-1]")
    # total complex
    Tdims = [dims0[i] + Sdims[i] for i in range(TOP + 1)]
    Tdiff = []
    for i in range(TOP):
        top_row = sp.hstack([C0.d(i), sp.csr_matrix((dims0[i + 1], Sdims[i]), dtype=np.int64)])
        bottom = sp.hstack([R[i], Cs.d(i)])
        Tdiff.append(_mod(sp.vstack([top_row, bottom]), p))
    Ctot = Complex(Tdims, Tdiff, p, "C_ST")
    out = SelmerComplex(setup, C0, Cloc, Cs, Ctot, R, locs)
    if not Ctot.d_squared_zero():
        raise SelmerError("d^2 != 0 on the Selmer complex")
    return out


def selmer_h(sc: SelmerComplex, i: int) -> tuple[int, np.ndarray]:
    """``dim H^i_{S,T}`` and cocycle rows ``(phi, (psi_v))`` representing a basis."""
    if not 0 <= i <= TOP:
        raise SelmerError("degree must be between 0 and 3")
    dim = sc.total.h_dim(i)
    basis = sc.total.h_basis(i) if i < TOP else np.zeros((0, sc.total.dims[i]), dtype=np.int64)
    return dim, basis


def long_exact_sequence(sc: SelmerComplex) -> list[dict]:
    """Exactness at every node of ``H(L[-1]) -> H(C_ST) -> H(C_0) -> H(L[-1])[+1]``.

    Each node records its dimension and the ranks of the incoming and
    outgoing maps; exact means ``dim - rank(out) == rank(in)``.
    """
    C0, Cs, Ct = sc.global_complex, sc.shifted_local, sc.total
    nodes = []  # (name, dim, image dim of the map leaving this node)
    for i in range(TOP + 1):
        nodes.append((f"H^{i}(loc[-1])", Cs.h_dim(i), image_dimension(sc.iota(i), Cs, Ct, i)))
        # in the top degree every cochain is a cocycle and pi is onto
        pi_rank = image_dimension(sc.pi(i), Ct, C0, i) if i < TOP else C0.h_dim(i)
        nodes.append((f"H^{i}_ST", Ct.h_dim(i), pi_rank))
        if i < TOP:
            nodes.append((f"H^{i}(C_0)", C0.h_dim(i), _delta_rank(sc, i)))
        else:
            nodes.append((f"H^{i}(C_0)", C0.h_dim(i), 0))
    out = []
    prev_rank = 0
    for name, dim, out_rank in nodes:
        out.append({"node": name, "dim": dim, "in_rank": prev_rank, "out_rank": out_rank,
                    "exact": dim - out_rank == prev_rank})
        prev_rank = out_rank
    return out


def _delta_rank(sc: SelmerComplex, i: int) -> int:
    """Rank of ``H^i(C_0) -> H^(i+1)(loc[-1])``."""
    C0, Cs = sc.global_complex, sc.shifted_local
    Z = C0.cocycles(i)
    img = _mod(Z @ sc.delta(i).T, sc.setup.p) if Z.shape[0] else sp.csr_matrix((0, Cs.dims[i + 1]))
    B = Cs.coboundaries(i + 1)
    w = Cs.dims[i + 1]
    return _span_rank([img, B], w, sc.setup.p) - _span_rank([B], w, sc.setup.p)


# ---------------------------------------------------------------------------
# Euler characteristics
# ---------------------------------------------------------------------------

def _neg_euler(c: Complex) -> int:
    """``sum (-1)^(i-1) dim H^i``."""
    return -c.euler_h()


def euler_report(sc: SelmerComplex) -> dict:
    """Complex-level Euler characteristic bookkeeping.

    ``identity_holds`` compares the negative Euler characteristic of
    ``C_{S,T}`` with ``-c + chi(G) - sum chi(G_v) + T-term + sum (dim L - h0)``,
    where ``c = h0(G, ad) - h0(G, ad^0)`` and every ``chi`` is computed
    from its own truncated complex.
    """
    setup = sc.setup
    G = setup.group
    p = setup.p
    M, M0 = setup.module, setup.module_ad
    chi_G = _neg_euler(_group_complex(G, M, TOP, p))
    c = cohomology(G, M0, 0).dim - cohomology(G, M, 0).dim
    chi_v = 0
    t_term = 0
    l_term = 0
    for L in sc.locals:
        chi_v += _neg_euler(_group_complex(L.place.sub.group, L.module, TOP - 1, p))
        if L.in_T:
            t_term += L.h0_ad - L.h0
        else:
            l_term += L.dim_L - L.h0
    rhs = -c + chi_G - chi_v + t_term + l_term
    lhs = _neg_euler(sc.total)
    additive = sc.total.euler() == sc.total.euler_h()
    split = sc.total.euler() == sc.global_complex.euler() - sc.local_complex.euler()
    return {
        "chi_ST": lhs,
        "rhs": rhs,
        "identity_holds": lhs == rhs,
        "rank_nullity": additive,
        "complex_split": split,
        "terms": {"h0_ad_minus_h0_ad0": c, "chi_G": chi_G, "sum_chi_Gv": chi_v, "T_term": t_term,
                  "L_term": l_term},
    }


def _group_complex(G: FiniteGroup, M: GModule, top: int, p: int) -> Complex:
    n, d = G.order, M.dim
    dims = [cochain_dim(n, d, i) for i in range(top + 1)]
    diffs = [bar_coboundary(G, M, i) for i in range(top)]
    return Complex(dims, diffs, p, f"C({G.name},{M.name})")


def h0_flag(sc: SelmerComplex) -> dict:
    """Compare ``H^0_{S,T}`` with the one-dimensional value expected for absolutely irreducible rhobar."""
    h0 = sc.total.h_dim(0)
    irred = sc.setup.rho.is_absolutely_irreducible() if sc.setup.rho is not None else None
    return {
        "h0_ST": h0,
        "absolutely_irreducible": irred,
        "T_nonempty": bool(sc.setup.T),
        "discrepancy": bool(irred) and h0 != 1,
    }


# ---------------------------------------------------------------------------
# Dual Selmer
# ---------------------------------------------------------------------------

def _h_coordinates(G: FiniteGroup, M: GModule, degree: int):
    """(basis classes, function normalized cocycle -> coordinates in ``H^degree``)."""
    p, n, d = M.p, G.order, M.dim
    res = cohomology(G, M, degree, method="bar" if degree == 2 else "auto")
    reps = np.array([normalized_vector(c.values % p, degree, n, d) for c in res.basis],
                    dtype=np.int64).reshape(-1, cochain_dim(n, d, degree))
    Bm = bar_coboundary(G, M, degree - 1).T.toarray() % p
    bdim = rank_mod_p(Bm, p) if Bm.size else 0

    def coords(vec):
        stack = np.vstack([reps, Bm]) if Bm.size else reps
        if stack.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        from .linalg import solve_mod_p

        x = solve_mod_p(stack.T, vec % p, p)
        if x is None:
            raise SelmerError("vector is not a cocycle")
        return x[:reps.shape[0]] % p

    return res.basis, coords, reps, bdim


@dataclass
class LocalPairing:
    label: str
    matrix: np.ndarray  # (dim H^1(M), dim H^1(M(1)), dim H^2(F(1)))
    h2_dim: int
    perfect: bool
    annihilator: np.ndarray  # rows: coordinates in H^1(G_v, M(1))
    annihilator_classes: list


def local_cup_pairing(Gv: FiniteGroup, M: GModule, Md: GModule, pairing: np.ndarray, target: GModule,
                      L_coords: np.ndarray | None = None, label: str = "v") -> LocalPairing:
    """Cup product ``H^1(M) x H^1(M') -> H^2(target)`` and the annihilator of ``L``.

    ``L_coords`` holds rows of coordinates in the chosen basis of ``H^1(M)``
    (None means all of ``H^1``).
    """
    p = M.p
    if not check_equivariant_pairing(M, Md, target, pairing):
        raise SelmerError(f"pairing is not equivariant at {label}")
    b1, _, _, _ = _h_coordinates(Gv, M, 1)
    b1d, _, _, _ = _h_coordinates(Gv, Md, 1)
    b2, coords2, _, _ = _h_coordinates(Gv, target, 2)
    k2 = len(b2)
    mat = np.zeros((len(b1), len(b1d), k2), dtype=np.int64)
    for a, c1 in enumerate(b1):
        for b, c2 in enumerate(b1d):
            cup = cup_product(c1, c2, pairing, target)
            vec = normalized_vector(cup.values, 2, Gv.order, target.dim)
            mat[a, b] = coords2(vec) if k2 else 0
    if L_coords is None:
        L_coords = np.eye(len(b1), dtype=np.int64)
    L_coords = _rows(L_coords, len(b1))
    # x in H^1(M(1)) with sum_b x_b <l, c_b> = 0 for every l in L, in every H^2 coordinate
    eqs = _rows(np.einsum("la,abk->lkb", L_coords, mat), len(b1d)) % p
    ann = nullspace_mod_p(eqs, p) if eqs.size else np.eye(len(b1d), dtype=np.int64)
    left_ok = rank_mod_p(mat.transpose(0, 2, 1).reshape(len(b1), -1), p) == len(b1) if len(b1) else True
    right_ok = rank_mod_p(mat.transpose(1, 2, 0).reshape(len(b1d), -1), p) == len(b1d) if len(b1d) else True
    perfect = k2 == 1 and len(b1) == len(b1d) and left_ok and right_ok
    classes = []
    for row in ann:
        vals = sum((int(c) * cls.values for c, cls in zip(row, b1d)), np.zeros_like(b1d[0].values)) \
            if b1d else None
        if vals is not None:
            classes.append(CohomologyClass(1, Md, vals % p))
    return LocalPairing(label, mat, k2, perfect, ann, classes)


@dataclass
class DualSelmerResult:
    dimension: int
    basis: list
    h1_dual: int
    pairings: dict
    degenerate_places: list
    verified: bool


def _condition_coords(setup: SelmerSetup, L: LocalData, Gv: FiniteGroup) -> np.ndarray:
    """Coordinates of ``L_v`` in the cohomology basis of ``H^1(G_v, M)``."""
    cond = setup.conditions[L.place.label]
    b1, coords, _, _ = _h_coordinates(Gv, L.module, 1)
    if isinstance(cond, str):
        return np.eye(len(b1), dtype=np.int64) if cond == "full" else np.zeros((0, len(b1)), dtype=np.int64)
    rows = []
    for c in cond:
        vals = c.values if isinstance(c, CohomologyClass) else np.asarray(c)
        rows.append(coords(normalized_vector(np.asarray(vals) % setup.p, 1, Gv.order, L.module.dim)))
    return _rows(rows, len(b1))


def dual_selmer(setup: SelmerSetup, sc: SelmerComplex | None = None) -> DualSelmerResult:
    """``ker(H^1(G, M(1)) -> sum_{v not in T} H^1(G_v, M(1)) / L_v^perp)``."""
    sc = sc or build_selmer_complex(setup)
    G, p = setup.group, setup.p
    M1 = setup.twisted()
    chi = setup.chi if setup.chi is not None else np.ones(G.order, dtype=np.int64)
    target = GModule.trivial(G, p, 1, "F(1)").twist(chi, "F(1)")
    n = setup.rho.n if setup.rho is not None else int(round(np.sqrt(setup.module_ad.dim)))
    B = ad_pairing(n, p, fixed_det=True)
    if not check_equivariant_pairing(setup.module, M1, target, B):
        raise SelmerError("trace pairing is not equivariant for M x M(1) -> F(1)")
    glob = cohomology(G, M1, 1)
    cols = []
    pairings = {}
    degenerate = []
    for L in sc.locals:
        if L.in_T:
            continue
        sub = L.place.sub
        Gv = sub.group
        M1v = M1.restrict(sub)
        tv = target.restrict(sub)
        Lc = _condition_coords(setup, L, Gv)
        pair = local_cup_pairing(Gv, L.module, M1v, B, tv, Lc, L.place.label)
        pairings[L.place.label] = pair
        if not pair.perfect:
            degenerate.append(L.place.label)
        # quotient of Z^1(G_v, M(1)) by B^1 + L^perp
        m, d = Gv.order, M1v.dim
        Bv = bar_coboundary(Gv, M1v, 0).T.toarray() % p
        perp = [normalized_vector(c.values, 1, m, d) for c in pair.annihilator_classes]
        W = np.vstack([Bv] + [np.array(perp).reshape(-1, cochain_dim(m, d, 1))]) if perp else Bv
        Q = complement_projection(W, cochain_dim(m, d, 1), p)
        col = np.zeros((Q.shape[0], len(glob.basis)), dtype=np.int64)
        for j, c in enumerate(glob.basis):
            col[:, j] = Q @ normalized_vector(c.values[sub.inclusion], 1, m, d) % p
        cols.append(col)
    A = np.vstack(cols) % p if cols else np.zeros((0, len(glob.basis)), dtype=np.int64)
    ker = nullspace_mod_p(A, p) if A.shape[0] and len(glob.basis) else np.eye(len(glob.basis), dtype=np.int64)
    basis = []
    for row in ker:
        vals = sum((int(c) * cls.values for c, cls in zip(row, glob.basis)), np.zeros_like(glob.basis[0].values))
        basis.append(CohomologyClass(1, M1, vals % p))
    verified = all(not np.any((A @ row) % p) for row in ker)
    verified = verified and all(c.is_cocycle() for c in basis)
    return DualSelmerResult(len(basis), basis, glob.dim, pairings, degenerate, verified)


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

REQUIRED_DECLARATIONS = ("archimedean_h0",)


def wiles_formula_report(setup: SelmerSetup, declared: dict, sc: SelmerComplex | None = None) -> dict:
    """Evaluate the dimension formula for ``H^1_{S,T}`` against the direct computation.

    ``declared`` must give ``archimedean_h0`` (one integer per archimedean
    place); optional ``chi_G`` and ``chi_v`` (per place label) feed the Euler
    form, and ``duality_holds`` asks for the equality to be asserted.
    """
    missing = [k for k in REQUIRED_DECLARATIONS if k not in declared]
    if missing:
        raise SelmerError(f"missing declarations: {missing}")
    sc = sc or build_selmer_complex(setup)
    G = setup.group
    arch = list(declared["archimedean_h0"])
    if len(arch) != len(setup.archimedean_places):
        raise SelmerError("one archimedean H^0 dimension per archimedean place is required")
    dual = dual_selmer(setup, sc)
    h0_twist = cohomology(G, setup.twisted(), 0).dim
    l_term = sum(L.dim_L - L.h0 for L in sc.locals if not L.in_T)
    rhs = len(setup.T) - sum(arch) + l_term + dual.dimension - h0_twist
    direct = sc.total.h_dim(1)
    report = {
        "direct_h1_ST": direct,
        "rhs": rhs,
        "residual": direct - rhs,
        "terms": {"#T": len(setup.T), "archimedean": sum(arch), "L_terms": l_term,
                  "dual_selmer": dual.dimension, "h0_twist": h0_twist},
        "computed_archimedean_h0": [cohomology(v.sub.group, setup.module.restrict(v.sub), 0).dim
                                    for v in setup.archimedean_places],
        "degenerate_pairings": dual.degenerate_places,
        "h2_ST": sc.total.h_dim(2),
        "h3_ST": sc.total.h_dim(3),
    }
    if "chi_G" in declared and "chi_v" in declared:
        chi_v = sum(declared["chi_v"][L.place.label] for L in sc.locals)
        c = cohomology(G, setup.module_ad, 0).dim - cohomology(G, setup.module, 0).dim
        t_term = sum(L.h0_ad - L.h0 for L in sc.locals if L.in_T)
        chi_st = -c + declared["chi_G"] - chi_v + t_term + l_term
        # h1 = chi + h0 + h2 - h3 with the duality substitutions for h2 and h3
        report["euler_form"] = chi_st + sc.total.h_dim(0) + dual.dimension - h0_twist
    if declared.get("duality_holds"):
        report["asserted"] = report["residual"] == 0
    return report
