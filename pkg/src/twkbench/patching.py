"""Algebraic modular forms on finite double-coset data, freeness checks and
the pigeonhole patching construction on finite truncations.

The coefficient ring ``O`` is modelled by ``Z/p^K``.  The ring ``J_inf``
(power series in ``y_1..y_r`` over ``O``) is only ever seen through its
quotients ``J/c_M = (Z/p^M)[y]/((1+y_i)^{p^M} - 1)``, which are the group
algebras ``(Z/p^M)[(Z/p^M)^r]`` with ``y_i = T_i - 1``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algorithms import sym_power
from .groups import FiniteGroup, generate_group
from .linalg import kernel_mod_pk, matmul_mod, rank_mod_p, rref_mod_p, smith_mod_pk, solve_mod_pk, \
    span_size_log_mod_pk
from .matrix import Matrix
from .rings import integers_mod


class PatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Finite modules over Z/p^N with commuting operators
# ---------------------------------------------------------------------------

def _span_log(rows: np.ndarray, p: int, N: int) -> int:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return 0
    return span_size_log_mod_pk(rows, p, N)


def inverse_mod_pk(a: np.ndarray, p: int, N: int) -> np.ndarray:
    n = p ** N
    U, vals, V = smith_mod_pk(a, p, N)
    if len(vals) != a.shape[0] or any(vals):
        raise PatchError("matrix is not invertible")
    return matmul_mod(V, U, n)


@dataclass
class FiniteModule:
    """``(Z/p^N)^d / span(rel)`` with operators ``ops[i]`` acting on columns."""

    p: int
    N: int
    d: int
    ops: list[np.ndarray]
    rel: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))
    name: str = "M"

    def __post_init__(self):
        n = self.p ** self.N
        self.ops = [np.asarray(t, dtype=np.int64) % n for t in self.ops]
        self.rel = np.asarray(self.rel, dtype=np.int64).reshape(-1, self.d) % n
        for t in self.ops:
            if self.rel.shape[0] and not self.contains(matmul_mod(t, self.rel.T, n).T):
                raise PatchError("an operator does not preserve the relations")

    @property
    def n(self) -> int:
        return self.p ** self.N

    @property
    def r(self) -> int:
        return len(self.ops)

    def log_size(self) -> int:
        return self.N * self.d - _span_log(self.rel, self.p, self.N)

    def sub_log(self, rows) -> int:
        """log_p of the submodule generated by ``rows`` (taken modulo the relations)."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.d)
        both = np.vstack([self.rel, rows]) if self.rel.size else rows
        return _span_log(both, self.p, self.N) - _span_log(self.rel, self.p, self.N)

    def contains(self, rows) -> bool:
        """Every row lies in the relation span, i.e. is zero in the module."""
        return self.sub_log(rows) == 0

    def kernel(self, A: np.ndarray) -> np.ndarray:
        """Rows generating ``{m : A m = 0 in the module}``."""
        n, d = self.n, self.d
        big = np.hstack([A % n, (-self.rel.T) % n]) if self.rel.size else A % n
        ker = kernel_mod_pk(big, self.p, self.N)
        return ker[:, :d] % n

    def kernel_to_free(self, A: np.ndarray) -> np.ndarray:
        """Rows generating the kernel of a map ``A`` from the module to a free module."""
        ker = kernel_mod_pk(np.asarray(A) % self.n, self.p, self.N)
        return np.vstack([ker, self.rel]) if self.rel.size else ker

    def image_rows(self, A: np.ndarray) -> np.ndarray:
        return (np.asarray(A) % self.n).T.copy()

    def quotient(self, rows, name: str | None = None) -> "FiniteModule":
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.d)
        rel = np.vstack([self.rel, rows]) if self.rel.size else rows
        return FiniteModule(self.p, self.N, self.d, self.ops, rel, name or self.name)

    def identity(self) -> np.ndarray:
        return np.eye(self.d, dtype=np.int64)

    def power(self, i: int, e: int) -> np.ndarray:
        out = self.identity()
        for _ in range(e):
            out = matmul_mod(self.ops[i], out, self.n)
        return out

    def mult_by_p(self) -> np.ndarray:
        return self.identity() * self.p % self.n

    def y(self, i: int) -> np.ndarray:
        return (self.ops[i] - self.identity()) % self.n

    def max_ideal_rows(self) -> np.ndarray:
        blocks = [self.image_rows(self.mult_by_p())] + [self.image_rows(self.y(i)) for i in range(self.r)]
        return np.vstack(blocks)


def group_algebra(p: int, N: int, r: int) -> tuple[FiniteModule, list[tuple]]:
    """``J/c_N`` as a module over itself; basis indexed by exponent tuples."""
    m = p ** N
    expo = list(itertools.product(range(m), repeat=r))
    index = {e: j for j, e in enumerate(expo)}
    ops = []
    for i in range(r):
        T = np.zeros((len(expo), len(expo)), dtype=np.int64)
        for e, j in index.items():
            f = list(e)
            f[i] = (f[i] + 1) % m
            T[index[tuple(f)], j] = 1
        ops.append(T)
    return FiniteModule(p, N, len(expo), ops, name=f"J/c_{N}"), expo


def direct_sum(mods: Sequence[FiniteModule]) -> FiniteModule:
    from scipy.linalg import block_diag

    p, N = mods[0].p, mods[0].N
    r = mods[0].r
    ops = [block_diag(*[m.ops[i] for m in mods]).astype(np.int64) for i in range(r)]
    d = sum(m.d for m in mods)
    rels = []
    off = 0
    for m in mods:
        if m.rel.size:
            block = np.zeros((m.rel.shape[0], d), dtype=np.int64)
            block[:, off:off + m.d] = m.rel
            rels.append(block)
        off += m.d
    rel = np.vstack(rels) if rels else np.zeros((0, d), dtype=np.int64)
    return FiniteModule(p, N, d, ops, rel, "+".join(m.name for m in mods))


def ring_element_operator(M: FiniteModule, coeffs: np.ndarray, expo: list[tuple]) -> np.ndarray:
    """``sum_e c_e T^e`` acting on ``M``."""
    n = M.n
    cache = [[M.identity()] for _ in range(M.r)]
    out = np.zeros((M.d, M.d), dtype=np.int64)
    for c, e in zip(coeffs, expo):
        if c % n == 0:
            continue
        term = M.identity()
        for i, k in enumerate(e):
            while len(cache[i]) <= k:
                cache[i].append(matmul_mod(M.ops[i], cache[i][-1], n))
            term = matmul_mod(cache[i][k], term, n)
        out = (out + int(c) * term) % n
    return out


# ---------------------------------------------------------------------------
# Freeness
# ---------------------------------------------------------------------------

@dataclass
class FreenessCertificate:
    free: bool
    rank: int  # dim of M / m M over F_p
    generators: np.ndarray | None  # rows, lifts generating M over the ring
    phi: np.ndarray | None  # R^k -> M, columns T^e g_j ordered (j, e)
    witness: np.ndarray | None = None
    reason: str = ""


def freeness_over_group_algebra(M: FiniteModule, expo: list[tuple], lifts: np.ndarray | None = None
                                ) -> FreenessCertificate:
    """Is ``M`` free over ``J/c_N``?  Nakayama gives the rank, a size count gives injectivity."""
    N = M.N
    k = M.log_size() - M.sub_log(M.max_ideal_rows())
    ring_log = N * len(expo)
    if M.log_size() != k * ring_log:
        return FreenessCertificate(False, k, None, None, reason=f"|M| = p^{M.log_size()} is not |J/c|^{k}")
    if lifts is None:
        lifts = _lift_basis(M, k)
    cols = []
    for g in lifts:
        for e in expo:
            v = g
            for i, t in enumerate(e):
                for _ in range(t):
                    v = matmul_mod(M.ops[i], v, M.n)
            cols.append(v)
    phi = np.array(cols, dtype=np.int64).T
    if M.sub_log(phi.T) != M.log_size():
        return FreenessCertificate(False, k, lifts, phi, reason="lifts do not generate")
    return FreenessCertificate(True, k, np.asarray(lifts), phi)


def _lift_basis(M: FiniteModule, k: int) -> np.ndarray:
    """Standard basis vectors independent modulo ``m M``; there are exactly ``k`` of them."""
    base = M.max_ideal_rows()
    chosen = []
    cur = M.sub_log(base)
    for j in range(M.d):
        e = np.zeros(M.d, dtype=np.int64)
        e[j] = 1
        rows = np.vstack([base] + chosen + [e[None]])
        new = M.sub_log(rows)
        if new > cur:
            chosen.append(e[None])
            cur = new
        if len(chosen) == k:
            break
    return np.vstack(chosen) if chosen else np.zeros((0, M.d), dtype=np.int64)


@dataclass
class GroupRingReport:
    free: bool
    rank: int
    basis: np.ndarray | None  # rows: module generators over O[D]
    witness: np.ndarray | None  # D-invariant vector outside the norm image (mod p)
    reason: str = ""


def group_ring_freeness(mats: np.ndarray, p: int, N: int = 1) -> GroupRingReport:
    """Freeness of ``(Z/p^N)^d`` over ``(Z/p^N)[D]`` for a ``p``-group ``D`` acting through ``mats``.

    ``mats[g]`` is the action of the ``g``-th element; the identity must be
    element 0 and ``|D|`` a power of ``p``.
    """
    mats = np.asarray(mats, dtype=np.int64)
    order, d, _ = mats.shape
    o = order
    while o % p == 0:
        o //= p
    if o != 1:
        raise PatchError("D must be a p-group")
    n = p ** N
    eye = np.eye(d, dtype=np.int64)
    aug_rows = np.vstack([eye * p % n] + [((mats[g] - eye) % n).T for g in range(1, order)])
    M = FiniteModule(p, N, d, [])
    k = M.log_size() - M.sub_log(aug_rows)
    gens = _lift_basis_rows(M, aug_rows, k)
    images = np.vstack([(mats[g] @ gens.T % n).T for g in range(order)]) if k else np.zeros((0, d), dtype=np.int64)
    free = d == k * order and (k == 0 and d == 0 or M.sub_log(images) == M.log_size())
    if free:
        return GroupRingReport(True, k, gens, None)
    # witness over F_p: an invariant vector that is not a norm
    mp = mats % p
    inv = _fp_kernel(np.vstack([(mp[g] - eye) % p for g in range(1, order)]) if order > 1
                     else np.zeros((0, d), dtype=np.int64), p, d)
    norm = mp.sum(axis=0) % p
    norm_img = norm.T % p  # rows spanning N * M
    witness = None
    rn = rank_mod_p(norm_img, p) if norm_img.any() else 0
    for v in inv:
        if (rank_mod_p(np.vstack([norm_img, v]), p) if norm_img.size else int(v.any())) > rn:
            witness = v
            break
    return GroupRingReport(False, k, None, witness, reason=f"rank {d} is not {k} * {order}")


def _lift_basis_rows(M: FiniteModule, base: np.ndarray, k: int) -> np.ndarray:
    chosen = []
    cur = M.sub_log(base)
    for j in range(M.d):
        if len(chosen) == k:
            break
        e = np.zeros((1, M.d), dtype=np.int64)
        e[0, j] = 1
        new = M.sub_log(np.vstack([base] + chosen + [e]))
        if new > cur:
            chosen.append(e)
            cur = new
    return np.vstack(chosen) if chosen else np.zeros((0, M.d), dtype=np.int64)


def _fp_kernel(a: np.ndarray, p: int, d: int) -> np.ndarray:
    from .linalg import nullspace_mod_p

    if a.shape[0] == 0:
        return np.eye(d, dtype=np.int64)
    return nullspace_mod_p(a, p)


def permutation_module(action: Sequence[Sequence[int]], npoints: int) -> np.ndarray:
    """Matrices of the permutation representation on functions of a finite set.

    ``action[g][x]`` is the image of point ``x`` under the ``g``-th element.
    """
    mats = np.zeros((len(action), npoints, npoints), dtype=np.int64)
    for g, perm in enumerate(action):
        for x, y in enumerate(perm):
            mats[g, y, x] = 1
    return mats


# ---------------------------------------------------------------------------
# Algebraic modular forms on finite data
# ---------------------------------------------------------------------------

@dataclass
class DoubleCosetModel:
    """Index set with finite groups ``G_i`` (2x2 matrices over ``Z/p^K``) and a weight ``(k, eta)``."""

    p: int
    K: int
    groups: dict  # label -> list of 2x2 integer generator matrices
    weight: tuple[int, int] = (2, 0)

    def __post_init__(self):
        if self.weight[0] < 2:
            raise PatchError("weight k must be at least 2")
        R = integers_mod(self.p ** self.K)
        self._groups: dict[str, FiniteGroup] = {}
        self._lambda: dict[str, np.ndarray] = {}
        for label, gens in self.groups.items():
            mats = [Matrix.from_rows(R, g) for g in gens] or [Matrix.identity(R, 2)]
            G = generate_group(mats, name=label)
            if G.order % self.p == 0:
                raise PatchError(f"p = {self.p} divides |G_{label}| = {G.order}")
            self._groups[label] = G
            self._lambda[label] = self._weight_matrices(G, mats[0].ring)

    def _weight_matrices(self, G: FiniteGroup, R) -> np.ndarray:
        from .groups import element_matrix

        k, eta = self.weight
        n = self.p ** self.K
        out = []
        for x in range(G.order):
            g = element_matrix(G, x)
            S = sym_power(k - 2, g) if k > 2 else Matrix.identity(R, 1)
            det = int(g.det().v) % n
            out.append(S.to_numpy().astype(np.int64) * pow(det, eta, n) % n)
        return np.array(out, dtype=np.int64)

    @property
    def rank_lambda(self) -> int:
        return self.weight[0] - 1

    def order(self, label: str) -> int:
        return self._groups[label].order

    def weight_action(self, label: str) -> np.ndarray:
        return self._lambda[label]


@dataclass
class SpaceOfForms:
    model: DoubleCosetModel
    m: int  # coefficients Z/p^m
    projectors: dict
    bases: dict  # label -> rows spanning (Lambda (x) A)^{G_i}
    hecke: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return sum(b.shape[0] for b in self.bases.values())

    def basis_matrix(self) -> np.ndarray:
        """Block-diagonal embedding into the direct sum over the index set."""
        d = self.model.rank_lambda
        labels = list(self.bases)
        rows = []
        for j, lab in enumerate(labels):
            for v in self.bases[lab]:
                row = np.zeros(d * len(labels), dtype=np.int64)
                row[j * d:(j + 1) * d] = v
                rows.append(row)
        return np.array(rows, dtype=np.int64).reshape(-1, d * len(labels))

    def register_hecke(self, name: str, matrix: np.ndarray) -> None:
        """Store an endomorphism of the ambient sum after checking it preserves the space."""
        n = self.model.p ** self.m
        B = self.basis_matrix()
        img = matmul_mod(np.asarray(matrix), B.T, n).T
        if span_size_log_mod_pk(np.vstack([B, img]), self.model.p, self.m) != \
                span_size_log_mod_pk(B, self.model.p, self.m):
            raise PatchError(f"{name} does not preserve the space of forms")
        self.hecke[name] = np.asarray(matrix) % n


def averaging_projector(mats: np.ndarray, p: int, m: int) -> np.ndarray:
    n = p ** m
    order = mats.shape[0]
    inv = pow(order, -1, n)
    return mats.sum(axis=0) % n * inv % n


def _image_basis(P: np.ndarray, p: int, m: int) -> np.ndarray:
    """Basis of the image of an idempotent over ``Z/p^m``: columns at pivots mod ``p``."""
    _, piv = rref_mod_p(P % p, p)
    return (P[:, piv] % (p ** m)).T.copy()


def space_of_forms(model: DoubleCosetModel, m: int | None = None) -> SpaceOfForms:
    """``S(U, A) = sum_i (Lambda (x) A)^{G_i}`` with ``A = Z/p^m`` (``m = K`` stands in for ``O``)."""
    m = model.K if m is None else m
    if not 1 <= m <= model.K:
        raise PatchError("coefficients must be a quotient of O")
    n = model.p ** m
    projs, bases = {}, {}
    for label in model.groups:
        mats = model.weight_action(label) % n
        P = averaging_projector(mats, model.p, m)
        if not np.array_equal(matmul_mod(P, P, n), P):
            raise PatchError("averaging projector is not idempotent")
        projs[label] = P
        bases[label] = _image_basis(P, model.p, m)
    return SpaceOfForms(model, m, projs, bases)


def fixed_points_bruteforce(mats: np.ndarray, p: int, m: int, gens: Sequence[int] | None = None) -> np.ndarray:
    """Rows generating ``{v : g v = v}`` by solving the linear system over ``Z/p^m``."""
    n = p ** m
    d = mats.shape[1]
    idx = range(mats.shape[0]) if gens is None else gens
    A = np.vstack([(mats[g] - np.eye(d, dtype=np.int64)) % n for g in idx])
    return kernel_mod_pk(A, p, m)


def same_span(a: np.ndarray, b: np.ndarray, p: int, m: int) -> bool:
    la = _span_log(a, p, m)
    return la == _span_log(b, p, m) == _span_log(np.vstack([a, b]), p, m)


def base_change_check(model: DoubleCosetModel, m: int) -> dict:
    """``S(U, O) (x) Z/p^m`` against ``S(U, Z/p^m)`` by basis comparison."""
    SO = space_of_forms(model)
    SA = space_of_forms(model, m)
    n = model.p ** m
    ok = True
    per = {}
    for label in model.groups:
        red = SO.bases[label] % n
        match = same_span(red, SA.bases[label], model.p, m) if red.size or SA.bases[label].size else True
        # reduced basis stays a basis: its span has the full size p^(m * rank)
        free = _span_log(red, model.p, m) == m * red.shape[0]
        per[label] = {"rank_O": int(SO.bases[label].shape[0]), "rank_A": int(SA.bases[label].shape[0]),
                      "same_span": bool(match), "reduced_basis_free": bool(free)}
        ok = ok and match and free and SO.bases[label].shape[0] == SA.bases[label].shape[0]
    return {"ok": bool(ok), "rank_O": SO.rank, "rank_A": SA.rank, "per_index": per}


# ---------------------------------------------------------------------------
# Regular sequences on finite truncations
# ---------------------------------------------------------------------------

@dataclass
class RegularVerdict:
    element: str
    regular: bool
    ker_log: int
    ann_log: int
    witness: np.ndarray | None = None


def _element_matrix(M: FiniteModule, x) -> np.ndarray:
    if isinstance(x, str):
        if x == "lambda":
            return M.mult_by_p()
        if x.startswith("y"):
            return M.y(int(x[1:]) - 1)
    raise PatchError(f"unknown sequence element {x!r}")


def regular_sequence_check(M: FiniteModule, ring: FiniteModule, expo: list[tuple], seq: Sequence[str]
                           ) -> list[RegularVerdict]:
    """For each ``x`` in order: ``ker(x | M) = Ann_R(x) M`` on the current quotient, then pass to ``M / x M``.

    On a truncation the ring itself has ``x``-torsion (``p^(N-1)`` kills
    ``lambda``), so injectivity is measured against what the truncation
    forces: ``x`` counts as regular when every element it kills is already
    killed for the trivial reason ``Ann_R(x) M``.
    """
    out = []
    for x in seq:
        A = _element_matrix(M, x)
        Ar = _element_matrix(ring, x)
        ker = M.kernel(A)
        ann = ring.kernel(Ar)
        ann_m = []
        for a in ann:
            op = ring_element_operator(M, a, expo)
            ann_m.append(M.image_rows(op))
        ann_rows = np.vstack(ann_m) if ann_m else np.zeros((0, M.d), dtype=np.int64)
        kl = M.sub_log(ker) if ker.size else 0
        al = M.sub_log(ann_rows) if ann_rows.size else 0
        witness = None
        if kl != al:
            base = np.vstack([ann_rows]) if ann_rows.size else np.zeros((0, M.d), dtype=np.int64)
            for v in ker:
                if M.sub_log(np.vstack([base, v[None]])) > al:
                    witness = v
                    break
        out.append(RegularVerdict(x, kl == al, kl, al, witness))
        M = M.quotient(M.image_rows(A))
        ring = ring.quotient(ring.image_rows(Ar))
    return out


# ---------------------------------------------------------------------------
# Towers and patching
# ---------------------------------------------------------------------------

@dataclass
class LevelDiagram:
    module: FiniteModule  # over J/c_M
    proj: np.ndarray  # k x d: onto the base (Z/p^M)^k, killing y_i
    ring_action: list | None = None  # declared ring-side Delta action; must match module.ops


@dataclass
class PatchTower:
    p: int
    r: int
    k: int  # O-rank of the base datum
    depth: int
    levels: list[dict]  # level j: depth M -> LevelDiagram
    transitions: list[dict]  # level j: depth M -> matrix from depth M+1 to depth M
    ideals: dict = field(default_factory=lambda: {
        "a_inf": "(y_1, ..., y_r)",
        "c_M": "((1+y_i)^(p^M) - 1, lambda^M)",
        "b_M": "((1+y_i)^(p^M) - 1)",
    })

    def validate(self) -> list[str]:
        """Transition maps commute with the operators and projections; declared actions agree."""
        problems = []
        for j, lev in enumerate(self.levels):
            for M in range(1, self.depth + 1):
                D = lev[M]
                n = self.p ** M
                y_proj = [matmul_mod(D.proj, D.module.y(i), n) for i in range(self.r)]
                if any(np.any(t) for t in y_proj):
                    problems.append(f"level {j} depth {M}: projection does not kill a_inf")
                if D.module.rel.size and np.any(matmul_mod(D.proj, D.module.rel.T, n)):
                    problems.append(f"level {j} depth {M}: projection is not defined on the quotient")
                if D.ring_action is not None:
                    for i, t in enumerate(D.ring_action):
                        if not np.array_equal(np.asarray(t) % n, D.module.ops[i]):
                            problems.append(f"level {j} depth {M}: the two Delta actions differ")
                if M < self.depth:
                    R = np.asarray(self.transitions[j][M]) % n
                    up = lev[M + 1]
                    for i in range(self.r):
                        lhs = matmul_mod(R, up.module.ops[i] % n, n)
                        rhs = matmul_mod(D.module.ops[i], R, n)
                        if not D.module.contains(((lhs - rhs) % n).T):
                            problems.append(f"level {j} depth {M}: transition does not commute with T_{i + 1}")
                    if not np.array_equal(matmul_mod(D.proj, R, n), up.proj % n):
                        problems.append(f"level {j} depth {M}: transition does not commute with the projection")
        return problems


def fingerprint(D: LevelDiagram) -> tuple:
    """Isomorphism invariants of a level diagram."""
    M = D.module
    parts = [M.log_size(), M.log_size() - M.sub_log(M.max_ideal_rows())]
    for i in range(M.r):
        Y = M.y(i)
        parts.append(M.sub_log(M.kernel(Y)))
        parts.append(M.sub_log(M.image_rows(Y)))
    parts.append(M.sub_log(M.kernel_to_free(D.proj)) if D.proj.size else 0)
    return tuple(int(x) for x in parts)


def standard_free(p: int, M: int, r: int, k: int) -> tuple[FiniteModule, list[tuple], np.ndarray]:
    """``(J/c_M)^k`` with the augmentation onto ``(Z/p^M)^k``."""
    R, expo = group_algebra(p, M, r)
    F = direct_sum([R] * k) if k else R
    P = np.zeros((k, F.d), dtype=np.int64)
    for j in range(k):
        P[j, j * R.d:(j + 1) * R.d] = 1
    return F, expo, P


def standard_reduction(p: int, M: int, r: int, k: int) -> np.ndarray:
    """``(J/c_{M+1})^k -> (J/c_M)^k``: reduce exponents and coefficients."""
    lo = list(itertools.product(range(p ** M), repeat=r))
    hi = list(itertools.product(range(p ** (M + 1)), repeat=r))
    idx = {e: j for j, e in enumerate(lo)}
    blk = np.zeros((len(lo), len(hi)), dtype=np.int64)
    for j, e in enumerate(hi):
        blk[idx[tuple(x % p ** M for x in e)], j] = 1
    from scipy.linalg import block_diag

    return block_diag(*([blk] * k)).astype(np.int64)


def _random_unimodular(d: int, p: int, N: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        B = rng.integers(0, p ** N, size=(d, d))
        if rank_mod_p(B % p, p) == d:
            return B.astype(np.int64)


def truncation_tower(p: int, r: int, k: int, depth: int, levels: int, seed: int = 0,
                     odd_class: str | None = None, random_basis: bool = True) -> PatchTower:
    """Levels cut from the free module ``J_inf^k``, each written in a random basis.

    With ``odd_class="collapsed"`` every third level is replaced by a
    non-free diagram (``T_1`` acting trivially on the last summand), giving
    a tower with two isomorphism classes.
    """
    rng = np.random.default_rng(seed)
    levs, trans = [], []
    for j in range(levels):
        bad = odd_class == "collapsed" and j % 3 == 1
        lev, tr = {}, {}
        Bs = {}
        for M in range(1, depth + 1):
            F, expo, P = standard_free(p, M, r, k)
            n = p ** M
            if bad:
                Rd = F.d // k
                rows = []
                for c in range(Rd):
                    e = np.zeros(F.d, dtype=np.int64)
                    e[(k - 1) * Rd + c] = 1
                    rows.append(F.image_rows(F.y(0))[(k - 1) * Rd + c])
                F = F.quotient(np.array(rows))
            B = _random_unimodular(F.d, p, M, rng) if random_basis else F.identity()
            Bi = inverse_mod_pk(B, p, M)
            ops = [matmul_mod(matmul_mod(B, t, n), Bi, n) for t in F.ops]
            rel = matmul_mod(B, F.rel.T, n).T if F.rel.size else F.rel
            mod = FiniteModule(p, M, F.d, ops, rel, f"S[{j},{M}]")
            lev[M] = LevelDiagram(mod, matmul_mod(P, Bi, n), [o.copy() for o in ops])
            Bs[M] = (B, Bi)
        for M in range(1, depth):
            red = standard_reduction(p, M, r, k)
            tr[M] = matmul_mod(matmul_mod(Bs[M][0], red, p ** M), Bs[M + 1][1] % p ** M, p ** M)
        levs.append(lev)
        trans.append(tr)
    return PatchTower(p, r, k, depth, levs, trans)


@dataclass
class PatchResult:
    subsequence: list[list[int]]  # surviving level indices per depth
    chosen: list[int]  # level used at each depth
    fingerprints: list[dict]  # per depth: fingerprint -> count
    certificates: list[FreenessCertificate]
    isomorphisms: list[np.ndarray]  # standard (J/c_M)^k -> chosen level, per depth
    free_ranks: list[int]
    quotient_matches_base: list[bool]
    compatible: list[bool]  # diagram chase between consecutive depths
    regular: list[list[RegularVerdict]]
    pigeonhole_bound: int
    limit_claim: str = "unverified: only finite truncations are checked"

    @property
    def ok(self) -> bool:
        return (all(c.free for c in self.certificates) and all(self.quotient_matches_base)
                and all(self.compatible) and all(v.regular for lev in self.regular for v in lev))


def _iso_to_standard(D: LevelDiagram, p: int, M: int, r: int, k: int) -> tuple[FreenessCertificate, np.ndarray]:
    """Freeness certificate whose generators lift the base basis, giving ``phi`` compatible with ``proj``."""
    n = p ** M
    lifts = []
    for j in range(k):
        b = np.zeros(k, dtype=np.int64)
        b[j] = 1
        x = solve_mod_pk(D.proj, b, p, M)
        if x is None:
            raise PatchError("projection onto the base is not surjective")
        lifts.append(x % n)
    _, expo = group_algebra(p, M, r)
    cert = freeness_over_group_algebra(D.module, expo, np.array(lifts).reshape(k, -1))
    return cert, cert.phi


def patch(tower: PatchTower, threshold: int = 2, regular_seq: bool = True) -> PatchResult:
    """Pigeonhole extraction of a compatible system of free levels.

    At each depth the surviving levels are grouped by fingerprint and the
    most frequent class is kept (ties go to the class seen first), so the
    choice is deterministic.  Every chosen diagram is then identified with
    ``(J/c_M)^k`` by an explicit isomorphism compatible with the projection.
    """
    problems = tower.validate()
    if problems:
        raise PatchError("incompatible tower: " + "; ".join(problems[:5]))
    p, r, k = tower.p, tower.r, tower.k
    alive = list(range(len(tower.levels)))
    subseq, chosen, fps = [], [], []
    all_prints = set()
    for M in range(1, tower.depth + 1):
        prints = {j: fingerprint(tower.levels[j][M]) for j in alive}
        all_prints.update(prints.values())
        count = Counter(prints.values())
        order = sorted(count, key=lambda f: (-count[f], min(j for j in alive if prints[j] == f)))
        best = order[0]
        keep = [j for j in alive if prints[j] == best]
        fps.append({str(f): c for f, c in count.items()})
        if len(keep) < threshold:
            raise PatchError(f"no stabilizing subsequence at depth {M}: fingerprints {dict(count)}")
        alive = keep
        subseq.append(list(keep))
        chosen.append(keep[0])
    certs, isos, ranks, quo, compat, regs = [], [], [], [], [], []
    for M in range(1, tower.depth + 1):
        D = tower.levels[chosen[M - 1]][M]
        cert, phi = _iso_to_standard(D, p, M, r, k)
        certs.append(cert)
        isos.append(phi)
        ranks.append(cert.rank)
        n = p ** M
        # quotient by a_inf recovers the base: proj is onto and its kernel is a_inf S
        ay = np.vstack([D.module.image_rows(D.module.y(i)) for i in range(r)])
        kerlog = D.module.sub_log(D.module.kernel_to_free(D.proj))
        quo.append(kerlog == D.module.sub_log(ay) and D.module.log_size() - kerlog == M * k)
        if regular_seq:
            F, expo, _ = standard_free(p, M, r, k)
            ring, _ = group_algebra(p, M, r)
            regs.append(regular_sequence_check(F, ring, expo, ["lambda"] + [f"y{i + 1}" for i in range(r)]))
    for M in range(1, tower.depth):
        # chosen[M] (depth M+1) reduced to depth M, compared with chosen[M-1] at depth M through standard forms
        j_hi, j_lo = chosen[M], chosen[M - 1]
        n = p ** M
        R = np.asarray(tower.transitions[j_hi][M]) % n
        _, phi_hi_lo = _iso_to_standard(tower.levels[j_hi][M], p, M, r, k)
        std_red = standard_reduction(p, M, r, k)
        inv_lo = inverse_mod_pk(phi_hi_lo % n, p, M) if phi_hi_lo is not None and not tower.levels[j_hi][M].module.rel.size \
            else None
        if inv_lo is None:
            compat.append(False)
            continue
        chase = matmul_mod(matmul_mod(inv_lo, R, n), isos[M] % n, n)
        # phi's are only determined up to the choice of lifts; compare after projecting to the base
        F, _, P = standard_free(p, M, r, k)
        ok = np.array_equal(matmul_mod(P, chase, n), matmul_mod(P, std_red, n))
        for i in range(r):
            Fhi, _, _ = standard_free(p, M + 1, r, k)
            ok = ok and np.array_equal(matmul_mod(chase, Fhi.ops[i] % n, n), matmul_mod(F.ops[i], chase, n))
        same_class = fingerprint(tower.levels[j_hi][M]) == fingerprint(tower.levels[j_lo][M])
        compat.append(bool(ok and same_class))
    return PatchResult(subseq, chosen, fps, certs, isos, ranks, quo, compat, regs, len(all_prints))
