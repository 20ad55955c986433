"""Taylor-Wiles auxiliary data as a finite-group search.

Frobenius elements are replaced by group elements: the search runs over all
of a finite group ``Gamma`` that stands in for the Galois group of the
field cut out by ``ad rhobar``, the cyclotomic character and the classes.
A "prime" is the pair (element, declared ``q_v``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cohomology import (CohomologyClass, GModule, Representation, adjoint_module, cohomology, is_coboundary,
                         is_irreducible_exhaustive)
from .groups import FiniteGroup, Subgroup, generate_group, gl_generators, group_from_function
from .linalg import complement_projection, nullspace_mod_p, rank_mod_p
from .matrix import Matrix
from .rings import Elt, finite_field, p_adic_valuation, prime_field

PREDICATES = ("cyclotomic", "distinct_eigenvalues", "projection")


class TWError(ValueError):
    """Search failure or a malformed context."""


@dataclass
class TWContext:
    """``Gamma`` with ``rhobar``, ``chi_N`` and the module ``ad^0(1)``.

    ``quotient[x]`` is the image of ``x`` in the image group ``image``;
    ``kernel`` lists the elements of ``Gamma`` mapping into the kernel of
    ``(ad rhobar, chi_N)``.
    """

    gamma: FiniteGroup
    p: int
    N: int
    rho: Representation
    chi: np.ndarray  # values mod p^N
    module: GModule
    image: FiniteGroup
    quotient: np.ndarray
    kernel: np.ndarray
    classes: list = field(default_factory=list)
    _h1: tuple | None = None

    def __post_init__(self):
        G = self.gamma
        mod = self.p ** self.N
        chi = self.chi % mod
        for s, g in enumerate(G.gens):
            if not np.array_equal(chi[G.rgen[:, s]], chi * chi[g] % mod):
                raise TWError("chi_N is not a homomorphism")
        for c in self.classes:
            if not is_crossed_hom(G, self.module, c.values):
                raise TWError("stored class is not a cocycle")
            if class_is_zero(self, c):
                raise TWError("stored class is zero")

    def h1(self) -> tuple[int, list[CohomologyClass]]:
        """``H^1(Gamma, ad^0(1))`` via generator values."""
        if self._h1 is None:
            res = cohomology(self.gamma, self.module, 1, method="generators")
            self._h1 = (res.dim, res.basis)
        return self._h1


def is_crossed_hom(G: FiniteGroup, M: GModule, values: np.ndarray) -> bool:
    """``f(xs) = f(x) + x f(s)`` for every element ``x`` and generator ``s``; enough since the ``s`` generate."""
    p = M.p
    vals = np.asarray(values) % p
    if vals[0].any():
        return False
    for s, g in enumerate(G.gens):
        rhs = (vals + np.einsum("nij,j->ni", M.mats, vals[g])) % p
        if not np.array_equal(vals[G.rgen[:, s]], rhs):
            return False
    return True


def class_is_zero(ctx: TWContext, c: CohomologyClass) -> bool:
    """Zero in ``H^1`` iff the generator values lie in the image of ``m -> (g m - m)_g``."""
    G, M, p = ctx.gamma, ctx.module, ctx.p
    eye = np.eye(M.dim, dtype=np.int64)
    B = np.concatenate([M.mats[g] - eye for g in G.gens], axis=0) % p
    x = np.concatenate([c.values[g] for g in G.gens]) % p
    return rank_mod_p(np.hstack([B, x[:, None]]), p) == rank_mod_p(B, p)


def gl2_context(p: int = 5, N: int = 1) -> TWContext:
    """``Gamma = ad^0(1) x| GL_2(F_p)`` with ``chi = det`` and the tautological class ``(m, g) -> m``.

    The class restricts to the identity on the normal subgroup ``ad^0(1)``,
    so it is nonzero; the split extension stands in for a nonsplit Galois
    extension, which is all the search needs.
    """
    if N != 1:
        raise TWError("the bundled context models chi_N with N = 1")
    G0 = generate_group(gl_generators(p), name=f"GL2(F{p})")
    rho0 = Representation.tautological(G0)
    det0 = rho0.det()
    A = adjoint_module(rho0, fixed_det=True, twist=det0).mats
    table = G0.table
    d = A.shape[1]

    def mul(a, b):
        m = (np.array(a[:d]) + A[a[d]] @ np.array(b[:d])) % p
        return tuple(int(v) for v in m) + (int(table[a[d], b[d]]),)

    zero = (0,) * d
    gens = [zero + (g,) for g in G0.gens] + [tuple(int(i == 0) for i in range(d)) + (0,)]
    gamma = group_from_function(gens, zero + (0,), mul, cap=p ** d * G0.order + 1, name=f"ad0(1)xGL2(F{p})")
    quot = np.array([e[d] for e in gamma.elements], dtype=np.int64)
    rho = Representation(gamma, p, rho0.mats[quot], "rhobar")
    chi = det0[quot]
    M = adjoint_module(rho, fixed_det=True, twist=chi)
    vals = np.array([e[:d] for e in gamma.elements], dtype=np.int64)
    # kernel of (ad rhobar, chi): scalar image with trivial determinant
    scal = [g for g in range(G0.order) if _is_scalar(rho0.mats[g]) and det0[g] == 1]
    kernel = np.nonzero(np.isin(quot, scal))[0]
    ctx = TWContext(gamma, p, N, rho, chi, M, G0, quot, kernel)
    ctx.classes = [CohomologyClass(1, M, vals)]
    ctx.__post_init__()
    return ctx


def _is_scalar(m: np.ndarray) -> bool:
    return m[0, 1] == 0 and m[1, 0] == 0 and m[0, 0] == m[1, 1]


def check_irreducible(ctx: TWContext) -> bool:
    """``ad^0`` of the image acts irreducibly (checked on the image group)."""
    rho0 = Representation(ctx.image, ctx.p, _image_mats(ctx), "rhobar")
    return is_irreducible_exhaustive(adjoint_module(rho0, fixed_det=True))


def _image_mats(ctx: TWContext) -> np.ndarray:
    out = np.zeros((ctx.image.order, 2, 2), dtype=np.int64)
    out[ctx.quotient] = ctx.rho.mats
    return out


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

def _distinct(m: np.ndarray, p: int) -> bool:
    tr = int(m[0, 0] + m[1, 1])
    det = int(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return (tr * tr - 4 * det) % p != 0


def _ad0_to_matrix(v: np.ndarray, p: int) -> np.ndarray:
    """``ad^0`` coordinates (off-diagonal, then ``E_11 - E_22``) to a 2x2 matrix."""
    return np.array([[v[2], v[0]], [v[1], -v[2]]], dtype=np.int64) % p


def projection_value(ctx: TWContext, c: CohomologyClass, x: int) -> int:
    """``tr(rhobar(x) phi(x))``; for distinct eigenvalues this is ``(a - b)`` times the
    ``a``-eigenline entry of ``phi(x)``, so vanishing of one is vanishing of the other."""
    g = ctx.rho.mats[x]
    X = _ad0_to_matrix(c.values[x], ctx.p)
    return int(np.trace(g @ X)) % ctx.p


def predicate_table(ctx: TWContext, c: CohomologyClass) -> dict[str, np.ndarray]:
    """Boolean arrays over ``Gamma`` for the three predicates."""
    p, mats = ctx.p, ctx.rho.mats
    cyc = ctx.chi % (p ** ctx.N) == 1
    tr = mats[:, 0, 0] + mats[:, 1, 1]
    det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    dist = (tr * tr - 4 * det) % p != 0
    X = np.zeros((ctx.gamma.order, 2, 2), dtype=np.int64)
    v = c.values % p
    X[:, 0, 1], X[:, 1, 0], X[:, 0, 0], X[:, 1, 1] = v[:, 0], v[:, 1], v[:, 2], -v[:, 2]
    proj = np.einsum("nij,nji->n", mats, X) % p != 0
    return {"cyclotomic": cyc, "distinct_eigenvalues": dist, "projection": proj & dist}


def eigenline_entry(ctx: TWContext, c: CohomologyClass, x: int) -> tuple[Elt, Elt, Elt]:
    """(alpha, beta, alpha-entry of phi(x)) from an explicit eigenbasis, over F_p or F_p^2."""
    p = ctx.p
    g = ctx.rho.mats[x]
    if not _distinct(g, p):
        raise TWError("rhobar(x) has a repeated eigenvalue")
    tr = int(g[0, 0] + g[1, 1]) % p
    det = int(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]) % p
    K = prime_field(p)
    roots = [a for a in range(p) if (a * a - tr * a + det) % p == 0]
    if roots:
        alpha, beta = K(roots[0]), K(roots[1])
    else:
        K = finite_field(p, 2)
        elems = [K((a, b)) for a in range(p) for b in range(p)]
        rs = [z for z in elems if (z * z - tr * z + det).is_zero()]
        alpha, beta = rs[0], rs[1]
    gm = Matrix.from_rows(K, [[int(g[0, 0]), int(g[0, 1])], [int(g[1, 0]), int(g[1, 1])]])
    va = (gm - Matrix.identity(K, 2).scale(alpha)).nullspace()[0]
    vb = (gm - Matrix.identity(K, 2).scale(beta)).nullspace()[0]
    P = Matrix(K, [[va[0, 0], vb[0, 0]], [va[1, 0], vb[1, 0]]])
    X = _ad0_to_matrix(c.values[x], p)
    Xm = Matrix.from_rows(K, X.tolist())
    entry = (P.inverse() * Xm * P)[0, 0]
    return alpha, beta, entry


def check_element(ctx: TWContext, c: CohomologyClass, x: int) -> dict[str, bool]:
    """The three predicates for one element, recomputed from scratch."""
    p = ctx.p
    cyc = int(ctx.chi[x]) % (p ** ctx.N) == 1
    dist = _distinct(ctx.rho.mats[x], p)
    proj = False
    if dist:
        proj = not eigenline_entry(ctx, c, x)[2].is_zero()
    return {"cyclotomic": cyc, "distinct_eigenvalues": dist, "projection": proj}


@dataclass
class SearchResult:
    element: int | None
    census: dict  # predicate -> number of elements failing it
    candidates: int  # elements passing the first two predicates
    repaired_from: int | None = None


def find_tw_element(ctx: TWContext, c: CohomologyClass) -> SearchResult:
    """First element of ``Gamma`` (in enumeration order) meeting all three predicates."""
    if class_is_zero(ctx, c):
        raise TWError("class is zero in H^1")
    if not check_irreducible(ctx):
        raise TWError("ad^0 of the image is reducible")
    tab = predicate_table(ctx, c)
    census = {k: int((~v).sum()) for k, v in tab.items()}
    both = tab["cyclotomic"] & tab["distinct_eigenvalues"]
    ok = np.nonzero(both & tab["projection"])[0]
    if ok.size == 0:
        raise TWError(f"no element satisfies all predicates; census {census}")
    x = int(ok[0])
    if not all(check_element(ctx, c, x).values()):
        raise TWError("independent re-check failed")
    return SearchResult(x, census, int(both.sum()))


def repair(ctx: TWContext, c: CohomologyClass, x0: int) -> SearchResult:
    """Given ``x0`` passing the first two predicates, find ``k x0`` with ``k`` in the kernel subgroup passing all three."""
    first = check_element(ctx, c, x0)
    if not (first["cyclotomic"] and first["distinct_eigenvalues"]):
        raise TWError("starting element must pass the cyclotomic and eigenvalue predicates")
    G = ctx.gamma
    fails = {k: 0 for k in PREDICATES}
    for k in ctx.kernel:
        y = G.mul(int(k), x0)
        res = check_element(ctx, c, y)
        for name, val in res.items():
            fails[name] += not val
        if all(res.values()):
            return SearchResult(y, fails, 0, repaired_from=x0)
    raise TWError(f"no kernel translate works; census {fails}")


def kernel_span(ctx: TWContext, c: CohomologyClass) -> int:
    """Rank of ``phi`` restricted to the kernel subgroup (a homomorphism there)."""
    return rank_mod_p(c.values[ctx.kernel] % ctx.p, ctx.p)


# ---------------------------------------------------------------------------
# Sets of auxiliary elements
# ---------------------------------------------------------------------------

def _restriction_rows(ctx: TWContext, basis: list, x: int) -> np.ndarray:
    """Map ``H^1(Gamma) -> M / (x - 1) M`` on the basis, one column per class."""
    p, M = ctx.p, ctx.module
    img = (M.mats[x] - np.eye(M.dim, dtype=np.int64)) % p
    Q = complement_projection(img.T, M.dim, p)
    return np.array([Q @ (b.values[x] % p) % p for b in basis], dtype=np.int64).reshape(len(basis), -1).T


def h1_q_kernel(ctx: TWContext, Q: list[int]) -> np.ndarray:
    """Coordinates (in the stored H^1 basis) of the kernel of restriction to the ``<x>``, ``x`` in Q."""
    dim, basis = ctx.h1()
    if dim == 0:
        return np.zeros((0, 0), dtype=np.int64)
    rows = [_restriction_rows(ctx, basis, x) for x in Q]
    A = np.vstack(rows) % ctx.p if rows else np.zeros((0, dim), dtype=np.int64)
    if A.shape[0] == 0 or not A.any():
        return np.eye(dim, dtype=np.int64)
    return nullspace_mod_p(A, ctx.p)


def h1_q(ctx: TWContext, Q: list[int]) -> int:
    return int(h1_q_kernel(ctx, Q).shape[0])


def h1_q_independent(ctx: TWContext, Q: list[int]) -> int:
    """Same kernel, with every restriction tested by bar-cohomology on the subgroup ``<x>``."""
    dim, basis = ctx.h1()
    p = ctx.p
    subs = [Subgroup.generated(ctx.gamma, [x]) for x in Q]
    mods = [ctx.module.restrict(s) for s in subs]
    # a class lies in the kernel iff each restriction is a coboundary; test all p^dim combinations
    if p ** dim > 100_000:
        raise TWError("H^1 too large for the brute-force check")
    count = 0
    for coeffs in np.ndindex(*([p] * dim)):
        vals = sum((c * b.values for c, b in zip(coeffs, basis)), np.zeros_like(basis[0].values)) % p \
            if dim else None
        if dim == 0 or all(is_coboundary(Ms, 1, vals[s.inclusion]) for s, Ms in zip(subs, mods)):
            count += 1
    return round(np.log(count) / np.log(p)) if count > 1 else 0


def _good_elements(ctx: TWContext) -> np.ndarray:
    p, mats = ctx.p, ctx.rho.mats
    cyc = ctx.chi % (p ** ctx.N) == 1
    tr = mats[:, 0, 0] + mats[:, 1, 1]
    det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    return np.nonzero(cyc & ((tr * tr - 4 * det) % p != 0))[0]


def thin_tw_set(ctx: TWContext, Q: list[int], r: int) -> list[int]:
    """Remove elements one at a time while the kernel stays zero, until ``|Q| = r``."""
    if h1_q(ctx, Q) != 0:
        raise TWError("candidate set is not injective")
    Q = list(Q)
    i = 0
    while len(Q) > r and i < len(Q):
        trial = Q[:i] + Q[i + 1:]
        if h1_q(ctx, trial) == 0:
            Q = trial
        else:
            i += 1
    if len(Q) > r:
        raise TWError(f"cannot thin below {len(Q)} elements")
    return Q


def build_tw_set(ctx: TWContext, r: int) -> list[int]:
    """``r`` elements meeting the cyclotomic and eigenvalue predicates with ``h1_q = 0``."""
    dim, basis = ctx.h1()
    if r < dim:
        raise TWError(f"need r >= dim H^1 = {dim}")
    Q: list[int] = []
    while True:
        ker = h1_q_kernel(ctx, Q)
        if ker.shape[0] == 0:
            break
        vals = sum((int(a) * b.values for a, b in zip(ker[0], basis)), np.zeros_like(basis[0].values)) % ctx.p
        c = CohomologyClass(1, ctx.module, vals)
        x = find_tw_element(ctx, c).element
        if x in Q:
            raise TWError("search returned an element already in Q")
        Q.append(x)
    if len(Q) > r:
        Q = thin_tw_set(ctx, Q, r)
    good = [int(x) for x in _good_elements(ctx) if int(x) not in Q]
    Q = Q + good[:r - len(Q)]
    if len(Q) != r:
        raise TWError("not enough elements to pad Q")
    if h1_q(ctx, Q) != 0:
        raise TWError("injectivity lost")
    return Q


def census(ctx: TWContext, Q: list[int]) -> dict[str, list[int]]:
    """Per predicate, elements of Q that fail it, tested against every H^1 basis class
    for which the element was chosen (the eigenvalue and cyclotomic ones are class-free)."""
    out = {k: [] for k in PREDICATES}
    dim, basis = ctx.h1()
    for x in Q:
        res = [check_element(ctx, c, x) for c in basis] or [check_element(ctx, ctx.classes[0], x)]
        if not res[0]["cyclotomic"]:
            out["cyclotomic"].append(x)
        if not res[0]["distinct_eigenvalues"]:
            out["distinct_eigenvalues"].append(x)
    # the projection predicate must hold for at least one element per nonzero class
    for coeffs in np.ndindex(*([ctx.p] * dim)):
        if not any(coeffs):
            continue
        vals = sum((int(a) * b.values for a, b in zip(coeffs, basis)), np.zeros_like(basis[0].values)) % ctx.p
        c = CohomologyClass(1, ctx.module, vals)
        if not any(check_element(ctx, c, x)["projection"] for x in Q):
            out["projection"].append(coeffs)
    return out


def tw_frobenius_data(sigma: int | np.ndarray, ctx: TWContext | None, q_v: int) -> tuple[Elt, Elt, int]:
    """(alpha, beta, m) with ``p^m`` the exact power of ``p`` dividing ``q_v - 1``."""
    if ctx is None:
        raise TWError("a context is required")
    g = ctx.rho.mats[sigma] if np.ndim(sigma) == 0 else np.asarray(sigma) % ctx.p
    return frobenius_data(g, ctx.p, q_v, ctx.N)


def frobenius_data(g: np.ndarray, p: int, q_v: int, N: int = 1) -> tuple[Elt, Elt, int]:
    """Eigenvalues of a 2x2 matrix over F_p (or F_p^2) and the p-part of ``q_v - 1``.

    >>> a, b, m = frobenius_data(np.array([[1, 0], [0, 2]]), 5, 11)
    >>> (a, b, m)
    (1, 2, 1)
    """
    g = np.asarray(g) % p
    if not _distinct(g, p):
        raise TWError("repeated eigenvalue")
    if (q_v - 1) % (p ** N):
        raise TWError(f"q_v = {q_v} is not 1 mod {p}^{N}")
    tr = int(g[0, 0] + g[1, 1]) % p
    det = int(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]) % p
    roots = [a for a in range(p) if (a * a - tr * a + det) % p == 0]
    if roots:
        K = prime_field(p)
        alpha, beta = K(roots[0]), K(roots[1])
        if g[1, 0] == 0 and g[0, 1] == 0:
            alpha, beta = K(int(g[0, 0])), K(int(g[1, 1]))
    else:
        K = finite_field(p, 2)
        rs = [K((a, b)) for a in range(p) for b in range(p)]
        rs = [z for z in rs if (z * z - tr * z + det).is_zero()]
        alpha, beta = rs
    return alpha, beta, int(p_adic_valuation(q_v - 1, p))
