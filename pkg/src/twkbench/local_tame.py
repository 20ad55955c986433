"""The tame two-generator local model at a prime q != p.

``phi`` is a Frobenius lift and ``sigma`` a tame inertia generator subject to
``phi^-1 sigma phi = sigma^q``.  Representations into test rings are integer
index arrays over an :class:`ArtinianTestRing`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import sympy

from .algorithms import AlgebraError, is_nilpotent, nilpotent_exp_log
from .deformation import ArtinianTestRing, DeformationError
from .matrix import Matrix
from .rings import IntegerMod, p_adic_valuation
from .weil_deligne import WDRep, WeilRep

BRUTE_BUDGET = 5_000_000


class TameError(ValueError):
    """Bad local data (wrong congruences, dimensions or ranges)."""


@dataclass(frozen=True)
class TameGroupModel:
    q: int
    p: int

    def __post_init__(self):
        if self.q % self.p == 0:
            raise TameError("q must be prime to p")

    @property
    def m(self) -> int:
        """``p^m`` exactly divides ``q - 1``."""
        return p_adic_valuation(self.q - 1, self.p)

    def relation_holds(self, A: ArtinianTestRing, Phi: np.ndarray, Sigma: np.ndarray) -> np.ndarray:
        """Batched test of ``Sigma Phi = Phi Sigma^q``."""
        lhs = A.matmul(Sigma, Phi)
        rhs = A.matmul(Phi, A.power(Sigma, self.q))
        return np.all(lhs == rhs, axis=(-2, -1))


# ---------------------------------------------------------------------------
# Presentations
# ---------------------------------------------------------------------------

@dataclass
class RingPresentation:
    """``O[[vars]] / (relators)`` together with universal generator images."""

    variables: list[str]
    relators: list  # sympy expressions
    universal: dict  # generator name -> sympy Matrix
    p: int
    data: dict = field(default_factory=dict)

    @property
    def symbols(self) -> list[sympy.Symbol]:
        return [sympy.Symbol(v) for v in self.variables]

    def relator_coefficients(self) -> list[dict]:
        """Relators as ``{exponent tuple: integer coefficient}`` maps."""
        out = []
        for r in self.relators:
            poly = sympy.Poly(sympy.expand(r), *self.symbols)
            out.append({str(k): int(v) for k, v in poly.terms()})
        return out

    def tangent_dimension(self) -> int:
        """``dim (m / (lambda, m^2))^*``: variables minus the rank of linear parts mod p."""
        syms = self.symbols
        rows = []
        for r in self.relators:
            poly = sympy.Poly(sympy.expand(r), *syms)
            rows.append([int(poly.coeff_monomial(s)) % self.p for s in syms])
        from .linalg import rank_mod_p

        rank = rank_mod_p(np.array(rows, dtype=np.int64), self.p) if rows else 0
        return len(syms) - rank

    def to_json(self) -> dict:
        return {
            "variables": self.variables,
            "relators": self.relator_coefficients(),
            "universal": {k: [[str(x) for x in m.row(i)] for i in range(m.rows)] for k, m in self.universal.items()},
            **{k: v for k, v in self.data.items() if isinstance(v, (int, str))},
        }


def _tw_check(p: int, q: int, alphabar: int, betabar: int, chi: int | None) -> int:
    if (q - 1) % p:
        raise TameError(f"q = {q} is not 1 mod p = {p}")
    a, b = alphabar % p, betabar % p
    if a == 0 or b == 0:
        raise TameError("alphabar and betabar must be units")
    if a == b:
        raise TameError("alphabar must differ from betabar")
    chi = a * b if chi is None else chi
    if (chi - a * b) % p:
        raise TameError("chi must reduce to alphabar * betabar")
    return chi


def tw_universal_ring(alphabar: int, betabar: int, q: int, chi: int | None = None, p: int = 5) -> RingPresentation:
    """Four-variable presentation of the Taylor-Wiles lifting ring.

    >>> R = tw_universal_ring(1, 2, 11, p=5)
    >>> R.data["m"], R.relators[0]
    (1, (u + 1)**5 - 1)
    """
    chi = _tw_check(p, q, alphabar, betabar, chi)
    m = p_adic_valuation(q - 1, p)
    x, y, B, u = sympy.symbols("x y B u")
    alpha = alphabar % p
    P = sympy.Matrix([[1, y], [x, 1]])
    Pinv = P.inv()
    Dphi = sympy.diag(alpha + B, sympy.Rational(chi) / (alpha + B))
    # (1+u)^-1 = (1+u)^(p^m - 1) modulo the relator
    Dsig = sympy.diag(1 + u, (1 + u) ** (p ** m - 1))
    return RingPresentation(
        ["x", "y", "B", "u"],
        [(1 + u) ** (p ** m) - 1],
        {"phi": Pinv * Dphi * P, "sigma": Pinv * Dsig * P},
        p,
        {"m": m, "q": q, "alphabar": alpha, "betabar": betabar % p, "chi": chi},
    )


def formal_relation_check(pres: RingPresentation) -> bool:
    """Model relations for the universal matrices, modulo the relator, as polynomial identities."""
    q = pres.data["q"]
    u = sympy.Symbol("u")
    rel = sympy.Poly(sympy.expand(pres.relators[0]), u)
    Phi, Sig = pres.universal["phi"], pres.universal["sigma"]

    def reduce(expr):
        num, den = sympy.fraction(sympy.together(sympy.expand(expr)))
        num = sympy.Poly(sympy.expand(num), u)
        return sympy.expand(num.rem(rel).as_expr())

    # phi^-1 sigma phi = sigma^q is equivalent to the diagonal identity (1+u)^q = 1+u
    diff = Sig * Phi - Phi * Sig ** q
    if any(reduce(e) != 0 for e in diff):
        return False
    if reduce(Sig.det() - 1) != 0:
        return False
    return sympy.simplify(Phi.det() - pres.data["chi"]) == 0


def _m_points(A: ArtinianTestRing, k: int) -> np.ndarray:
    m = A.maximal_ideal.astype(np.int32)
    grid = np.array(list(itertools.product(range(len(m)), repeat=k)), dtype=np.int64)
    return m[grid]


def tw_presentation_points(pres: RingPresentation, A: ArtinianTestRing) -> tuple[np.ndarray, np.ndarray]:
    """All O-algebra maps to ``A`` and the specialised ``(Phi, Sigma)`` pairs.

    A map is a point ``(x, y, B, u)`` of ``m_A^4`` killing the relator.
    """
    if A.p != pres.p:
        raise TameError("test ring has the wrong residue characteristic")
    m = pres.data["m"]
    pts = _m_points(A, 4)
    one = A.one
    onep = A.add[one, pts[:, 3]]
    keep = A.power(onep[:, None, None], pres.p ** m)[:, 0, 0] == one
    pts, onep = pts[keep], onep[keep]
    xs, ys, Bs = pts[:, 0], pts[:, 1], pts[:, 2]
    N = pts.shape[0]
    alpha = A(pres.data["alphabar"])
    chi = A(pres.data["chi"])
    a = A.add[alpha, Bs]
    d = A.mul[chi, A.inv[a]]
    P = np.empty((N, 2, 2), dtype=np.int32)
    P[:, 0, 0] = one
    P[:, 0, 1] = ys
    P[:, 1, 0] = xs
    P[:, 1, 1] = one
    detP = A.det(P)
    dinv = A.inv[detP]
    Pinv = np.empty_like(P)
    Pinv[:, 0, 0] = dinv
    Pinv[:, 0, 1] = A.mul[dinv, A.neg[ys]]
    Pinv[:, 1, 0] = A.mul[dinv, A.neg[xs]]
    Pinv[:, 1, 1] = dinv

    def conj(e1, e2):
        D = np.full((N, 2, 2), A.zero, dtype=np.int32)
        D[:, 0, 0] = e1
        D[:, 1, 1] = e2
        return A.matmul(A.matmul(Pinv, D), P)

    Phi = conj(a, d)
    Sigma = conj(onep, A.inv[onep])
    return pts, np.stack([Phi, Sigma], axis=1)


def tw_brute_force_liftings(alphabar: int, betabar: int, q: int, A: ArtinianTestRing,
                            chi: int | None = None, budget: int = BRUTE_BUDGET) -> np.ndarray:
    """Every ``(Phi, Sigma)`` over ``A`` lifting ``(diag(alphabar, betabar), 1)``.

    Constraints: the tame relation, ``det Phi = chi``, ``det Sigma = 1`` and
    ``Sigma^(p^m) = 1``.  Returns an ``(N, 2, 2, 2)`` array.
    """
    p = A.p
    chi = _tw_check(p, q, alphabar, betabar, chi)
    model = TameGroupModel(q, p)
    K = A.kernel_elements(2)
    base = A.lift(np.diag([alphabar % p, betabar % p]))
    phis = A.matmul(np.broadcast_to(base, K.shape), K)
    phis = phis[A.det(phis) == A(chi)]
    sigs = K[A.det(K) == A.one]
    order_ok = np.all(A.power(sigs, p ** model.m) == A.identity(2)[None], axis=(1, 2))
    sigs = sigs[order_ok]
    return _pairs_satisfying(model, A, phis, sigs, budget)


def _pairs_satisfying(model: TameGroupModel, A: ArtinianTestRing, phis: np.ndarray, sigs: np.ndarray,
                      budget: int) -> np.ndarray:
    total = phis.shape[0] * sigs.shape[0]
    if total > budget:
        raise DeformationError(f"{total} candidate pairs exceed the budget {budget}")
    sig_q = A.power(sigs, model.q)
    out = []
    chunk = max(1, 400_000 // max(1, sigs.shape[0]))
    for s in range(0, phis.shape[0], chunk):
        ph = phis[s:s + chunk]
        P, S = ph.shape[0], sigs.shape[0]
        PH = np.repeat(ph, S, axis=0)
        SG = np.tile(sigs, (P, 1, 1))
        SQ = np.tile(sig_q, (P, 1, 1))
        ok = np.all(A.matmul(SG, PH) == A.matmul(PH, SQ), axis=(1, 2))
        out.append(np.stack([PH[ok], SG[ok]], axis=1))
    if not out:
        return np.zeros((0, 2, 2, 2), dtype=np.int32)
    return np.concatenate(out)


def _as_set(pairs: np.ndarray) -> set[bytes]:
    return {row.astype(np.int32).tobytes() for row in pairs.reshape(pairs.shape[0], -1)}


def tw_count_report(alphabar: int, betabar: int, q: int, A: ArtinianTestRing, chi: int | None = None) -> dict:
    """Presentation map count against the brute-force lifting count, plus set equality."""
    pres = tw_universal_ring(alphabar, betabar, q, chi, A.p)
    pts, spec = tw_presentation_points(pres, A)
    brute = tw_brute_force_liftings(alphabar, betabar, q, A, chi)
    spec_set = _as_set(spec)
    brute_set = _as_set(brute)
    return {
        "p": A.p,
        "q": q,
        "m": pres.data["m"],
        "ring": A.name,
        "presentation_maps": int(pts.shape[0]),
        "distinct_specialisations": len(spec_set),
        "brute_force": int(brute.shape[0]),
        "sets_equal": spec_set == brute_set,
        "tangent_dimension": pres.tangent_dimension(),
    }


# ---------------------------------------------------------------------------
# Ihara avoidance predicates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IharaFlags:
    in_D1: bool
    in_Dzeta: bool
    in_Dur: bool
    satisfies_m_trace: bool
    residually_trivial: bool


def classify_ihara_component(A: ArtinianTestRing, Phi: np.ndarray, Sigma: np.ndarray, zeta: int,
                             q: int) -> IharaFlags:
    """Point-level membership in the unipotent, zeta and unramified components.

    ``zeta`` is an element index of ``A`` reducing to 1; ``Phi`` and ``Sigma``
    are 2x2 index arrays.
    """
    flags = classify_ihara_batch(A, Phi[None], Sigma[None], zeta, q)
    return IharaFlags(*(bool(f[0]) for f in flags))


def classify_ihara_batch(A: ArtinianTestRing, Phi: np.ndarray, Sigma: np.ndarray, zeta: int, q: int):
    if Phi.shape[-2:] != (2, 2) or Sigma.shape[-2:] != (2, 2):
        raise TameError("the Ihara predicates are for two-dimensional liftings")
    if A.residue[zeta] != 1:
        raise TameError("zeta must reduce to 1")
    if np.any(A.det(Sigma) != A.one):
        raise TameError("det rho(sigma) != 1: chi is ramified")
    tr_s = A.trace(Sigma)
    two = A(2)
    in_d1 = tr_s == two
    zinv = A.inv[zeta]
    in_dz = tr_s == A.add[zeta, zinv]
    eye = A.identity(2)
    in_dur = np.all(Sigma == eye, axis=(-2, -1))
    tr_p = A.trace(Phi)
    lhs = A.mul[A(q), A.mul[tr_p, tr_p]]
    c = A(1 + q)
    rhs = A.mul[A.mul[c, c], A.det(Phi)]
    m_trace = lhs == rhs
    triv = np.all(A.residue[Phi] == np.eye(2, dtype=np.int64), axis=(-2, -1)) & \
        np.all(A.residue[Sigma] == np.eye(2, dtype=np.int64), axis=(-2, -1))
    return in_d1, in_dz, in_dur, m_trace, triv


def ihara_liftings(A: ArtinianTestRing, q: int, chi: int = 1, budget: int = BRUTE_BUDGET) -> np.ndarray:
    """All liftings of the trivial ``rhobar`` with ``det Phi = chi``, ``det Sigma = 1``."""
    if (chi - 1) % A.p:
        raise TameError("chi must be residually trivial")
    model = TameGroupModel(q, A.p)
    K = A.kernel_elements(2)
    phis = K[A.det(K) == A(chi)]
    sigs = K[A.det(K) == A.one]
    return _pairs_satisfying(model, A, phis, sigs, budget)


def roots_of_unity_one_mod_lambda(A: ArtinianTestRing, order: int) -> list[int]:
    """Elements ``z`` of ``A`` reducing to 1 with ``z^order = 1``."""
    out = []
    for z in range(A.size):
        if A.residue[z] != 1:
            continue
        w = A.one
        for _ in range(order):
            w = int(A.mul[w, z])
        if w == A.one:
            out.append(z)
    return out


def ihara_coincidence(A: ArtinianTestRing, q: int, zeta: int | None = None) -> dict:
    """Compare the unipotent and zeta predicates on the full enumeration over ``A``."""
    lifts = ihara_liftings(A, q)
    z = A.one if zeta is None else zeta
    d1, dz, dur, mt, _ = classify_ihara_batch(A, lifts[:, 0], lifts[:, 1], z, q)
    return {
        "ring": A.name,
        "liftings": int(lifts.shape[0]),
        "in_D1": int(d1.sum()),
        "in_Dzeta": int(dz.sum()),
        "in_Dur": int(dur.sum()),
        "discrepancies": int((d1 != dz).sum()),
        "ur_inside_D1": bool(np.all(d1[dur])),
        "satisfies_m_trace": int(mt.sum()),
    }


def m_trace_example(p: int, q: int) -> dict:
    """Solve ``Sigma Phi = Phi Sigma^q`` for ``Sigma = [[1,1],[0,1]]`` over ``Z/p^2``.

    Every solution is checked against the trace identity.
    """
    A = ArtinianTestRing(IntegerMod(p * p), f"Z/{p}^2")
    S = np.array([[A.one, A.one], [A.zero, A.one]], dtype=np.int32)
    grid = np.array(list(itertools.product(range(A.size), repeat=4)), dtype=np.int32).reshape(-1, 2, 2)
    grid = grid[A.units[A.det(grid)]]
    model = TameGroupModel(q, p)
    ok = model.relation_holds(A, grid, np.broadcast_to(S, grid.shape))
    sols = grid[ok]
    _, _, _, mt, _ = classify_ihara_batch(A, sols, np.broadcast_to(S, sols.shape), A.one, q)
    example = np.array([[A.one, A.zero], [A.zero, A(q)]], dtype=np.int32)
    return {
        "solutions": int(sols.shape[0]),
        "all_satisfy_m_trace": bool(mt.all()),
        "diag_1_q_is_solution": example.tobytes() in {s.tobytes() for s in sols},
    }


# ---------------------------------------------------------------------------
# Monodromy
# ---------------------------------------------------------------------------

def wd_functor(Phi: Matrix, Sigma: Matrix, q: int) -> WDRep:
    """``N = log Sigma`` and ``r(phi) = Phi``, ``r(sigma) = Sigma exp(-N)``.

    ``t(sigma)`` is normalised to 1, so ``r(sigma)`` is trivial for unipotent input.
    """
    R = Phi.ring
    n = Phi.nrows
    p = _residue_char(R)
    if p <= n:
        raise TameError(f"need p > n (p = {p}, n = {n})")
    one = Sigma.identity_like()
    if not is_nilpotent(Sigma - one):
        e = _unipotent_power(Sigma)
        hint = f"; Sigma^{e} is unipotent, restrict to that open subgroup" if e else ""
        raise TameError("rho(sigma) is not unipotent" + hint)
    try:
        N = nilpotent_exp_log(Sigma, "log")
        r_sigma = Sigma * nilpotent_exp_log(-N, "exp")
    except AlgebraError as exc:
        raise TameError(str(exc)) from exc
    return WDRep(WeilRep(R, Phi, r_sigma, q), N)


def _residue_char(R) -> int:
    char = R.characteristic
    if not char:
        raise TameError("wd_functor expects a Galois ring GR(p^k, f)")
    for d in range(2, char + 1):
        if char % d == 0:
            return d
    return char


def _unipotent_power(S: Matrix, limit: int = 500) -> int | None:
    cur = S
    one = S.identity_like()
    for e in range(1, limit + 1):
        if is_nilpotent(cur - one):
            return e
        cur = cur * S
    return None


def rescale_normalisation(wd: WDRep, u) -> WDRep:
    """Change ``t`` to ``u^-1 t``: the same ``rho(sigma) = exp(N t(sigma))`` forces ``N' = u N``."""
    R = wd.ring
    return WDRep(wd.r, wd.n_op.scale(R(u)))


def find_conjugator(pairs: list[tuple[Matrix, Matrix]], budget: int = 10_000_000) -> Matrix | None:
    """Exhaustive search for invertible ``X`` with ``X a X^-1 = b`` over a finite ring."""
    R = pairs[0][0].ring
    A = ArtinianTestRing(R)
    n = pairs[0][0].nrows
    total = A.size ** (n * n)
    if total > budget:
        raise TameError("conjugator search exceeds the budget")
    grid = np.array(list(itertools.product(range(A.size), repeat=n * n)), dtype=np.int32).reshape(-1, n, n)
    grid = grid[A.units[A.det(grid)]]
    keep = np.ones(grid.shape[0], dtype=bool)
    for a, b in pairs:
        aa, bb = A.from_matrix(a), A.from_matrix(b)
        keep &= np.all(A.matmul(grid, aa[None]) == A.matmul(bb[None], grid), axis=(1, 2))
    hits = np.nonzero(keep)[0]
    return A.to_matrix(grid[hits[0]]) if hits.size else None


def rescaling_check(wd: WDRep, u) -> dict:
    """``(r, N)`` and ``(r, uN)`` are isomorphic: exhibit the conjugator."""
    other = rescale_normalisation(wd, u)
    pairs = [(wd.r.phi, other.r.phi), (wd.r.sigma, other.r.sigma), (wd.n_op, other.n_op)]
    X = find_conjugator(pairs)
    return {"rescaled_N": other.n_op, "conjugator": X, "isomorphic": X is not None}


# ---------------------------------------------------------------------------
# Fontaine-Laffaille ledger
# ---------------------------------------------------------------------------

def fl_dimension_ledger(n: int, degree: int, ht_sets: list[list[int]], p: int, unramified: bool = True) -> dict:
    """Dimension bookkeeping for the Fontaine-Laffaille lifting ring.

    >>> fl_dimension_ledger(2, 1, [[0, 1]], 5)
    {'absolute_dimension': 5, 'variables': 4}
    """
    if not unramified:
        raise TameError("the Fontaine-Laffaille range needs K/Q_p unramified")
    if len(ht_sets) != degree:
        raise TameError("one Hodge-Tate set per embedding is required")
    for hs in ht_sets:
        if len(hs) != n or len(set(hs)) != n:
            raise TameError(f"Hodge-Tate set {hs} must have {n} distinct weights")
        if max(hs) - min(hs) > p - 2:
            raise TameError(f"spread {max(hs) - min(hs)} exceeds p - 2 = {p - 2}")
    extra = degree * n * (n - 1) // 2
    return {"absolute_dimension": n * n + extra, "variables": n * n - 1 + extra}
