"""Weil-Deligne representations on the two-generator tame model.

A Weil representation is recorded by ``Phi`` (a Frobenius lift, valuation
one) and ``Sigma`` (a tame inertia generator).  The convention throughout is
``Phi N Phi^-1 = q^-1 N`` and ``Sigma N Sigma^-1 = N``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .algorithms import AlgebraError, jordan_chevalley
from .matrix import Matrix
from .rings import CoeffRing, Elt, PolyQuotient, Rationals, RingError, p_adic_valuation

ORDER_LIMIT = 10_000


class WDError(ValueError):
    """Invalid Weil-Deligne data or an unsupported request."""


def _finite_order(m: Matrix, limit: int = ORDER_LIMIT) -> int | None:
    one = m.identity_like()
    cur = m
    for k in range(1, limit + 1):
        if cur == one:
            return k
        cur = cur * m
    return None


@dataclass(frozen=True)
class WeilRep:
    ring: CoeffRing
    phi: Matrix
    sigma: Matrix
    q: int

    def __post_init__(self):
        n = self.phi.nrows
        if self.phi.shape != (n, n) or self.sigma.shape != (n, n):
            raise WDError("Phi and Sigma must be square of the same size")
        if not self.phi.is_invertible():
            raise WDError("Phi must be invertible")
        if _finite_order(self.sigma) is None:
            raise WDError("Sigma must have finite order")
        if self.phi.inverse() * self.sigma * self.phi != self.sigma ** self.q:
            raise WDError("Phi^-1 Sigma Phi != Sigma^q")

    @property
    def dim(self) -> int:
        return self.phi.nrows

    @property
    def sigma_order(self) -> int:
        return _finite_order(self.sigma)

    @classmethod
    def unramified(cls, ring: CoeffRing, phi: Matrix, q: int) -> "WeilRep":
        return cls(ring, phi, Matrix.identity(ring, phi.nrows), q)

    @classmethod
    def character(cls, ring: CoeffRing, value, q: int) -> "WeilRep":
        """Unramified character sending Frobenius to ``value``."""
        return cls.unramified(ring, Matrix.from_rows(ring, [[value]]), q)

    def twist(self, c) -> "WeilRep":
        """Tensor with the unramified character ``Frob -> c``."""
        return WeilRep(self.ring, self.phi.scale(self.ring(c)), self.sigma, self.q)

    def image(self, word: str) -> Matrix:
        """Image of a word in ``p`` (Phi), ``P`` (Phi^-1) and ``s`` (Sigma)."""
        out = self.phi.identity_like()
        table = {"p": self.phi, "P": self.phi.inverse(), "s": self.sigma}
        for ch in word:
            out = out * table[ch]
        return out


@dataclass(frozen=True)
class WDRep:
    r: WeilRep
    n_op: Matrix

    def __post_init__(self):
        if not check_wd_relation(self.r, self.n_op):
            raise WDError("(r, N) violates the Weil-Deligne relation")

    @property
    def ring(self) -> CoeffRing:
        return self.r.ring

    @property
    def dim(self) -> int:
        return self.r.dim

    @property
    def q(self) -> int:
        return self.r.q

    def inertial_type(self) -> "InertialType":
        return InertialType(self.ring, self.r.sigma, self.n_op)

    def to_json(self) -> dict:
        return {
            "ring": repr(self.ring),
            "q": self.q,
            "phi": _mat_json(self.r.phi),
            "sigma": _mat_json(self.r.sigma),
            "N": _mat_json(self.n_op),
        }


@dataclass(frozen=True)
class InertialType:
    ring: CoeffRing
    sigma: Matrix
    n_op: Matrix

    def is_isomorphic(self, other: "InertialType") -> bool:
        return _intertwiner(self.ring, [(self.sigma, other.sigma), (self.n_op, other.n_op)]) is not None


def _mat_json(m: Matrix) -> list:
    return [[repr(x) for x in row] for row in m.rows]


def check_wd_relation(r: WeilRep, n_op: Matrix) -> bool:
    """``N`` nilpotent, ``Phi N Phi^-1 = q^-1 N`` and ``Sigma N Sigma^-1 = N``."""
    R = r.ring
    if n_op.shape != r.phi.shape:
        return False
    if not (n_op ** n_op.nrows).is_zero():
        return False
    qinv = R(r.q).inverse()
    if r.phi * n_op * r.phi.inverse() != n_op.scale(qinv):
        return False
    return r.sigma * n_op == n_op * r.sigma


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def direct_sum(reps: list[WDRep]) -> WDRep:
    if not reps:
        raise WDError("empty direct sum")
    R, q = reps[0].ring, reps[0].q
    if any(w.q != q or w.ring != R for w in reps):
        raise WDError("summands must share the coefficient ring and q")
    phi = Matrix.block_diag(R, [w.r.phi for w in reps])
    sig = Matrix.block_diag(R, [w.r.sigma for w in reps])
    n_op = Matrix.block_diag(R, [w.n_op for w in reps])
    return WDRep(WeilRep(R, phi, sig, q), n_op)


def sp_m(r: WeilRep, m: int) -> WDRep:
    """``Sp_m(r)``: block ``j`` carries ``r |.|^(m-1-j)`` and ``N`` maps block ``j+1`` onto block ``j``.

    >>> from twkbench.rings import rationals
    >>> Q = rationals()
    >>> w = sp_m(WeilRep.character(Q, 1, 3), 2)
    >>> w.r.phi, w.n_op
    (Matrix[Q]([1/3, 0; 0, 1]), Matrix[Q]([0, 1; 0, 0]))
    """
    if m < 1:
        raise WDError("m must be at least 1")
    R = r.ring
    qinv = R(r.q).inverse()
    d = r.dim
    phis = [r.phi.scale(qinv ** (m - 1 - j)) for j in range(m)]
    phi = Matrix.block_diag(R, phis)
    sig = Matrix.block_diag(R, [r.sigma] * m)
    rows = [[R.zero] * (m * d) for _ in range(m * d)]
    for j in range(m - 1):
        for i in range(d):
            rows[j * d + i][(j + 1) * d + i] = R.one
    return WDRep(WeilRep(R, phi, sig, r.q), Matrix(R, rows, m * d))


def twist(wd: WDRep, c) -> WDRep:
    return WDRep(wd.r.twist(c), wd.n_op)


# ---------------------------------------------------------------------------
# Frobenius semisimplification and decomposition
# ---------------------------------------------------------------------------

def is_frobenius_semisimple(wd: WDRep) -> bool:
    _, u = jordan_chevalley(wd.r.phi)
    return u == u.identity_like()


def frobenius_ss(wd: WDRep) -> WDRep:
    s, _ = jordan_chevalley(wd.r.phi)
    return WDRep(WeilRep(wd.ring, s, wd.r.sigma, wd.q), wd.n_op)


def _column_basis(m: Matrix) -> list[list[Elt]]:
    """Pivot columns of ``m`` (a basis of its column space)."""
    _, piv = m.rref()
    return [m.col(j) for j in piv]


def _kernel_basis(m: Matrix) -> list[list[Elt]]:
    return [v.col(0) for v in m.nullspace()]


def _as_matrix(R: CoeffRing, vectors: list[list[Elt]], n: int) -> Matrix:
    if not vectors:
        return Matrix(R, [[] for _ in range(n)], 0)
    return Matrix(R, [[v[i] for v in vectors] for i in range(n)], len(vectors))


def _intersection(R, U: list, V: list, n: int) -> list:
    if not U or not V:
        return []
    A = _as_matrix(R, U, n).hstack(_as_matrix(R, V, n).scale(R(-1)))
    out = []
    for c in A.nullspace():
        coeffs = c.col(0)[:len(U)]
        out.append([sum((coeffs[k] * U[k][i] for k in range(len(U))), R.zero) for i in range(n)])
    return _column_basis(_as_matrix(R, out, n)) if out else []


def _quotient_action(R, big: list, small: list, ops: list[Matrix], n: int) -> list[Matrix]:
    """Matrices of ``ops`` on ``span(big) / span(small)`` (``small`` inside ``big``)."""
    comp = []
    cur = list(small)
    for v in big:
        trial = cur + [v]
        if _as_matrix(R, trial, n).rank_over_field() == len(trial):
            cur = trial
            comp.append(v)
    basis = _as_matrix(R, list(small) + comp, n)
    k0, k = len(small), len(comp)
    out = []
    for op in ops:
        cols = []
        for v in comp:
            img = op * _as_matrix(R, [v], n)
            coords = basis.solve_right(img)
            if coords is None:
                raise WDError("subspace is not stable under the operator")
            cols.append([coords[k0 + i, 0] for i in range(k)])
        out.append(Matrix(R, [[cols[j][i] for j in range(k)] for i in range(k)], k))
    return out


def _primary_pieces(r: WeilRep) -> list[WeilRep]:
    """Split ``r`` by the factorisation of ``charpoly(Phi)`` when ``Sigma`` commutes with ``Phi``."""
    R = r.ring
    if r.dim <= 1 or r.sigma * r.phi != r.phi * r.sigma:
        return [r]
    factors = _factor_charpoly(r.phi)
    if factors is None or len(factors) <= 1:
        return [r]
    from .rings import poly_eval

    n = r.dim
    out = []
    for f, e in factors:
        fe = [R.one]
        from .rings import poly_mul
        for _ in range(e):
            fe = poly_mul(fe, f)
        K = _kernel_basis(poly_eval(fe, r.phi))
        phi_k, sig_k = _quotient_action(R, K, [], [r.phi, r.sigma], n)
        out.append(WeilRep(R, phi_k, sig_k, r.q))
    return out


def _factor_charpoly(phi: Matrix):
    """Irreducible factors of ``charpoly(phi)`` over Q or F_p (None elsewhere)."""
    import sympy

    from .rings import IntegerMod

    R = phi.ring
    cp = phi.charpoly()
    x = sympy.Symbol("x")
    if isinstance(R, Rationals):
        expr = sum(sympy.Rational(c.v.numerator, c.v.denominator) * x ** i for i, c in enumerate(cp))
        _, facs = sympy.factor_list(expr, x)
    elif isinstance(R, IntegerMod) and R.is_field:
        expr = sum(int(c.v) * x ** i for i, c in enumerate(cp))
        _, facs = sympy.factor_list(expr, x, modulus=R.n)
    else:
        return None
    out = []
    for f, e in facs:
        coeffs = sympy.Poly(f, x).all_coeffs()[::-1]
        lead = coeffs[-1]
        out.append(([R(sympy.Rational(c) / lead) if isinstance(R, Rationals) else R(int(c) * pow(int(lead), -1, R.n))
                     for c in coeffs], int(e)))
    return out


def decompose(wd: WDRep) -> list[tuple[WeilRep, int]]:
    """``wd`` as ``sum Sp_(m_i)(r_i)`` for a Frobenius-semisimple input.

    The multiplicity space of ``Sp_m`` is read off from
    ``ker N cap im N^(m-1)`` modulo ``ker N cap im N^m``, which carries
    ``r_i |.|^(m-1)``.  The answer is certified by rebuilding and searching
    for an intertwiner.
    """
    if not is_frobenius_semisimple(wd):
        raise WDError("decompose needs a Frobenius-semisimple input")
    R, n = wd.ring, wd.dim
    N = wd.n_op
    kerN = _kernel_basis(N)
    images = [[list(v) for v in Matrix.identity(R, n).rows]]
    power = Matrix.identity(R, n)
    for _ in range(n):
        power = power * N
        images.append(_column_basis(power) if not power.is_zero() else [])
    layers = [_intersection(R, kerN, images[j], n) if images[j] else [] for j in range(n + 1)]
    out: list[tuple[WeilRep, int]] = []
    qpow = R(wd.q)
    for m in range(1, n + 1):
        big, small = layers[m - 1], layers[m]
        if len(big) == len(small):
            continue
        phi_m, sig_m = _quotient_action(R, big, small, [wd.r.phi, wd.r.sigma], n)
        base = WeilRep(R, phi_m.scale(qpow ** (m - 1)), sig_m, wd.q)
        for piece in _primary_pieces(base):
            out.append((piece, m))
    rebuilt = direct_sum([sp_m(r, m) for r, m in out])
    if not is_isomorphic(rebuilt, wd):
        raise WDError("decomposition failed its rebuild certificate")
    return out


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------

def _intertwiner(R: CoeffRing, pairs: list[tuple[Matrix, Matrix]], tries: int = 40, seed: int = 0):
    """An invertible ``X`` with ``X a = b X`` for every pair, or None.

    The solutions form a linear space; an invertible member exists iff the
    determinant is a nonzero polynomial on it.  Small finite spaces are
    searched exhaustively, otherwise random points are tried.
    """
    n = pairs[0][0].nrows
    if any(a.shape != (n, n) or b.shape != (n, n) for a, b in pairs):
        return None
    rows = []
    for a, b in pairs:
        # (X a - b X)_{ij} = sum_k X_ik a_kj - b_ik X_kj
        for i in range(n):
            for j in range(n):
                row = [R.zero] * (n * n)
                for k in range(n):
                    row[i * n + k] = row[i * n + k] + a[k, j]
                    row[k * n + j] = row[k * n + j] - b[i, k]
                rows.append(row)
    sol = Matrix(R, rows, n * n).nullspace()
    if not sol:
        return None
    basis = [Matrix(R, [[v[i * n + j, 0] for j in range(n)] for i in range(n)], n) for v in sol]

    def combo(cs):
        out = Matrix.zeros(R, n)
        for c, b in zip(cs, basis):
            if c:
                out = out + b.scale(R(c))
        return out

    if R.is_finite and R.order() ** len(basis) <= 20_000:
        elems = list(R.elements())
        for cs in itertools.product(elems, repeat=len(basis)):
            X = Matrix.zeros(R, n)
            for c, b in zip(cs, basis):
                X = X + b.scale(c)
            if X.is_invertible():
                return X
        return None
    rng = random.Random(seed)
    hi = 10 ** 6 if not R.is_finite else R.order()
    for t in range(tries):
        cs = [1] * len(basis) if t == 0 else [rng.randrange(hi) for _ in basis]
        X = combo(cs)
        if X.det().is_unit() if not R.is_field else not X.det().is_zero():
            return X
    return None


def is_isomorphic(a: WDRep, b: WDRep) -> bool:
    if a.dim != b.dim or a.q != b.q:
        return False
    if a.r.phi.charpoly() != b.r.phi.charpoly():
        return False
    pairs = [(a.r.phi, b.r.phi), (a.r.sigma, b.r.sigma), (a.n_op, b.n_op)]
    return _intertwiner(a.ring, pairs) is not None


# ---------------------------------------------------------------------------
# Boundedness
# ---------------------------------------------------------------------------

def _integral_and_unit(x: Elt, l: int) -> tuple[bool, bool]:
    """(is ``x`` integral over ``Z_(l)``, is it an ``l``-adic unit)."""
    R = x.ring
    if isinstance(R, Rationals):
        if x.is_zero():
            return True, False
        v = p_adic_valuation(x.v.numerator, l) - p_adic_valuation(x.v.denominator, l)
        return v >= 0, v == 0
    if isinstance(R, PolyQuotient) and isinstance(R.base, Rationals) and len(R.modulus) == 3:
        # x = a + b s with s^2 = -c0 - c1 s; test the minimal polynomial
        a, b = (list(x.v) + [R.base.zero] * 2)[:2]
        a, b = R.base(a), R.base(b)
        c0, c1 = R.base(R.modulus[0]), R.base(R.modulus[1])
        if b.is_zero():
            return _integral_and_unit(a, l)
        tr = a + a - b * c1
        nm = a * a - a * b * c1 + b * b * c0
        it, _ = _integral_and_unit(tr, l)
        iN, uN = _integral_and_unit(nm, l)
        return it and iN, it and uN
    raise WDError(f"no valuation available on {R}")


def is_bounded(wd: WDRep, l: int | None) -> bool:
    """Unit determinant and integral characteristic polynomial, for Phi and Phi*Sigma.

    >>> from twkbench.rings import rationals
    >>> Q = rationals()
    >>> is_bounded(WDRep(WeilRep.unramified(Q, Matrix.diag(Q, [1, 7]), 7), Matrix.zeros(Q, 2)), 5)
    True
    """
    if l is None:
        raise WDError("a valuation (prime l) must be supplied")
    results = []
    for g in (wd.r.phi, wd.r.phi * wd.r.sigma):
        cp = g.charpoly()
        ok = all(_integral_and_unit(c, l)[0] for c in cp)
        ok = ok and _integral_and_unit(g.det(), l)[1]
        results.append(ok)
    if results[0] != results[1]:
        raise WDError("boundedness differs between Phi and Phi*Sigma")
    return results[0]


def _lattice_basis(M: Matrix, l: int) -> Matrix:
    """A basis (columns) of the ``Z_(l)``-span of the columns of ``M`` over Q."""
    from .algorithms import smith_normal_form
    from .rings import rationals

    Ql = rationals(l)
    n = M.nrows
    shift = 0
    for x in M.entries():
        if not x.is_zero():
            v = p_adic_valuation(x.v.numerator, l) - p_adic_valuation(x.v.denominator, l)
            shift = max(shift, -v)
    scale = Ql(l) ** shift
    Mi = M.change_ring(Ql).scale(scale)
    U, D, _ = smith_normal_form(Mi)
    Uinv = U.inverse()
    cols = []
    for j in range(min(D.shape)):
        if not D[j, j].is_zero():
            cols.append([Uinv[i, j] * D[j, j] / scale for i in range(n)])
    return _as_matrix(Ql, cols, n)


def lattice_stabilized(wd: WDRep, l: int, max_steps: int = 200, max_denominator: int = 60) -> bool:
    """Saturate the standard lattice under Phi^(+-1) and Sigma; bounded iff it stabilises.

    Used as an independent oracle for :func:`is_bounded` on rational input.
    """
    from .rings import rationals

    if not isinstance(wd.ring, Rationals):
        raise WDError("the lattice oracle works over Q")
    Ql = rationals(l)
    phi = wd.r.phi.change_ring(Ql)
    ops = [phi, phi.inverse(), wd.r.sigma.change_ring(Ql)]
    L = Matrix.identity(Ql, wd.dim)
    for _ in range(max_steps):
        gens = L
        for op in ops:
            gens = gens.hstack(op * L)
        L2 = _lattice_basis(gens, l)
        if L2.shape == L.shape and _contains(L, L2, l):
            return True
        L = L2
        worst = max((-Ql.valuation(x) for x in L.entries() if not x.is_zero()), default=0)
        if worst > max_denominator:
            return False
    return False


def _contains(L: Matrix, L2: Matrix, l: int) -> bool:
    X = L.inverse() * L2
    return all(x.is_zero() or x.ring.valuation(x) >= 0 for x in X.entries())


# ---------------------------------------------------------------------------
# GL_2 dictionary
# ---------------------------------------------------------------------------

def rec_dictionary(kind: str, q: int, ring: CoeffRing, alpha=None, beta=None, chi=None,
                   sigma: Matrix | None = None) -> WDRep:
    """Weil-Deligne side of an unramified principal series, Steinberg twist or character.

    ``kind`` is ``"unramified"`` (values ``alpha, beta`` at the uniformizer),
    ``"steinberg"`` (``Sp_2`` of the character ``chi``) or ``"character"``.
    A declared tame ``sigma`` may accompany ``"character"``.
    """
    if kind == "unramified":
        if alpha is None or beta is None:
            raise WDError("unramified principal series needs alpha and beta")
        phi = Matrix.diag(ring, [alpha, beta])
        return WDRep(WeilRep.unramified(ring, phi, q), Matrix.zeros(ring, 2))
    if kind == "steinberg":
        if chi is None:
            raise WDError("Steinberg needs chi")
        return sp_m(WeilRep.character(ring, chi, q), 2)
    if kind == "character":
        if chi is None:
            raise WDError("a character needs its value chi")
        phi = Matrix.from_rows(ring, [[chi]])
        sig = sigma if sigma is not None else Matrix.identity(ring, 1)
        return WDRep(WeilRep(ring, phi, sig, q), Matrix.zeros(ring, 1))
    raise WDError(f"unsupported shape {kind!r}; cuspidal types are out of scope")


def rec_inverse(wd: WDRep) -> dict:
    """Recognise the unramified ``N = 0`` and ``Sp_2`` shapes in dimension 2."""
    if wd.dim != 2 or wd.r.sigma != wd.r.sigma.identity_like():
        raise WDError("only unramified two-dimensional shapes are recognised")
    if wd.n_op.is_zero():
        parts = decompose(wd)
        vals = []
        for r, _ in parts:
            cp = r.phi.charpoly()
            if r.dim == 1:
                vals.append(r.phi[0, 0])
            else:
                return {"kind": "unramified", "charpoly": cp}
        return {"kind": "unramified", "alpha": vals[0], "beta": vals[1]}
    parts = decompose(wd)
    if len(parts) == 1 and parts[0][1] == 2:
        return {"kind": "steinberg", "chi": parts[0][0].phi[0, 0]}
    raise WDError("unrecognised shape")


__all__ = [
    "WDError", "WeilRep", "WDRep", "InertialType", "check_wd_relation", "direct_sum", "sp_m", "twist",
    "is_frobenius_semisimple", "frobenius_ss", "decompose", "is_isomorphic", "is_bounded",
    "lattice_stabilized", "rec_dictionary", "rec_inverse", "AlgebraError", "RingError",
]
