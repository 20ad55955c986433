"""Hecke operators for GL_2 over Q_q: coset certificates, Iwasawa
decomposition, spherical eigenvalues and the Iwahori-level model.

The local field is ``Q_q`` with uniformizer ``q`` (a prime).  Scalars live
in ``Q(alpha, beta, chi)(s)`` with ``s^2 = q``, optionally over a cyclotomic
field when tame character values are needed.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .algorithms import smith_normal_form
from .matrix import Matrix
from .rings import (Elt, cyclotomic_field, is_prime, p_adic_valuation, primitive_root,
                    quadratic_field, rational_functions, rationals)

KINDS = ("T", "S", "U_Iwahori")
DEFAULT_BUDGET = 50_000


class HeckeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# 2x2 matrices over Q with a q-adic valuation
# ---------------------------------------------------------------------------

def _v(x: Fraction, q: int) -> float:
    if x == 0:
        return math.inf
    return p_adic_valuation(x.numerator, q) - p_adic_valuation(x.denominator, q)


@dataclass(frozen=True)
class PAdicMatrix:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    q: int

    def __post_init__(self):
        if self.det == 0:
            raise HeckeError("matrix is not invertible")

    @classmethod
    def of(cls, rows: Sequence[Sequence], q: int) -> "PAdicMatrix":
        (a, b), (c, d) = rows
        return cls(Fraction(a), Fraction(b), Fraction(c), Fraction(d), q)

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, o: "PAdicMatrix") -> "PAdicMatrix":
        return PAdicMatrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                           self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d, self.q)

    def inverse(self) -> "PAdicMatrix":
        D = self.det
        return PAdicMatrix(self.d / D, -self.b / D, -self.c / D, self.a / D, self.q)

    def rows(self) -> list[list[Fraction]]:
        return [[self.a, self.b], [self.c, self.d]]

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def is_integral(self) -> bool:
        return all(_v(x, self.q) >= 0 for x in self.entries())

    def in_gl2_o(self) -> bool:
        return self.is_integral() and _v(self.det, self.q) == 0

    def in_iwahori(self) -> bool:
        return self.in_gl2_o() and _v(self.c, self.q) >= 1

    def to_matrix(self) -> Matrix:
        return Matrix.from_rows(rationals(self.q), self.rows())

    def to_json(self) -> list:
        return [[str(x) for x in r] for r in self.rows()]

    def __repr__(self):
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


def cartan_invariants(g: PAdicMatrix) -> tuple[int, int]:
    """Valuations ``(a, b)``, ``a <= b``, of the elementary divisors of ``g``.

    >>> cartan_invariants(PAdicMatrix.of([[1, 1], [1, 4]], 3))
    (0, 1)
    """
    k = -min(_v(x, g.q) for x in g.entries() if x != 0)
    k = max(int(k), 0)
    scale = Fraction(g.q) ** k
    m = Matrix.from_rows(rationals(g.q), [[x * scale for x in r] for r in g.rows()])
    _, D, _ = smith_normal_form(m)
    vals = sorted(int(rationals(g.q).valuation(D[i, i])) - k for i in range(2))
    return vals[0], vals[1]


def iwasawa_decompose(g: PAdicMatrix) -> tuple[PAdicMatrix, PAdicMatrix]:
    """``g = b k`` with ``b`` upper triangular and ``k`` in ``GL_2(Z_q)``.

    Column operations clear the lower-left entry using whichever bottom
    entry has the smaller valuation; ``k`` is the inverse of the column
    operation.
    """
    q = g.q
    one, zero = Fraction(1), Fraction(0)
    if g.c == 0:
        return g, PAdicMatrix(one, zero, zero, one, q)
    if g.d != 0 and _v(g.d, q) <= _v(g.c, q):
        E = PAdicMatrix(one, zero, -g.c / g.d, one, q)
    else:
        # swap columns, then clear
        w = PAdicMatrix(zero, one, one, zero, q)
        gw = g @ w
        E0 = PAdicMatrix(one, zero, -gw.c / gw.d, one, q) if gw.c != 0 else PAdicMatrix(one, zero, zero, one, q)
        E = w @ E0
    b = g @ E
    k = E.inverse()
    if b.c != 0 or not k.in_gl2_o() or b @ k != g:
        raise HeckeError("Iwasawa decomposition failed")
    return b, k


# ---------------------------------------------------------------------------
# Double coset certificates
# ---------------------------------------------------------------------------

@dataclass
class CosetCertificate:
    kind: str
    q: int
    reps: list[PAdicMatrix]
    distinct: list[dict]  # one entry per pair with the failing test
    complete: list[dict]  # tested matrix and the unique coset index
    valid: bool

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "q": self.q,
            "representatives": [r.to_json() for r in self.reps],
            "distinctness": [{"pair": d["pair"], "witness": d["witness"].to_json(), "reason": d["reason"]}
                             for d in self.distinct],
            "completeness_checked": len(self.complete),
            "valid": self.valid,
        }


def coset_reps(kind: str, q: int) -> list[PAdicMatrix]:
    if kind == "S":
        return [PAdicMatrix.of([[q, 0], [0, q]], q)]
    if kind == "T":
        return [PAdicMatrix.of([[q, a], [0, 1]], q) for a in range(q)] + [PAdicMatrix.of([[1, 0], [0, q]], q)]
    if kind == "U_Iwahori":
        return [PAdicMatrix.of([[q, a], [0, 1]], q) for a in range(q)]
    raise HeckeError(f"unknown operator {kind!r}")


def _member(kind: str):
    return PAdicMatrix.in_iwahori if kind == "U_Iwahori" else PAdicMatrix.in_gl2_o


def _why_not(h: PAdicMatrix, kind: str) -> str:
    if not h.is_integral():
        return "non-integral entry"
    if _v(h.det, h.q) != 0:
        return "determinant not a unit"
    return "lower-left entry not divisible by q"


def _random_compact(q: int, iwahori: bool, rng: random.Random) -> PAdicMatrix:
    m = q * q
    while True:
        a, b, c, d = (rng.randrange(m) for _ in range(4))
        if iwahori:
            c = q * rng.randrange(q)
        if (a * d - b * c) % q:
            return PAdicMatrix.of([[a, b], [c, d]], q)


def verify_double_coset(kind: str, q: int, budget: int = DEFAULT_BUDGET, samples: int = 200,
                        seed: int = 0, reps: list[PAdicMatrix] | None = None) -> CosetCertificate:
    """Representatives with pairwise distinctness and completeness checks.

    Completeness runs over every Hermite form ``[[q^a, b], [0, q^d]]`` with
    ``0 <= b < q^2`` and the right Cartan type, plus ``samples`` random
    products ``k1 g k2`` from the double coset itself.  Passing ``reps``
    checks a caller-supplied list instead of the standard one.
    """
    if not is_prime(q):
        raise HeckeError("the model uses Q_q with q prime")
    reps = coset_reps(kind, q) if reps is None else list(reps)
    work = len(reps) ** 2 + (2 * q * q + samples) * len(reps)
    if work > budget:
        raise HeckeError(f"certificate needs {work} membership tests; budget is {budget}")
    member = _member(kind)
    distinct = []
    ok = True
    for i, j in itertools.combinations(range(len(reps)), 2):
        h = reps[i].inverse() @ reps[j]
        if member(h):
            ok = False
        distinct.append({"pair": (i, j), "witness": h, "reason": _why_not(h, kind)})
    target = {"T": (0, 1), "S": (1, 1), "U_Iwahori": (0, 1)}[kind]
    tests = []
    for a, d in ((1, 0), (0, 1), (1, 1)):
        for b in range(q * q):
            g = PAdicMatrix.of([[q ** a, b], [0, q ** d]], q)
            if cartan_invariants(g) != target:
                continue
            if kind == "U_Iwahori" and not _in_iwahori_double(g):
                continue
            tests.append(g)
    rng = random.Random(seed)
    g0 = reps[0] if kind != "T" else PAdicMatrix.of([[q, 0], [0, 1]], q)
    for _ in range(samples):
        k1 = _random_compact(q, kind == "U_Iwahori", rng)
        k2 = _random_compact(q, kind == "U_Iwahori", rng)
        tests.append(k1 @ g0 @ k2)
    complete = []
    for g in tests:
        hits = [i for i, h in enumerate(reps) if member(h.inverse() @ g)]
        if len(hits) != 1:
            ok = False
        complete.append({"matrix": g, "cosets": hits})
    return CosetCertificate(kind, q, reps, distinct, complete, ok)


def _in_iwahori_double(g: PAdicMatrix) -> bool:
    """Membership in ``I diag(q, 1) I``: ``q`` divides the first column, the lower-right
    entry is a unit and the determinant has valuation 1."""
    q = g.q
    return (g.is_integral() and _v(g.a, q) >= 1 and _v(g.c, q) >= 1 and _v(g.d, q) == 0
            and _v(g.det, q) == 1)


# ---------------------------------------------------------------------------
# Symbolic scalars
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def symbolic_field(q: int, tame_order: int | None = None):
    """``Q(alpha, beta, chi)(s)``, ``s^2 = q``, over ``Q(zeta_m)`` if ``tame_order = m > 2``."""
    base = cyclotomic_field(tame_order) if tame_order and tame_order > 2 else None
    R = rational_functions(base, names=("alpha", "beta", "chi"))
    return quadratic_field(q, base=R)


def symbols(K) -> tuple[Elt, Elt, Elt, Elt]:
    """(alpha, beta, chi, s) in ``K``."""
    R = K.base
    a, b, c = (K((x,)) for x in R.symbols)
    return a, b, c, K.gen


def tame_root(K) -> Elt:
    """A primitive root of unity in the cyclotomic base of ``K``."""
    R = K.base
    F = R.base
    if not hasattr(F, "zeta_order"):
        raise HeckeError("field has no tame roots of unity")
    z = F.gen if F.deg > 1 else F((F.base._neg(F.modulus[0]),))
    return K((R(z),))


@dataclass(frozen=True)
class LocalCharacter:
    """``chi(q^n u) = unram^n * tame^{log_g(u mod q)}`` with ``g`` a fixed primitive root mod ``q``."""

    unram: Elt
    tame: Elt | None = None

    def __call__(self, x: Fraction, q: int) -> Elt:
        n = int(_v(x, q))
        val = self.unram ** n
        if self.tame is None:
            return val
        u = x / Fraction(q) ** n
        r = u.numerator * pow(u.denominator, -1, q) % q
        return val * self.tame ** _dlog(r, q)


@lru_cache(maxsize=None)
def _dlog_table(q: int) -> dict[int, int]:
    g = primitive_root(q)
    return {pow(g, k, q): k for k in range(q - 1)}


def _dlog(r: int, q: int) -> int:
    return _dlog_table(q)[r % q]


def _abs_half(x: Fraction, q: int, s: Elt) -> Elt:
    """``|x|^{1/2} = s^{-v(x)}``."""
    return s ** (-int(_v(x, q)))


def principal_value(g: PAdicMatrix, chi1: LocalCharacter, chi2: LocalCharacter, s: Elt) -> Elt:
    """``phi_0(g)`` for the spherical vector: ``chi_1(a) chi_2(d) |a/d|^{1/2}`` on the Borel part of ``g``."""
    b, _ = iwasawa_decompose(g)
    q = g.q
    return chi1(b.a, q) * chi2(b.d, q) * _abs_half(b.a / b.d, q, s)


def spherical_eigenvalue(op: str, rep: tuple, q: int, cert: CosetCertificate | None = None, K=None) -> Elt:
    """Eigenvalue of ``op`` on the spherical line, as a sum over certified coset representatives.

    ``rep`` is ``("principal", alpha, beta)`` or ``("one_dim", chi)`` with
    values in ``K``; the one-dimensional representation is
    ``(chi |.|^{1/2}) o det``.
    """
    if op not in ("T", "S"):
        raise HeckeError("op must be T or S")
    if cert is None or cert.kind != op or cert.q != q:
        raise HeckeError("a matching coset certificate is required")
    if not cert.valid:
        raise HeckeError("certificate failed verification")
    K = K or symbolic_field(q)
    s = K.gen
    total = K.zero
    if rep[0] == "principal":
        c1, c2 = LocalCharacter(rep[1]), LocalCharacter(rep[2])
        for h in cert.reps:
            total = total + principal_value(h, c1, c2, s)
    elif rep[0] == "one_dim":
        chi = LocalCharacter(rep[1])
        for h in cert.reps:
            total = total + chi(h.det, q) * _abs_half(h.det, q, s)
    else:
        raise HeckeError(f"unknown representation {rep[0]!r}")
    return total


def closed_form(op: str, rep: tuple, K) -> Elt:
    """The expected eigenvalue: ``s(a+b)``, ``ab``, ``(s + 1/s) chi`` or ``chi^2 / q``."""
    s = K.gen
    if rep[0] == "principal":
        a, b = rep[1], rep[2]
        return s * (a + b) if op == "T" else a * b
    chi = rep[1]
    return (s + s.inverse()) * chi if op == "T" else chi * chi / (s * s)


# ---------------------------------------------------------------------------
# Iwahori level
# ---------------------------------------------------------------------------

W = ((0, 1), (1, 0))


@dataclass
class IwahoriModel:
    """``(chi_1 x chi_2)`` restricted to Iwahori-level invariants, basis ``(phi_1, phi_w)``.

    ``phi_1`` is supported on ``B I`` with ``phi_1(1) = 1`` and ``phi_w`` on
    ``B w I`` with ``phi_w(w) = 1``; both are evaluated by decomposing the
    argument, never tabulated.
    """

    q: int
    chi1: LocalCharacter
    chi2: LocalCharacter
    K: object
    support: tuple = ("B.I", "B.w.I")

    def evaluate(self, which: int, g: PAdicMatrix) -> Elt:
        q, s = self.q, self.K.gen
        b, k = iwasawa_decompose(g)
        borel = self.chi1(b.a, q) * self.chi2(b.d, q) * _abs_half(b.a / b.d, q, s)
        if _v(k.c, q) >= 1:  # k in I: k = diag(x, 1) u with x = k11 / k22
            if which != 0:
                return self.K.zero
            return borel * self.chi1(k.a / k.d, q)
        # k = b'' w u with b'' = [[y, x], [0, k21]], y = -det k / k21
        if which != 1:
            return self.K.zero
        y = -k.det / k.c
        return borel * self.chi1(y, q) * self.chi2(k.c, q)

    def coordinates(self, f) -> tuple[Elt, Elt]:
        """Coordinates of an invariant function from its values at ``1`` and ``w``."""
        one = PAdicMatrix.of([[1, 0], [0, 1]], self.q)
        w = PAdicMatrix.of(W, self.q)
        return f(one), f(w)


def _check_tame(model: IwahoriModel) -> None:
    for c in (model.chi1, model.chi2):
        if c.tame is not None and not (c.tame ** (model.q - 1) - 1).is_zero():
            raise HeckeError("tame character value is not a (q-1)-th root of unity")


def iwahori_action(op: str, model: IwahoriModel, delta: int | None = None,
                   cert: CosetCertificate | None = None) -> Matrix:
    """Matrix of ``op`` on ``(phi_1, phi_w)``; column ``j`` holds the image of basis vector ``j``.

    ``op`` is ``"U"`` (the operator for ``I diag(q,1) I``) or ``"torus"``
    (right translation by ``diag(delta, 1)``, ``delta`` a unit).
    """
    _check_tame(model)
    q, K = model.q, model.K
    if op == "U":
        cert = cert or verify_double_coset("U_Iwahori", q)
        if not cert.valid:
            raise HeckeError("U certificate failed")
        gs = cert.reps
    elif op == "torus":
        if delta is None or delta % q == 0:
            raise HeckeError("torus element needs a unit delta")
        gs = [PAdicMatrix.of([[delta, 0], [0, 1]], q)]
    else:
        raise HeckeError(f"unknown operator {op!r}")
    cols = []
    for j in range(2):
        def f(x, j=j):
            total = K.zero
            for h in gs:
                total = total + model.evaluate(j, x @ h)
            return total
        cols.append(model.coordinates(f))
    return Matrix(K, [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]])


def unramified_model(q: int, K=None) -> IwahoriModel:
    K = K or symbolic_field(q)
    a, b, _, _ = symbols(K)
    return IwahoriModel(q, LocalCharacter(a), LocalCharacter(b), K)


def spherical_to_iwahori(model: IwahoriModel, points: int = 20, seed: int = 0) -> tuple[Elt, Elt]:
    """Coordinates of ``phi_0`` in ``(phi_1, phi_w)``, checked at random points of ``GL_2(Q_q)``."""
    q = model.q
    s = model.K.gen

    def phi0(g):
        return principal_value(g, model.chi1, model.chi2, s) if model.chi1.tame is None else None

    if model.chi1.tame is not None or model.chi2.tame is not None:
        raise HeckeError("spherical vector needs unramified characters")
    c = model.coordinates(phi0)
    rng = random.Random(seed)
    for _ in range(points):
        while True:
            e = [Fraction(rng.randrange(-q * q, q * q), q ** rng.randrange(0, 3)) for _ in range(4)]
            if e[0] * e[3] - e[1] * e[2] != 0:
                break
        g = PAdicMatrix(*e, q)
        lhs = phi0(g)
        rhs = c[0] * model.evaluate(0, g) + c[1] * model.evaluate(1, g)
        if not (lhs - rhs).is_zero():
            raise HeckeError("phi_0 is not phi_1 + phi_w at a sample point")
    return c


def u_minus_b_check(model: IwahoriModel) -> dict:
    """``(U - s beta)`` applied to the image of ``phi_0`` lies on the ``s alpha``-eigenline."""
    K = model.K
    s = K.gen
    U = iwahori_action("U", model)
    a0, b0 = spherical_to_iwahori(model)
    sb = s * model.chi2.unram
    sa = s * model.chi1.unram
    v0 = Matrix(K, [[a0], [b0]])
    img = (U - Matrix.identity(K, 2).scale(sb)) * v0
    lands = ((U - Matrix.identity(K, 2).scale(sa)) * img).is_zero()
    return {
        "U": U,
        "triangular": U[0, 1].is_zero(),
        "diagonal": (U[0, 0], U[1, 1]),
        "phi0": (a0, b0),
        "image": (img[0, 0], img[1, 0]),
        "nonzero": not img.is_zero(),
        "in_eigenline": lands,
    }
