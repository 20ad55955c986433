"""Matrix algorithms over exact rings: Smith form, Jordan-Chevalley,
nilpotent exponentials and symmetric powers."""

from __future__ import annotations

import math
from math import comb

from .matrix import Matrix
from .rings import (CoeffRing, Elt, RingError, poly_deriv, poly_divmod, poly_eval,
                    poly_gcd)


class AlgebraError(ValueError):
    """Precondition failure in a matrix algorithm."""


# ---------------------------------------------------------------------------
# Smith normal form over a discrete valuation ring
# ---------------------------------------------------------------------------

def _is_integral(x: Elt) -> bool:
    return x.is_zero() or x.ring.valuation(x) >= 0


def smith_normal_form(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """``U m V = D`` over the valuation ring of ``m.ring``.

    Works for the rationals with an ``l``-adic valuation (integral subring
    ``Z_(l)``) and for Galois rings.  Nonzero diagonal entries are normalised
    to powers of the uniformizer, so ``d_1 | d_2 | ...``.

    >>> from twkbench.rings import rationals
    >>> Q2 = rationals(2)
    >>> U, D, V = smith_normal_form(Matrix.from_rows(Q2, [[2, 3], [4, 7]]))
    >>> [D[0, 0], D[1, 1]]
    [1, 2]
    """
    R = m.ring
    try:
        pi = R.uniformizer()
    except RingError as exc:
        raise AlgebraError(f"{R} has no valuation; Smith form needs a local PID") from exc
    for x in m.entries():
        if not _is_integral(x):
            raise AlgebraError("matrix is not integral for the chosen valuation")
    n, k = m.shape
    a = [list(r) for r in m.rows]
    U = [list(r) for r in Matrix.identity(R, n).rows]
    V = [list(r) for r in Matrix.identity(R, k).rows]

    def val(x):
        return math.inf if x.is_zero() else R.valuation(x)

    t = 0
    while t < min(n, k):
        best = None
        for i in range(t, n):
            for j in range(t, k):
                v = val(a[i][j])
                if v != math.inf and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        a[t], a[i] = a[i], a[t]
        U[t], U[i] = U[i], U[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        for row in V:
            row[t], row[j] = row[j], row[t]
        pv = pi ** v
        unit = R.exact_div(a[t][t], pv)
        uinv = unit.inverse()
        a[t] = [x * uinv for x in a[t]]
        U[t] = [x * uinv for x in U[t]]
        for i in range(t + 1, n):
            if not a[i][t].is_zero():
                f = R.exact_div(a[i][t], pv)
                a[i] = [x - f * y for x, y in zip(a[i], a[t])]
                U[i] = [x - f * y for x, y in zip(U[i], U[t])]
        for j in range(t + 1, k):
            if not a[t][j].is_zero():
                f = R.exact_div(a[t][j], pv)
                for row in a:
                    row[j] = row[j] - f * row[t]
                for row in V:
                    row[j] = row[j] - f * row[t]
        t += 1
    return Matrix(R, U, n), Matrix(R, a, k), Matrix(R, V, k)


def smith_divisors(m: Matrix) -> list[Elt]:
    _, D, _ = smith_normal_form(m)
    return [D[i, i] for i in range(min(D.shape))]


# ---------------------------------------------------------------------------
# Jordan-Chevalley decomposition
# ---------------------------------------------------------------------------

def squarefree_part(f: list[Elt]) -> list[Elt]:
    g = poly_gcd(f, poly_deriv(f))
    return poly_divmod(f, g)[0]


def jordan_chevalley(a: Matrix) -> tuple[Matrix, Matrix]:
    """Multiplicative Jordan decomposition ``a = s u = u s``.

    The semisimple part is produced by Newton's iteration on the squarefree
    part of the characteristic polynomial.
    """
    R = a.ring
    if not R.is_field:
        raise AlgebraError("Jordan-Chevalley needs a field")
    n = a.nrows
    if not a.is_square():
        raise AlgebraError("matrix must be square")
    if R.characteristic and R.characteristic <= n:
        raise AlgebraError(
            f"characteristic {R.characteristic} <= size {n}: separability of the "
            "minimal polynomial is not guaranteed")
    if a.det().is_zero():
        raise AlgebraError("matrix must be invertible")
    g = squarefree_part(a.charpoly())
    dg = poly_deriv(g)
    s = a
    for _ in range(n.bit_length() + 2):
        gs = poly_eval(g, s)
        if gs.is_zero():
            break
        s = s - gs * poly_eval(dg, s).inverse()
    if not poly_eval(g, s).is_zero():
        raise AlgebraError("Newton iteration did not converge")
    u = s.inverse() * a
    return s, u


# ---------------------------------------------------------------------------
# exp / log of nilpotents and unipotents
# ---------------------------------------------------------------------------

def _require_factorials(R: CoeffRing, n: int) -> None:
    for j in range(2, n):
        if not R(j).is_unit():
            raise AlgebraError(f"{j} is not invertible in {R}; need every integer below {n} to be a unit")


def is_nilpotent(x: Matrix) -> bool:
    return (x ** x.nrows).is_zero() if x.nrows else True


def nilpotent_exp_log(x: Matrix, direction: str) -> Matrix:
    """Finite-sum ``exp`` of a nilpotent or ``log`` of a unipotent matrix.

    >>> from twkbench.rings import rationals
    >>> Q = rationals()
    >>> nilpotent_exp_log(Matrix.from_rows(Q, [[0, 1], [0, 0]]), "exp")
    Matrix[Q]([1, 1; 0, 1])
    """
    R = x.ring
    n = x.nrows
    one = x.identity_like()
    _require_factorials(R, n)
    if direction == "exp":
        if not is_nilpotent(x):
            raise AlgebraError("exp needs a nilpotent matrix")
        out = one
        term = one
        for j in range(1, n):
            term = (term * x).scale(R(j).inverse())
            out = out + term
        return out
    if direction == "log":
        y = x - one
        if not is_nilpotent(y):
            raise AlgebraError("log needs a unipotent matrix")
        out = Matrix.zeros(R, n)
        power = one
        for j in range(1, n):
            power = power * y
            c = R(1 if j % 2 else -1) * R(j).inverse()
            out = out + power.scale(c)
        return out
    raise AlgebraError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# Symmetric powers
# ---------------------------------------------------------------------------

def sym_power(m: int, g: Matrix) -> Matrix:
    """Action of ``g`` on degree ``m`` forms in ``e1, e2``.

    The basis is ``e1^(m-i) e2^i`` for ``i = 0..m`` and ``g e1 = a e1 + c e2``,
    ``g e2 = b e1 + d e2``; column ``i`` holds the image of the ``i``-th
    basis vector, so ``sym_power(1, g) == g``.
    """
    if m < 0:
        raise AlgebraError("degree must be non-negative")
    if g.shape != (2, 2):
        raise AlgebraError("sym_power needs a 2x2 matrix")
    R = g.ring
    a, b = g[0, 0], g[0, 1]
    c, d = g[1, 0], g[1, 1]
    # (a e1 + c e2)^(m-i) (b e1 + d e2)^i expanded in e1^(m-j) e2^j
    pa = [R.one]
    for _ in range(m):
        pa.append(pa[-1] * a)
    pb, pc, pd = [R.one], [R.one], [R.one]
    for _ in range(m):
        pb.append(pb[-1] * b)
        pc.append(pc[-1] * c)
        pd.append(pd[-1] * d)
    cols = []
    for i in range(m + 1):
        col = [R.zero] * (m + 1)
        for r in range(m - i + 1):  # r copies of c e2 from the first factor
            for t in range(i + 1):  # t copies of d e2 from the second factor
                coeff = R(comb(m - i, r) * comb(i, t))
                col[r + t] = col[r + t] + coeff * pa[m - i - r] * pc[r] * pb[i - t] * pd[t]
        cols.append(col)
    return Matrix(R, [[cols[j][i] for j in range(m + 1)] for i in range(m + 1)], m + 1)
