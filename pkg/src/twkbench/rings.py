"""Exact coefficient rings.

Every ring hands out immutable :class:`Elt` values that support the usual
operators, so matrix code can stay generic.  The supported kinds are

* ``Z/n`` (prime fields and Galois rings ``GR(p^k, 1)``),
* the rationals, optionally carrying an ``l``-adic valuation,
* polynomial quotients ``B[x]/(f)`` over one of the above (finite fields,
  Galois rings ``GR(p^k, f)``, ``Q(s)`` with ``s^2 = q`` and cyclotomic
  fields),
* rational functions in ``alpha, beta`` over a characteristic zero base.

>>> F7 = prime_field(7)
>>> F7(3) * F7(5)
1
>>> K = quadratic_field(3)
>>> s = K.gen
>>> s * s == 3
True
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterator, Sequence


class RingError(ValueError):
    """Raised for non-invertible elements and incompatible operands."""


def p_adic_valuation(n: int, p: int) -> int | float:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _prime_power(n: int) -> tuple[int, int] | None:
    if n < 2:
        return None
    for p in range(2, int(math.isqrt(n)) + 1):
        if n % p == 0:
            k = 0
            m = n
            while m % p == 0:
                m //= p
                k += 1
            return (p, k) if m == 1 else None
    return (n, 1)


def is_prime(n: int) -> bool:
    pk = _prime_power(n)
    return pk is not None and pk[1] == 1


class Elt:
    """An element of a :class:`CoeffRing`."""

    __slots__ = ("ring", "v")

    def __init__(self, ring: "CoeffRing", v: Any):
        self.ring = ring
        self.v = v

    def _coerce(self, other):
        if isinstance(other, Elt):
            if other.ring is self.ring or other.ring == self.ring:
                return other
            return self.ring(other)
        return self.ring(other)

    def __add__(self, other):
        o = self._coerce(other)
        return Elt(self.ring, self.ring._add(self.v, o.v))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Elt(self.ring, self.ring._sub(self.v, o.v))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (Elt, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        return Elt(self.ring, self.ring._mul(self.v, o.v))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return Elt(self.ring, self.ring._neg(self.v))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ring.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Elt):
            if other.ring != self.ring:
                try:
                    other = self.ring(other)
                except RingError:
                    return False
            return self.ring._eq(self.v, other.v)
        if isinstance(other, (int, Fraction)):
            return self.ring._eq(self.v, self.ring(other).v)
        return NotImplemented

    def __hash__(self):
        return hash((id(type(self.ring)), self.ring._key(self.v)))

    def __repr__(self):
        return self.ring._repr(self.v)

    def is_zero(self) -> bool:
        return self.ring._eq(self.v, self.ring.zero.v)

    def is_unit(self) -> bool:
        return self.ring._is_unit(self.v)

    def inverse(self) -> "Elt":
        return Elt(self.ring, self.ring._inv(self.v))

    def valuation(self):
        return self.ring.valuation(self)


class CoeffRing:
    """Base class; subclasses implement the raw-value hooks."""

    kind = "abstract"
    is_field = False
    characteristic = 0

    def __call__(self, x) -> Elt:
        if isinstance(x, Elt):
            if x.ring == self:
                return Elt(self, x.v)
            return self._from_elt(x)
        return Elt(self, self._from_raw(x))

    def _from_elt(self, x: Elt):
        raise RingError(f"cannot coerce {x!r} from {x.ring} into {self}")

    @property
    def zero(self) -> Elt:
        return self(0)

    @property
    def one(self) -> Elt:
        return self(1)

    def _sub(self, a, b):
        return self._add(a, self._neg(b))

    def _eq(self, a, b):
        return a == b

    def _key(self, a):
        return a

    def _repr(self, a):
        return repr(a)

    def __eq__(self, other):
        return type(self) is type(other) and self._ident() == other._ident()

    def __hash__(self):
        return hash((type(self).__name__, self._ident()))

    def _ident(self):
        return ()

    # Finite rings only.
    def order(self) -> int:
        raise RingError(f"{self} is not finite")

    def elements(self) -> Iterator[Elt]:
        raise RingError(f"{self} is not finite")

    def random_element(self, rng: random.Random) -> Elt:
        raise RingError(f"{self} has no sampler")

    @property
    def is_finite(self) -> bool:
        try:
            self.order()
            return True
        except RingError:
            return False

    # Local structure, where available.
    def valuation(self, a: Elt):
        raise RingError(f"{self} carries no valuation")

    def uniformizer(self) -> Elt:
        raise RingError(f"{self} carries no valuation")

    def exact_div(self, a: Elt, b: Elt) -> Elt:
        """Return ``c`` with ``c*b == a`` assuming ``v(a) >= v(b)``."""
        return a * b.inverse()


class IntegerMod(CoeffRing):
    """``Z/n``; for ``n = p^k`` this is the Galois ring ``GR(p^k, 1)``."""

    kind = "integers_mod"

    def __init__(self, n: int):
        if n < 2:
            raise RingError("modulus must be at least 2")
        self.n = n
        pk = _prime_power(n)
        self.p, self.k = pk if pk else (None, None)
        self.is_field = pk is not None and pk[1] == 1
        self.characteristic = n

    def _ident(self):
        return (self.n,)

    def __repr__(self):
        if self.is_field:
            return f"F_{self.n}"
        if self.p:
            return f"GR({self.p}^{self.k},1)"
        return f"Z/{self.n}"

    def _from_raw(self, x):
        if isinstance(x, Fraction):
            num, den = x.numerator % self.n, x.denominator % self.n
            if math.gcd(den, self.n) != 1:
                raise RingError(f"{x} has no image in {self}")
            return num * pow(den, -1, self.n) % self.n
        return int(x) % self.n

    def _from_elt(self, x: Elt):
        if isinstance(x.ring, IntegerMod) and x.ring.n % self.n == 0:
            return Elt(self, x.v % self.n)
        if isinstance(x.ring, Rationals):
            return Elt(self, self._from_raw(x.v))
        return super()._from_elt(x)

    def _add(self, a, b):
        return (a + b) % self.n

    def _sub(self, a, b):
        return (a - b) % self.n

    def _neg(self, a):
        return (-a) % self.n

    def _mul(self, a, b):
        return (a * b) % self.n

    def _is_unit(self, a):
        return math.gcd(a, self.n) == 1

    def _inv(self, a):
        if math.gcd(a, self.n) != 1:
            raise RingError(f"{a} is not a unit in {self}")
        return pow(a, -1, self.n)

    def order(self):
        return self.n

    def elements(self):
        return (Elt(self, a) for a in range(self.n))

    def random_element(self, rng):
        return Elt(self, rng.randrange(self.n))

    def valuation(self, a):
        if self.p is None:
            raise RingError(f"{self} is not local")
        v = p_adic_valuation(a.v, self.p)
        return math.inf if v == math.inf or v >= self.k else v

    def uniformizer(self):
        if self.p is None:
            raise RingError(f"{self} is not local")
        return self(self.p)

    def exact_div(self, a, b):
        va, vb = self.valuation(a), self.valuation(b)
        if vb == math.inf:
            if va == math.inf:
                return self.zero
            raise RingError("division by zero")
        if va < vb:
            raise RingError("valuation too small for exact division")
        pv = self.p ** vb
        unit = (b.v // pv) % self.n
        return Elt(self, (a.v // pv) * pow(unit, -1, self.n) % self.n)

    def residue_field(self) -> "IntegerMod":
        return prime_field(self.p)

    def reduce(self, a: Elt, target: "IntegerMod") -> Elt:
        return target(a.v)


class Rationals(CoeffRing):
    """The rational numbers, with an optional ``l``-adic valuation."""

    kind = "rationals"
    is_field = True

    def __init__(self, l: int | None = None):
        self.l = l

    def _ident(self):
        return (self.l,)

    def __repr__(self):
        return "Q" if self.l is None else f"Q(v_{self.l})"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def _from_raw(self, x):
        return Fraction(x)

    def _from_elt(self, x):
        if isinstance(x.ring, Rationals):
            return Elt(self, x.v)
        return super()._from_elt(x)

    def _add(self, a, b):
        return a + b

    def _sub(self, a, b):
        return a - b

    def _neg(self, a):
        return -a

    def _mul(self, a, b):
        return a * b

    def _is_unit(self, a):
        return a != 0

    def _inv(self, a):
        if a == 0:
            raise RingError("division by zero in Q")
        return 1 / a

    def _repr(self, a):
        return str(a)

    def random_element(self, rng):
        return Elt(self, Fraction(rng.randint(-9, 9), rng.randint(1, 5)))

    def valuation(self, a):
        if self.l is None:
            raise RingError("no prime chosen for the valuation")
        if a.v == 0:
            return math.inf
        return p_adic_valuation(a.v.numerator, self.l) - p_adic_valuation(a.v.denominator, self.l)

    def uniformizer(self):
        if self.l is None:
            raise RingError("no prime chosen for the valuation")
        return self(self.l)

    def exact_div(self, a, b):
        return a / b


# ---------------------------------------------------------------------------
# Univariate polynomials over a ring, as lists of Elt (low degree first)
# ---------------------------------------------------------------------------

def _paren(text: str) -> str:
    """Bracket a coefficient that is itself a sum."""
    return f"({text})" if " + " in text or " - " in text.lstrip("-") else text


def poly_trim(f: list) -> list:
    f = list(f)
    while f and f[-1].is_zero():
        f.pop()
    return f


def poly_add(f, g):
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        if i < len(f) and i < len(g):
            out.append(f[i] + g[i])
        else:
            out.append(f[i] if i < len(f) else g[i])
    return poly_trim(out)


def poly_sub(f, g):
    return poly_add(f, [-c for c in g])


def poly_mul(f, g):
    if not f or not g:
        return []
    out = [f[0].ring.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a.is_zero():
            continue
        for j, b in enumerate(g):
            out[i + j] = out[i + j] + a * b
    return poly_trim(out)


def poly_divmod(f, g):
    g = poly_trim(g)
    if not g:
        raise RingError("polynomial division by zero")
    lead_inv = g[-1].inverse()
    r = poly_trim(f)
    if len(r) < len(g):
        return [], r
    q = [g[0].ring.zero] * (len(r) - len(g) + 1)
    while len(r) >= len(g):
        c = r[-1] * lead_inv
        d = len(r) - len(g)
        q[d] = c
        r = poly_trim([r[i] - (c * g[i - d] if i >= d else 0) for i in range(len(r))])
    return poly_trim(q), r


def poly_gcd(f, g):
    """Monic gcd over a field."""
    f, g = poly_trim(f), poly_trim(g)
    while g:
        f, g = g, poly_divmod(f, g)[1]
    if not f:
        return f
    inv = f[-1].inverse()
    return [c * inv for c in f]


def poly_deriv(f):
    return poly_trim([f[i] * i for i in range(1, len(f))])


def poly_eval(f, x, one=None):
    """Horner evaluation; ``x`` may be a ring element or a square matrix."""
    if one is None:
        one = x.ring.one if isinstance(x, Elt) else x.identity_like()
    acc = one * 0 if isinstance(x, Elt) else one.scale(one.ring.zero)
    for c in reversed(f):
        acc = acc * x + (one * c if isinstance(x, Elt) else one.scale(c))
    return acc


# ---------------------------------------------------------------------------
# Polynomial quotients B[x]/(f)
# ---------------------------------------------------------------------------

class PolyQuotient(CoeffRing):
    """``base[x]/(modulus)`` with ``modulus`` monic; values are coefficient tuples."""

    kind = "poly_quotient"

    def __init__(self, base: CoeffRing, modulus: Sequence, name: str = "x", label: str | None = None,
                 is_field: bool = False):
        mod = [base(c) for c in modulus]
        if not mod[-1] == base.one:
            raise RingError("modulus must be monic")
        self.base = base
        self.modulus = tuple(c.v for c in mod)
        self.deg = len(mod) - 1
        self.name = name
        self.label = label
        self.is_field = is_field
        self.characteristic = base.characteristic

    def _ident(self):
        return (self.base._ident(), type(self.base).__name__, self.modulus)

    def __repr__(self):
        if self.label:
            return self.label
        return f"{self.base}[{self.name}]/({self._fmt(self.modulus)})"

    def _fmt(self, coeffs):
        terms = []
        for i, c in enumerate(coeffs):
            e = Elt(self.base, c)
            if e.is_zero():
                continue
            mon = "" if i == 0 else (self.name if i == 1 else f"{self.name}^{i}")
            if not mon:
                terms.append(repr(e))
            elif e == 1:
                terms.append(mon)
            else:
                terms.append(f"{_paren(repr(e))}*{mon}")
        return " + ".join(terms) if terms else "0"

    def _repr(self, a):
        return self._fmt(a)

    @property
    def gen(self) -> Elt:
        z = [self.base.zero.v] * self.deg
        if self.deg == 1:
            return Elt(self, tuple([self.base._neg(self.modulus[0])]))
        z[1] = self.base.one.v
        return Elt(self, tuple(z))

    def _from_raw(self, x):
        if isinstance(x, (tuple, list)):
            coeffs = [self.base(c).v for c in x] + [self.base.zero.v] * (self.deg - len(x))
            return self._reduce(coeffs)
        z = [self.base.zero.v] * self.deg
        z[0] = self.base(x).v
        return tuple(z)

    def _from_elt(self, x):
        if x.ring == self.base or self._base_accepts(x):
            return Elt(self, self._from_raw(x))
        if isinstance(x.ring, PolyQuotient) and x.ring.modulus == self.modulus and x.ring.deg == self.deg:
            return Elt(self, tuple(self.base(Elt(x.ring.base, c)).v for c in x.v))
        return super()._from_elt(x)

    def _base_accepts(self, x):
        try:
            self.base(x)
            return True
        except RingError:
            return False

    def _reduce(self, coeffs):
        b = self.base
        c = list(coeffs)
        for i in range(len(c) - 1, self.deg - 1, -1):
            lead = c[i]
            if lead != b.zero.v:
                for j in range(self.deg):
                    c[i - self.deg + j] = b._sub(c[i - self.deg + j], b._mul(lead, self.modulus[j]))
            c[i] = b.zero.v
        c = c[: self.deg] + [b.zero.v] * (self.deg - len(c))
        return tuple(c)

    def _add(self, a, b):
        return tuple(self.base._add(x, y) for x, y in zip(a, b))

    def _sub(self, a, b):
        return tuple(self.base._sub(x, y) for x, y in zip(a, b))

    def _neg(self, a):
        return tuple(self.base._neg(x) for x in a)

    def _mul(self, a, b):
        bb = self.base
        z = bb.zero.v
        out = [z] * (2 * self.deg - 1)
        for i, x in enumerate(a):
            if x == z:
                continue
            for j, y in enumerate(b):
                if y == z:
                    continue
                out[i + j] = bb._add(out[i + j], bb._mul(x, y))
        return self._reduce(out)

    def _eq(self, a, b):
        return all(self.base._eq(x, y) for x, y in zip(a, b))

    def _key(self, a):
        return tuple(self.base._key(x) for x in a)

    def mult_matrix(self, a) -> list[list[Elt]]:
        """Matrix of multiplication by ``a`` on the power basis (columns = images)."""
        cols = []
        basis = [tuple(self.base.one.v if i == j else self.base.zero.v for i in range(self.deg))
                 for j in range(self.deg)]
        for e in basis:
            cols.append(self._mul(a, e))
        return [[Elt(self.base, cols[j][i]) for j in range(self.deg)] for i in range(self.deg)]

    def _is_unit(self, a):
        if isinstance(self.base, IntegerMod) and not self.base.is_field and self.base.p:
            return any(x % self.base.p for x in a)
        try:
            self._inv(a)
            return True
        except RingError:
            return False

    def _inv(self, a):
        m = self.mult_matrix(a)
        rhs = [self.base.one] + [self.base.zero] * (self.deg - 1)
        sol = _solve_unit_pivot(m, rhs)
        if sol is None:
            raise RingError(f"{self._fmt(a)} is not a unit in {self}")
        return tuple(c.v for c in sol)

    def order(self):
        return self.base.order() ** self.deg

    def elements(self):
        base_vals = [e.v for e in self.base.elements()]
        for combo in itertools.product(base_vals, repeat=self.deg):
            yield Elt(self, tuple(combo))

    def random_element(self, rng):
        return Elt(self, tuple(self.base.random_element(rng).v for _ in range(self.deg)))

    # Galois-ring local structure: p is the uniformizer.
    def _gr_p(self):
        if isinstance(self.base, IntegerMod) and self.base.p:
            return self.base.p, self.base.k
        raise RingError(f"{self} is not a Galois ring")

    def valuation(self, a):
        p, k = self._gr_p()
        v = min(p_adic_valuation(x, p) for x in a.v)
        return math.inf if v == math.inf or v >= k else v

    def uniformizer(self):
        p, _ = self._gr_p()
        return self(p)

    def exact_div(self, a, b):
        p, _ = self._gr_p()
        va, vb = self.valuation(a), self.valuation(b)
        if vb == math.inf:
            if va == math.inf:
                return self.zero
            raise RingError("division by zero")
        if va < vb:
            raise RingError("valuation too small for exact division")
        pv = p ** vb
        unit = Elt(self, tuple((x // pv) % self.base.n for x in b.v))
        top = Elt(self, tuple((x // pv) % self.base.n for x in a.v))
        return top * unit.inverse()

    def residue_field(self) -> "PolyQuotient":
        p, _ = self._gr_p()
        return finite_field(p, self.deg) if self.deg > 1 else prime_field(p)

    def reduce(self, a: Elt, target: CoeffRing) -> Elt:
        if isinstance(target, PolyQuotient):
            return Elt(target, tuple(x % target.base.n for x in a.v))
        return target(a.v[0])


def _solve_unit_pivot(m: list[list[Elt]], rhs: list[Elt]) -> list[Elt] | None:
    """Solve ``m x = rhs`` by Gaussian elimination with unit pivots; None if stuck."""
    n = len(m)
    a = [list(row) + [rhs[i]] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col].is_unit()), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inverse()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# Rational functions in alpha, beta
# ---------------------------------------------------------------------------

class RationalFunctionField(CoeffRing):
    """``K(alpha, beta)`` for ``K`` the rationals or a number field quotient.

    Built on sympy's sparse fraction fields, which keep elements reduced so
    that equality and hashing are canonical.
    """

    kind = "rational_functions"
    is_field = True

    def __init__(self, base: CoeffRing, names: Sequence[str] = ("alpha", "beta")):
        import sympy
        from sympy import QQ, field

        self.base = base
        self.names = tuple(names)
        gens = _number_field_generators(base)
        if gens:
            self._domain = QQ.algebraic_field(*[g for _, g in gens])
        else:
            self._domain = QQ
        self._gens = gens
        self._field, *syms = field(",".join(self.names), self._domain)
        self.symbols = tuple(Elt(self, s) for s in syms)
        self._sympy = sympy

    def _ident(self):
        return (repr(self.base), self.names)

    def __repr__(self):
        return f"{self.base}({', '.join(self.names)})"

    @property
    def alpha(self) -> Elt:
        return self.symbols[0]

    @property
    def beta(self) -> Elt:
        return self.symbols[1]

    def _canon(self, f):
        # sympy does not cancel constants over algebraic domains; reduce and make the denominator monic
        num, den = f.numer, f.denom
        g = num.gcd(den)
        num, den = num.exquo(g), den.exquo(g)
        lc = den.LC
        return self._field.new(num.quo_ground(lc), den.quo_ground(lc))

    def _embed_base(self, x: Elt):
        # Map an element of the base number field into the sympy domain.
        expr = _number_field_to_sympy(x, self._gens)
        return self._canon(self._field(self._domain.from_sympy(expr)))

    def _from_raw(self, x):
        if isinstance(x, Fraction):
            return self._canon(self._field(self._domain.from_sympy(self._sympy.Rational(x.numerator, x.denominator))))
        return self._canon(self._field(x))

    def _from_elt(self, x):
        if x.ring == self.base or isinstance(x.ring, Rationals) or (
                isinstance(self.base, PolyQuotient) and x.ring == self.base.base):
            return Elt(self, self._embed_base(self.base(x)))
        return super()._from_elt(x)

    def _add(self, a, b):
        return self._canon(a + b)

    def _sub(self, a, b):
        return self._canon(a - b)

    def _neg(self, a):
        return -a

    def _mul(self, a, b):
        return self._canon(a * b)

    def _is_unit(self, a):
        return a != 0

    def _inv(self, a):
        if a == 0:
            raise RingError("division by zero in rational function field")
        return self._canon(self._field.one / a)

    def _key(self, a):
        return hash(a)

    def _repr(self, a):
        return str(a.as_expr())

    def random_element(self, rng):
        a, b = self.symbols
        return a * rng.randint(-3, 3) + b * rng.randint(-3, 3) + rng.randint(1, 4)

    def as_expr(self, x: Elt):
        return x.v.as_expr()


def _number_field_generators(ring: CoeffRing) -> list:
    """Sympy generators for a tower of number-field quotients over Q."""
    if isinstance(ring, Rationals):
        return []
    if isinstance(ring, PolyQuotient) and ring.characteristic == 0:
        below = _number_field_generators(ring.base)
        if getattr(ring, "sympy_root", None) is None:
            raise RingError(f"{ring} has no declared complex root")
        return below + [(ring, ring.sympy_root)]
    raise RingError(f"{ring} is not a characteristic zero number field")


def _number_field_to_sympy(x: Elt, gens):
    import sympy

    ring = x.ring
    if isinstance(ring, Rationals):
        return sympy.Rational(x.v.numerator, x.v.denominator)
    root = ring.sympy_root
    total = sympy.Integer(0)
    for i, c in enumerate(x.v):
        total += _number_field_to_sympy(Elt(ring.base, c), gens) * root ** i
    return total


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def prime_field(p: int) -> IntegerMod:
    if not is_prime(p):
        raise RingError(f"{p} is not prime")
    return IntegerMod(p)


@lru_cache(maxsize=None)
def integers_mod(n: int) -> IntegerMod:
    return IntegerMod(n)


def _poly_mulmod_int(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _poly_mod_int(out, f, p)


def _poly_mod_int(a, f, p):
    a = list(a)
    d = len(f) - 1
    inv = pow(f[-1], -1, p)
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i] * inv % p
        if c:
            for j in range(d + 1):
                a[i - d + j] = (a[i - d + j] - c * f[j]) % p
    a = a[:d] if len(a) >= d else a + [0] * (d - len(a))
    return a


def _poly_gcd_int(a, b, p):
    def trim(x):
        x = list(x)
        while x and x[-1] % p == 0:
            x.pop()
        return x

    a, b = trim(a), trim(b)
    while b:
        a, b = b, trim(_poly_mod_int(a, b, p)) if len(a) >= len(b) else trim(a)
        if len(a) < len(b):
            a, b = b, a
    return a


def is_irreducible_mod_p(f: Sequence[int], p: int) -> bool:
    """Rabin-style test: no common factor with ``x^(p^i) - x`` for ``i <= deg/2``."""
    d = len(f) - 1
    if d <= 0:
        return False
    if d == 1:
        return True
    x = [0, 1] + [0] * (d - 2)
    power = list(x)
    for _ in range(1, d // 2 + 1):
        acc = [1] + [0] * (d - 1)
        base = power
        e = p
        while e:
            if e & 1:
                acc = _poly_mulmod_int(acc, base, f, p)
            base = _poly_mulmod_int(base, base, f, p)
            e >>= 1
        power = acc
        diff = [(power[i] - x[i]) % p for i in range(d)]
        g = _poly_gcd_int(list(f), diff, p)
        if len(g) > 1:
            return False
    return True


@lru_cache(maxsize=None)
def conway_like_modulus(p: int, f: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree ``f`` over ``F_p`` (lexicographic)."""
    for tail in itertools.product(range(p), repeat=f):
        poly = list(reversed(tail)) + [1]
        if poly[0] == 0:
            continue
        if is_irreducible_mod_p(poly, p):
            return tuple(poly)
    raise RingError("no irreducible polynomial found")


@lru_cache(maxsize=None)
def finite_field(p: int, f: int = 1) -> CoeffRing:
    if f == 1:
        return prime_field(p)
    mod = conway_like_modulus(p, f)
    return PolyQuotient(prime_field(p), mod, name="t", label=f"F_{p}^{f}", is_field=True)


@lru_cache(maxsize=None)
def galois_ring(p: int, k: int, f: int = 1) -> CoeffRing:
    if k == 1:
        return finite_field(p, f)
    if f == 1:
        return integers_mod(p ** k)
    mod = conway_like_modulus(p, f)
    return PolyQuotient(integers_mod(p ** k), mod, name="t", label=f"GR({p}^{k},{f})")


_Q = Rationals()


def rationals(l: int | None = None) -> Rationals:
    return _Q if l is None else Rationals(l)


@lru_cache(maxsize=None)
def quadratic_field(q: int, base: CoeffRing | None = None) -> PolyQuotient:
    """``base(s)`` with ``s^2 = q``; ``q`` must not be a rational square."""
    import sympy

    base = base or _Q
    r = math.isqrt(q) if q >= 0 else None
    if r is not None and r * r == q:
        raise RingError(f"{q} is a square; s would not generate a field")
    ring = PolyQuotient(base, (-q, 0, 1), name="s", label=f"{base}(sqrt{q})" if base is not _Q else f"Q(sqrt{q})",
                        is_field=True)
    ring.sympy_root = sympy.sqrt(q)
    return ring


@lru_cache(maxsize=None)
def cyclotomic_field(m: int, base: CoeffRing | None = None) -> PolyQuotient:
    """``base(zeta_m)`` cut out by the m-th cyclotomic polynomial."""
    import sympy

    base = base or _Q
    x = sympy.Symbol("x")
    coeffs = [int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(m, x), x).all_coeffs())]
    if len(coeffs) == 2:
        ring = PolyQuotient(base, coeffs, name=f"zeta{m}", label=f"{base}(zeta{m})", is_field=True)
    else:
        ring = PolyQuotient(base, coeffs, name=f"zeta{m}",
                            label=f"Q(zeta{m})" if base is _Q else f"{base}(zeta{m})", is_field=True)
    ring.sympy_root = sympy.exp(2 * sympy.pi * sympy.I / m)
    ring.zeta_order = m
    return ring


def rational_functions(base: CoeffRing | None = None,
                       names: Sequence[str] = ("alpha", "beta")) -> RationalFunctionField:
    return RationalFunctionField(base or _Q, names)


def zeta(ring: PolyQuotient) -> Elt:
    """The adjoined root of unity of a cyclotomic quotient."""
    if ring.deg == 1:
        return Elt(ring, (ring.base._neg(ring.modulus[0]),))
    return ring.gen


def primitive_root(p: int) -> int:
    for g in range(2, p + 1):
        if all(pow(g, (p - 1) // r, p) != 1 for r in _prime_factors(p - 1)):
            return g
    return 1


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def ring_from_spec(spec: dict) -> CoeffRing:
    """Build a ring from a JSON-style description (used by scenario files)."""
    kind = spec.get("kind")
    if kind == "prime_field":
        return prime_field(int(spec["p"]))
    if kind == "finite_field":
        return finite_field(int(spec["p"]), int(spec.get("f", 1)))
    if kind == "galois_ring":
        return galois_ring(int(spec["p"]), int(spec["k"]), int(spec.get("f", 1)))
    if kind == "rationals":
        return rationals(spec.get("l"))
    if kind == "quadratic":
        return quadratic_field(int(spec["q"]))
    if kind == "cyclotomic":
        return cyclotomic_field(int(spec["m"]))
    if kind == "rational_functions":
        return rational_functions(ring_from_spec(spec["base"]) if "base" in spec else None)
    raise RingError(f"unknown ring kind {kind!r}")


class TruncatedPolynomialRing(CoeffRing):
    """``B[e_1..e_r]`` modulo all monomials of total degree ``>= top``.

    ``TruncatedPolynomialRing(F_p, 2, 2)`` is ``F_p[e1, e2]/(e1, e2)^2``.
    Values are coefficient tuples indexed by :attr:`monomials`.
    """

    kind = "truncated_polynomials"

    def __init__(self, base: CoeffRing, nvars: int, top: int, names: Sequence[str] | None = None):
        self.base = base
        self.nvars = nvars
        self.top = top
        self.names = tuple(names) if names else tuple(f"e{i + 1}" for i in range(nvars))
        self.monomials = [m for d in range(top) for m in _exponents(nvars, d)]
        self._pos = {m: i for i, m in enumerate(self.monomials)}
        self.characteristic = base.characteristic
        self.is_field = nvars == 0 and base.is_field

    def _ident(self):
        return (self.base._ident(), type(self.base).__name__, self.nvars, self.top)

    def __repr__(self):
        gens = ", ".join(self.names)
        return f"{self.base}[{gens}]/({gens})^{self.top}"

    def _zero(self):
        return tuple(self.base.zero.v for _ in self.monomials)

    def _from_raw(self, x):
        if isinstance(x, (tuple, list)):
            return tuple(self.base(c).v for c in x)
        z = list(self._zero())
        z[0] = self.base(x).v
        return tuple(z)

    def _from_elt(self, x):
        if x.ring == self.base:
            return Elt(self, self._from_raw(x))
        return super()._from_elt(x)

    def var(self, i: int) -> Elt:
        z = list(self._zero())
        e = tuple(1 if j == i else 0 for j in range(self.nvars))
        if e not in self._pos:
            return Elt(self, tuple(z))
        z[self._pos[e]] = self.base.one.v
        return Elt(self, tuple(z))

    def _add(self, a, b):
        return tuple(self.base._add(x, y) for x, y in zip(a, b))

    def _sub(self, a, b):
        return tuple(self.base._sub(x, y) for x, y in zip(a, b))

    def _neg(self, a):
        return tuple(self.base._neg(x) for x in a)

    def _mul(self, a, b):
        bb = self.base
        out = list(self._zero())
        z = bb.zero.v
        for i, x in enumerate(a):
            if x == z:
                continue
            mi = self.monomials[i]
            for j, y in enumerate(b):
                if y == z:
                    continue
                m = tuple(u + v for u, v in zip(mi, self.monomials[j]))
                pos = self._pos.get(m)
                if pos is not None:
                    out[pos] = bb._add(out[pos], bb._mul(x, y))
        return tuple(out)

    def _eq(self, a, b):
        return all(self.base._eq(x, y) for x, y in zip(a, b))

    def _key(self, a):
        return tuple(self.base._key(x) for x in a)

    def _is_unit(self, a):
        return self.base._is_unit(a[0])

    def _inv(self, a):
        if not self.base._is_unit(a[0]):
            raise RingError("not a unit")
        c = Elt(self.base, a[0]).inverse()
        x = Elt(self, a) * c  # 1 + nilpotent
        nil = x - self.one
        out = self.one
        term = self.one
        for _ in range(self.top * max(1, self.base.characteristic.bit_length() if self.base.characteristic else 1) + self.top):
            term = term * (-nil)
            if term.is_zero():
                break
            out = out + term
        return (out * c).v

    def _repr(self, a):
        terms = []
        for c, m in zip(a, self.monomials):
            e = Elt(self.base, c)
            if e.is_zero():
                continue
            mon = "*".join(f"{n}^{k}" if k > 1 else n for n, k in zip(self.names, m) if k)
            terms.append(repr(e) if not mon else (mon if e == 1 else f"{_paren(repr(e))}*{mon}"))
        return " + ".join(terms) if terms else "0"

    def order(self):
        return self.base.order() ** len(self.monomials)

    def elements(self):
        vals = [e.v for e in self.base.elements()]
        for combo in itertools.product(vals, repeat=len(self.monomials)):
            yield Elt(self, tuple(combo))

    def random_element(self, rng):
        return Elt(self, tuple(self.base.random_element(rng).v for _ in self.monomials))


def _exponents(nvars: int, degree: int):
    if nvars == 0:
        if degree == 0:
            yield ()
        return
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _exponents(nvars - 1, degree - first):
            yield (first,) + rest
