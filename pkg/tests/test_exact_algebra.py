import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twkbench.algorithms import (AlgebraError, jordan_chevalley, nilpotent_exp_log, smith_divisors,
                                 smith_normal_form, sym_power)
from twkbench.matrix import Matrix
from twkbench.rings import (RingError, cyclotomic_field, finite_field, galois_ring, integers_mod, prime_field,
                            quadratic_field, rational_functions, rationals, zeta)

RINGS = {
    "F_7": lambda: prime_field(7),
    "F_9": lambda: finite_field(3, 2),
    "GR(25,1)": lambda: galois_ring(5, 2),
    "GR(9,2)": lambda: galois_ring(3, 2, 2),
    "Q": lambda: rationals(),
    "Q(sqrt5)": lambda: quadratic_field(5),
    "Q(zeta4)": lambda: cyclotomic_field(4),
    "Q(zeta5)": lambda: cyclotomic_field(5),
    "Q(sqrt3)(alpha,beta)": lambda: rational_functions(quadratic_field(3)),
}


@pytest.mark.parametrize("name", sorted(RINGS))
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_ring_axioms(name, seed):
    R = RINGS[name]()
    rng = random.Random(seed)
    a, b, c = (R.random_element(rng) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c
    assert a + R.zero == a and a * R.one == a
    assert a - a == R.zero
    if a.is_unit():
        inv = a.inverse()
        assert a * inv == R.one and inv * a == R.one


@pytest.mark.parametrize("p,k,f", [(5, 2, 1), (3, 2, 2), (2, 3, 2)])
def test_reduction_is_a_homomorphism(p, k, f):
    R = galois_ring(p, k, f)
    F = R.residue_field()
    rng = random.Random(p * 100 + k * 10 + f)
    for _ in range(50):
        a, b = R.random_element(rng), R.random_element(rng)
        assert R.reduce(a + b, F) == R.reduce(a, F) + R.reduce(b, F)
        assert R.reduce(a * b, F) == R.reduce(a, F) * R.reduce(b, F)
    assert R.reduce(R.one, F) == F.one


def test_finite_ring_units_have_inverses():
    for R in (integers_mod(27), finite_field(2, 3), galois_ring(3, 2, 2)):
        for a in R.elements():
            if a.is_unit():
                assert a * a.inverse() == R.one
            else:
                with pytest.raises(RingError):
                    a.inverse()


def test_square_root_is_formal():
    K = quadratic_field(7)
    s = K.gen
    assert s * s == K(7)
    with pytest.raises(RingError):
        quadratic_field(9)


def test_cyclotomic_root_has_the_right_order():
    K = cyclotomic_field(6)
    z = zeta(K)
    assert z ** 6 == K.one and z ** 3 != K.one and z ** 2 != K.one


def test_rational_functions_equality_is_canonical():
    K = rational_functions()
    a, b = K.alpha, K.beta
    assert (a * a - b * b) / (a - b) == a + b
    assert hash((a * a - b * b) / (a - b)) == hash(a + b)


# -- matrices -------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_determinant_is_multiplicative(seed):
    rng = random.Random(seed)
    R = galois_ring(5, 2)
    A = Matrix(R, [[R.random_element(rng) for _ in range(3)] for _ in range(3)])
    B = Matrix(R, [[R.random_element(rng) for _ in range(3)] for _ in range(3)])
    assert (A * B).det() == A.det() * B.det()


# -- Smith normal form -----------------------------------------------------

def test_smith_examples():
    Q2 = rationals(2)
    assert [str(d) for d in smith_divisors(Matrix.identity(Q2, 2))] == ["1", "1"]
    Q3 = rationals(3)
    assert [Q3.valuation(d) for d in smith_divisors(Matrix.diag(Q3, [3, 1]))] == [0, 1]
    assert [Q2.valuation(d) for d in smith_divisors(Matrix.from_rows(Q2, [[2, 3], [4, 7]]))] == [0, 1]


@settings(max_examples=40, deadline=None)
@given(rows=st.lists(st.lists(st.integers(-30, 30), min_size=3, max_size=3), min_size=3, max_size=3))
def test_smith_properties(rows):
    Q = rationals(3)
    m = Matrix.from_rows(Q, rows)
    U, D, V = smith_normal_form(m)
    assert U * m * V == D
    for i in range(3):
        for j in range(3):
            if i != j:
                assert D[i, j].is_zero()
    vals = [Q.valuation(D[i, i]) for i in range(3)]
    finite = [v for v in vals if v != float("inf")]
    assert finite == sorted(finite) and vals[:len(finite)] == finite
    assert Q.valuation(U.det()) == 0 and Q.valuation(V.det()) == 0


# -- Jordan-Chevalley --------------------------------------------------------

def test_jordan_chevalley_examples():
    Q = rationals()
    d = Matrix.diag(Q, [2, 5])
    assert jordan_chevalley(d) == (d, Matrix.identity(Q, 2))
    u = Matrix.from_rows(Q, [[1, 1], [0, 1]])
    assert jordan_chevalley(u) == (Matrix.identity(Q, 2), u)
    a = Matrix.from_rows(Q, [[2, 1], [0, 3]])
    assert jordan_chevalley(a) == (a, Matrix.identity(Q, 2))


@settings(max_examples=30, deadline=None)
@given(rows=st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=3, max_size=3))
def test_jordan_chevalley_properties(rows):
    Q = rationals()
    a = Matrix.from_rows(Q, rows)
    if not a.is_invertible():
        return
    s, u = jordan_chevalley(a)
    assert s * u == a and s * u == u * s
    assert s.charpoly() == a.charpoly()
    assert jordan_chevalley(s) == (s, Matrix.identity(Q, 3))


# -- exp / log -----------------------------------------------------------

def test_exp_log_examples():
    Q = rationals()
    z = Matrix.zeros(Q, 2)
    assert nilpotent_exp_log(z, "exp") == Matrix.identity(Q, 2)
    n = Matrix.from_rows(Q, [[0, 1], [0, 0]])
    assert nilpotent_exp_log(n, "exp") == Matrix.from_rows(Q, [[1, 1], [0, 1]])
    with pytest.raises(AlgebraError):
        nilpotent_exp_log(Matrix.identity(Q, 2), "exp")


@settings(max_examples=30, deadline=None)
@given(vals=st.lists(st.integers(0, 342), min_size=3, max_size=3))
def test_log_exp_round_trip_over_gr(vals):
    R = galois_ring(7, 3)
    a, b, c = vals
    N = Matrix.from_rows(R, [[0, a, b], [0, 0, c], [0, 0, 0]])
    assert nilpotent_exp_log(nilpotent_exp_log(N, "exp"), "log") == N


@settings(max_examples=30, deadline=None)
@given(a=st.integers(-5, 5), b=st.integers(-5, 5), c=st.integers(-5, 5))
def test_exp_of_commuting_sum(a, b, c):
    Q = rationals()
    N1 = Matrix.from_rows(Q, [[0, a, b], [0, 0, a], [0, 0, 0]])
    N2 = Matrix.from_rows(Q, [[0, c, 0], [0, 0, c], [0, 0, 0]])
    assert N1 * N2 == N2 * N1
    exp = lambda x: nilpotent_exp_log(x, "exp")
    assert exp(N1 + N2) == exp(N1) * exp(N2)


# -- symmetric powers --------------------------------------------------------

def test_sym_power_examples():
    F = prime_field(11)
    g = Matrix.from_rows(F, [[2, 3], [5, 7]])
    assert sym_power(0, g) == Matrix.identity(F, 1)
    assert sym_power(1, g) == g
    assert sym_power(2, Matrix.diag(F, [3, 4])) == Matrix.diag(F, [9, 12, 16])


@settings(max_examples=30, deadline=None)
@given(m=st.integers(0, 4), e=st.lists(st.integers(0, 12), min_size=8, max_size=8))
def test_sym_power_is_multiplicative(m, e):
    F = prime_field(13)
    g = Matrix.from_rows(F, [e[0:2], e[2:4]])
    h = Matrix.from_rows(F, [e[4:6], e[6:8]])
    assert sym_power(m, g * h) == sym_power(m, g) * sym_power(m, h)
    assert sym_power(m, g).det() == g.det() ** (m * (m + 1) // 2)


def test_rationals_with_fraction_input():
    Q = rationals(5)
    assert Q.valuation(Q(Fraction(3, 25))) == -2
