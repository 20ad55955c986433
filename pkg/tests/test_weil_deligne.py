from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from twkbench.matrix import Matrix
from twkbench.rings import cyclotomic_field, quadratic_field, rationals, zeta
from twkbench.weil_deligne import (WDError, WDRep, WeilRep, check_wd_relation, decompose, direct_sum,
                                   frobenius_ss, is_bounded, is_frobenius_semisimple, is_isomorphic,
                                   lattice_stabilized, rec_dictionary, rec_inverse, sp_m, twist)

Q = rationals()

blocks = st.lists(st.tuples(st.sampled_from([1, 2, 5, Fraction(1, 5), Fraction(3, 2), -1]),
                            st.integers(1, 3)), min_size=1, max_size=3).filter(
    lambda bs: sum(m for _, m in bs) <= 4)


def build(bs, q=3):
    return direct_sum([sp_m(WeilRep.character(Q, Q(v), q), m) for v, m in bs])


def test_sp2_shape():
    w = sp_m(WeilRep.character(Q, 1, 3), 2)
    assert w.r.phi == Matrix.diag(Q, [Q(1) / 3, 1])
    assert w.n_op == Matrix.from_rows(Q, [[0, 1], [0, 0]])
    assert check_wd_relation(w.r, w.n_op)


def test_relation_rejected():
    r = WeilRep.unramified(Q, Matrix.diag(Q, [1, 1]), 3)
    with pytest.raises(WDError):
        WDRep(r, Matrix.from_rows(Q, [[0, 1], [0, 0]]))


def test_weil_rep_rejects_bad_sigma():
    with pytest.raises(WDError):
        WeilRep(Q, Matrix.identity(Q, 1), Matrix.from_rows(Q, [[2]]), 3)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(blocks)
def test_decompose_round_trip(bs):
    wd = build(bs)
    dec = decompose(wd)
    assert sum(r.dim * m for r, m in dec) == wd.dim
    assert is_isomorphic(direct_sum([sp_m(r, m) for r, m in dec]), wd)


@pytest.mark.parametrize("bs", [
    [(2, 2), (5, 1)], [(1, 1), (7, 1), (1, 1)], [(1, 3)], [(2, 1), (2, 2)], [(3, 2), (3, 2)],
    [(Fraction(1, 2), 1)], [(5, 4)], [(1, 1), (1, 1), (1, 1)], [(2, 3), (9, 1)], [(-1, 2), (4, 1), (6, 1)],
])
def test_decompose_multiplicities(bs):
    wd = build(bs)
    dec = decompose(wd)
    got = sorted((m, r.dim) for r, m in dec)
    # pieces with equal Frobenius eigenvalue and equal m may merge into one block
    assert sum(m * d for m, d in got) == wd.dim
    assert {m for m, _ in got} == {m for _, m in bs}


def test_isomorphism_distinguishes_monodromy():
    assert not is_isomorphic(build([(1, 2)]), build([(1, 1), (Fraction(1, 3), 1)]))
    assert is_isomorphic(build([(2, 1), (5, 1)]), build([(5, 1), (2, 1)]))


def test_frobenius_semisimplification():
    u = WDRep(WeilRep.unramified(Q, Matrix.from_rows(Q, [[1, 1], [0, 1]]), 3), Matrix.zeros(Q, 2))
    assert not is_frobenius_semisimple(u)
    ss = frobenius_ss(u)
    assert ss.r.phi == Matrix.identity(Q, 2)
    assert frobenius_ss(ss).r.phi == ss.r.phi
    with pytest.raises(WDError):
        decompose(u)


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(blocks)
def test_frobenius_ss_properties(bs):
    wd = build(bs)
    ss = frobenius_ss(wd)
    assert is_frobenius_semisimple(ss)
    assert ss.r.phi.charpoly() == wd.r.phi.charpoly()
    assert ss.n_op == wd.n_op


def test_twist_commutes_with_sp():
    r = WeilRep.character(Q, 2, 3)
    assert is_isomorphic(twist(sp_m(r, 2), 5), sp_m(r.twist(5), 2))


PHIS = [[[1, 0], [0, 7]], [[Fraction(1, 5), 0], [0, 1]], [[0, 1], [-5, 0]], [[1, 1], [0, 1]],
        [[0, Fraction(1, 5)], [5, 0]], [[2, 1], [1, 3]], [[0, 1], [-1, 0]], [[25, 0], [0, Fraction(1, 25)]],
        [[5, 0], [0, 1]], [[3, 0], [0, 4]]]


@pytest.mark.parametrize("phi", PHIS, ids=[str(i) for i in range(len(PHIS))])
def test_boundedness_matches_lattice_oracle(phi):
    wd = WDRep(WeilRep.unramified(Q, Matrix.from_rows(Q, phi), 7), Matrix.zeros(Q, 2))
    assert is_bounded(wd, 5) == lattice_stabilized(wd, 5)


def test_boundedness_values():
    assert is_bounded(build([(1, 1), (7, 1)]), 5)
    assert not is_bounded(build([(Fraction(1, 5), 1), (1, 1)]), 5)
    # unipotent Frobenius is still bounded: the standard lattice is stable
    wd = WDRep(WeilRep.unramified(Q, Matrix.from_rows(Q, [[1, 1], [0, 1]]), 7), Matrix.zeros(Q, 2))
    assert is_bounded(wd, 5)
    with pytest.raises(WDError):
        is_bounded(wd, None)


def test_boundedness_quadratic_field():
    K = quadratic_field(5)
    wd = WDRep(WeilRep.unramified(K, Matrix.diag(K, [K.gen, K.gen]), 7), Matrix.zeros(K, 2))
    # sqrt5 has norm -5: not a unit at 5, a unit at 3
    assert not is_bounded(wd, 5)
    assert is_bounded(wd, 3)


def test_tame_inertia_over_cyclotomic():
    K = cyclotomic_field(3)
    z = zeta(K)
    sig = Matrix.diag(K, [z, z * z])
    r = WeilRep(K, Matrix.identity(K, 2), sig, 7)
    assert r.sigma_order == 3
    wd = WDRep(r, Matrix.zeros(K, 2))
    assert wd.inertial_type().is_isomorphic(WDRep(WeilRep(K, Matrix.identity(K, 2), Matrix.diag(K, [z * z, z]), 7),
                                                  Matrix.zeros(K, 2)).inertial_type())


def test_rec_dictionary_round_trip():
    assert rec_inverse(rec_dictionary("steinberg", 3, Q, chi=2)) == {"kind": "steinberg", "chi": Q(2)}
    out = rec_inverse(rec_dictionary("unramified", 3, Q, alpha=2, beta=5))
    assert out["kind"] == "unramified" and {out["alpha"], out["beta"]} == {Q(2), Q(5)}
    with pytest.raises(WDError):
        rec_dictionary("cuspidal", 3, Q)
