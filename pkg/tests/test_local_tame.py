import numpy as np
import pytest
import sympy

from twkbench.deformation import dual_numbers, galois_test_ring, truncated_eps, two_eps
from twkbench.local_tame import (TameError, TameGroupModel, classify_ihara_component, fl_dimension_ledger,
                                 formal_relation_check, ihara_coincidence, m_trace_example, rescaling_check,
                                 tw_count_report, tw_universal_ring, wd_functor)
from twkbench.matrix import Matrix
from twkbench.rings import galois_ring
from twkbench.weil_deligne import check_wd_relation


def test_presentation_for_p5_q11():
    pres = tw_universal_ring(1, 2, 11, p=5)
    u = sympy.Symbol("u")
    assert pres.data["m"] == 1
    assert sympy.expand(pres.relators[0] - ((1 + u) ** 5 - 1)) == 0
    assert pres.tangent_dimension() == 4
    assert formal_relation_check(pres)


@pytest.mark.parametrize("p,q,m", [(5, 11, 1), (5, 31, 1), (7, 29, 1), (5, 101, 2), (3, 19, 2)])
def test_exact_p_power(p, q, m):
    assert tw_universal_ring(1, 2, q, p=p).data["m"] == m


def test_presentation_preconditions():
    with pytest.raises(TameError):
        tw_universal_ring(1, 1, 11, p=5)
    with pytest.raises(TameError):
        tw_universal_ring(1, 2, 13, p=5)
    with pytest.raises(TameError):
        tw_universal_ring(1, 2, 11, chi=3, p=5)


@pytest.mark.parametrize("p,q", [(5, 11), (5, 31), (7, 29)])
@pytest.mark.parametrize("ring", ["dual", "galois"])
def test_tw_counts_against_brute_force(p, q, ring):
    A = dual_numbers(p) if ring == "dual" else galois_test_ring(p, 2)
    rep = tw_count_report(1, 2, q, A)
    assert rep["presentation_maps"] == rep["brute_force"] == p ** 4
    assert rep["sets_equal"]


def test_ihara_identity_sigma():
    A = galois_test_ring(5, 2)
    I = A.identity(2)
    Phi = A.lift(np.array([[1, 0], [0, 2]]))
    flags = classify_ihara_component(A, Phi, I, A.one, 11)
    assert flags.in_Dur and flags.in_D1


def test_m_trace_solutions():
    out = m_trace_example(5, 11)
    assert out["solutions"] > 0
    assert out["all_satisfy_m_trace"] and out["diag_1_q_is_solution"]


@pytest.mark.parametrize("A,q", [(dual_numbers(3), 7), (dual_numbers(5), 11), (truncated_eps(3, 3), 7),
                                 (two_eps(3), 7)], ids=["F3[e]", "F5[e]", "F3[e]/e^3", "F3[e1,e2]"])
def test_mod_lambda_coincidence(A, q):
    out = ihara_coincidence(A, q)
    assert out["discrepancies"] == 0
    assert out["ur_inside_D1"]


def test_tame_model_relation():
    A = galois_test_ring(5, 2)
    model = TameGroupModel(11, 5)
    Phi = A.lift(np.array([[1, 0], [0, 11 % 5]]))
    Phi[1, 1] = A(11)
    S = A.lift(np.array([[1, 1], [0, 1]]))
    assert model.relation_holds(A, Phi[None], S[None])[0]


def test_wd_functor_examples():
    R = galois_ring(5, 2)
    I = Matrix.identity(R, 2)
    wd = wd_functor(Matrix.diag(R, [2, 3]), I, 11)
    assert wd.n_op.is_zero() and wd.r.sigma == I
    wd = wd_functor(Matrix.diag(R, [1, 11]), Matrix.from_rows(R, [[1, 1], [0, 1]]), 11)
    assert wd.n_op == Matrix.from_rows(R, [[0, 1], [0, 0]])
    assert wd.r.sigma == I
    phi = wd.r.phi
    assert phi * wd.n_op * phi.inverse() == wd.n_op.scale(R(11).inverse())
    assert check_wd_relation(wd.r, wd.n_op)


@pytest.mark.parametrize("u", [2, 3, 4])
def test_u_rescaling_is_isomorphic(u):
    R = galois_ring(5, 2)
    wd = wd_functor(Matrix.diag(R, [1, 11]), Matrix.from_rows(R, [[1, 1], [0, 1]]), 11)
    out = rescaling_check(wd, u)
    assert out["isomorphic"]
    assert out["rescaled_N"] == wd.n_op.scale(R(u))
    X = out["conjugator"]
    assert X * wd.n_op * X.inverse() == out["rescaled_N"]


def test_wd_functor_needs_unipotent_sigma():
    R = galois_ring(5, 2)
    with pytest.raises(TameError):
        wd_functor(Matrix.identity(R, 2), Matrix.diag(R, [2, 3]), 11)


def test_fl_ledger():
    assert fl_dimension_ledger(2, 1, [[0, 1]], 5) == {"absolute_dimension": 5, "variables": 4}
    assert fl_dimension_ledger(3, 2, [[0, 1, 2], [0, 1, 3]], 7) == {"absolute_dimension": 15, "variables": 14}
    with pytest.raises(TameError):
        fl_dimension_ledger(2, 1, [[0, 4]], 5)
