import numpy as np
import pytest

from twkbench.deformation import (DeformationError, LiftingProblem, carayol_conjugator, deformation_classes,
                                  dual_numbers, enumerate_liftings, galois_test_ring, hensel_count,
                                  non_schur_diagnostic, residue_test_ring, tangent_report, truncated_eps,
                                  verify_liftings_on_group)
from twkbench.groups import cyclic_group, generate_group
from twkbench.matrix import Matrix
from twkbench.rings import prime_field


def matrix_problem(p, gens, fixed_det=False, name="problem"):
    F = prime_field(p)
    G = generate_group([Matrix.from_rows(F, g) for g in gens], name=name)
    return LiftingProblem(G, p, [np.array(g) % p for g in gens], fixed_det=fixed_det, name=name)


S3_P5 = [[[0, 1], [1, 0]], [[0, 4], [1, 4]]]
S3_P7 = [[[0, 1], [1, 0]], [[0, 6], [1, 6]]]
BOREL_P5 = [[[1, 1], [0, 1]], [[4, 0], [0, 1]]]
DIAG_P7 = [[[3, 0], [0, 5]]]
Q8_P5 = [[[0, 4], [1, 0]], [[2, 0], [0, 3]]]


def test_liftings_to_the_residue_field():
    prob = matrix_problem(5, S3_P5)
    lifts = enumerate_liftings(prob, residue_test_ring(5))
    assert len(lifts) == 1
    assert [m.to_numpy().tolist() for m in lifts[0].matrices()] == [np.array(g).tolist() for g in S3_P5]
    assert len(deformation_classes(lifts)) == 1


@pytest.mark.parametrize("p,gens,fixed", [(5, S3_P5, False), (5, S3_P5, True), (7, S3_P7, False),
                                          (5, BOREL_P5, True), (7, DIAG_P7, False)])
def test_dual_number_count_is_z1(p, gens, fixed):
    prob = matrix_problem(p, gens, fixed)
    lifts = enumerate_liftings(prob, dual_numbers(p))
    rep = tangent_report(prob)
    assert len(lifts) == p ** rep["dim_Z1"]
    assert rep["identity_holds"]
    assert verify_liftings_on_group(lifts)
    assert all(l.verify() for l in lifts[:10])


def test_tangent_report_examples():
    F = prime_field(5)
    G = generate_group([Matrix.identity(F, 2)])
    rep = tangent_report(LiftingProblem(G, 5, [np.eye(2, dtype=int)]))
    assert (rep["dim_Z1"], rep["dim_H1"], rep["dim_H0"]) == (0, 0, 4)
    assert rep["identity"] == "0 = 0 + 4 - 4"
    Z5 = cyclic_group(5)
    rep = tangent_report(LiftingProblem(Z5, 5, [np.eye(2, dtype=int)]))
    assert rep["dim_Z1"] == rep["dim_H1"] + 4 - 4 and rep["identity_holds"]


def test_fixed_determinant_gap():
    prob = matrix_problem(5, S3_P5, fixed_det=True)
    rep = tangent_report(prob)
    assert rep["module"] == "ad0"
    assert rep["framed_minus_unframed"] == 3 - rep["dim_H0"]
    assert len(enumerate_liftings(prob, dual_numbers(5))) == 5 ** (rep["dim_H1"] + rep["framed_minus_unframed"])


@pytest.mark.parametrize("A", [dual_numbers(7), galois_test_ring(7, 2)], ids=["dual", "Z/49"])
def test_hensel_count_for_prime_to_p_cyclic(A):
    prob = matrix_problem(7, DIAG_P7)
    assert len(enumerate_liftings(prob, A)) == hensel_count(prob, A)


def test_orbits_match_h1_under_schur():
    prob = matrix_problem(5, S3_P5)
    lifts = enumerate_liftings(prob, dual_numbers(5))
    rep = tangent_report(prob)
    assert len(deformation_classes(lifts)) == 5 ** rep["dim_H1"]


def test_non_schur_diagnostic():
    Z3 = cyclic_group(3)
    prob = LiftingProblem(Z3, 3, [np.eye(2, dtype=int)])
    out = non_schur_diagnostic(prob, truncated_eps(3, 3))
    assert not out["schur"]
    assert out["coarser_than_h1"] and out["orbits"] < out["h1_prediction"]


def test_carayol_conjugator():
    prob = matrix_problem(5, S3_P5)
    A = dual_numbers(5)
    lifts = enumerate_liftings(prob, A)
    rho1 = lifts[3]
    assert carayol_conjugator(rho1, rho1).conjugator is not None
    K = A.kernel_elements(2)
    a = K[7]
    ainv = A.inverse_matrix(a)
    conj = A.matmul(A.matmul(np.broadcast_to(a, rho1.images.shape), rho1.images),
                    np.broadcast_to(ainv, rho1.images.shape))
    rho2 = type(rho1)(prob, A, conj)
    res = carayol_conjugator(rho1, rho2)
    X = res.conjugator
    assert X is not None
    for s in range(len(prob.rhobar)):
        assert np.array_equal(A.matmul(X, rho1.images[s]), A.matmul(rho2.images[s], X))


def test_carayol_reports_a_trace_witness():
    # SL_2(F_3) has H^1(ad) of dimension 1, so some liftings have different traces
    prob = matrix_problem(3, [[[1, 1], [0, 1]], [[1, 0], [1, 1]]])
    A = dual_numbers(3)
    lifts = enumerate_liftings(prob, A)
    base = lifts[0]
    t0 = A.trace(base.all_elements())
    other = next(l for l in lifts if not np.array_equal(A.trace(l.all_elements()), t0))
    res = carayol_conjugator(base, other)
    assert res.conjugator is None and res.witness is not None
    assert A.trace(base.all_elements())[res.witness] != A.trace(other.all_elements())[res.witness]


def test_problem_rejects_inconsistent_rhobar():
    G = cyclic_group(2)
    with pytest.raises(DeformationError):
        LiftingProblem(G, 5, [np.array([[2, 0], [0, 1]])])
