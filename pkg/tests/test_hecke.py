from fractions import Fraction

import pytest

from twkbench.hecke import (HeckeError, IwahoriModel, LocalCharacter, PAdicMatrix, cartan_invariants, closed_form,
                            coset_reps, iwahori_action, iwasawa_decompose, spherical_eigenvalue,
                            spherical_to_iwahori, symbolic_field, symbols, tame_root, u_minus_b_check,
                            unramified_model, verify_double_coset)

QS = [2, 3, 5, 7, 11]


def test_cartan_invariants():
    assert cartan_invariants(PAdicMatrix.of([[1, 0], [0, 1]], 3)) == (0, 0)
    assert cartan_invariants(PAdicMatrix.of([[9, 0], [0, 1]], 3)) == (0, 2)
    assert cartan_invariants(PAdicMatrix.of([[1, 1], [1, 4]], 3)) == (0, 1)
    assert cartan_invariants(PAdicMatrix.of([[Fraction(1, 3), 0], [0, 3]], 3)) == (-1, 1)


@pytest.mark.parametrize("rows", [[[1, 0], [Fraction(1, 3), 1]], [[0, 1], [1, 0]], [[2, 5], [7, 11]],
                                  [[Fraction(1, 9), 4], [3, Fraction(2, 3)]]])
def test_iwasawa(rows):
    g = PAdicMatrix.of(rows, 3)
    b, k = iwasawa_decompose(g)
    assert b.c == 0 and k.in_gl2_o()
    assert (b @ k).entries() == g.entries()


@pytest.mark.parametrize("q", QS)
@pytest.mark.parametrize("kind,count", [("T", None), ("S", 1), ("U_Iwahori", None)])
def test_double_coset_certificates(q, kind, count):
    cert = verify_double_coset(kind, q)
    assert cert.valid
    expected = {"T": q + 1, "S": 1, "U_Iwahori": q}[kind]
    assert len(cert.reps) == expected
    assert all(len(entry["cosets"]) == 1 for entry in cert.complete)
    assert len(cert.distinct) == expected * (expected - 1) // 2


def test_certificate_detects_corruption():
    reps = coset_reps("T", 5)
    bad = verify_double_coset("T", 5, reps=reps + [reps[0]])
    assert not bad.valid
    short = verify_double_coset("T", 5, reps=reps[:-1])
    assert not short.valid
    with pytest.raises(HeckeError):
        verify_double_coset("T", 4)
    with pytest.raises(HeckeError):
        verify_double_coset("T", 11, budget=10)


@pytest.mark.parametrize("q", QS)
def test_spherical_eigenvalues(q):
    K = symbolic_field(q)
    a, b, c, s = symbols(K)
    for op in "TS":
        cert = verify_double_coset(op, q)
        for rep in [("principal", a, b), ("one_dim", c)]:
            assert spherical_eigenvalue(op, rep, q, cert, K) == closed_form(op, rep, K)


@pytest.mark.parametrize("q", QS)
def test_iwahori_u_triangular_eigenline(q):
    K = symbolic_field(q)
    out = u_minus_b_check(unramified_model(q, K))
    a, b, _, s = symbols(K)
    assert out["triangular"]
    assert out["diagonal"] == (s * a, s * b)
    assert out["phi0"] == (K.one, K.one)
    assert out["nonzero"] and out["in_eigenline"]
    # lower-left entry (q - 1) alpha s / q
    assert out["U"][1, 0] == s * a * K(Fraction(q - 1, q))


@pytest.mark.parametrize("q", [3, 5])
def test_torus_trivial_on_unramified(q):
    model = unramified_model(q)
    M = iwahori_action("torus", model, delta=q - 1)
    assert M[0, 0] == M[1, 1] == model.K.one and M[0, 1].is_zero() and M[1, 0].is_zero()
    with pytest.raises(HeckeError):
        iwahori_action("torus", model, delta=q)


def test_tame_character():
    K = symbolic_field(5, 4)
    a, b, _, _ = symbols(K)
    z = tame_root(K)
    model = IwahoriModel(5, LocalCharacter(a, z), LocalCharacter(b), K)
    U = iwahori_action("U", model)
    assert U[0, 1].is_zero() and U[1, 0].is_zero()
    T = iwahori_action("torus", model, delta=2)
    assert T[1, 1] == K.one and not (T[0, 0] - K.one).is_zero()
    assert (T[0, 0] ** 4 - K.one).is_zero()
    with pytest.raises(HeckeError):
        spherical_to_iwahori(model)
