import itertools

import numpy as np
import pytest

from twkbench.cohomology import (CohomologyClass, CohomologyError, GModule, QuotientMap, Representation,
                                 adjoint_module, cocycle_from_generator_values, cohomology, cup_product,
                                 is_irreducible_exhaustive, restrict_inflate)
from twkbench.groups import cyclic_group, direct_product, generate_group, gl_generators
from twkbench.matrix import Matrix
from twkbench.rings import prime_field
from twkbench.tw_search import is_crossed_hom


def s3(p=5):
    F = prime_field(p)
    return generate_group([Matrix.from_rows(F, [[0, -1], [1, -1]]), Matrix.from_rows(F, [[0, 1], [1, 0]])],
                          name="S3")


def brute_z1(G, M):
    p, k = M.p, len(G.gens) * M.dim
    count = 0
    for x in itertools.product(range(p), repeat=k):
        if is_crossed_hom(G, M, cocycle_from_generator_values(G, M, np.array(x))):
            count += 1
    return count


# -- groups --------------------------------------------------------------

def test_generate_group_examples():
    F = prime_field(5)
    assert generate_group([Matrix.identity(F, 2)]).order == 1
    assert generate_group([Matrix.from_rows(F, [[1, 1], [0, 1]])]).order == 5
    assert generate_group(gl_generators(3)).order == (9 - 1) * (9 - 3)


def test_multiplication_table_is_a_group_law():
    G = s3()
    t = G.table
    n = G.order
    assert all(t[0, x] == x == t[x, 0] for x in range(n))
    for a, b, c in itertools.product(range(n), repeat=3):
        assert t[t[a, b], c] == t[a, t[b, c]]


# -- cohomology ------------------------------------------------------------

def test_h0_of_trivial_group_is_everything():
    F = prime_field(7)
    G = generate_group([Matrix.identity(F, 2)])
    M = GModule.trivial(G, 7, 3)
    assert cohomology(G, M, 0).dim == 3


@pytest.mark.parametrize("l,p", [(3, 5), (2, 7), (5, 3)])
def test_coprime_vanishing(l, p):
    G = cyclic_group(l)
    M = GModule.trivial(G, p)
    assert cohomology(G, M, 1).dim == 0
    assert brute_z1(G, M) == 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_cyclic_p_on_trivial_fp(p):
    G = cyclic_group(p)
    M = GModule.trivial(G, p)
    assert cohomology(G, M, 1).dim == 1
    assert cohomology(G, M, 1, method="bar").dim == 1
    assert cohomology(G, M, 2).dim == 1
    assert brute_z1(G, M) == p


def test_generator_and_bar_methods_agree():
    G = s3(3)
    for M in (GModule.trivial(G, 3), Representation.tautological(G).as_module(),
              adjoint_module(Representation.tautological(G))):
        assert cohomology(G, M, 1, method="generators").dim == cohomology(G, M, 1, method="bar").dim


def test_budget_is_enforced():
    G = s3()
    M = adjoint_module(Representation.tautological(G))
    with pytest.raises(CohomologyError):
        cohomology(G, M, 2, budget=10)


# -- adjoint modules --------------------------------------------------------

def test_adjoint_of_trivial_representation():
    F = prime_field(5)
    G = generate_group([Matrix.identity(F, 2)])
    rho = Representation.tautological(G)
    ad, ad0 = adjoint_module(rho), adjoint_module(rho, fixed_det=True)
    assert (ad.dim, ad0.dim) == (4, 3)
    assert cohomology(G, ad, 0).dim == 4 and cohomology(G, ad0, 0).dim == 3


def test_adjoint_splits_off_scalars():
    G = s3()
    rho = Representation.tautological(G)
    ad, ad0 = adjoint_module(rho), adjoint_module(rho, fixed_det=True)
    one = GModule.trivial(G, 5)
    for i in (0, 1):
        assert cohomology(G, ad, i).dim == cohomology(G, ad0, i).dim + cohomology(G, one, i).dim


def test_ad0_of_gl2_f5_is_irreducible():
    G = generate_group(gl_generators(5))
    ad0 = adjoint_module(Representation.tautological(G), fixed_det=True)
    assert is_irreducible_exhaustive(ad0)
    assert not is_irreducible_exhaustive(adjoint_module(Representation.tautological(G)))


# -- functoriality -----------------------------------------------------------

def test_restriction_to_trivial_subgroup_is_zero():
    G = cyclic_group(5)
    M = GModule.trivial(G, 5)
    c = cohomology(G, M, 1).basis[0]
    r = restrict_inflate(c, G.subgroup([]))
    assert r.is_coboundary()


def test_inflation_restriction_sequence():
    G = cyclic_group(4)
    Q = cyclic_group(2)
    images = np.array([Q.index[G.elements[x] % 2] for x in range(G.order)])
    qmap = QuotientMap(G, Q, images)
    assert qmap.check()
    H = G.subgroup([G.index[2]])
    MQ = GModule.trivial(Q, 2)
    M = GModule.trivial(G, 2)
    infl = restrict_inflate(cohomology(Q, MQ, 1).basis[0], qmap, M)
    assert infl.is_cocycle() and not infl.is_coboundary()
    # inflated classes die on H; the kernel of restriction is exactly their span
    assert restrict_inflate(infl, H).is_coboundary()
    basis = cohomology(G, M, 1).basis
    kernel = [c for c in basis if restrict_inflate(c, H).is_coboundary()]
    assert len(kernel) == 1 == cohomology(Q, MQ, 1).dim


def test_inflate_then_restrict_evaluates_on_lifts():
    G = direct_product(cyclic_group(3), cyclic_group(2))
    Q = cyclic_group(3)
    images = np.array([G.elements[x][0] for x in range(G.order)])
    qmap = QuotientMap(G, Q, images)
    M = GModule.trivial(G, 3)
    c = cohomology(Q, GModule.trivial(Q, 3), 1).basis[0]
    infl = restrict_inflate(c, qmap, M)
    section = G.subgroup([G.gens[0]])
    back = restrict_inflate(infl, section)
    for h in range(section.order):
        x = section.inclusion[h]
        assert np.array_equal(back.values[h], c.values[images[x]])


# -- cup products ------------------------------------------------------------

def test_cup_with_zero_class():
    G = cyclic_group(3)
    M = GModule.trivial(G, 3)
    c = cohomology(G, M, 1).basis[0]
    zero = CohomologyClass(1, M, np.zeros_like(c.values))
    B = np.ones((1, 1, 1), dtype=np.int64)
    assert cup_product(c, zero, B, M).is_coboundary()


def test_nonzero_cup_product_for_z2():
    G = cyclic_group(2)
    M = GModule.trivial(G, 2)
    B = np.ones((1, 1, 1), dtype=np.int64)
    classes = [CohomologyClass(1, M, cocycle_from_generator_values(G, M, np.array([x]))) for x in (0, 1)]
    products = [cup_product(a, b, B, M) for a in classes for b in classes]
    assert any(not prod.is_coboundary() for prod in products)


def test_cup_product_vanishes_on_squares_for_odd_cyclic():
    G = cyclic_group(3)
    M = GModule.trivial(G, 3)
    c = cohomology(G, M, 1).basis[0]
    B = np.ones((1, 1, 1), dtype=np.int64)
    assert cup_product(c, c, B, M).is_coboundary()


@pytest.mark.parametrize("p", [2, 3])
def test_graded_commutativity(p):
    G = direct_product(cyclic_group(p), cyclic_group(p))
    M = GModule.trivial(G, p)
    B = np.ones((1, 1, 1), dtype=np.int64)
    basis = cohomology(G, M, 1).basis
    assert len(basis) == 2
    for a in basis:
        for b in basis:
            total = cup_product(a, b, B, M) + cup_product(b, a, B, M)
            assert total.is_cocycle() and total.is_coboundary()
