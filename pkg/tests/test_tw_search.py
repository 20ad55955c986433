import numpy as np
import pytest

from twkbench import tw_search as T
from twkbench.cohomology import CohomologyClass


@pytest.fixture(scope="module")
def ctx():
    return T.gl2_context(5)


def test_context_shape(ctx):
    assert ctx.gamma.order == 125 * 480
    assert len(ctx.kernel) == 125 * 2
    assert T.check_irreducible(ctx)
    assert ctx.h1()[0] == 1


def test_find_element_and_census(ctx):
    c = ctx.classes[0]
    res = T.find_tw_element(ctx, c)
    assert res.element == 9
    assert all(T.check_element(ctx, c, res.element).values())
    assert res.census == {"cyclotomic": 45000, "distinct_eigenvalues": 12500, "projection": 22000}
    assert res.candidates == 8750


def test_trace_and_eigenline_agree(ctx):
    c = ctx.classes[0]
    tab = T.predicate_table(ctx, c)
    rng = np.random.default_rng(0)
    sample = rng.choice(np.nonzero(tab["distinct_eigenvalues"])[0], 300, replace=False)
    for x in sample:
        _, _, entry = T.eigenline_entry(ctx, c, int(x))
        assert (not entry.is_zero()) == bool(tab["projection"][x])
        assert (T.projection_value(ctx, c, int(x)) != 0) == bool(tab["projection"][x])


def test_repair(ctx):
    c = ctx.classes[0]
    tab = T.predicate_table(ctx, c)
    bad = np.nonzero(tab["cyclotomic"] & tab["distinct_eigenvalues"] & ~tab["projection"])[0]
    res = T.repair(ctx, c, int(bad[0]))
    assert res.repaired_from == int(bad[0])
    assert all(T.check_element(ctx, c, res.element).values())
    assert any(ctx.gamma.mul(int(k), int(bad[0])) == res.element for k in ctx.kernel)


def test_kernel_span(ctx):
    assert T.kernel_span(ctx, ctx.classes[0]) == 3


def test_zero_class_rejected(ctx):
    zero = CohomologyClass(1, ctx.module, np.zeros_like(ctx.classes[0].values))
    with pytest.raises(T.TWError):
        T.find_tw_element(ctx, zero)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_build_tw_set(ctx, r):
    Q = T.build_tw_set(ctx, r)
    assert len(Q) == r == len(set(Q))
    assert T.h1_q(ctx, Q) == 0
    assert T.h1_q_independent(ctx, Q) == 0
    assert not any(T.census(ctx, Q).values())


def test_h1_q_nontrivial_kernel(ctx):
    assert T.h1_q(ctx, []) == 1
    assert T.h1_q(ctx, [0]) == 1 == T.h1_q_independent(ctx, [0])


def test_thin(ctx):
    Q = T.build_tw_set(ctx, 3)
    extra = [int(x) for x in T._good_elements(ctx)[:5]]
    thin = T.thin_tw_set(ctx, Q + extra, 2)
    assert len(thin) == 2 and T.h1_q(ctx, thin) == 0
    with pytest.raises(T.TWError):
        T.thin_tw_set(ctx, [0], 1)


def test_frobenius_data(ctx):
    a, b, m = T.tw_frobenius_data(np.array([[1, 0], [0, 2]]), ctx, 11)
    assert (int(a.v), int(b.v), m) == (1, 2, 1)
    assert T.tw_frobenius_data(T.build_tw_set(ctx, 1)[0], ctx, 101)[2] == 2
    with pytest.raises(T.TWError):
        T.frobenius_data(np.array([[1, 0], [0, 2]]), 5, 13)
    with pytest.raises(T.TWError):
        T.frobenius_data(np.eye(2, dtype=int), 5, 11)
    with pytest.raises(T.TWError):
        T.gl2_context(5, N=2)
