import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twkbench import selmer as S
from twkbench.cohomology import GModule, Representation
from twkbench.groups import cyclic_group, generate_group
from twkbench.matrix import Matrix
from twkbench.rings import prime_field

GROUPS = {
    # (p, generators); the first is prime to p, the rest have p | |G|
    "S3_p5": (5, [[[0, -1], [1, -1]], [[0, 1], [1, 0]]]),
    "S3_p3": (3, [[[0, -1], [1, -1]], [[0, 1], [1, 0]]]),
    "B6_p3": (3, [[[1, 1], [0, 1]], [[2, 0], [0, 1]]]),
    "U7_p7": (7, [[[1, 1], [0, 1]]]),
}
SLOW_GROUPS = {
    "B10_p5": (5, [[[1, 1], [0, 1]], [[4, 0], [0, 4]]]),
    "B12_p3": (3, [[[1, 1], [0, 1]], [[2, 0], [0, 2]], [[1, 0], [0, 2]]]),
}
_cache = {}


def rep(name):
    if name not in _cache:
        p, gens = {**GROUPS, **SLOW_GROUPS}[name]
        F = prime_field(p)
        G = generate_group([Matrix.from_rows(F, g) for g in gens], name=name)
        _cache[name] = Representation.tautological(G)
    return _cache[name]


def check_complex(setup):
    sc = S.build_selmer_complex(setup)
    for c in (sc.global_complex, sc.shifted_local, sc.total):
        assert c.d_squared_zero()
    les = S.long_exact_sequence(sc)
    assert all(node["exact"] for node in les), les
    e = S.euler_report(sc)
    assert e["identity_holds"] and e["complex_split"] and e["rank_nullity"]
    return sc


@st.composite
def setups(draw):
    name = draw(st.sampled_from(sorted(GROUPS)))
    rho = rep(name)
    G = rho.group
    k = draw(st.integers(0, 2))
    elems = draw(st.lists(st.integers(1, G.order - 1), min_size=k, max_size=k))
    places = [(f"v{i}", [g]) for i, g in enumerate(elems)]
    T, conds = [], {}
    for label, _ in places:
        kind = draw(st.sampled_from(["T", "full", "zero"]))
        if kind == "T":
            T.append(label)
        else:
            conds[label] = kind
    return S.setup_from_representation(rho, places, T, conds, name=name)


@settings(max_examples=12, deadline=None)
@given(setups())
def test_randomized_selmer_complexes(setup):
    check_complex(setup)


@pytest.mark.parametrize("name", sorted(SLOW_GROUPS))
def test_p_dividing_order(name):
    rho = rep(name)
    setup = S.setup_from_representation(rho, [("v", [1]), ("w", [len(rho.group.gens)])], ("v",), {"w": "full"})
    check_complex(setup)


@pytest.mark.parametrize("T,conds,h", [
    ((), {}, [1, 0, 0]),
    (("v",), {}, [0, 1, 0]),
    ((), {"v": "full"}, [1, 0, 0]),
    ((), {"v": "zero"}, [1, 0, 0]),
])
def test_s3_values(T, conds, h):
    rho = rep("S3_p5")
    places = [("v", [1])] if (T or conds) else []
    sc = check_complex(S.setup_from_representation(rho, places, T, conds))
    assert [sc.total.h_dim(i) for i in range(3)] == h


def test_h0_flag():
    rho = rep("S3_p5")
    with_T = check_complex(S.setup_from_representation(rho, [("v", [1])], ("v",), {}))
    flag = S.h0_flag(with_T)
    assert flag["absolutely_irreducible"] and flag["T_nonempty"]
    assert flag["h0_ST"] == 0 and flag["discrepancy"]
    without = check_complex(S.setup_from_representation(rho, [("v", [1])], (), {"v": "full"}))
    assert not S.h0_flag(without)["discrepancy"]


def test_selmer_h_cocycles():
    sc = check_complex(S.setup_from_representation(rep("S3_p5"), [("v", [1])], ("v",), {}))
    dim, basis = S.selmer_h(sc, 1)
    assert dim == basis.shape[0] == 1
    d1 = sc.total.d(1).toarray()
    assert not np.any(d1 @ basis.T % 5)
    with pytest.raises(S.SelmerError):
        S.selmer_h(sc, 4)


def test_setup_validation():
    rho = rep("S3_p5")
    with pytest.raises(S.SelmerError):
        S.setup_from_representation(rho, [("v", [1])], (), {})
    with pytest.raises(S.SelmerError):
        S.setup_from_representation(rho, [("v", [1]), ("v", [2])], ("v",), {})
    with pytest.raises(S.SelmerError):
        S.setup_from_representation(rho, [("inf", [1], True)], (), {})
    with pytest.raises(S.SelmerError):
        S.build_selmer_complex(S.setup_from_representation(rho, [], (), {}), budget=10)


def test_local_pairing_perfect_for_trivial_z2():
    C2 = cyclic_group(2)
    M = GModule.trivial(C2, 2, 1)
    B = np.array([[[1]]])
    full = S.local_cup_pairing(C2, M, M, B, M)
    assert full.perfect and full.h2_dim == 1
    assert full.matrix.ravel().tolist() == [1]
    assert full.annihilator.shape[0] == 0
    zero = S.local_cup_pairing(C2, M, M, B, M, np.zeros((0, 1), dtype=np.int64))
    assert zero.annihilator.tolist() == [[1]]


def test_dual_selmer_degenerate_place_reported():
    rho = rep("B6_p3")
    for cond in ("full", "zero"):
        setup = S.setup_from_representation(rho, [("v", [1])], (), {"v": cond}, chi=rho.det())
        ds = S.dual_selmer(setup)
        assert ds.verified
        assert ds.dimension == ds.h1_dual == 0
        assert ds.degenerate_places == []


def test_wiles_formula_balances_with_T():
    rho = rep("S3_p5")
    setup = S.setup_from_representation(rho, [("v", [2])], ("v",), {})
    out = S.wiles_formula_report(setup, {"archimedean_h0": [], "duality_holds": True})
    assert out["direct_h1_ST"] == out["rhs"] == 1
    assert out["residual"] == 0 and out["asserted"]


def test_wiles_formula_reports_residual():
    rho = rep("S3_p5")
    setup = S.setup_from_representation(rho, [("v", [1]), ("inf", [2], True)], (), {"v": "full"})
    out = S.wiles_formula_report(setup, {"archimedean_h0": [1]})
    assert out["computed_archimedean_h0"] == [1]
    assert out["residual"] == out["direct_h1_ST"] - out["rhs"]
    assert out["degenerate_pairings"] == ["v"]
    with pytest.raises(S.SelmerError):
        S.wiles_formula_report(setup, {})
    with pytest.raises(S.SelmerError):
        S.wiles_formula_report(setup, {"archimedean_h0": []})
