import itertools

import numpy as np
import pytest

from twkbench import patching as P

BASE_CHANGE_MODELS = [
    # (p, K, m, weight, groups)
    (5, 2, 1, (4, 0), {"a": [], "b": [[[0, 1], [-1, -1]]]}),
    (5, 2, 1, (2, 0), {"a": [[[-1, 0], [0, -1]]]}),
    (7, 2, 1, (3, 1), {"a": [[[0, -1], [1, 0]]], "b": []}),
    (5, 3, 2, (5, 0), {"a": [[[0, -1], [1, 0]]], "b": [[[0, 1], [-1, -1]]]}),
    (3, 2, 1, (4, 0), {"a": [[[-1, 0], [0, 1]]], "b": [[[0, -1], [1, 0]]]}),
    (7, 2, 1, (6, 2), {"a": [[[0, 1], [-1, 1]]]}),
]


@pytest.mark.parametrize("p,K,m,weight,groups", BASE_CHANGE_MODELS)
def test_base_change(p, K, m, weight, groups):
    model = P.DoubleCosetModel(p, K, groups, weight)
    out = P.base_change_check(model, m)
    assert out["ok"] and out["rank_O"] == out["rank_A"]
    S = P.space_of_forms(model)
    for label in groups:
        brute = P.fixed_points_bruteforce(model.weight_action(label) % p ** K, p, K)
        assert P.same_span(S.bases[label], brute, p, K)


def test_base_change_ranks():
    model = P.DoubleCosetModel(5, 2, {"a": [], "b": [[[0, 1], [-1, -1]]]}, (4, 0))
    out = P.base_change_check(model, 1)
    assert out["rank_O"] == 4
    assert {k: v["rank_O"] for k, v in out["per_index"].items()} == {"a": 3, "b": 1}


def test_model_rejects_p_dividing_order():
    with pytest.raises(P.PatchError):
        P.DoubleCosetModel(3, 2, {"a": [[[1, 1], [0, 1]]]})
    with pytest.raises(P.PatchError):
        P.DoubleCosetModel(5, 2, {"a": []}, (1, 0))


def test_group_algebra_freeness():
    R, expo = P.group_algebra(3, 2, 1)
    assert P.freeness_over_group_algebra(R, expo).rank == 1
    assert P.freeness_over_group_algebra(P.direct_sum([R, R]), expo).rank == 2
    Q = R.quotient(R.image_rows(R.y(0)))
    cert = P.freeness_over_group_algebra(Q, expo)
    assert not cert.free and cert.reason


def test_regular_sequence():
    R, expo = P.group_algebra(3, 2, 1)
    F = P.direct_sum([R, R])
    assert all(v.regular for v in P.regular_sequence_check(F, R, expo, ["lambda", "y1"]))
    T = R.quotient(R.image_rows(R.mult_by_p()))
    lam, y1 = P.regular_sequence_check(T, R, expo, ["lambda", "y1"])
    assert not lam.regular and lam.witness is not None
    with pytest.raises(P.PatchError):
        P.regular_sequence_check(F, R, expo, ["z"])


def cyclic_action(n, blocks):
    out = []
    for g in range(n):
        out.append([b * n + (x + g) % n for b in range(blocks) for x in range(n)])
    return out


@pytest.mark.parametrize("n,p,blocks", [(3, 3, 1), (3, 3, 2), (9, 3, 1), (4, 2, 1), (2, 2, 3)])
def test_group_ring_free_cases(n, p, blocks):
    rep = P.group_ring_freeness(P.permutation_module(cyclic_action(n, blocks), n * blocks), p)
    assert rep.free and rep.rank == blocks


def test_group_ring_klein_four():
    elems = list(itertools.product(range(2), repeat=2))
    idx = {e: i for i, e in enumerate(elems)}
    action = [[idx[((a + x) % 2, (b + y) % 2)] for (x, y) in elems] for (a, b) in elems]
    assert P.group_ring_freeness(P.permutation_module(action, 4), 2).free


def test_group_ring_fixed_point_witness():
    action = [[(x + g) % 3 if x < 3 else 3 for x in range(4)] for g in range(3)]
    rep = P.group_ring_freeness(P.permutation_module(action, 4), 3)
    assert not rep.free
    assert rep.witness.tolist() == [0, 0, 0, 1]
    with pytest.raises(P.PatchError):
        P.group_ring_freeness(P.permutation_module(cyclic_action(2, 1), 2), 3)


@pytest.mark.parametrize("p,r,k,seed", [(3, 1, 1, 1), (3, 1, 2, 0), (2, 2, 1, 3), (5, 1, 1, 4)])
def test_patch_round_trip(p, r, k, seed):
    tower = P.truncation_tower(p, r, k, 2, 4, seed=seed)
    assert tower.validate() == []
    res = P.patch(tower)
    assert res.ok
    assert res.free_ranks == [k, k]
    for M, (phi, j) in enumerate(zip(res.isomorphisms, res.chosen), start=1):
        D = tower.levels[j][M]
        F, _, proj = P.standard_free(p, M, r, k)
        n = p ** M
        assert np.array_equal(D.proj @ phi % n, proj)
        for i in range(r):
            assert np.array_equal(D.module.ops[i] @ phi % n, phi @ F.ops[i] % n)
        P.inverse_mod_pk(phi % n, p, M)
    assert res.limit_claim.startswith("unverified")


def test_patch_majority_selection():
    tower = P.truncation_tower(3, 1, 2, 2, 6, seed=2, odd_class="collapsed")
    res = P.patch(tower)
    assert res.ok
    assert res.subsequence[0] == [0, 2, 3, 5]
    assert res.chosen[0] in res.subsequence[0]
    assert sorted(res.fingerprints[0].values()) == [2, 4]


def test_inverse_mod_pk():
    rng = np.random.default_rng(0)
    A = P._random_unimodular(4, 3, 2, rng)
    B = P.inverse_mod_pk(A, 3, 2)
    assert np.array_equal(A @ B % 9, np.eye(4, dtype=np.int64))
