"""Construct a tower of free modules, hide it in random bases, recover it.

Each level is (J/c_M)^k for the group algebra J = Z/p^M[(Z/p^M)^r], written
in a random basis.  Patching picks a stabilising subsequence by fingerprint,
identifies every chosen level with the standard free module and checks the
diagram chase between depths.  A tower with some collapsed levels shows the
majority vote at work.
"""

from twkbench import patching as P

tower = P.truncation_tower(3, 1, 2, 2, 4, seed=0)
res = P.patch(tower)
print("round trip ok:", res.ok, "ranks:", res.free_ranks, "chosen levels:", res.chosen)
print("regular sequence:", [[(v.element, v.regular) for v in lev] for lev in res.regular])
print(res.limit_claim)

mixed = P.truncation_tower(3, 1, 2, 2, 6, seed=2, odd_class="collapsed")
res = P.patch(mixed)
print("surviving levels:", res.subsequence, "fingerprint counts:", res.fingerprints[0])

model = P.DoubleCosetModel(5, 2, {"a": [], "b": [[[0, 1], [-1, -1]]]}, (4, 0))
print("base change:", P.base_change_check(model, 1))

fixed = P.permutation_module([[(x + g) % 3 if x < 3 else 3 for x in range(4)] for g in range(3)], 4)
rep = P.group_ring_freeness(fixed, 3)
print("Z/3 acting with a fixed point: free =", rep.free, "witness =", rep.witness)
