"""The local ring at a prime q = 1 mod p, counted two ways.

The tame quotient is generated by Phi and Sigma with Phi Sigma Phi^-1 =
Sigma^q.  Lifting diag(1, 2) gives a presentation with four variables and a
single relation in u.  Its points over a small Artinian ring are counted
from the presentation and compared against an exhaustive search through
pairs of matrices.
"""

from twkbench.deformation import dual_numbers, galois_test_ring
from twkbench.local_tame import ihara_coincidence, m_trace_example, tw_count_report, tw_universal_ring

pres = tw_universal_ring(1, 2, 11, p=5)
print("relators:", pres.relators)
print("tangent dimension:", pres.tangent_dimension())

for p, q in [(5, 11), (5, 31), (7, 29)]:
    for A in (dual_numbers(p), galois_test_ring(p, 2)):
        rep = tw_count_report(1, 2, q, A)
        print(f"p={p} q={q} over {A.name}: presentation {rep['presentation_maps']}, "
              f"brute force {rep['brute_force']}, same sets: {rep['sets_equal']}")

# residually trivial liftings: the unipotent and zeta conditions agree mod lambda
out = ihara_coincidence(dual_numbers(5), 11)
print(f"{out['liftings']} liftings over {out['ring']}, discrepancies {out['discrepancies']}")
print("trace identity on Z/25 solutions:", m_trace_example(5, 11))
