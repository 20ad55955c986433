"""Selmer complexes for S3, then a set of auxiliary elements that kills H^1.

The first half builds the mapping-cone complex for a few choices of local
conditions and checks the long exact sequence and the Euler characteristic.
The second half searches a group of order 60000 standing in for a Galois
group for elements whose restriction kills the unique class.
"""

from twkbench import selmer as S
from twkbench import tw_search as TW
from twkbench.cohomology import Representation
from twkbench.groups import generate_group
from twkbench.matrix import Matrix
from twkbench.rings import prime_field

F = prime_field(5)
G = generate_group([Matrix.from_rows(F, [[0, -1], [1, -1]]), Matrix.from_rows(F, [[0, 1], [1, 0]])], name="S3")
rho = Representation.tautological(G)
for T, conds in [((), {"v": "full"}), ((), {"v": "zero"}), (("v",), {})]:
    sc = S.build_selmer_complex(S.setup_from_representation(rho, [("v", [1])], T, conds))
    les = S.long_exact_sequence(sc)
    eul = S.euler_report(sc)
    print(f"T={list(T)} conditions={conds}: H^i = {[sc.total.h_dim(i) for i in range(3)]}, "
          f"exact: {all(n['exact'] for n in les)}, Euler: {eul['identity_holds']}, "
          f"H0 flag: {S.h0_flag(sc)['discrepancy']}")

ctx = TW.gl2_context(5)
print("context order", ctx.gamma.order, "dim H1", ctx.h1()[0])
Q = TW.build_tw_set(ctx, 3)
print("Q =", Q, "h1_q =", TW.h1_q(ctx, Q), "independent:", TW.h1_q_independent(ctx, Q))
for x in Q:
    a, b, m = TW.tw_frobenius_data(x, ctx, 11)
    print(f"  element {x}: eigenvalues {a}, {b}")
