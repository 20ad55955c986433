"""From a pair (Phi, Sigma) to a Weil-Deligne representation and back.

A unipotent Sigma has a logarithm N.  The resulting pair satisfies
Phi N Phi^-1 = q^-1 N, and changing the normalisation of the tame generator
rescales N without changing the isomorphism class.  Over Q the
representation is decomposed into Sp_m blocks and rebuilt.
"""

from fractions import Fraction

from twkbench.local_tame import rescaling_check, wd_functor
from twkbench.matrix import Matrix
from twkbench.rings import galois_ring, rationals
from twkbench.weil_deligne import (WDRep, WeilRep, decompose, direct_sum, is_bounded, is_isomorphic,
                                   lattice_stabilized, sp_m)

R = galois_ring(5, 2)
wd = wd_functor(Matrix.diag(R, [1, 11]), Matrix.from_rows(R, [[1, 1], [0, 1]]), 11)
print("N =", wd.n_op, " r(sigma) =", wd.r.sigma)
print("rescaled by u=2:", rescaling_check(wd, 2)["isomorphic"])

Q = rationals()
rep = direct_sum([sp_m(WeilRep.character(Q, 2, 3), 2), sp_m(WeilRep.character(Q, 5, 3), 1)])
pieces = decompose(rep)
for r, m in pieces:
    print(f"Sp_{m} of Frobenius {r.phi}")
print("rebuilt is isomorphic:", is_isomorphic(rep, direct_sum([sp_m(r, m) for r, m in pieces])))

for phi in ([[1, 0], [0, 7]], [[Fraction(1, 5), 0], [0, 1]], [[0, 1], [-5, 0]]):
    w = WDRep(WeilRep.unramified(Q, Matrix.from_rows(Q, phi), 7), Matrix.zeros(Q, 2))
    print(phi, "bounded at 5:", is_bounded(w, 5), "lattice oracle:", lattice_stabilized(w, 5))
