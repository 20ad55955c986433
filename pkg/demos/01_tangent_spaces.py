"""Liftings to the dual numbers are cocycles.

Take rhobar: S3 -> GL2(F5), enumerate every lifting to F5[e]/(e^2) by brute
force, and compare the count with the cocycle space of ad rhobar.  Then
group the liftings into deformation classes and compare with H^1.
"""

import numpy as np

from twkbench.deformation import (LiftingProblem, deformation_classes, dual_numbers, enumerate_liftings,
                                  tangent_report)
from twkbench.groups import generate_group
from twkbench.matrix import Matrix
from twkbench.rings import prime_field

p = 5
F = prime_field(p)
gens = [[[0, 1], [1, 0]], [[0, 4], [1, 4]]]
G = generate_group([Matrix.from_rows(F, g) for g in gens], name="S3")
problem = LiftingProblem(G, p, [np.array(g) for g in gens], name="S3 in GL2(F5)")

lifts = enumerate_liftings(problem, dual_numbers(p))
rep = tangent_report(problem)
print(f"|G| = {G.order}, liftings to F5[e]: {len(lifts)}")
print(f"dim Z1 = {rep['dim_Z1']}, so p^dim Z1 = {p ** rep['dim_Z1']}")
print(f"identity: {rep['identity']}  ({'holds' if rep['identity_holds'] else 'FAILS'})")

orbits = deformation_classes(lifts)
print(f"deformation classes: {len(orbits)} = p^dim H1 = {p ** rep['dim_H1']}")

fixed = LiftingProblem(G, p, [np.array(g) for g in gens], fixed_det=True, name="fixed det")
rep0 = tangent_report(fixed)
print(f"with fixed determinant the module is {rep0['module']}; dim Z1 = {rep0['dim_Z1']}")
