"""Hecke operators at a prime q on unramified principal series.

Coset representatives for T and S come with a certificate.  Summing the
spherical vector over them reproduces the closed forms symbolically, and at
Iwahori level U is lower triangular with the expected diagonal.
"""

from twkbench.hecke import (closed_form, spherical_eigenvalue, symbolic_field, symbols, u_minus_b_check,
                            unramified_model, verify_double_coset)

for q in (2, 3, 5):
    K = symbolic_field(q)
    a, b, c, s = symbols(K)
    for op in "TS":
        cert = verify_double_coset(op, q)
        ev = spherical_eigenvalue(op, ("principal", a, b), q, cert, K)
        print(f"q={q} {op}: {len(cert.reps)} cosets, certificate {cert.valid}, eigenvalue {ev}, "
              f"closed form matches {ev == closed_form(op, ('principal', a, b), K)}")
    out = u_minus_b_check(unramified_model(q, K))
    print(f"      U = {out['U']}; (U - s beta) phi_0 on the s alpha line: {out['in_eigenline']}")
