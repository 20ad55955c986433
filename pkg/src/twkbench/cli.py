"""Batch front end: scenario files in, JSON reports out.

Exit status is 0 when every check passes, 1 when an invariant or oracle
comparison fails and 2 for unreadable or schema-invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__

SCENARIO_SCHEMA = "twkbench.scenario/1"
REPORT_SCHEMA = "twkbench.report/1"
SUITES = ("monodromy", "deformation", "selmer", "tw", "hecke", "patch", "all")

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class ScenarioError(ValueError):
    """Schema or input problem; ``where`` names the offending field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class Flags:
    seed: int = 0
    max_group_order: int = 60000
    budget_cells: int = 20000
    oracle: bool = True


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------

def plain(x: Any) -> Any:
    """Canonical JSON form; ring elements and matrix entries become strings."""
    from .hecke import PAdicMatrix
    from .matrix import Matrix
    from .rings import Elt

    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Elt):
        return str(x)
    if isinstance(x, Matrix):
        return [[str(e) for e in row] for row in x.rows]
    if isinstance(x, PAdicMatrix):
        return x.to_json()
    if isinstance(x, np.ndarray):
        return plain(x.tolist())
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    return repr(x)


def _get(d: dict, key: str, where: str, kind: type | tuple | None = None):
    if not isinstance(d, dict) or key not in d:
        raise ScenarioError(f"{where}.{key}", "missing required field")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ScenarioError(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return v


class Recorder:
    """Collects outputs, checks and oracle comparisons for one scenario."""

    def __init__(self):
        self.outputs: dict = {}
        self.checks: list[dict] = []
        self.oracles: list[dict] = []

    def check(self, name: str, ok, provenance: str = "INVARIANT", detail: Any = None):
        entry = {"name": name, "ok": bool(ok), "provenance": provenance}
        if detail is not None:
            entry["detail"] = plain(detail)
        self.checks.append(entry)

    def compare(self, name: str, ours, oracle, provenance: str):
        self.oracles.append({"name": name, "ours": plain(ours), "oracle": plain(oracle),
                             "ok": plain(ours) == plain(oracle), "provenance": provenance})


# ---------------------------------------------------------------------------
# Input builders
# ---------------------------------------------------------------------------

def build_group(spec: dict, flags: Flags, where: str = "inputs.group"):
    from .groups import cyclic_group, generate_group
    from .matrix import Matrix
    from .rings import ring_from_spec

    kind = _get(spec, "kind", where, str)
    if kind == "cyclic":
        G = cyclic_group(int(_get(spec, "n", where, int)))
    elif kind == "matrix":
        R = ring_from_spec(_get(spec, "ring", where, dict))
        gens = _get(spec, "generators", where, list)
        if not gens:
            raise ScenarioError(f"{where}.generators", "need at least one generator")
        G = generate_group([Matrix.from_rows(R, g) for g in gens], cap=flags.max_group_order + 1,
                           name=spec.get("name", "G"))
    else:
        raise ScenarioError(f"{where}.kind", f"unknown group kind {kind!r}")
    if G.order > flags.max_group_order:
        raise ScenarioError(where, f"group order {G.order} exceeds --max-group-order {flags.max_group_order}")
    return G


def build_module(spec: dict, G, p: int, where: str = "inputs.module"):
    from .cohomology import GModule, Representation, adjoint_module

    kind = _get(spec, "kind", where, str)
    if kind == "trivial":
        return GModule.trivial(G, p, int(spec.get("dim", 1)))
    if kind == "generators":
        return GModule.from_generators(G, p, _get(spec, "matrices", where, list))
    if kind in ("tautological", "adjoint"):
        rho = Representation.tautological(G)
        if kind == "tautological":
            return rho.as_module()
        return adjoint_module(rho, fixed_det=bool(spec.get("fixed_det", False)))
    raise ScenarioError(f"{where}.kind", f"unknown module kind {kind!r}")


def build_test_ring(spec: dict, where: str = "inputs.ring"):
    from .deformation import dual_numbers, galois_test_ring, truncated_eps, two_eps

    kind = _get(spec, "kind", where, str)
    p = int(_get(spec, "p", where, int))
    table = {
        "dual_numbers": lambda: dual_numbers(p),
        "galois": lambda: galois_test_ring(p, int(spec.get("k", 2))),
        "truncated_eps": lambda: truncated_eps(p, int(spec.get("k", 3))),
        "two_eps": lambda: two_eps(p),
    }
    if kind not in table:
        raise ScenarioError(f"{where}.kind", f"unknown test ring {kind!r}")
    return table[kind]()


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def op_cohomology(inp: dict, flags: Flags, rec: Recorder):
    from .cohomology import cocycle_from_generator_values, cohomology
    from .tw_search import is_crossed_hom

    G = build_group(_get(inp, "group", "inputs", dict), flags)
    p = int(_get(inp, "p", "inputs", int))
    M = build_module(_get(inp, "module", "inputs", dict), G, p)
    degrees = inp.get("degrees", [0, 1])
    dims = {}
    for i in degrees:
        res = cohomology(G, M, int(i), budget=flags.budget_cells)
        dims[f"H{i}"] = res.dimension
        if i == 1:
            dims["Z1"] = res.cocycle_dim
            rec.check("Z1 = H1 + B1", res.cocycle_dim == res.dim + res.coboundary_dim)
    rec.outputs.update({"group_order": G.order, "module_dim": M.dim, **dims})
    if "expect" in inp:
        for k, v in inp["expect"].items():
            rec.compare(f"expected {k}", dims.get(k), v, "DERIVED")
    if flags.oracle and 1 in degrees:
        k = len(G.gens) * M.dim
        if p ** k > 200_000:
            rec.check("brute-force cocycle oracle skipped (too many candidates)", True, "ORACLE")
            return
        count = 0
        for idx in range(p ** k):
            x = np.array([(idx // p ** j) % p for j in range(k)], dtype=np.int64)
            if is_crossed_hom(G, M, cocycle_from_generator_values(G, M, x)):
                count += 1
        rec.compare("#Z1 by brute force", p ** dims["Z1"], count, "ORACLE: crossed-homomorphism enumeration")


def op_tangent(inp: dict, flags: Flags, rec: Recorder):
    from .deformation import LiftingProblem, dual_numbers, enumerate_liftings, tangent_report

    G = build_group(_get(inp, "group", "inputs", dict), flags)
    p = G.matrix_ring.n
    rhobar = [np.array([[int(x) for x in row] for row in g], dtype=np.int64)
              for g in inp["group"]["generators"]]
    prob = LiftingProblem(G, p, rhobar, fixed_det=bool(inp.get("fixed_det", False)))
    rep = tangent_report(prob)
    rec.outputs.update({"group_order": G.order, **rep})
    rec.check("dim Z1 = dim H1 + n^2 - dim H0 (module dimension for ad0)", rep["identity_holds"])
    if flags.oracle:
        lifts = enumerate_liftings(prob, dual_numbers(p))
        rec.compare("#liftings to F[eps] = #Z1", p ** rep["dim_Z1"], len(lifts),
                    "ORACLE: exhaustive lifting enumeration")


def op_tw_count(inp: dict, flags: Flags, rec: Recorder):
    from .local_tame import tw_count_report

    p = int(_get(inp, "p", "inputs", int))
    q = int(_get(inp, "q", "inputs", int))
    A = build_test_ring(_get(inp, "ring", "inputs", dict))
    if A.p != p:
        raise ScenarioError("inputs.ring.p", "residue characteristic differs from p")
    rep = tw_count_report(int(inp.get("alphabar", 1)), int(inp.get("betabar", 2)), q, A, inp.get("chi"))
    rec.outputs.update(rep)
    rec.check("presentation points specialise onto the lifting set", rep["sets_equal"])
    if flags.oracle:
        rec.compare("presentation map count vs brute force", rep["presentation_maps"], rep["brute_force"],
                    "ORACLE: local-tame hom-count")
    if "expect" in inp:
        rec.compare("expected count", rep["presentation_maps"], inp["expect"], "DERIVED")


def op_ihara(inp: dict, flags: Flags, rec: Recorder):
    from .local_tame import ihara_coincidence

    A = build_test_ring(_get(inp, "ring", "inputs", dict))
    rep = ihara_coincidence(A, int(_get(inp, "q", "inputs", int)))
    rec.outputs.update(rep)
    rec.check("D_1 and D_zeta agree", rep["discrepancies"] == 0, "DERIVED")
    rec.check("unramified lifts lie in D_1", rep["ur_inside_D1"])


def op_monodromy(inp: dict, flags: Flags, rec: Recorder):
    from .local_tame import rescaling_check, wd_functor
    from .matrix import Matrix
    from .rings import ring_from_spec
    from .weil_deligne import check_wd_relation

    R = ring_from_spec(_get(inp, "ring", "inputs", dict))
    q = int(_get(inp, "q", "inputs", int))
    Phi = Matrix.from_rows(R, _get(inp, "phi", "inputs", list))
    Sig = Matrix.from_rows(R, _get(inp, "sigma", "inputs", list))
    wd = wd_functor(Phi, Sig, q)
    rec.outputs.update({"N": wd.n_op, "r_sigma": wd.r.sigma, "r_phi": wd.r.phi})
    rec.check("Phi N Phi^-1 = q^-1 N", check_wd_relation(wd.r, wd.n_op))
    for key, val in (("expect_N", wd.n_op), ("expect_r_sigma", wd.r.sigma)):
        if key in inp:
            rec.compare(key, val, Matrix.from_rows(R, inp[key]), "REFERENCE")
    if "u" in inp:
        res = rescaling_check(wd, int(inp["u"]))
        rec.outputs["rescaled_N"] = res["rescaled_N"]
        rec.outputs["conjugator"] = res["conjugator"]
        rec.check("u-rescaled output is isomorphic", res["isomorphic"], "DERIVED")


def op_wd_roundtrip(inp: dict, flags: Flags, rec: Recorder):
    from .rings import rationals
    from .weil_deligne import (WeilRep, decompose, direct_sum, frobenius_ss, is_bounded, is_isomorphic,
                               lattice_stabilized, sp_m)

    Q = rationals()
    q = int(_get(inp, "q", "inputs", int))
    l = int(inp.get("l", 5))
    blocks = _get(inp, "blocks", "inputs", list)
    parts = []
    for b in blocks:
        parts.append(sp_m(WeilRep.character(Q, Fraction(str(b["value"])), q), int(b["m"])))
    wd = direct_sum(parts)
    dec = decompose(wd)
    rebuilt = direct_sum([sp_m(r, m) for r, m in dec])
    ss = frobenius_ss(wd)
    rec.outputs.update({"dim": wd.dim, "decomposition": [{"phi": r.phi, "m": m} for r, m in dec]})
    rec.check("sp_m / decompose round trip", is_isomorphic(wd, rebuilt))
    rec.check("frobenius_ss idempotent", frobenius_ss(ss).r.phi == ss.r.phi)
    rec.check("frobenius_ss keeps the characteristic polynomial", ss.r.phi.charpoly() == wd.r.phi.charpoly())
    bounded = is_bounded(wd, l)
    rec.outputs["bounded"] = bounded
    if flags.oracle and wd.dim == 2:
        rec.compare("boundedness vs lattice stabilisation", bounded, lattice_stabilized(wd, l),
                    "ORACLE: lattice saturation")


def op_selmer(inp: dict, flags: Flags, rec: Recorder):
    from .cohomology import Representation
    from . import selmer as S

    G = build_group(_get(inp, "group", "inputs", dict), flags)
    rho = Representation.tautological(G)
    places = [(pl["label"], pl["generators"], bool(pl.get("archimedean", False)))
              for pl in inp.get("places", [])]
    chi = rho.det() if inp.get("chi") == "det" else None
    setup = S.setup_from_representation(rho, places, inp.get("T", []), inp.get("conditions", {}), chi=chi)
    sc = S.build_selmer_complex(setup, budget=flags.budget_cells)
    les = S.long_exact_sequence(sc)
    eul = S.euler_report(sc)
    flag = S.h0_flag(sc)
    rec.outputs.update({"group_order": G.order, "h_ST": [sc.total.h_dim(i) for i in range(S.TOP + 1)],
                        "euler": {k: eul[k] for k in ("chi_ST", "rhs")}, "h0_flag": flag})
    rec.check("d^2 = 0", all(c.d_squared_zero() for c in (sc.global_complex, sc.shifted_local, sc.total)))
    rec.check("long exact sequence exact at every node", all(n["exact"] for n in les))
    rec.check("Euler characteristic identity", eul["identity_holds"] and eul["complex_split"])
    if "expect_flag" in inp:
        rec.compare("H0_ST discrepancy flag", flag["discrepancy"], inp["expect_flag"], "DERIVED")


def op_tw_search(inp: dict, flags: Flags, rec: Recorder):
    from . import tw_search as T

    ctx = T.gl2_context(int(inp.get("p", 5)))
    if ctx.gamma.order > flags.max_group_order:
        raise ScenarioError("inputs.p", f"context order {ctx.gamma.order} exceeds --max-group-order")
    r = int(inp.get("r", 3))
    Q = T.build_tw_set(ctx, r)
    cen = T.census(ctx, Q)
    rec.outputs.update({"Q": Q, "h1_q": T.h1_q(ctx, Q), "census": cen})
    rec.check("h1_q(Q) = 0", rec.outputs["h1_q"] == 0)
    rec.check("obstruction census empty", not any(cen.values()))
    if flags.oracle:
        rec.compare("h1_q by coboundary test", rec.outputs["h1_q"], T.h1_q_independent(ctx, Q),
                    "ORACLE: independent kernel computation")


def op_hecke(inp: dict, flags: Flags, rec: Recorder):
    from . import hecke as H

    q = int(_get(inp, "q", "inputs", int))
    K = H.symbolic_field(q)
    a, b, c, s = H.symbols(K)
    certs = {}
    for kind in ("T", "S", "U_Iwahori"):
        reps = H.coset_reps(kind, q)
        if inp.get("corrupt") == kind and len(reps) > 1:
            reps[1] = reps[0]
        cert = H.verify_double_coset(kind, q, seed=flags.seed, reps=reps)
        certs[kind] = cert
        rec.check(f"{kind} coset certificate", cert.valid, "DERIVED", {"representatives": len(cert.reps)})
    rec.compare("#T representatives", len(certs["T"].reps), q + 1, "REFERENCE")
    rec.compare("#S representatives", len(certs["S"].reps), 1, "REFERENCE")
    if not (certs["T"].valid and certs["S"].valid):
        return
    for op in ("T", "S"):
        for rep in (("principal", a, b), ("one_dim", c)):
            diff = H.spherical_eigenvalue(op, rep, q, certs[op], K) - H.closed_form(op, rep, K)
            rec.check(f"{op} eigenvalue on {rep[0]} equals closed form", diff.is_zero(), "REFERENCE")
    chk = H.u_minus_b_check(H.unramified_model(q, K))
    rec.outputs["U_matrix"] = chk["U"]
    rec.check("U triangular", chk["triangular"], "REFERENCE")
    rec.check("(U - s beta) phi_0 lies in the s alpha eigenline", chk["in_eigenline"] and chk["nonzero"], "REFERENCE")


def op_patch(inp: dict, flags: Flags, rec: Recorder):
    from . import patching as P

    p = int(inp.get("p", 3))
    tower = P.truncation_tower(p, int(inp.get("r", 1)), int(inp.get("k", 1)), int(inp.get("depth", 2)),
                               int(inp.get("levels", 4)), seed=flags.seed + int(inp.get("seed", 0)),
                               odd_class=inp.get("odd_class"), random_basis=bool(inp.get("random_basis", True)))
    res = P.patch(tower, threshold=int(inp.get("threshold", 2)))
    rec.outputs.update({"chosen": res.chosen, "subsequence": res.subsequence, "fingerprints": res.fingerprints,
                        "free_ranks": res.free_ranks, "pigeonhole_bound": res.pigeonhole_bound,
                        "limit_claim": res.limit_claim})
    rec.check("levels free of the base rank", all(c.free for c in res.certificates)
              and res.free_ranks == [tower.k] * tower.depth)
    rec.check("quotient by a_inf recovers the base", all(res.quotient_matches_base))
    rec.check("diagram chase across depths", all(res.compatible))
    rec.check("(lambda, y_1..y_r) regular at every depth", all(v.regular for lev in res.regular for v in lev))


def op_base_change(inp: dict, flags: Flags, rec: Recorder):
    from . import patching as P

    model = P.DoubleCosetModel(int(_get(inp, "p", "inputs", int)), int(inp.get("K", 2)),
                               _get(inp, "groups", "inputs", dict), tuple(inp.get("weight", (2, 0))))
    out = P.base_change_check(model, int(inp.get("m", 1)))
    rec.outputs.update(out)
    rec.check("S(U,O) (x) A = S(U,A)", out["ok"], "REFERENCE")
    if flags.oracle:
        for label in model.groups:
            mats = model.weight_action(label) % model.p ** model.K
            brute = P.fixed_points_bruteforce(mats, model.p, model.K)
            proj = P.space_of_forms(model).bases[label]
            rec.check(f"projector image = brute-force fixed points ({label})",
                      P.same_span(proj, brute, model.p, model.K), "ORACLE: fixed-point solve")


def op_group_ring(inp: dict, flags: Flags, rec: Recorder):
    from . import patching as P

    action = _get(inp, "action", "inputs", list)
    mats = P.permutation_module(action, int(_get(inp, "points", "inputs", int)))
    rep = P.group_ring_freeness(mats, int(_get(inp, "p", "inputs", int)))
    rec.outputs.update({"free": rep.free, "rank": rep.rank, "witness": rep.witness, "basis": rep.basis})
    if "expect_free" in inp:
        rec.compare("freeness verdict", rep.free, inp["expect_free"], "DERIVED")
    rec.check("certificate present", rep.basis is not None if rep.free else rep.witness is not None)


OPERATIONS: dict[tuple[str, str], Callable] = {
    ("group-cohomology", "cohomology"): op_cohomology,
    ("deformation-core", "tangent"): op_tangent,
    ("local-tame", "tw_count"): op_tw_count,
    ("local-tame", "ihara"): op_ihara,
    ("local-tame", "monodromy"): op_monodromy,
    ("weil-deligne", "roundtrip"): op_wd_roundtrip,
    ("selmer", "complex"): op_selmer,
    ("tw-search", "build_tw_set"): op_tw_search,
    ("hecke-gl2", "certificates"): op_hecke,
    ("automorphic-patch", "patch"): op_patch,
    ("automorphic-patch", "base_change"): op_base_change,
    ("automorphic-patch", "group_ring_freeness"): op_group_ring,
}


# ---------------------------------------------------------------------------
# Scenarios and reports
# ---------------------------------------------------------------------------

def parse_scenario(text: str, source: str = "<scenario>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    if not isinstance(data, dict):
        raise ScenarioError(source, "top level must be an object")
    schema = _get(data, "schema", "scenario", str)
    if schema != SCENARIO_SCHEMA:
        raise ScenarioError("scenario.schema", f"expected {SCENARIO_SCHEMA!r}, got {schema!r}")
    _get(data, "name", "scenario", str)
    module = _get(data, "module", "scenario", str)
    op = _get(data, "operation", "scenario", str)
    if (module, op) not in OPERATIONS:
        raise ScenarioError("scenario.operation", f"unknown operation {module}/{op}")
    _get(data, "inputs", "scenario", dict)
    return data


def load_scenario(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read: {exc.strerror}") from exc
    return parse_scenario(text, str(path))


def run_scenario(sc: dict, flags: Flags, timing: bool = False) -> dict:
    """Run one parsed scenario.  Input errors propagate as :class:`ScenarioError`."""
    rec = Recorder()
    fl = Flags(**{**flags.__dict__})
    if "oracle" in sc:
        fl.oracle = fl.oracle and bool(sc["oracle"])
    if "seed" in sc:
        fl.seed = fl.seed + int(sc["seed"])
    for k, v in sc.get("budgets", {}).items():
        if not isinstance(v, int) or v <= 0:
            raise ScenarioError(f"scenario.budgets.{k}", "budgets must be positive integers")
        if k == "cells":
            fl.budget_cells = min(fl.budget_cells, v)
    t0 = time.perf_counter()
    try:
        OPERATIONS[(sc["module"], sc["operation"])](sc["inputs"], fl, rec)
    except ScenarioError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioError(f"scenario {sc['name']}", f"{type(exc).__name__}: {exc}") from exc
    elapsed = time.perf_counter() - t0
    verdict = all(c["ok"] for c in rec.checks) and all(o["ok"] for o in rec.oracles)
    report = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "scenario": sc["name"],
        "module": sc["module"],
        "operation": sc["operation"],
        "seed": fl.seed,
        "oracle": fl.oracle,
        "inputs": plain(sc["inputs"]),
        "outputs": plain(rec.outputs),
        "checks": rec.checks,
        "oracle_comparisons": rec.oracles,
        "verdict": "pass" if verdict else "fail",
    }
    if timing:
        report["timing_seconds"] = round(elapsed, 3)
    return report


def bundled_corpus() -> Path:
    return Path(str(resources.files("twkbench") / "scenarios"))


def suite_scenarios(name: str, corpus: Path | None = None) -> list[dict]:
    if name not in SUITES:
        raise ScenarioError("--suite", f"unknown suite {name!r}")
    corpus = corpus or bundled_corpus()
    files = sorted(corpus.glob("*.json")) if corpus.is_dir() else []
    if not files:
        raise ScenarioError("--suite", f"no scenario corpus at {corpus}")
    out = []
    for f in files:
        sc = load_scenario(f)
        if name == "all" or sc.get("suite") == name:
            out.append(sc)
    return sorted(out, key=lambda s: s["name"])


def _run_one(args):
    sc, flags, timing = args
    try:
        return run_scenario(sc, flags, timing)
    except ScenarioError as exc:
        return {"schema": REPORT_SCHEMA, "scenario": sc["name"], "verdict": "error", "error": str(exc)}


def run_suite(name: str, flags: Flags, corpus: Path | None = None, workers: int = 1,
              timing: bool = False) -> dict:
    scenarios = suite_scenarios(name, corpus)
    jobs = [(sc, flags, timing) for sc in scenarios]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    failed = [r["scenario"] for r in reports if r["verdict"] != "pass"]
    return {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "suite": name,
        "seed": flags.seed,
        "reports": reports,
        "failed": failed,
        "verdict": "pass" if not failed else ("error" if any(r["verdict"] == "error" for r in reports)
                                              and all(r["verdict"] != "fail" for r in reports) else "fail"),
    }


def markdown_summary(report: dict) -> str:
    reports = report.get("reports", [report])
    title = f"suite `{report['suite']}`" if "suite" in report else f"scenario `{report['scenario']}`"
    lines = [f"# twkbench report: {title}", "", f"Verdict: **{report['verdict']}**", "",
             "| scenario | module | verdict | checks | oracle |", "|---|---|---|---|---|"]
    for r in reports:
        checks = r.get("checks", [])
        orc = r.get("oracle_comparisons", [])
        lines.append(f"| {r['scenario']} | {r.get('module', '-')} | {r['verdict']} | "
                     f"{sum(c['ok'] for c in checks)}/{len(checks)} | {sum(o['ok'] for o in orc)}/{len(orc)} |")
    bad = [(r["scenario"], c["name"]) for r in reports for c in r.get("checks", []) + r.get("oracle_comparisons", [])
           if not c["ok"]]
    errors = [(r["scenario"], r["error"]) for r in reports if "error" in r]
    if bad or errors:
        lines += ["", "## Failures", ""]
        lines += [f"- {s}: {n}" for s, n in bad]
        lines += [f"- {s}: {e}" for s, e in errors]
    return "\n".join(lines) + "\n"


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def exit_code(report: dict) -> int:
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL}.get(report["verdict"], EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twkbench", description="Run scenario files or bundled suites.")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    src.add_argument("--suite", choices=SUITES, help="run a bundled suite")
    ap.add_argument("--out", metavar="PATH", help="write the JSON report here (default: stdout)")
    ap.add_argument("--markdown", metavar="PATH", help="also write a Markdown summary")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-group-order", type=int, default=60000)
    ap.add_argument("--budget-cells", type=int, default=20000)
    ap.add_argument("--oracle", choices=("on", "off"), default="on")
    ap.add_argument("--workers", type=int, default=1, help="parallel scenarios within a suite")
    ap.add_argument("--corpus", metavar="DIR", help="scenario directory for --suite (default: bundled)")
    ap.add_argument("--timing", action="store_true", help="record wall-clock time (reports stop being reproducible)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.max_group_order <= 0 or args.budget_cells <= 0 or args.workers <= 0:
            raise ScenarioError("flags", "budgets and worker counts must be positive")
        flags = Flags(args.seed, args.max_group_order, args.budget_cells, args.oracle == "on")
        if args.scenario:
            report = run_scenario(load_scenario(args.scenario), flags, args.timing)
        else:
            report = run_suite(args.suite, flags, Path(args.corpus) if args.corpus else None,
                               args.workers, args.timing)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.markdown:
        Path(args.markdown).write_text(markdown_summary(report))
    if report["verdict"] != "pass":
        failed = report.get("failed", [report.get("scenario")])
        print(f"{report['verdict']}: {', '.join(failed)}", file=sys.stderr)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
