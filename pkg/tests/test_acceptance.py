"""Acceptance criteria, one test per criterion, each printing a pass/fail line.

Tolerances are pinned here; the implicit constants come from the frozen table.
The ensemble criteria take several minutes in total.
"""
import json
import time

import numpy as np
import pytest

from bpdo import cli
from bpdo.verify import constants as C
from bpdo.verify import lemmas, run_suite


@pytest.fixture(scope="module")
def table():
    t = C.load_constants()
    if not t["constants"]:
        pytest.skip("constants table not frozen")
    return t


def _checks(result, *names):
    by_name = {c.name: c for c in result.checks}
    return [by_name[n] for n in names]


def _detail(checks):
    return ", ".join(f"{c.name}={c.value:.3g}" for c in checks)


def test_1_analytic_identities(acceptance):
    t0 = time.perf_counter()
    res = run_suite("identities", seed=0, table={"constants": {}})
    elapsed = time.perf_counter() - t0
    cs = _checks(res, "product_identity_rel_err", "gaussian_pair_rel_err", "plancherel_rel_err",
                 "round_trip_rel_err")
    ok = all(c.passed and c.value < 1e-6 for c in cs) and elapsed < 10.0
    assert acceptance(1, "analytic identities within 1e-6 in under 10 s", ok, f"{_detail(cs)}, {elapsed:.1f} s")


def test_2_partition_identities(acceptance):
    res = run_suite("identities", seed=0, table={"constants": {}})
    cs = _checks(res, "phi_partition_residual", "kappa_chi_partition_residual")
    ok = all(c.value < 1e-10 for c in cs)
    assert acceptance(2, "partition residuals below 1e-10", ok, _detail(cs))


@pytest.fixture(scope="module")
def lemma_result(table):
    t0 = time.perf_counter()
    res = run_suite("lemmas", seed=0, table=table)
    return res, time.perf_counter() - t0


def test_3_averaging_operator_properties(acceptance, lemma_result, table):
    res, _ = lemma_result
    cs = _checks(res, "S_prop1_residual", "S_prop2_C2", "S_prop3_C3", "S_prop4_C4")
    c2 = table["constants"]["s_operator.C2"]
    ok = all(c.passed for c in cs) and cs[1].value <= 4.0 and c2 <= 4.0
    assert acceptance(3, "averaging operator properties (1)-(4) on 50-member ensembles, C2 <= 4", ok, _detail(cs))


def test_4_product_weak_bound(acceptance, table):
    t0 = time.perf_counter()
    ratios = lemmas.product_lweak_ensemble(0, trials=10_000, window=32, p1=4.0, p2=4.0)
    elapsed = time.perf_counter() - t0
    bound = table["constants"]["lweak_product.C"]
    ok = len(ratios) == 10_000 and bool(np.all(np.isfinite(ratios))) and ratios.max() <= bound and elapsed < 60
    assert acceptance(4, "weak-l product bound over 1e4 trials, p1=p2=4, |nu|<=32, under 60 s", ok,
                      f"max={ratios.max():.3g} <= {bound:.3g}, {elapsed:.1f} s")


def test_5_bilinear_scaling(acceptance, table):
    t0 = time.perf_counter()
    res = run_suite("prop", seed=0, table=table)
    elapsed = time.perf_counter() - t0
    cs = _checks(res, "growth_exponent_R0", "growth_exponent_R1", "growth_exponent_R2", "max_ratio")
    header, rows = res.tables["prop_trials"]
    per_triple = {}
    for r in rows:
        per_triple[tuple(r[1:4])] = per_triple.get(tuple(r[1:4]), 0) + 1
    ok = (all(c.passed for c in cs) and all(c.value <= 0.65 for c in cs[:3]) and len(per_triple) == 27
          and min(per_triple.values()) >= 20 and elapsed <= 15 * 60)
    assert acceptance(5, "scaling exponents <= 0.65 and ratios below C_prop over {1,2,4}^3", ok,
                      f"{_detail(cs)}, {elapsed:.0f} s")


def test_6_proof_trace(acceptance, table):
    res = run_suite("trace", seed=0, table=table)
    _, rows = res.tables["trace_steps"]
    instances = {r[0] for r in rows if r[0].startswith("random-")}
    decomp = _checks(res, "decomposed_I_abs_err")[0]
    ok = res.passed and len(instances) == 10 and all(r[-1] == "pass" for r in rows) and decomp.value <= 1e-6
    failed = [r[1] for r in rows if r[-1] != "pass"]
    assert acceptance(6, "every traced step holds on 10 seeded instances plus structured cases, decomposed I within 1e-6", ok,
                      f"decomp_err={decomp.value:.2g}, failed={failed}")


def test_7_main_bound_and_embeddings(acceptance, table):
    res = run_suite("theorem", seed=0, table=table)
    cs = _checks(res, "max_ratio", "embedding_chain_worst")
    _, rows = res.tables["theorem_trials"]
    pairs = {(float(r[3]), float(r[4])) for r in rows}
    ok = all(c.passed for c in cs) and pairs == {(0.25, 0.25), (0.125, 0.375)} and cs[1].value <= 1 + 1e-12
    assert acceptance(7, "Sobolev-to-amalgam bound below C_thm and embedding chain with constant 1", ok,
                      _detail(cs))


def test_8_sup_versus_local_l2(acceptance, lemma_result):
    res, _ = lemma_result
    cs = _checks(res, "sup_over_l2ul_min", "sup_over_l2ul_max")
    _, rows = res.tables["sup_l2ul"]
    window = {tuple(r[1:4]) for r in rows}
    ok = all(c.passed for c in cs) and len(rows) == 100 and cs[0].value >= 1 - 1e-8 and len(window) == 27
    assert acceptance(8, "sup/L2ul ratio within [1-1e-8, C_eq] over 100 pieces in a 3^3 window", ok,
                      _detail(cs))


def test_9_determinism(acceptance, table, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lweak_trials": 2000}))
    codes = [cli.main(["run", "--suite", "identities", "lemmas", "trace", "--seed", "11", "--config", str(cfg),
                       "--out", str(tmp_path / name)]) for name in ("a", "b")]
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = names == sorted(p.name for p in (tmp_path / "b").iterdir()) and all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names)
    ok = codes == [0, 0] and same
    assert acceptance(9, "two runs with one seed give byte-identical reports", ok, f"{len(names)} files")
