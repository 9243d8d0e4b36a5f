import json
import math

import numpy as np
import pytest

from bpdo import decomp, spaces
from bpdo.grid import SampledField, SampledSymbol
from bpdo.samples import gaussian_field, random_field, random_symbol, unit_l2
from bpdo.verify import constants as C
from bpdo.verify import ensemble, lemmas, suites, trace


@pytest.fixture(scope="module")
def table():
    t = C.load_constants()
    if not t["constants"]:
        pytest.skip("constants table not frozen")
    return t


# ---------------------------------------------------------------- weak-type sums

def test_product_lweak_delta():
    d = np.array([1.0])
    assert lemmas.check_product_lweak(d, d, d, d, d, 4, 4) == pytest.approx(1.0)


def test_product_lweak_homogeneity(rng):
    v = np.arange(-8, 9)
    f = (1.0 + v * v) ** (-1 / 8)
    A0, A1, A2 = rng.random(33), rng.random(17), rng.random(17)
    base = lemmas.check_product_lweak(f, f, A0, A1, A2, 4, 4)
    scaled = lemmas.check_product_lweak(3.7 * f, f, 0.2 * A0, A1, A2, 4, 4)
    assert abs(scaled - base) <= 1e-12 * base


def test_product_lweak_against_double_loop(rng):
    v = np.arange(-5, 6)
    f1, f2 = rng.random(11), rng.random(11)
    A0, A1, A2 = rng.random(21), rng.random(11), rng.random(11)
    lhs = sum(f1[i] * f2[j] * A0[10 + v[i] + v[j]] * A1[i] * A2[j] for i in range(11) for j in range(11))
    rhs = (spaces.weak_seq_norm(f1, 3).value * spaces.weak_seq_norm(f2, 6).value
           * np.linalg.norm(A0) * np.linalg.norm(A1) * np.linalg.norm(A2))
    assert lemmas.check_product_lweak(f1, f2, A0, A1, A2, 3, 6) == pytest.approx(lhs / rhs, rel=1e-12)


@pytest.mark.parametrize("p1,p2", [(2, 4), (4, 5), (math.inf, 2)])
def test_product_lweak_exponents(p1, p2):
    d = np.array([1.0])
    with pytest.raises(ValueError):
        lemmas.check_product_lweak(d, d, d, d, d, p1, p2)


def test_product_lweak_zero_rhs():
    d, z = np.array([1.0]), np.array([0.0])
    with pytest.raises(ValueError, match="vanishes"):
        lemmas.check_product_lweak(d, d, z, d, d, 4, 4)


def test_product_lweak_small_ensemble():
    r = lemmas.product_lweak_ensemble(seed=3, trials=300)
    assert np.all(np.isfinite(r)) and r.max() < 1.5


# ---------------------------------------------------------------- window equivalence

def test_cube_window_is_exact(grid, rng):
    f = random_field(grid, rng)
    for p, q in ((2, 1), (1, 1), (2, 2)):
        assert lemmas.check_amalgam_equiv(f, lemmas.cube_window, p, q, 3.0) == pytest.approx(1, abs=1e-12)


def test_window_ratio_translation(grid):
    a = lemmas.check_amalgam_equiv(gaussian_field(grid, 1.0, 0.0), lemmas.gaussian_window, 2, 1, 2.0)
    b = lemmas.check_amalgam_equiv(gaussian_field(grid, 1.0, 2.0), lemmas.gaussian_window, 2, 1, 2.0)
    assert abs(a - b) < 1e-8


def test_window_hypotheses(grid):
    f = gaussian_field(grid)
    with pytest.raises(lemmas.WindowHypothesisError):
        lemmas.check_amalgam_equiv(f, lambda x: (np.abs(x) > 0.25).astype(float), 2, 1, 2.0)
    with pytest.raises(lemmas.WindowHypothesisError):
        lemmas.check_amalgam_equiv(f, lemmas.gaussian_window, 2, 1, 1.0)
    with pytest.raises(lemmas.WindowHypothesisError):
        lemmas.check_amalgam_equiv(f, lambda x: 1 / (1 + x * x), 2, 1, 3.0)


# ---------------------------------------------------------------- averaging operator

def test_s_properties_small(grid):
    rep = lemmas.check_s_properties(seed=5, members=10, grid=grid)
    assert rep.prop1_residual < 1e-6
    assert rep.C2 <= 4
    assert 1 <= rep.C3 < 1.2
    assert 0 < rep.C4 < 1


def test_s_prop3_power_weight(grid):
    # f = <x>^-2, p = 1: lattice sum of S f against its integral
    f = SampledField(grid, 1 / (1 + grid.x ** 2))
    assert lemmas.s_prop3_ratio(f, 1) == pytest.approx(1.0, abs=0.1)


# ---------------------------------------------------------------- sup against local L^2

def test_constant_piece_ratio(grid):
    piece = SampledSymbol.from_spectrum(grid, [np.zeros(1)] * 3, np.full((1, 1, 1), 2.0 + 0j))
    assert lemmas.check_l2ul_linfty(piece, (0, 0, 0)) == pytest.approx(1.0, abs=1e-12)


def test_piece_ratio_modulation(grid, pair, rng):
    sigma = random_symbol(grid, rng, (1, 1, 1))
    piece = decomp.symbol_box((0, 1, 0), sigma, pair)
    a = lemmas.check_l2ul_linfty(piece, (0, 1, 0))
    b = lemmas.check_l2ul_linfty(piece.modulated((1, 0, -1)), (1, 1, -1))
    assert a >= 1 - 1e-8 and abs(a - b) < 1e-8


def test_piece_outside_box_rejected(grid, rng):
    sigma = random_symbol(grid, rng, (2, 2, 2))
    with pytest.raises(ValueError, match="not frequency-localised"):
        lemmas.check_l2ul_linfty(sigma, (0, 0, 0))


# ---------------------------------------------------------------- duality

def test_duality_consistency(grid, pair, rng, table):
    f1, f2 = random_field(grid, rng), random_field(grid, rng)
    h = SampledField(grid, f1.values * f2.values)
    direct, sampled, window = lemmas.check_duality(h, pair.theta.func_1d, rng, n_samples=50)
    assert sampled <= window * (1 + 1e-12)
    assert direct >= sampled / table["constants"]["duality.C"]


# ---------------------------------------------------------------- proof trace

def _product_instance(grid):
    one = SampledSymbol.from_spectrum(grid, [np.zeros(1)] * 3, np.ones((1, 1, 1), complex), fsupp_radii=(1, 1, 1))
    f = gaussian_field(grid, 1.0, fsupp_radius=4)
    g = unit_l2(gaussian_field(grid, 1.5, 0.5, fsupp_radius=4))
    return one, f, g


def test_trace_product_case(grid, pair, table):
    one, f, g = _product_instance(grid)
    tr = trace.proof_trace(one, f, f, g, 0, pair, 0.25, 0.25)
    direct = grid.x_step * np.sum(pair.theta.func_1d(grid.x) * f.values ** 2 * g.values)
    assert abs(tr.I_value - direct) < 1e-6
    assert abs(tr.I_decomposed - tr.I_value) < 1e-6
    rows = tr.check(table["constants"])
    assert [r[0] for r in rows] == list(trace.STEP_LABELS)
    assert all(r[-1] for r in rows), [r for r in rows if not r[-1]]
    assert np.all(tr.A0 >= 0) and np.all(tr.A1 >= 0) and np.all(tr.A2 >= 0) and tr.II_value >= 0


def test_trace_random_instance(grid, pair, table):
    sigma, f1, f2, g, mu, s1, s2 = suites.trace_instance(9, 3, grid)
    tr = trace.proof_trace(sigma, f1, f2, g, mu, pair, s1, s2)
    assert abs(tr.I_decomposed - tr.I_value) < 1e-6
    assert abs(tr.I_transferred - tr.I_value) < 1e-6
    assert tr.support_leakage < 1e-6
    assert all(r[-1] for r in tr.check(table["constants"]))
    json.dumps(tr.to_dict())


def test_trace_preconditions(grid, pair):
    one, f, g = _product_instance(grid)
    with pytest.raises(ValueError, match="s1 \\+ s2"):
        trace.proof_trace(one, f, f, g, 0, pair, 0.3, 0.3)
    with pytest.raises(ValueError, match="unit"):
        trace.proof_trace(one, f, f, gaussian_field(grid, 1.0, fsupp_radius=4), 0, pair, 0.25, 0.25)
    with pytest.raises(ValueError, match="support radius"):
        trace.proof_trace(one, SampledField(grid, f.values), f, g, 0, pair, 0.25, 0.25)
    with pytest.raises(ValueError, match="trigonometric"):
        trace.proof_trace(SampledSymbol.from_function(grid, lambda x, a, b: 1.0 + 0 * x), f, f, g, 0, pair, 0.25, 0.25)


def test_a0_bracket(grid, table):
    g = unit_l2(random_field(grid, np.random.default_rng(4)))
    ratios = [trace.a0_ratio(g, R) for R in (1, 2, 4)]
    c = table["constants"]["trace.a0_bracket"]
    assert all(1 / c <= r <= c for r in ratios)


# ---------------------------------------------------------------- ensembles

def test_search_objective_matches_operator(grid, rng):
    sigma = random_symbol(grid, rng, (1, 2, 1))
    search = ensemble.BasisSearch(sigma, 0.25, 0.25)
    val, a, c = search.run(rng, restarts=2, steps=40)
    f1, f2 = search.fields(a, c)
    direct = ensemble.prop_ratio(sigma, f1, f2, 0.25, 0.25) * ensemble._radius_factor(sigma) \
        * spaces.uniform_local_l2(sigma).value
    assert val == pytest.approx(direct, rel=1e-10)


def test_prop_ratio_product_case(grid):
    one, f, _ = _product_instance(grid)
    r = ensemble.prop_ratio(one, f, f, 0.25, 0.25)
    expect = spaces.amalgam_norm(SampledField(grid, f.values ** 2), 2, 1).value \
        / spaces.sobolev_norm(f, 0.25).value ** 2
    assert r == pytest.approx(expect, rel=1e-9)


def test_prop_ratio_phase_and_translation(grid, rng):
    sigma = random_symbol(grid, rng, (2, 1, 1))
    ul = spaces.uniform_local_l2(sigma).value
    f1, f2 = gaussian_field(grid, 1.2, 0.0, 0.5, fsupp_radius=4), gaussian_field(grid, 1.5, 1.0, -0.5, fsupp_radius=4)
    base = ensemble.prop_ratio(sigma, f1, f2, 0.25, 0.25, ul)
    rotated = ensemble.prop_ratio(sigma.scaled(np.exp(0.7j)), f1, f2, 0.25, 0.25, ul)
    assert abs(rotated - base) < 1e-8 * base
    a = 2
    g1 = gaussian_field(grid, 1.2, a, 0.5, fsupp_radius=4)
    g2 = gaussian_field(grid, 1.5, 1.0 + a, -0.5, fsupp_radius=4)
    moved = ensemble.prop_ratio(sigma.translated_x(a), g1, g2, 0.25, 0.25, ul)
    assert abs(moved - base) < 1e-8 * base


def test_theorem_ratio_swap(grid, rng):
    sigma = random_symbol(grid, rng, (1, 1, 1))
    f1, f2 = random_field(grid, rng), random_field(grid, rng)
    m = spaces.modulation_norm(sigma, math.inf, 1).value
    a = ensemble.theorem_ratio(sigma, f1, f2, 0.125, 0.375, m)
    b = ensemble.theorem_ratio(sigma.swapped(), f2, f1, 0.375, 0.125, m)
    assert abs(a - b) < 1e-8 * a
    m_sw = spaces.modulation_norm(sigma.swapped(), math.inf, 1).value
    assert m_sw == pytest.approx(m, rel=1e-10)


def test_theorem_ratio_product_case(grid):
    one = SampledSymbol.from_spectrum(grid, [np.zeros(1)] * 3, np.ones((1, 1, 1), complex))
    f = gaussian_field(grid, 1.0, fsupp_radius=4)
    r = ensemble.theorem_ratio(one, f, f, 0.25, 0.25)
    expect = spaces.amalgam_norm(SampledField(grid, f.values ** 2), 2, 1).value \
        / spaces.sobolev_norm(f, 0.25).value ** 2
    assert r == pytest.approx(expect, rel=1e-9)


@pytest.mark.parametrize("cfg", [
    {"trials": 5}, {"restarts": 3}, {"triples": [(1, 3, 1)]}, {"s": (0.3, 0.3)}, {"triples": []},
])
def test_prop_config_minimums(cfg):
    with pytest.raises(ValueError):
        ensemble.estimate_prop_constant(cfg)


def test_theorem_config_validation():
    with pytest.raises(ValueError):
        ensemble.check_theorem({"s_pairs": [(0.5, 0.5)]})
    with pytest.raises(ValueError):
        ensemble.check_theorem({"rs": [3.0]})


def test_prop_single_triple(table):
    stats = ensemble.estimate_prop_constant({"triples": [(1, 1, 1)], "seed": 2})
    assert stats.trials == 20 and len(stats.rows) == 20
    assert stats.max_ratio <= table["constants"]["prop.C_prop"]
    assert stats.fitted_exponents == {}


def test_fit_exponents_recovers_slope():
    rows = [{"R0": r, "R1": 1, "R2": 1, "norm_est": 3 * r ** 0.5} for r in (1, 2, 4)]
    assert ensemble.fit_exponents(rows)["R0"] == pytest.approx(0.5)


def test_ensemble_stats_rejects_bad_ratios():
    with pytest.raises(ValueError):
        ensemble.EnsembleStats.from_rows([{"ratio": 0.0}])
    with pytest.raises(ValueError):
        ensemble.EnsembleStats.from_rows([])


# ---------------------------------------------------------------- constants and reports

def test_constants_env_override(tmp_path, monkeypatch):
    path = tmp_path / "c.json"
    C.write_constants({"x": 2.0}, {"x": 1.6}, path)
    monkeypatch.setenv(C.ENV_VAR, str(path))
    assert C.constants_path() == path
    assert C.get_constant("x") == 2.0
    with pytest.raises(KeyError, match="freeze"):
        C.get_constant("y")


def test_constants_version_check(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"version": 99, "constants": {}}))
    with pytest.raises(ValueError, match="version"):
        C.load_constants(path)
    assert C.load_constants(tmp_path / "missing.json")["constants"] == {}


def test_frozen_table_contents(table):
    consts = table["constants"]
    assert consts["s_operator.C2"] == 4.0
    for key, measured in table["measured"].items():
        if key != "s_operator.C2":
            assert consts[key] == pytest.approx(measured * C.HEADROOM)


def test_reports_are_deterministic(tmp_path, grid):
    outs = []
    for name in ("a", "b"):
        res = suites.run_suites(["identities"], seed=1, grid=grid)
        paths = suites.write_reports(res, tmp_path / name, {"seed": 1})
        outs.append({p.name: p.read_bytes() for p in paths})
    assert outs[0] == outs[1]
    assert all(c.passed for r in res for c in r.checks)


def test_unknown_suite():
    with pytest.raises(ValueError):
        suites.run_suite("nope")
    with pytest.raises(ValueError):
        suites.run_suite("identities", seed=-1)


def test_structured_trace_instances_hold(grid, pair, table):
    for i in range(6):
        sigma, f1, f2, g, mu, s1, s2 = suites.structured_instance(i, grid)
        assert sigma.spectrum.coeffs.shape == (1, 1, 1)
        tr = trace.proof_trace(sigma, f1, f2, g, mu, pair, s1, s2)
        assert abs(tr.I_decomposed - tr.I_value) < 1e-6
        assert all(r[-1] for r in tr.check(table["constants"]))
