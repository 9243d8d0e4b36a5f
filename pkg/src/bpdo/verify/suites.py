"""Verification suites, frozen-constant checks and deterministic reports.

A suite measures a set of named quantities and compares each against a
bound: a theoretical value where one is known, otherwise an entry of the
frozen constants table.  The same measurements feed :mod:`bpdo.verify.freeze`.

Reports are plain CSV and JSON with floats written by ``repr``, so equal
seeds and configurations give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .. import decomp, samples, spaces
from ..grid import (GridSpec, SampledField, SampledSymbol, default_grid, fourier_forward,
                    fourier_inverse)
from ..op import bilinear_apply
from . import ensemble, lemmas, trace
from .constants import load_constants

__all__ = ["CheckResult", "SuiteResult", "SUITES", "run_suite", "run_suites", "write_reports",
           "trace_instance", "structured_instance"]

STATEMENT = {
    "identities": "Fourier conventions",
    "partition": "partition of unity",
    "amalgam_window": "Lemma 2.1",
    "s_operator_1": "Lemma 3.1(1)",
    "s_operator_2": "Lemma 3.1(2)",
    "s_operator_3": "Lemma 3.1(3)",
    "s_operator_4": "Lemma 3.1(4)",
    "lweak_product": "Lemma 3.2",
    "sup_l2ul": "Remark 4.2",
    "duality": "Proposition 4.1 (duality)",
    "spaces": "space equivalences",
    "prop": "Proposition 4.1",
    "trace": "Proposition 4.1 (proof chain)",
    "theorem": "Theorem 1.1",
    "corollary": "Theorem 1.1 (L^r embedding)",
}


@dataclass
class CheckResult:
    """One ``value <= bound`` (or ``>= bound``) comparison."""

    name: str
    statement: str
    passed: bool
    value: float
    bound: float
    sense: str = "<="

    def message(self) -> str:
        verdict = "ok" if self.passed else "FAILED"
        return f"[{verdict}] {self.statement}: {self.name} = {self.value:.6g} (bound {self.sense} {self.bound:.6g})"

    def row(self) -> list:
        return [self.name, self.statement, "pass" if self.passed else "fail", repr(float(self.value)),
                self.sense, repr(float(self.bound))]


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class _Context:
    def __init__(self, seed: int, grid: GridSpec, table: Mapping, options: Mapping):
        self.seed, self.grid, self.table, self.options = seed, grid, table, dict(options or {})
        self.result = None

    def bound(self, key: str) -> Optional[float]:
        consts = self.table.get("constants", {})
        return float(consts[key]) if key in consts else None

    def upper(self, name, statement_key, value, bound, measure_key=None):
        """Record ``value <= bound``; ``bound`` is a number or a constants-table key."""
        if measure_key is not None:
            self.result.measured[measure_key] = float(value)
        b = self.bound(bound) if isinstance(bound, str) else bound
        passed = b is not None and bool(value <= b)
        self.result.checks.append(CheckResult(name, STATEMENT[statement_key], passed, float(value),
                                              math.nan if b is None else float(b)))

    def lower(self, name, statement_key, value, bound):
        passed = bool(value >= bound)
        self.result.checks.append(CheckResult(name, STATEMENT[statement_key], passed, float(value),
                                              float(bound), ">="))


def _rng(seed, *stream):
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def _fields(ctx, stream, count):
    rng = _rng(ctx.seed, stream)
    return [samples.random_field(ctx.grid, rng) for _ in range(count)]


# ---------------------------------------------------------------- suites

def _suite_identities(ctx: _Context) -> None:
    g = ctx.grid
    fields = _fields(ctx, 101, 5)
    one = SampledSymbol.constant(g, 1.0)
    err = 0.0
    for f1, f2 in zip(fields[:-1], fields[1:]):
        out = bilinear_apply(one, f1, f2).values
        ref = f1.values * f2.values
        err = max(err, float(np.max(np.abs(out - ref)) / np.max(np.abs(ref))))
    ctx.upper("product_identity_rel_err", "identities", err, 1e-6)

    gauss = SampledField(g, np.exp(-g.x ** 2 / 2).astype(complex))
    F = fourier_forward(gauss).values
    ref = math.sqrt(2 * math.pi) * np.exp(-g.xi ** 2 / 2)
    ctx.upper("gaussian_pair_rel_err", "identities", float(np.max(np.abs(F - ref)) / ref.max()), 1e-6)

    planch, trip = 0.0, 0.0
    for f in fields:
        l2 = spaces.lp_norm(f, 2).value
        fl2 = spaces.sobolev_norm(f, 0.0).value
        planch = max(planch, abs(fl2 / l2 - 1))
        back = fourier_inverse(fourier_forward(f)).values
        trip = max(trip, float(np.max(np.abs(back - f.values)) / np.max(np.abs(f.values))))
    ctx.upper("plancherel_rel_err", "identities", planch, 1e-6)
    ctx.upper("round_trip_rel_err", "identities", trip, 1e-6)

    pair = decomp.build_sugimoto_pair(1)
    xi = np.linspace(-g.xi_halfwidth, g.xi_halfwidth, 4001)
    ks = np.arange(-int(g.xi_halfwidth) - 2, int(g.xi_halfwidth) + 3)
    phi_sum = sum(pair.phi.func_1d(xi - k) for k in ks)
    kc_sum = sum(pair.kappa.func_1d(xi - k) * pair.chi.func_1d(xi - k) for k in ks)
    ctx.upper("phi_partition_residual", "partition", float(np.max(np.abs(phi_sum - 1))), 1e-10)
    ctx.upper("kappa_chi_partition_residual", "partition", float(np.max(np.abs(kc_sum - 1))), 1e-10)


def _suite_lemmas(ctx: _Context) -> None:
    g = ctx.grid
    rep = lemmas.check_s_properties(ctx.seed, grid=g)
    ctx.upper("S_prop1_residual", "s_operator_1", rep.prop1_residual, 1e-6)
    ctx.upper("S_prop2_C2", "s_operator_2", rep.C2, "s_operator.C2", "s_operator.C2")
    ctx.upper("S_prop3_C3", "s_operator_3", rep.C3, "s_operator.C3", "s_operator.C3")
    ctx.upper("S_prop4_C4", "s_operator_4", rep.C4, "s_operator.C4", "s_operator.C4")

    trials = int(ctx.options.get("lweak_trials", 10_000))
    r32 = lemmas.product_lweak_ensemble(ctx.seed, trials=trials)
    ctx.upper("product_lweak_max_ratio", "lweak_product", float(r32.max()), "lweak_product.C", "lweak_product.C")
    ctx.result.summary["lweak_product"] = {"trials": trials, "max": float(r32.max()), "median": float(np.median(r32))}

    amal = lemmas.amalgam_equiv_ensemble(ctx.seed, grid=g)
    spread = max(max(float(r.max()), 1 / float(r.min())) for r in amal.values())
    ctx.upper("amalgam_window_bracket", "amalgam_window", spread, "amalgam_window.C", "amalgam_window.C")
    exact = max(abs(lemmas.check_amalgam_equiv(f, lemmas.cube_window, p, q, 2.0) - 1)
                for f in _fields(ctx, 102, 3) for p, q in ((2, 1), (1, 1)))
    ctx.upper("amalgam_cube_window_exact", "amalgam_window", exact, 1e-12)

    ks, ratios = lemmas.l2ul_linfty_ensemble(ctx.seed, grid=g)
    ctx.lower("sup_over_l2ul_min", "sup_l2ul", float(ratios.min()), 1 - 1e-8)
    ctx.upper("sup_over_l2ul_max", "sup_l2ul", float(ratios.max()), "sup_l2ul.C_eq", "sup_l2ul.C_eq")
    ctx.result.tables["sup_l2ul"] = (["piece", "k0", "k1", "k2", "ratio"],
                                      [[i, *k, repr(float(r))] for i, (k, r) in enumerate(zip(ks, ratios))])

    dual = lemmas.duality_ensemble(ctx.seed, grid=g)
    ctx.upper("duality_sampled_over_direct", "duality", float(np.max(dual[:, 1] / dual[:, 0])),
              "duality.C", "duality.C")
    ctx.upper("duality_sampled_over_window", "duality", float(np.max(dual[:, 1] / dual[:, 2])), 1 + 1e-12)

    cal = lemmas.calibrate_spaces(ctx.seed, grid=g)
    ctx.lower("mod22_over_l2_min", "spaces", float(cal["mod22"].min()), 1 / math.sqrt(2) - 1e-9)
    ctx.upper("mod22_over_l2_max", "spaces", float(cal["mod22"].max()), 1 + 1e-9)
    for key in ("h1", "box_sobolev"):
        r = cal[key]
        ctx.upper(f"{key}_bracket", "spaces", max(float(r.max()), 1 / float(r.min())), f"spaces.{key}.C",
                  f"spaces.{key}.C")


def trace_instance(seed: int, index: int, grid: Optional[GridSpec] = None):
    """Seeded ``(sigma, f1, f2, g, mu, s1, s2)`` for the proof-chain suite."""
    grid = grid or default_grid()
    rng = _rng(seed, 301, index)
    radii = tuple(float(rng.choice([1.0, 2.0])) for _ in range(3))
    sigma = samples.random_symbol(grid, rng, radii)
    f1, f2 = samples.random_field(grid, rng), samples.random_field(grid, rng)
    g = samples.unit_l2(samples.random_field(grid, rng))
    mu = int(rng.integers(-4, 5))
    s1, s2 = ((0.25, 0.25), (0.125, 0.375))[index % 2]
    return sigma, f1, f2, g, mu, s1, s2


#: single-mode symbols (eta, y1, y2), Gaussian widths of (f1, f2, g), centres of (f1, f2, g),
#: modulation of g and mu; a constant symbol with Gaussian data is the case random symbols miss
_STRUCTURED = (
    ((0.0, 0.0, 0.0), (1.0, 1.0, 1.5), (0.0, 0.0, 0.5), 0.0, 0),
    ((0.0, 0.0, 0.0), (2.0, 1.5, 1.5), (-1.0, 1.0, 0.0), 0.5, 1),
    ((0.5, 0.0, 0.0), (1.5, 1.5, 2.0), (0.0, 0.5, 0.0), 0.0, -1),
    ((0.0, 0.5, -0.5), (2.0, 2.0, 1.5), (0.5, -0.5, 0.0), -0.5, 0),
    ((1.0, 0.5, 0.5), (1.0, 2.0, 2.0), (0.0, 0.0, 1.0), 0.5, 2),
    ((0.0, 1.0, 0.0), (1.5, 1.0, 1.0), (-0.5, 0.0, -0.5), 0.0, -2),
)


def structured_instance(index: int, grid: Optional[GridSpec] = None):
    """Deterministic ``(sigma, f1, f2, g, mu, s1, s2)`` with a single-mode symbol and Gaussian data."""
    grid = grid or default_grid()
    mode, widths, centres, omega, mu = _STRUCTURED[index % len(_STRUCTURED)]
    sigma = SampledSymbol.from_spectrum(grid, [np.array([m]) for m in mode], np.ones((1, 1, 1), complex),
                                        fsupp_radii=(1.0, 1.0, 1.0))
    f1 = samples.gaussian_field(grid, widths[0], centres[0], fsupp_radius=4)
    f2 = samples.gaussian_field(grid, widths[1], centres[1], fsupp_radius=4)
    g = samples.unit_l2(samples.gaussian_field(grid, widths[2], centres[2], omega, fsupp_radius=4))
    s1, s2 = ((0.25, 0.25), (0.125, 0.375))[index % 2]
    return sigma, f1, f2, g, mu, s1, s2


def _suite_trace(ctx: _Context) -> None:
    g = ctx.grid
    pair = decomp.build_sugimoto_pair(g.dim)
    n = int(ctx.options.get("trace_instances", 10))
    n_struct = int(ctx.options.get("trace_structured", len(_STRUCTURED)))
    worst: dict = {}
    rows = []
    consts = ctx.table.get("constants", {})
    decomp_err = 0.0
    cases = [(f"random-{i}", trace_instance(ctx.seed, i, g)) for i in range(n)]
    cases += [(f"structured-{i}", structured_instance(i, g)) for i in range(n_struct)]
    for name, (sigma, f1, f2, gg, mu, s1, s2) in cases:
        tr = trace.proof_trace(sigma, f1, f2, gg, mu, pair, s1, s2)
        decomp_err = max(decomp_err, abs(tr.I_decomposed - tr.I_value))
        for label, lhs, rhs, c, ok in tr.check(consts):
            rows.append([name, label, repr(lhs), repr(rhs), repr(c), "pass" if ok else "fail"])
        for label, r in tr.ratios().items():
            worst[label] = max(worst.get(label, 0.0), r)
        worst["support_leakage"] = max(worst.get("support_leakage", 0.0), tr.support_leakage)
    ctx.result.tables["trace_steps"] = (["instance", "label", "lhs", "rhs", "C", "status"], rows)
    ctx.upper("decomposed_I_abs_err", "trace", decomp_err, 1e-6)
    ctx.upper("transfer_support_leakage", "trace", worst.pop("support_leakage"), 1e-6)
    for label in trace.STEP_LABELS:
        if label in trace.THEORETICAL:
            ctx.upper(f"step_{label}", "trace", worst[label], trace.THEORETICAL[label])
        else:
            key = f"trace.{label}"
            ctx.upper(f"step_{label}", "trace", worst[label], key, key)
    rng = _rng(ctx.seed, 302)
    gs = [samples.unit_l2(samples.random_field(g, rng)) for _ in range(3)]
    a0 = [trace.a0_ratio(gg, R) for gg in gs for R in (1, 2, 4)]
    ctx.upper("a0_bracket", "trace", max(max(a0), 1 / min(a0)), "trace.a0_bracket", "trace.a0_bracket")


def _prop_config(ctx: _Context) -> ensemble.PropConfig:
    opts = {k: ctx.options[k] for k in ("triples", "trials", "restarts", "steps", "s") if k in ctx.options}
    return ensemble.PropConfig.coerce({**opts, "seed": ctx.seed, "grid": ctx.grid})


def _suite_prop(ctx: _Context) -> None:
    stats = ensemble.estimate_prop_constant(_prop_config(ctx))
    limit = ctx.grid.dim / 2 + 0.15
    for name in ("R0", "R1", "R2"):
        if name in stats.fitted_exponents:
            ctx.upper(f"growth_exponent_{name}", "prop", stats.fitted_exponents[name], limit)
    ctx.upper("max_ratio", "prop", stats.max_ratio, "prop.C_prop", "prop.C_prop")
    ctx.result.tables["prop_trials"] = (
        ["trial", "R0", "R1", "R2", "ratio"],
        [[r["trial"], r["R0"], r["R1"], r["R2"], repr(r["ratio"])] for r in stats.rows])
    fit_rows = []
    for name in ("R0", "R1", "R2"):
        values = sorted({r[name] for r in stats.rows})
        for v in values:
            peak = max(r["norm_est"] for r in stats.rows if r[name] == v)
            fit_rows.append([name, v, repr(peak), repr(stats.fitted_exponents.get(name, math.nan))])
    ctx.result.tables["prop_fit"] = (["param", "R", "max_norm_est", "slope"], fit_rows)
    ctx.result.summary["prop"] = stats.summary()


def _theorem_config(ctx: _Context) -> ensemble.TheoremConfig:
    keys = ("s_pairs", "random_symbols", "piece_symbols", "radii_choices", "restarts", "steps", "rs")
    opts = {k: ctx.options[k] for k in keys if k in ctx.options}
    return ensemble.TheoremConfig.coerce({**opts, "seed": ctx.seed, "grid": ctx.grid})


def _suite_theorem(ctx: _Context) -> None:
    cfg = _theorem_config(ctx)
    stats = ensemble.check_theorem(cfg)
    ctx.upper("max_ratio", "theorem", stats.max_ratio, "theorem.C_thm", "theorem.C_thm")
    ctx.upper("h1_max_ratio", "theorem", stats.extra["h1_max"], "theorem.C_h1", "theorem.C_h1")
    ctx.upper("embedding_chain_worst", "corollary", stats.extra["chain_worst"], 1 + 1e-12)
    rs = list(cfg.rs)
    header = ["trial", "kind", "symbol", "s1", "s2", "ratio", "h1_ratio"]
    header += [f"Lr{r:g}" for r in rs] + [f"L2l{r:g}" for r in rs]
    ctx.result.tables["theorem_trials"] = (header, [
        [r["trial"], r["kind"], r["symbol"], repr(r["s1"]), repr(r["s2"]), repr(r["ratio"]), repr(r["h1_ratio"])]
        + [repr(r[f"Lr{v:g}"]) for v in rs] + [repr(r[f"L2l{v:g}"]) for v in rs]
        for r in stats.rows])
    # modulation covariance: |T| and the M^{inf,1} norm are unchanged by e^{i x k0}
    rng = _rng(ctx.seed, 401)
    sigma = samples.random_symbol(ctx.grid, rng, (1.0, 1.0, 1.0))
    f1, f2 = samples.random_field(ctx.grid, rng), samples.random_field(ctx.grid, rng)
    s1, s2 = cfg.s_pairs[0]
    vals = [ensemble.theorem_ratio(sigma.modulated((k0, 0.0, 0.0)), f1, f2, s1, s2) for k0 in (0, 1, 2)]
    spread = max(vals) / min(vals)
    ctx.upper("modulation_bracket", "theorem", spread, "theorem.C_mod", "theorem.C_mod")
    ctx.result.summary["theorem"] = stats.summary()


SUITES: dict = {
    "identities": _suite_identities,
    "lemmas": _suite_lemmas,
    "trace": _suite_trace,
    "prop": _suite_prop,
    "theorem": _suite_theorem,
}
ORDER = ("identities", "lemmas", "trace", "prop", "theorem")


def run_suite(name: str, seed: int = 0, grid: Optional[GridSpec] = None, table: Optional[Mapping] = None,
              options: Optional[Mapping] = None) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(ORDER)} or all")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    ctx = _Context(seed, grid or default_grid(), load_constants() if table is None else table, options)
    ctx.result = SuiteResult(name)
    SUITES[name](ctx)
    return ctx.result


def run_suites(names: Sequence[str], seed: int = 0, grid: Optional[GridSpec] = None,
               table: Optional[Mapping] = None, options: Optional[Mapping] = None,
               progress: Optional[Callable[[str], None]] = None) -> list:
    expanded = []
    for n in names:
        expanded.extend(ORDER if n == "all" else [n])
    out = []
    for n in dict.fromkeys(expanded):
        if progress:
            progress(n)
        out.append(run_suite(n, seed, grid, table, options))
    return out


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, GridSpec):
        return obj.as_dict()
    return obj


def write_reports(results: Sequence[SuiteResult], out_dir: os.PathLike, config: Mapping) -> list:
    """Write ``checks.csv``, one CSV per table and ``summary.json``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    rows = [[r.name, *c.row()] for r in results for c in r.checks]
    p = out / "checks.csv"
    _write_csv(p, ["suite", "check", "statement", "status", "value", "sense", "bound"], rows)
    paths.append(p)
    for r in results:
        for tname, (header, trows) in r.tables.items():
            p = out / f"{tname}.csv"
            _write_csv(p, header, trows)
            paths.append(p)
    summary = {
        "config": _jsonable(config),
        "passed": all(r.passed for r in results),
        "suites": {r.name: {"passed": r.passed, "summary": _jsonable(r.summary),
                            "failed": [c.name for c in r.checks if not c.passed]} for r in results},
    }
    p = out / "summary.json"
    with open(p, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(p)
    return paths
