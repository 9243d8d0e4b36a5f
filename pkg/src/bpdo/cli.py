"""Command-line runner: ``bpdo run | norms | apply | trace``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
configuration, input or validation errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import grid as grid_mod
from . import spaces
from .grid import GridSpec, SampledField, SampledSymbol, default_grid, make_grid

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

SUITE_CHOICES = ("identities", "lemmas", "trace", "prop", "theorem", "all")
CONFIG_KEYS = {
    "suite", "seed", "grid", "r_triples", "s1", "s2", "out", "trials", "restarts", "steps",
    "lweak_trials", "trace_instances", "trace_structured", "random_symbols", "piece_symbols",
}
DEFAULTS = {
    "suite": ["all"],
    "seed": 0,
    "grid": default_grid().as_dict(),
    "r_triples": None,
    "s1": None,
    "s2": None,
    "out": "reports",
    "trials": 20,
    "restarts": 10,
    "steps": 200,
    "lweak_trials": 10_000,
    "trace_instances": 10,
    "trace_structured": 6,
    "random_symbols": 6,
    "piece_symbols": 6,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- parsing helpers

def parse_grid(value) -> GridSpec:
    """``"dim,X,h,Xi,dxi"`` or a mapping with the ``GridSpec`` fields."""
    try:
        if isinstance(value, GridSpec):
            return value
        if isinstance(value, dict):
            return make_grid(**value)
        parts = [float(p) for p in str(value).split(",")]
        if len(parts) != 5:
            raise ValueError("expected dim,x_halfwidth,x_step,xi_halfwidth,xi_step")
        return make_grid(int(parts[0]), *parts[1:])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid {value!r}: {exc}") from None


def parse_triple(text) -> tuple:
    try:
        t = tuple(int(v) for v in (text.split(",") if isinstance(text, str) else text))
    except (TypeError, ValueError):
        raise ConfigError(f"bad radius triple {text!r}") from None
    if len(t) != 3:
        raise ConfigError(f"radius triple {text!r} must have three entries")
    return t


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


def resolve_run_config(args) -> dict:
    """Defaults, then the JSON config, then explicit flags."""
    cfg = dict(DEFAULTS)
    cfg.update(load_config(args.config))
    for key in ("suite", "seed", "grid", "r_triples", "s1", "s2", "out", "trials", "restarts"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if isinstance(cfg["suite"], str):
        cfg["suite"] = [cfg["suite"]]
    for s in cfg["suite"]:
        if s not in SUITE_CHOICES:
            raise ConfigError(f"unknown suite {s!r}; choose from {', '.join(SUITE_CHOICES)}")
    try:
        cfg["seed"] = int(cfg["seed"])
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {cfg['seed']!r}") from None
    if cfg["seed"] < 0:
        raise ConfigError("seed must be nonnegative")
    g = parse_grid(cfg["grid"])
    cfg["grid"] = g.as_dict()
    if (cfg["s1"] is None) != (cfg["s2"] is None):
        raise ConfigError("give both s1 and s2 or neither")
    if cfg["s1"] is not None:
        s1, s2 = float(cfg["s1"]), float(cfg["s2"])
        if s1 <= 0 or s2 <= 0 or abs(s1 + s2 - g.dim / 2) > 1e-12:
            raise ConfigError(f"need s1, s2 > 0 with s1 + s2 = n/2 = {g.dim / 2:g}; got s1 = {s1:g}, s2 = {s2:g}")
        cfg["s1"], cfg["s2"] = s1, s2
    if cfg["r_triples"] is not None:
        cfg["r_triples"] = [list(parse_triple(t)) for t in cfg["r_triples"]]
        for t in cfg["r_triples"]:
            if any(r not in (1, 2, 4) for r in t):
                raise ConfigError(f"radius triple {t} must lie in {{1,2,4}}^3")
    for key, low in (("trials", 20), ("restarts", 10)):
        if int(cfg[key]) < low:
            raise ConfigError(f"{key} must be at least {low}, got {cfg[key]}")
    return cfg


def suite_options(cfg: dict) -> dict:
    opts = {k: cfg[k] for k in ("trials", "restarts", "steps", "lweak_trials", "trace_instances",
                                "trace_structured", "random_symbols", "piece_symbols")}
    if cfg["r_triples"] is not None:
        opts["triples"] = [tuple(t) for t in cfg["r_triples"]]
    if cfg["s1"] is not None:
        opts["s"] = (cfg["s1"], cfg["s2"])
        opts["s_pairs"] = [(cfg["s1"], cfg["s2"])]
    return opts


def _load_object(path: str, kind=None):
    try:
        obj = grid_mod.load(path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if kind is not None and not isinstance(obj, kind):
        raise ConfigError(f"{path} holds a {type(obj).__name__}, expected {kind.__name__}")
    return obj


# ---------------------------------------------------------------- verbs

def cmd_run(args) -> int:
    from .verify.suites import run_suites, write_reports

    cfg = resolve_run_config(args)
    grid = parse_grid(cfg["grid"])
    try:
        results = run_suites(cfg["suite"], cfg["seed"], grid, options=suite_options(cfg),
                             progress=lambda n: print(f"== suite {n}", flush=True))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for r in results:
        for c in r.checks:
            print(f"{r.name}: {c.message()}")
    # the output location is not part of the experiment, so reports stay comparable across directories
    paths = write_reports(results, cfg["out"], {k: v for k, v in cfg.items() if k != "out"})
    print(f"reports: {', '.join(str(p) for p in paths)}")
    failed = [(r.name, c) for r in results for c in r.checks if not c.passed]
    if failed:
        for name, c in failed:
            print(f"check failed ({c.statement}): {name}/{c.name} = {c.value:.6g}, bound {c.sense} {c.bound:.6g}",
                  file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_norms(args) -> int:
    obj = _load_object(args.input)
    if not isinstance(obj, (SampledField, SampledSymbol)):
        raise ConfigError(f"{args.input} is not a field or symbol")
    try:
        results = [spaces.norm_by_id(obj, s) for s in args.spaces]
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    width = max(len(r.space_id) for r in results)
    for r in results:
        print(f"{r.space_id:<{width}}  {r.value!r}")
    if args.out:
        spaces.write_norm_table(results, args.out)
    return EXIT_OK


def cmd_apply(args) -> int:
    from .op import AliasingError, bilinear_apply, linear_apply

    sigma = _load_object(args.symbol, SampledSymbol)
    inputs = [_load_object(p, SampledField) for p in args.inputs]
    if len(inputs) != sigma.arity - 1:
        raise ConfigError(f"symbol of arity {sigma.arity} needs {sigma.arity - 1} input(s), got {len(inputs)}")
    try:
        if sigma.arity == 3:
            rep = bilinear_apply(sigma, *inputs, allow_alias=args.allow_alias, report=True)
        else:
            rep = linear_apply(sigma, inputs[0], allow_alias=args.allow_alias, report=True)
    except AliasingError as exc:
        print(f"aliasing guard: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = rep.output
    print(f"flops_estimate {rep.flops_estimate}")
    print(f"quad_error_hint {rep.quad_error_hint!r}")
    for s in args.norms:
        r = spaces.norm_by_id(out, s)
        print(f"{r.space_id}  {r.value!r}")
    if args.out:
        grid_mod.save(out, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_trace(args) -> int:
    from . import decomp
    from .verify import load_constants, proof_trace, trace_instance

    if (args.s1 is None) != (args.s2 is None):
        raise ConfigError("give both s1 and s2 or neither")
    grid = parse_grid(args.grid) if args.grid else default_grid()
    files = [args.symbol, args.f1, args.f2, args.g]
    if any(files) and not all(files):
        raise ConfigError("--symbol, --f1, --f2 and --g must be given together")
    if all(files):
        sigma = _load_object(args.symbol, SampledSymbol)
        f1, f2, g = (_load_object(p, SampledField) for p in files[1:])
        mu = args.mu if args.mu is not None else 0
        s1, s2 = (args.s1, args.s2) if args.s1 is not None else (0.25, 0.25)
        grid = sigma.grid
    else:
        sigma, f1, f2, g, mu, s1, s2 = trace_instance(args.seed, args.index, grid)
        if args.mu is not None:
            mu = args.mu
        if args.s1 is not None:
            s1, s2 = args.s1, args.s2
    try:
        tr = proof_trace(sigma, f1, f2, g, mu, decomp.build_sugimoto_pair(grid.dim), s1, s2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = tr.check(load_constants()["constants"])
    doc = tr.to_dict()
    doc["checks"] = [{"label": l, "lhs": a, "rhs": b, "C": c if math.isfinite(c) else None, "ok": ok}
                     for l, a, b, c, ok in rows]
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    bad = [l for l, *_, ok in rows if not ok]
    if bad:
        print(f"check failed (Proposition 4.1 proof chain): {', '.join(bad)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bpdo", description="Bilinear pseudo-differential operator experiments.")
    sub = ap.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run verification suites and write CSV/JSON reports")
    run.add_argument("--suite", nargs="+", choices=SUITE_CHOICES, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--grid", default=None, help="dim,x_halfwidth,x_step,xi_halfwidth,xi_step")
    run.add_argument("--r-triples", dest="r_triples", nargs="+", default=None, metavar="R0,R1,R2")
    run.add_argument("--s1", type=float, default=None)
    run.add_argument("--s2", type=float, default=None)
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--restarts", type=int, default=None)
    run.add_argument("--out", default=None, help="report directory")
    run.add_argument("--config", default=None, help="JSON config; flags override its fields")
    run.set_defaults(func=cmd_run)

    nrm = sub.add_parser("norms", help="evaluate norms of a stored field or symbol")
    nrm.add_argument("input")
    nrm.add_argument("--spaces", nargs="+", required=True, help="e.g. L2 H^0.25 '(L2,l1)' L2ul 'M^{inf,1}' h1")
    nrm.add_argument("--out", default=None, help="CSV table path")
    nrm.set_defaults(func=cmd_norms)

    app = sub.add_parser("apply", help="evaluate T_sigma on stored inputs")
    app.add_argument("symbol")
    app.add_argument("inputs", nargs="+")
    app.add_argument("--allow-alias", action="store_true")
    app.add_argument("--norms", nargs="*", default=[], help="space ids to report for the output")
    app.add_argument("--out", default=None, help="output field (.json or .npz)")
    app.set_defaults(func=cmd_apply)

    trc = sub.add_parser("trace", help="dump one traced instance as JSON")
    trc.add_argument("--seed", type=int, default=0)
    trc.add_argument("--index", type=int, default=0)
    trc.add_argument("--grid", default=None)
    trc.add_argument("--symbol", default=None)
    trc.add_argument("--f1", default=None)
    trc.add_argument("--f2", default=None)
    trc.add_argument("--g", default=None)
    trc.add_argument("--mu", type=int, default=None)
    trc.add_argument("--s1", type=float, default=None)
    trc.add_argument("--s2", type=float, default=None)
    trc.add_argument("--out", default=None)
    trc.set_defaults(func=cmd_trace)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
