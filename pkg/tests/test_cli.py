import csv
import json
import math

import numpy as np
import pytest

from bpdo import cli
from bpdo import grid as G
from bpdo.grid import SampledField, SampledSymbol
from bpdo.samples import gaussian_field
from bpdo.verify import constants as C


def _frozen():
    if not C.load_constants()["constants"]:
        pytest.skip("constants table not frozen")


def test_run_identities(tmp_path, capsys):
    assert cli.main(["run", "--suite", "identities", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "checks.csv").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] is True
    assert summary["config"]["grid"]["x_step"] == 0.125
    assert "Fourier conventions" in capsys.readouterr().out


def test_run_lemmas_seed7(tmp_path):
    _frozen()
    assert cli.main(["run", "--suite", "lemmas", "--seed", "7", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sup_l2ul.csv").exists()


def test_bad_sobolev_pair(tmp_path, capsys):
    code = cli.main(["run", "--suite", "prop", "--s1", "0.3", "--s2", "0.3", "--out", str(tmp_path)])
    assert code == 2
    assert "s1 + s2" in capsys.readouterr().err


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"sweet": 1}', '{"seed": -1}',
                                     '{"grid": {"dim": 1}}', '{"r_triples": [[1, 3, 1]]}'])
def test_bad_config(tmp_path, content):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    assert cli.main(["run", "--suite", "identities", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"suite": "identities", "seed": 4}))
    out = tmp_path / "r"
    assert cli.main(["run", "--config", str(cfg), "--seed", "5", "--out", str(out)]) == 0
    assert json.loads((out / "summary.json").read_text())["config"]["seed"] == 5


def test_forced_failure_flips_exit(tmp_path, monkeypatch, capsys):
    _frozen()
    table = C.load_constants()
    tight = {k: v * 1e-6 for k, v in table["constants"].items()}
    path = C.write_constants(tight, table["measured"], tmp_path / "tight.json")
    monkeypatch.setenv(C.ENV_VAR, str(path))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trace_instances": 1, "trace_structured": 0}))
    assert cli.main(["run", "--suite", "trace", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 1
    assert "Proposition 4.1" in capsys.readouterr().err


def test_run_is_byte_deterministic(tmp_path):
    _frozen()
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trace_instances": 2, "trace_structured": 1}))
    for name in ("a", "b"):
        assert cli.main(["run", "--suite", "identities", "trace", "--seed", "3", "--config", str(cfg),
                         "--out", str(tmp_path / name)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_prop_fit_rows(tmp_path):
    _frozen()
    code = cli.main(["run", "--suite", "prop", "--r-triples", "1,1,1", "2,2,2", "4,4,4", "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "prop_fit.csv") as fh:
        rows = list(csv.DictReader(fh))
    for name in ("R0", "R1", "R2"):
        assert len([r for r in rows if r["param"] == name]) == 3
    with open(tmp_path / "prop_trials.csv") as fh:
        trials = list(csv.reader(fh))
    assert trials[0] == ["trial", "R0", "R1", "R2", "ratio"] and len(trials) == 61


def test_norms_verb(tmp_path, grid, capsys):
    path = tmp_path / "g.json"
    G.save(SampledField(grid, np.exp(-grid.x ** 2 / 2)), path)
    out = tmp_path / "n.csv"
    assert cli.main(["norms", str(path), "--spaces", "L2", "H^0.25", "(L2,l1)", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert float(rows[0]["value"]) == pytest.approx(math.pi ** 0.25, rel=1e-12)
    sym = tmp_path / "one.npz"
    G.save(SampledSymbol.constant(grid, 1.0), sym)
    assert cli.main(["norms", str(sym), "--spaces", "L2ul"]) == 0
    assert float(capsys.readouterr().out.split()[-1]) == pytest.approx(1.0)


def test_norms_errors(tmp_path, grid):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert cli.main(["norms", str(bad), "--spaces", "L2"]) == 2
    good = tmp_path / "g.json"
    G.save(gaussian_field(grid), good)
    assert cli.main(["norms", str(good), "--spaces", "Besov"]) == 2


def test_apply_verb(tmp_path, grid):
    sym, f, raw, out = (tmp_path / n for n in ("s.json", "f.json", "raw.json", "o.npz"))
    G.save(SampledSymbol.constant(grid, 1.0), sym)
    G.save(gaussian_field(grid, 1.0, fsupp_radius=4), f)
    assert cli.main(["apply", str(sym), str(f), str(f), "--norms", "L2", "--out", str(out)]) == 0
    res = G.load(out)
    assert np.allclose(res.values, np.exp(-grid.x ** 2), atol=1e-9)
    G.save(SampledField(grid, np.exp(-grid.x ** 2 / 2)), raw)
    assert cli.main(["apply", str(sym), str(raw), str(f)]) == 2
    assert cli.main(["apply", str(sym), str(raw), str(f), "--allow-alias"]) == 0
    assert cli.main(["apply", str(sym), str(f)]) == 2


def test_trace_verb(tmp_path):
    _frozen()
    out = tmp_path / "t.json"
    assert cli.main(["trace", "--seed", "1", "--index", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert {"I", "I_decomposed", "II", "steps", "checks"} <= set(doc)
    assert all(c["ok"] for c in doc["checks"])
    assert cli.main(["trace", "--s1", "0.25"]) == 2


def test_missing_verb():
    assert cli.main([]) == 2
