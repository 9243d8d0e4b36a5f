import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpdo import spaces
from bpdo.grid import SampledField, SampledSymbol, default_grid
from bpdo.samples import gaussian_field, indicator_field, random_field


def test_gaussian_l2(grid):
    # int exp(-x^2) dx = sqrt(pi)
    f = SampledField(grid, np.exp(-grid.x ** 2 / 2))
    assert spaces.lp_norm(f, 2).value == pytest.approx(math.pi ** 0.25, rel=1e-12)


def test_gaussian_l1_and_sup(grid):
    f = SampledField(grid, np.exp(-grid.x ** 2 / 2))
    assert spaces.lp_norm(f, 1).value == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert spaces.lp_norm(f, math.inf).value == 1.0


def test_indicator_amalgam(grid):
    # cubes [-1/2,1/2), [1/2,3/2), ... meet [0, 3) in lengths 1/2, 1, 1, 1/2
    f = indicator_field(grid, 0, 3)
    assert spaces.amalgam_norm(f, 2, 1).value == pytest.approx(2 + math.sqrt(2), rel=1e-12)
    assert spaces.amalgam_norm(f, 2, math.inf).value == pytest.approx(1.0)
    assert spaces.uniform_local_l2(f).value == pytest.approx(1.0)


def test_sobolev_zero_is_l2(grid, rng):
    f = random_field(grid, rng)
    assert spaces.sobolev_norm(f, 0).value == pytest.approx(spaces.lp_norm(f, 2).value, rel=1e-10)
    assert spaces.sobolev_norm(f, 0.25).value > spaces.sobolev_norm(f, 0).value


def test_weak_norm_rearrangement():
    assert spaces.weak_seq_norm([3, 2, 1], 1).value == 4.0
    assert spaces.weak_seq_norm([0, 5, 0], 4).value == 5.0
    assert spaces.seq_norm([3, 4], 2).value == 5.0


def test_mixed_norm_order():
    a = np.array([[3.0, 4.0], [0.0, 1.0]])
    # l^2 over axis 1 first: rows -> (5, 1); then l^1 over axis 0 -> 6
    assert spaces.mixed_norm(a, [(1, 2), (0, 1)]).value == pytest.approx(6.0)
    # l^1 over axis 0 first: columns -> (3, 5); then l^2 -> sqrt(34)
    assert spaces.mixed_norm(a, [(0, 1), (1, 2)]).value == pytest.approx(math.sqrt(34))
    with pytest.raises(ValueError):
        spaces.mixed_norm(a, [(0, 1)])


def test_constant_symbol_l2ul_is_one(grid):
    assert spaces.uniform_local_l2(SampledSymbol.constant(grid, 1.0)).value == pytest.approx(1.0)


def test_constant_symbol_sjostrand_norm(grid):
    # only the k = 0 piece survives and it equals 1 everywhere
    assert spaces.modulation_norm(SampledSymbol.constant(grid, 1.0), math.inf, 1).value == pytest.approx(1.0)


def test_m22_bracket(grid, rng, pair):
    # sum_k phi(xi - k)^2 lies in [1/2, 1] for a two-overlap partition
    for _ in range(5):
        f = random_field(grid, rng)
        r = spaces.modulation_norm(f, 2, 2, pair).value / spaces.lp_norm(f, 2).value
        assert 1 / math.sqrt(2) - 1e-9 <= r <= 1 + 1e-9


def test_hardy_dominates_l1(grid, rng):
    f = random_field(grid, rng)
    assert spaces.lp_norm(f, 1).value <= spaces.local_hardy_norm(f).value * (1 + 1e-3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), r=st.sampled_from([1.0, 1.5, 2.0]))
def test_embedding_chain_property(seed, r):
    g = default_grid()
    f = random_field(g, np.random.default_rng(seed))
    lr = spaces.lp_norm(f, r).value
    mid = spaces.amalgam_norm(f, 2, r).value
    top = spaces.amalgam_norm(f, 2, 1).value
    assert lr <= mid * (1 + 1e-12) and mid <= top * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_amalgam_l2_l2_is_l2(seed):
    g = default_grid()
    f = random_field(g, np.random.default_rng(seed))
    assert spaces.amalgam_norm(f, 2, 2).value == pytest.approx(spaces.lp_norm(f, 2).value, rel=1e-12)


def test_region_restriction(grid):
    f = SampledField(grid, np.ones(grid.nx))
    assert spaces.lp_norm(f, 1, region=[(0, 3)]).value == pytest.approx(3.0)


def test_bad_exponent():
    g = default_grid()
    with pytest.raises(ValueError):
        spaces.lp_norm(gaussian_field(g), 0.5)


@pytest.mark.parametrize("text,kind,params", [
    ("L2", "lebesgue", [2.0]), ("Linf", "lebesgue", [math.inf]), ("H^0.25", "sobolev", [0.25]),
    ("(L2,l1)", "amalgam", [2.0, 1.0]), ("L2ul", "L2ul", []), ("M^{inf,1}", "modulation", [math.inf, 1.0]),
    ("h1", "hardy", []),
])
def test_parse_space_id(text, kind, params):
    assert spaces.parse_space_id(text) == (kind, params)


def test_unknown_space_id():
    with pytest.raises(ValueError):
        spaces.parse_space_id("Besov")


def test_norm_table(tmp_path, grid):
    f = gaussian_field(grid, 1.0)
    rows = [spaces.norm_by_id(f, s) for s in ("L2", "H^0.25", "(L2,l1)")]
    spaces.write_norm_table(rows, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "space_id,params,value" and len(lines) == 4
    assert float(lines[1].split(",")[-1]) == pytest.approx(math.pi ** 0.25)
