import math

import numpy as np
import pytest
from scipy import integrate

from bpdo import decomp
from bpdo.grid import SampledField, multiplier_apply
from bpdo.samples import gaussian_field, random_field, random_symbol


def test_cutoff_profile():
    u = np.array([0, 4, 4.5, 5, 6, -4.5])
    assert np.allclose(decomp.cutoff(u, 4, 5), [1, 1, 0.5, 0, 0, 0.5])


def test_partition_sums_to_one(pair):
    xi = np.linspace(-10, 10, 4001)
    ks = range(-12, 13)
    assert np.max(np.abs(sum(pair.phi.func_1d(xi - k) for k in ks) - 1)) < 1e-10
    kc = sum(pair.kappa.func_1d(xi - k) * pair.chi.func_1d(xi - k) for k in ks)
    assert np.max(np.abs(kc - 1)) < 1e-10


def test_supports(pair):
    t = np.linspace(-3, 3, 6001)
    assert np.all(pair.phi.func_1d(t)[np.abs(t) >= 1] == 0)
    assert np.all(pair.kappa.func_1d(t)[np.abs(t) >= 1] == 0)


def test_chi_lower_bound(pair):
    t = np.linspace(-1, 1, 4001)
    measured = np.min(np.abs(pair.chi.func_1d(t)))
    assert pair.lower_bound_c == pytest.approx(math.cos(0.5) / (2 * math.pi))
    assert measured >= pair.lower_bound_c


def test_chi_value_at_zero(pair):
    # chi(0) = (2 pi)^-1 times the unit mass of the bump
    assert pair.chi.func_1d(np.array([0.0]))[0] == pytest.approx(1 / (2 * math.pi), rel=1e-12)


@pytest.mark.parametrize("d", [0.0, 0.3, 0.75])
def test_chi_gram_against_quadrature(pair, d):
    # independent oracle: int e^{i d t} |chi(t)|^2 dt on a wide window
    t = np.arange(-400, 400, 1 / 16)
    chi = pair.chi.func_1d(t)
    direct = integrate.trapezoid(np.cos(d * t) * chi ** 2, t)
    assert pair.chi_gram(np.array([d]))[0] == pytest.approx(direct, rel=1e-4, abs=1e-8)
    assert pair.chi_gram(np.array([1.5]))[0] == 0.0


def test_box_reconstruction(grid, pair, rng):
    f = random_field(grid, rng)
    total = np.zeros(grid.nx, complex)
    for nu in decomp.box_window(f):
        b = decomp.box_op(int(nu), f, pair)
        total += multiplier_apply(lambda xi, nu=nu: pair.chi.func_1d(xi - nu), b).values
    assert np.max(np.abs(total - f.values)) < 1e-9 * np.max(np.abs(f.values))


def test_box_op_support(grid, pair):
    f = gaussian_field(grid, 1.0, fsupp_radius=4)
    b = decomp.box_op(2, f, pair)
    assert b.fsupp_box == ((1.0, 3.0),)
    ok, ratio = decomp.band_limit_check(b, box=((1.0, 3.0),))
    assert ok and ratio < 1e-12


def test_symbol_decomposition_reconstructs(grid, pair, rng):
    sigma = random_symbol(grid, rng, (1, 1, 1))
    fam = decomp.decompose_symbol(sigma, pair)
    assert len(fam) > 0
    err = np.max(np.abs(fam.reconstruct() - sigma.values))
    assert err < 1e-8 * np.max(np.abs(sigma.values))


def test_symbol_boxes_sum_to_symbol(grid, pair, rng):
    sigma = random_symbol(grid, rng, (1.5, 1, 1))
    total = sum(decomp.symbol_box(k, sigma, pair).values for k in decomp.symbol_box_window(sigma))
    assert np.allclose(total, sigma.values, atol=1e-12)


def test_symbol_band_limit(grid, rng):
    sigma = random_symbol(grid, rng, (1, 2, 1))
    assert decomp.band_limit_check(sigma, (1, 2, 1))[0]
    ok, ratio = decomp.band_limit_check(sigma, (1, 1, 1))
    assert not ok and ratio > 0


def test_field_band_limit(grid):
    f = SampledField(grid, np.exp(-grid.x ** 2 / 2))
    assert decomp.band_limit_check(f, radii=8.0)[1] < 1e-12
    assert not decomp.band_limit_check(f, radii=0.5)[0]


def test_dim_validation():
    with pytest.raises(ValueError):
        decomp.build_sugimoto_pair(0)
