import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpdo import grid as G
from bpdo.grid import (SampledField, SampledSymbol, SymbolSpectrum, fourier_forward, fourier_inverse,
                       make_grid, multiplier_apply, spectrum_of)
from bpdo.samples import gaussian_field, random_field, random_symbol


def test_default_grid_shape(grid):
    assert grid.nx == 256 and grid.nxi == 128
    assert grid.samples_per_cube == 8
    assert grid.nyquist == pytest.approx(8 * math.pi)
    assert grid.x[0] == -16 and grid.x[-1] == 16 - 1 / 8


@pytest.mark.parametrize("args", [(0, 16, 1 / 8, 8, 1 / 8), (1, 16, 0.3, 8, 1 / 8), (1, 16, -1, 8, 1 / 8),
                                  (1, 16.5, 1 / 8, 8, 1 / 8)])
def test_bad_grid_rejected(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_gaussian_fourier_pair(grid):
    # closed form: F[exp(-x^2/2)](xi) = sqrt(2 pi) exp(-xi^2/2)
    f = SampledField(grid, np.exp(-grid.x ** 2 / 2))
    F = fourier_forward(f).values
    ref = math.sqrt(2 * math.pi) * np.exp(-grid.xi ** 2 / 2)
    assert np.max(np.abs(F - ref)) < 1e-12


def test_modulated_gaussian_pair(grid):
    # F[exp(-x^2/2 + 2ix)](xi) = sqrt(2 pi) exp(-(xi - 2)^2/2)
    f = SampledField(grid, np.exp(-grid.x ** 2 / 2 + 2j * grid.x))
    ref = math.sqrt(2 * math.pi) * np.exp(-(grid.xi - 2) ** 2 / 2)
    assert np.max(np.abs(fourier_forward(f).values - ref)) < 1e-12


def test_round_trip_and_plancherel(grid, rng):
    for _ in range(5):
        f = random_field(grid, rng)
        back = fourier_inverse(fourier_forward(f)).values
        assert np.max(np.abs(back - f.values)) < 1e-6 * np.max(np.abs(f.values))
        l2 = np.sum(np.abs(f.values) ** 2) * grid.x_step
        fl2 = np.sum(np.abs(spectrum_of(f)) ** 2) * grid.xi_step / (2 * math.pi)
        assert fl2 / l2 == pytest.approx(1, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_forward_transform_linear(a, b):
    g = G.default_grid()
    f1 = np.exp(-g.x ** 2)
    f2 = np.exp(-(g.x - 1) ** 2 + 1j * g.x)
    lhs = fourier_forward(SampledField(g, a * f1 + b * f2)).values
    rhs = a * fourier_forward(SampledField(g, f1)).values + b * fourier_forward(SampledField(g, f2)).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * (1 + abs(a) + abs(b))


def test_declared_support_enforced(grid):
    wide = SampledField(grid, np.exp(-grid.x ** 2 / 2))
    with pytest.raises(ValueError, match="declared Fourier support"):
        SampledField(grid, wide.values, fsupp_radius=1.0)
    ok = SampledField(grid, np.exp(-grid.x ** 2 / 8), fsupp_radius=4.0)
    assert ok.fsupp_radius == 4.0


def test_multiplier_support_and_shape(grid):
    f = gaussian_field(grid, 1.0, fsupp_radius=4)
    g = multiplier_apply(lambda xi: (np.abs(xi) <= 1).astype(float), f, support_radius=1.0)
    assert g.fsupp_radius == 1.0
    assert np.allclose(spectrum_of(g)[np.abs(grid.xi) > 1], 0)


def test_multiplier_constant_is_identity(grid, rng):
    f = random_field(grid, rng)
    assert np.allclose(multiplier_apply(1.0, f).values, f.values, atol=1e-9)


def test_symbol_spectrum_matches_direct_evaluation(grid, rng):
    sigma = random_symbol(grid, rng, (1, 1, 1))
    spec = sigma.spectrum
    xs, a, b = grid.x[::17], grid.xi[::9], grid.xi[::11]
    direct = np.zeros((xs.size, a.size, b.size), complex)
    for p, y0 in enumerate(spec.freqs[0]):
        for q, y1 in enumerate(spec.freqs[1]):
            for r, y2 in enumerate(spec.freqs[2]):
                direct += spec.coeffs[p, q, r] * np.exp(1j * (y0 * xs[:, None, None] + y1 * a[None, :, None]
                                                               + y2 * b[None, None, :]))
    assert np.allclose(sigma.values[::17, ::9, ::11], direct, atol=1e-12)


def test_compact_drops_empty_slices():
    c = np.zeros((3, 3, 3), complex)
    c[1, 1, 1] = 2.0
    s = SymbolSpectrum((np.array([-.5, 0, .5]),) * 3, c).compact()
    assert s.coeffs.shape == (1, 1, 1)
    assert s.radii() == (0.0, 0.0, 0.0)


def test_symbol_covariances(grid, rng):
    sigma = random_symbol(grid, rng, (1, 1, 1))
    v = sigma.values
    sw = sigma.swapped().values
    assert np.allclose(sw, np.swapaxes(v, 1, 2))
    mod = sigma.modulated((1.0, 0.0, 0.0)).values
    assert np.allclose(mod, v * np.exp(1j * grid.x)[:, None, None])
    # translating by a whole period of the x lattice (4 pi) is the identity
    assert np.allclose(sigma.translated_x(4 * math.pi).values, v)


@pytest.mark.parametrize("suffix", [".json", ".npz"])
def test_serialisation_round_trip(tmp_path, grid, rng, suffix):
    f = random_field(grid, rng)
    sigma = random_symbol(grid, rng, (1, 2, 1))
    for obj in (f, sigma):
        path = tmp_path / f"obj{suffix}"
        G.save(obj, path)
        back = G.load(path)
        assert type(back) is type(obj)
        assert np.array_equal(back.values, obj.values)
    assert G.load(tmp_path / f"obj{suffix}").fsupp_radii == (1.0, 2.0, 1.0)


def test_malformed_file_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "field"}')
    with pytest.raises(ValueError):
        G.load(bad)
    bad.write_text("not json")
    with pytest.raises(ValueError):
        G.load(bad)
