"""Deterministic test inputs: Gaussian-enveloped fields and trigonometric symbols."""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .grid import GridSpec, SampledField, SampledSymbol, SymbolSpectrum

__all__ = [
    "atom_width",
    "gabor_atom",
    "gabor_basis",
    "gaussian_field",
    "indicator_field",
    "random_field",
    "unit_l2",
    "random_symbol",
    "modulated_pieces_symbol",
    "lattice_freqs",
]

SYMBOL_SPACING = 0.5


def atom_width(grid: GridSpec) -> float:
    """Gaussian width balancing boundary mass against the ``Xi/2`` band limit."""
    return math.sqrt(grid.x_halfwidth / (grid.xi_halfwidth / 2))


def _mesh(grid):
    return np.meshgrid(*([grid.x] * grid.dim), indexing="ij")


def gabor_atom(grid: GridSpec, center, freq, width: Optional[float] = None) -> np.ndarray:
    """Samples of ``exp(-|x-a|^2 / (2 w^2) + i omega . x)``."""
    w = atom_width(grid) if width is None else width
    center = np.broadcast_to(np.asarray(center, float), (grid.dim,))
    freq = np.broadcast_to(np.asarray(freq, float), (grid.dim,))
    mesh = _mesh(grid)
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    phase = sum(m * o for m, o in zip(mesh, freq))
    return np.exp(-r2 / (2 * w * w) + 1j * phase)


def gabor_basis(grid: GridSpec, n_centers: int = 5, n_freqs: int = 5):
    """Atoms on a centers x modulations lattice plus their band radius.

    Centers span ``[-X/4, X/4]`` and modulations stay far enough inside
    ``Xi/2`` that each atom's Fourier energy beyond ``Xi/2`` is below 1e-12.
    """
    if grid.dim != 1:
        raise ValueError("gabor_basis is 1-D")
    w = atom_width(grid)
    radius = grid.xi_halfwidth / 2
    omega_max = max(radius - 5.0 / w, 0.0)
    centers = np.linspace(-grid.x_halfwidth / 4, grid.x_halfwidth / 4, n_centers)
    freqs = np.linspace(-omega_max, omega_max, n_freqs)
    atoms = np.array([gabor_atom(grid, a, o, w) for a in centers for o in freqs])
    return atoms, radius


def gaussian_field(grid: GridSpec, width: float = 1.0, center=0.0, freq=0.0,
                   fsupp_radius: Optional[float] = None) -> SampledField:
    return SampledField(grid, gabor_atom(grid, center, freq, width), fsupp_radius=fsupp_radius)


def unit_l2(f: SampledField) -> SampledField:
    """``f / ||f||_{L^2}`` keeping the declared Fourier support."""
    norm = math.sqrt(float(np.sum(np.abs(f.values) ** 2)) * f.grid.x_step ** f.grid.dim)
    if norm == 0:
        raise ValueError("cannot normalise the zero field")
    return SampledField(f.grid, f.values / norm, fsupp_radius=f.fsupp_radius, fsupp_box=f.fsupp_box)


def indicator_field(grid: GridSpec, lo: float, hi: float) -> SampledField:
    """Indicator of ``[lo, hi)^n`` sampled at the grid points."""
    mesh = _mesh(grid)
    inside = np.ones(grid.space_shape, bool)
    for m in mesh:
        inside &= (m >= lo - 1e-12) & (m < hi - 1e-12)
    return SampledField(grid, inside.astype(complex))


def random_field(grid: GridSpec, rng: np.random.Generator, n_atoms: int = 6,
                 nonnegative: bool = False) -> SampledField:
    """Random combination of Gabor atoms carrying ``fsupp_radius = Xi/2``.

    ``nonnegative`` uses unmodulated atoms with positive weights.
    """
    w = atom_width(grid)
    radius = grid.xi_halfwidth / 2
    omega_max = max(radius - 5.0 / w, 0.0)
    vals = np.zeros(grid.space_shape, complex)
    for _ in range(n_atoms):
        center = rng.uniform(-grid.x_halfwidth / 4, grid.x_halfwidth / 4, grid.dim)
        if nonnegative:
            vals += rng.uniform(0.2, 1.0) * gabor_atom(grid, center, 0.0, w)
        else:
            freq = rng.uniform(-omega_max, omega_max, grid.dim)
            coef = rng.normal() + 1j * rng.normal()
            vals += coef * gabor_atom(grid, center, freq, w)
    if nonnegative:
        vals = vals.real.astype(complex)
    return SampledField(grid, vals, fsupp_radius=radius)


def lattice_freqs(radius: float, spacing: float = SYMBOL_SPACING) -> np.ndarray:
    """Frequencies ``spacing * Z`` inside the closed ball of the given radius."""
    m = int(math.floor(radius / spacing + 1e-9))
    return spacing * np.arange(-m, m + 1)


def random_symbol(grid: GridSpec, rng: np.random.Generator, radii: Sequence[float],
                  spacing: float = SYMBOL_SPACING) -> SampledSymbol:
    """Complex white noise on the frequency lattice, masked to ``B_R0 x B_R1 x B_R2``.

    The symbol is a finite trigonometric sum, so its Fourier transform is
    supported exactly in the declared box.
    """
    freqs = [lattice_freqs(r, spacing) for r in radii]
    shape = tuple(len(f) for f in freqs)
    coeffs = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2 * np.prod(shape))
    return SampledSymbol.from_spectrum(grid, freqs, coeffs, fsupp_radii=tuple(float(r) for r in radii))


def modulated_pieces_symbol(grid: GridSpec, rng: np.random.Generator, n_pieces: int = 3,
                            k_range: int = 2, bump_radius: float = 0.5,
                            spacing: float = SYMBOL_SPACING) -> SampledSymbol:
    """Sparse sum ``sum_k e^{i x k0} e^{i xi1 k1} e^{i xi2 k2} b_k(x, xi1, xi2)``.

    Each ``b_k`` is band-limited noise with spectrum in ``B_bump_radius``;
    the modulations ``k`` are distinct lattice points in ``[-k_range, k_range]^3``.
    """
    axis = lattice_freqs(k_range + bump_radius, spacing)
    coeffs = np.zeros((len(axis),) * 3, complex)
    local = lattice_freqs(bump_radius, spacing)
    ks = set()
    while len(ks) < n_pieces:
        ks.add(tuple(int(v) for v in rng.integers(-k_range, k_range + 1, 3)))
    for k in sorted(ks):
        block = rng.normal(size=(len(local),) * 3) + 1j * rng.normal(size=(len(local),) * 3)
        idx = [np.searchsorted(axis, k[i] + local[0] - 1e-9) for i in range(3)]
        sl = tuple(slice(i, i + len(local)) for i in idx)
        coeffs[sl] += block / math.sqrt(2 * block.size)
    R = float(k_range + bump_radius)
    return SampledSymbol.from_spectrum(grid, [axis] * 3, coeffs, fsupp_radii=(R, R, R))
