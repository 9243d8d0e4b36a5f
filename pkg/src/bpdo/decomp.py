"""Partitions of unity, the (kappa, chi) window pair and frequency-uniform decompositions."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grid import (
    BAND_TOL,
    GridSpec,
    SampledField,
    SampledSymbol,
    SymbolSpectrum,
    _nonzero_along,
    apply_along_axes,
    dft_matrix,
    fourier_leakage,
    multiplier_apply,
    spectrum_of,
)

__all__ = [
    "Profile",
    "DecompPair",
    "bump",
    "cutoff",
    "smooth_step",
    "build_partition",
    "build_sugimoto_pair",
    "box_op",
    "SymbolFamily",
    "decompose_symbol",
    "symbol_box",
    "symbol_box_window",
    "band_limit_check",
    "CONFIG",
]

log = logging.getLogger(__name__)

#: construction parameters; changing them changes every measured constant
CONFIG = {
    "bump_exponent": 1.0,     # g(t) = exp(-a / (1 - t^2))
    "chi_bump_radius": 0.5,   # Fourier support radius of chi (n = 1)
    "quad_nodes": 600,        # Gauss-Legendre nodes for chi and its Gram kernel
    "drop_energy": 1e-12,     # relative energy below which decomposition pieces are dropped
}


def bump(t) -> np.ndarray:
    """Smooth bump ``exp(-a/(1-t^2))`` on ``(-1, 1)``, zero outside."""
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-CONFIG["bump_exponent"] / (1 - t[inside] ** 2))
    return out


def smooth_step(t) -> np.ndarray:
    """``C^infty`` step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.clip(np.asarray(t, float), 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
    return a / (a + b)


def cutoff(u, inner: float = 4.0, outer: float = 5.0) -> np.ndarray:
    """Radial cutoff equal to 1 on ``|u| <= inner`` and 0 on ``|u| >= outer``."""
    r = np.abs(np.asarray(u, float))
    return smooth_step((outer - r) / (outer - inner))


def _partition_1d(xi) -> np.ndarray:
    xi = np.asarray(xi, float)
    base = np.floor(xi)
    total = sum(bump(xi - (base + j)) for j in (-1, 0, 1, 2))
    return bump(xi) / total


class Profile:
    """Tensor-product window ``prod_i p(t_i)`` with optional compact support ``[-s, s]^n``."""

    def __init__(self, func_1d: Callable, dim: int, support: Optional[float] = None, name: str = ""):
        self.func_1d = func_1d
        self.dim = dim
        self.support = support
        self.name = name

    def __call__(self, *coords) -> np.ndarray:
        if len(coords) != self.dim:
            raise ValueError(f"{self.name or 'profile'} expects {self.dim} coordinate arrays")
        out = 1.0
        for c in coords:
            out = out * self.func_1d(np.asarray(c, float))
        return out

    def shifted(self, center) -> Callable:
        center = np.broadcast_to(np.asarray(center, float), (self.dim,))
        return lambda *c: self(*(ci - ki for ci, ki in zip(c, center)))

    def sample(self, grid: GridSpec, center=0.0) -> np.ndarray:
        mesh = np.meshgrid(*([grid.xi] * grid.dim), indexing="ij")
        return np.asarray(self.shifted(center)(*mesh), dtype=complex)


def build_partition(dim: int) -> Profile:
    """``phi = g / sum_k g(. - k)`` with ``supp phi`` in ``[-1, 1]^dim``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return Profile(_partition_1d, dim, support=1.0, name="phi")


class _ChiFactor:
    """``chi_1(t) = (2 pi)^{-1} int psi(y) cos(t y) dy`` with ``psi`` a unit-mass bump on ``[-r, r]``."""

    def __init__(self, radius: float, nodes: int):
        t, w = leggauss(nodes)
        self.radius = radius
        self.y = radius * t
        raw = bump(t)
        self.mass = float(raw @ w) * radius
        self.psi_w = raw * w * radius / self.mass

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        flat = t.ravel()
        out = np.empty(flat.shape)
        step = 4096
        for i in range(0, flat.size, step):
            out[i:i + step] = np.cos(np.outer(flat[i:i + step], self.y)) @ self.psi_w
        return out.reshape(t.shape) / (2 * math.pi)

    def psi(self, y) -> np.ndarray:
        return bump(np.asarray(y, float) / self.radius) / self.mass

    def autocorrelation(self, d) -> np.ndarray:
        """``int e^{i d t} |chi_1(t)|^2 dt = (2 pi)^{-1} int psi(y) psi(y + d) dy``."""
        d = np.asarray(d, float)
        vals = self.psi(self.y[None, :] + d.ravel()[:, None]) @ self.psi_w
        return vals.reshape(d.shape) / (2 * math.pi)


@dataclass
class DecompPair:
    """Windows used by the decompositions.

    ``phi``: partition window, ``kappa``/``chi``: the reconstruction pair
    with ``sum_nu kappa(xi - nu) chi(xi - nu) = 1``, ``theta``: space-domain
    duality window (chosen equal to ``chi``), ``lower_bound_c``: certified
    lower bound of ``|chi|`` on ``[-1, 1]^n``.
    """

    dim: int
    phi: Profile
    kappa: Profile
    chi: Profile
    theta: Profile
    lower_bound_c: float
    chi_factor: _ChiFactor

    def chi_gram(self, d) -> np.ndarray:
        return self.chi_factor.autocorrelation(d)


def build_sugimoto_pair(dim: int) -> DecompPair:
    """Explicit pair: ``chi`` = inverse transform of a bump in ``B_{1/2}``, ``kappa = phi / chi``.

    For ``dim > 1`` the bump is a tensor product of 1-D bumps of radius
    ``1/(2 sqrt(dim))`` so its support stays inside ``B_{1/2}``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    radius = CONFIG["chi_bump_radius"] / math.sqrt(dim)
    factor = _ChiFactor(radius, CONFIG["quad_nodes"])
    chi = Profile(factor, dim, support=None, name="chi")
    phi = build_partition(dim)

    def kappa_1d(t):
        t = np.asarray(t, float)
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        out[inside] = _partition_1d(t[inside]) / factor(t[inside])
        return out

    kappa = Profile(kappa_1d, dim, support=1.0, name="kappa")
    theta = Profile(factor, dim, support=None, name="theta")
    c = math.cos(math.sqrt(dim) * radius) ** dim / (2 * math.pi) ** dim
    t = np.linspace(-1, 1, 2001)
    measured = float(np.min(np.abs(factor(t)))) ** dim
    if measured < 1e-6:
        raise RuntimeError(f"|chi| on [-1,1]^n measured {measured:.3e}: construction bug")
    return DecompPair(dim, phi, kappa, chi, theta, c, factor)


# ---------------------------------------------------------------- fields

def box_op(nu, f: SampledField, pair: DecompPair) -> SampledField:
    """``kappa(D - nu) f``; output declares Fourier support in ``nu + [-1, 1]^n``."""
    nu = np.broadcast_to(np.asarray(nu, float), (f.grid.dim,))
    box = tuple((v - 1.0, v + 1.0) for v in nu)
    return multiplier_apply(pair.kappa.shifted(nu), f, support_box=box)


def box_window(f: SampledField) -> np.ndarray:
    """Integer ``nu`` (1-D) for which ``kappa(. - nu)`` meets the frequency grid."""
    Xi = int(round(f.grid.xi_halfwidth))
    return np.arange(-Xi, Xi + 1)


# ---------------------------------------------------------------- symbols

class SymbolFamily:
    """Lazy family ``sigma_nu = sigma chi(xi_1 - nu_1) chi(xi_2 - nu_2)``."""

    def __init__(self, sigma: SampledSymbol, pair: DecompPair, active: Sequence[tuple],
                 dropped: Sequence[tuple] = ()):
        self.sigma = sigma
        self.pair = pair
        self.active = list(active)
        self.dropped = list(dropped)

    def __len__(self):
        return len(self.active)

    def __iter__(self):
        return iter(self.active)

    def weights(self, nu) -> list:
        xi = self.sigma.grid.xi
        return [self.pair.chi.func_1d(xi - v) for v in nu]

    def __getitem__(self, nu) -> SampledSymbol:
        w = self.weights(nu)
        vals = self.sigma.values
        for axis, wi in enumerate(w, start=1):
            shape = [1] * vals.ndim
            shape[axis] = -1
            vals = vals * wi.reshape(shape)
        return SampledSymbol(self.sigma.grid, values_=vals, arity=self.sigma.arity)

    def reconstruct(self) -> np.ndarray:
        """``sum_nu sigma_nu kappa(xi_1 - nu_1) kappa(xi_2 - nu_2)`` on the grid."""
        xi = self.sigma.grid.xi
        nd = self.sigma.arity - 1
        total = np.zeros((len(xi),) * nd, complex)
        for nu in self.active:
            term = 1.0
            for i, v in enumerate(nu):
                kc = self.pair.kappa.func_1d(xi - v) * self.pair.chi.func_1d(xi - v)
                term = np.multiply.outer(term, kc) if i else kc
            total += term
        return self.sigma.values * total[None]


def decompose_symbol(sigma: SampledSymbol, pair: DecompPair, nu_range: Optional[Iterable[int]] = None) -> SymbolFamily:
    """Decompose ``sigma`` along its frequency variables with the pair.

    Pieces whose reconstruction energy ``||sigma_nu kappa kappa||^2`` is
    below ``CONFIG['drop_energy']`` of the total are dropped and logged.
    """
    grid = sigma.grid
    Xi = int(round(grid.xi_halfwidth))
    nus = np.arange(-Xi, Xi + 1) if nu_range is None else np.asarray(list(nu_range))
    xi = grid.xi
    nd = sigma.arity - 1
    W = np.array([np.abs(pair.kappa.func_1d(xi - v) * pair.chi.func_1d(xi - v)) ** 2 for v in nus])
    energy = np.abs(sigma.values) ** 2
    per = energy.sum(axis=0)
    for _ in range(nd):
        per = np.tensordot(per, W, axes=([0], [1]))
    # per is indexed (nu_last, ..., nu_first); reverse to (nu_1, nu_2)
    per = np.transpose(per, tuple(reversed(range(nd))))
    total = float(per.sum()) or 1.0
    active, dropped = [], []
    for idx in np.ndindex(*per.shape):
        nu = tuple(int(nus[i]) for i in idx)
        (active if per[idx] >= CONFIG["drop_energy"] * total else dropped).append(nu)
    if dropped:
        log.debug("decompose_symbol dropped %d of %d pieces below relative energy %g",
                  len(dropped), per.size, CONFIG["drop_energy"])
    return SymbolFamily(sigma, pair, active, dropped)


def _symbol_dual_axes(grid: GridSpec, arity: int):
    """Dual sample axes for the dense path: frequencies for x, space points for each xi."""
    return [grid.xi] + [grid.x] * (arity - 1)


def symbol_box(k, sigma: SampledSymbol, pair: DecompPair) -> SampledSymbol:
    """``phi(D_x - k_0) phi(D_xi1 - k_1) phi(D_xi2 - k_2) sigma``.

    Spectral symbols are masked exactly; sampled symbols go through dense
    quadrature in every variable and must decay inside the grid box.
    """
    k = tuple(float(v) for v in k)
    if len(k) != sigma.arity:
        raise ValueError("need one lattice coordinate per symbol variable")
    phi = pair.phi.func_1d
    if sigma.spectrum is not None:
        spec = sigma.spectrum
        masked = spec.masked([phi(a - kk) for a, kk in zip(spec.freqs, k)])
        return SampledSymbol(sigma.grid, spectrum=masked, arity=sigma.arity)
    grid = sigma.grid
    axes = sigma.axes
    duals = _symbol_dual_axes(grid, sigma.arity)
    steps = [grid.x_step] + [grid.xi_step] * (sigma.arity - 1)
    dsteps = [grid.xi_step] + [grid.x_step] * (sigma.arity - 1)
    fwd = [dft_matrix(a, d, -1, h) for a, d, h in zip(axes, duals, steps)]
    spec = apply_along_axes(sigma.values, fwd)
    for axis, (d, kk) in enumerate(zip(duals, k)):
        shape = [1] * spec.ndim
        shape[axis] = -1
        spec = spec * phi(d - kk).reshape(shape)
    inv = [dft_matrix(d, a, +1, h / (2 * math.pi)) for a, d, h in zip(axes, duals, dsteps)]
    return SampledSymbol(grid, values_=apply_along_axes(spec, inv), arity=sigma.arity)


def symbol_box_window(sigma: SampledSymbol) -> list:
    """All lattice ``k`` whose box piece can be nonzero."""
    if sigma.spectrum is not None:
        ranges = []
        for i, a in enumerate(sigma.spectrum.freqs):
            live = a[_nonzero_along(sigma.spectrum.coeffs, i)]
            ks = set()
            for v in live:
                ks.update(int(j) for j in range(int(math.floor(v)), int(math.ceil(v)) + 1) if abs(v - j) < 1)
            ranges.append(sorted(ks))
    else:
        grid = sigma.grid
        duals = _symbol_dual_axes(grid, sigma.arity)
        ranges = [list(range(int(math.floor(d[0])), int(math.ceil(d[-1])) + 1)) for d in duals]
    return [tuple(c) for c in _product(ranges)]


def _product(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _product(ranges[1:]):
            yield (head,) + tail


# ---------------------------------------------------------------- band limits

def band_limit_check(obj, radii=None, box=None, tol: float = BAND_TOL):
    """Return ``(ok, leakage_ratio)`` for the declared ball/box.

    Fields: ``radii`` is the radius of ``B_R`` (or ``box`` a box).  Spectral
    symbols: ``radii`` are per-variable radii and the ratio is the
    coefficient energy outside the box.  Sampled symbols: dense quadrature.
    """
    if isinstance(obj, SampledField):
        ratio = fourier_leakage(obj, radius=radii, box=box)
        return ratio < tol, ratio
    if isinstance(obj, SampledSymbol):
        radii = tuple(np.broadcast_to(np.asarray(radii, float), (obj.arity,)))
        if obj.spectrum is not None:
            spec = obj.spectrum
            mesh = np.meshgrid(*spec.freqs, indexing="ij")
            inside = np.ones(spec.coeffs.shape, bool)
            for m, r in zip(mesh, radii):
                inside &= np.abs(m) <= r + 1e-12
            energy = np.abs(spec.coeffs) ** 2
            total = float(energy.sum())
            ratio = 0.0 if total == 0 else float(energy[~inside].sum()) / total
            return ratio < tol, ratio
        grid = obj.grid
        duals = _symbol_dual_axes(grid, obj.arity)
        steps = [grid.x_step] + [grid.xi_step] * (obj.arity - 1)
        fwd = [dft_matrix(a, d, -1, h) for a, d, h in zip(obj.axes, duals, steps)]
        energy = np.abs(apply_along_axes(obj.values, fwd)) ** 2
        mesh = np.meshgrid(*duals, indexing="ij", sparse=True)
        inside = np.ones(energy.shape, bool)
        for m, r in zip(mesh, radii):
            inside = inside & (np.abs(m) <= r + 1e-12)
        total = float(energy.sum())
        ratio = 0.0 if total == 0 else float(energy[~inside].sum()) / total
        return ratio < tol, ratio
    raise TypeError(f"unsupported object {type(obj).__name__}")


def chi_support_leakage(pair: DecompPair, halfwidth: float = 512.0, step: float = 1 / 8,
                        radius: float = 1.0, center: float = 0.0, modulation: float = 0.0) -> float:
    """Fourier energy of ``t -> e^{i m t} chi(t - center)`` outside ``B_radius(m)``.

    ``chi`` decays slowly, so it is sampled on a wide window
    ``[-halfwidth, halfwidth)`` and transformed onto the whole alias period.
    """
    t = np.arange(-halfwidth, halfwidth, step)
    vals = np.exp(1j * modulation * t) * pair.chi.func_1d(t - center)
    period = 2 * math.pi / step
    du = 1 / 64
    u = np.arange(-period / 2, period / 2, du)
    F = np.empty(len(u), complex)
    for i in range(0, len(u), 512):
        F[i:i + 512] = step * np.exp(-1j * np.outer(u[i:i + 512], t)) @ vals
    energy = np.abs(F) ** 2
    outside = np.abs(u - modulation) > radius + 1e-12
    return float(energy[outside].sum() / energy.sum())
