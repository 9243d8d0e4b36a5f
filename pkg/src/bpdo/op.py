"""The bilinear operator ``T_sigma``, the linear operator ``sigma(X, D)`` and the averaging operator ``S``.

``T_sigma(f1, f2)(x) = (2 pi)^{-2n} int int e^{i x.(xi1 + xi2)} sigma(x, xi1, xi2) F f1(xi1) F f2(xi2)``

is evaluated by quadrature over the frequency grid.  Symbols given by a
trigonometric spectrum use the identity
``(2 pi)^{-1} int e^{i x xi} e^{i y xi} F f(xi) dxi = f(x + y)`` (with the
shift done as a multiplier on the same grid), which reproduces the dense
quadrature sum exactly while avoiding the ``nx * nxi^2`` symbol table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from .grid import GridSpec, SampledField, SampledSymbol, dft_matrix, spectrum_of

__all__ = [
    "AliasingError",
    "OperatorReport",
    "bilinear_apply",
    "linear_apply",
    "s_transform",
    "s_kernel",
    "convolve",
    "ball_convolve",
    "declared_radius",
]


class AliasingError(ValueError):
    """An operator input or output band does not fit the grid."""


@dataclass(frozen=True)
class OperatorReport:
    output: SampledField
    flops_estimate: int
    quad_error_hint: float


def declared_radius(f: SampledField) -> Optional[float]:
    """Radius of the smallest centred ball containing the declared Fourier support."""
    radii = []
    if f.fsupp_radius is not None:
        radii.append(float(f.fsupp_radius))
    if f.fsupp_box is not None:
        radii.append(math.sqrt(sum(max(abs(lo), abs(hi)) ** 2 for lo, hi in f.fsupp_box)))
    return min(radii) if radii else None


def _symbol_x_radius(sigma: SampledSymbol) -> float:
    if sigma.fsupp_radii is not None:
        return sigma.fsupp_radii[0]
    if sigma.spectrum is not None:
        return sigma.spectrum.radii()[0]
    return 0.0


def _guard(sigma: SampledSymbol, fields, allow_alias: bool) -> None:
    g = sigma.grid
    for f in fields:
        if f.grid != g:
            raise ValueError("field and symbol grids differ")
        if f.domain != "space":
            raise ValueError("operator inputs must be space-domain fields")
    if allow_alias:
        return
    limit = g.xi_halfwidth / 2
    radii = []
    for i, f in enumerate(fields, start=1):
        r = declared_radius(f)
        if r is None or r > limit + 1e-12:
            raise AliasingError(
                f"input {i} needs a declared Fourier support radius <= {limit:g} (got {r}); "
                "pass allow_alias=True to override")
        radii.append(r)
    band = sum(radii) + _symbol_x_radius(sigma)
    if band > g.nyquist + 1e-12:
        raise AliasingError(f"output band {band:g} exceeds the sampling limit {g.nyquist:g}")


def _boundary_hint(*fields) -> float:
    """Relative mass of the inputs in the outermost unit cube at each end."""
    hint = 0.0
    for f in fields:
        v = np.abs(f.values) ** 2
        total = float(v.sum())
        if total == 0:
            continue
        k = f.grid.samples_per_cube
        edge = float(v[:k].sum() + v[-k:].sum()) if f.grid.dim == 1 else 0.0
        hint = max(hint, edge / total)
    return hint


def _shift_table(f: SampledField, shifts: np.ndarray) -> np.ndarray:
    """Rows ``f(x + y)`` for each ``y`` in ``shifts``, via the multiplier ``e^{i y xi}``."""
    g = f.grid
    inv = dft_matrix(g.xi, g.x, +1, g.xi_step / (2 * math.pi))
    spec = spectrum_of(f)
    phases = np.exp(1j * np.outer(shifts, g.xi)) * spec[None, :]
    return phases @ inv.T


def _phase_table(f: SampledField) -> np.ndarray:
    """``E[x, xi] = h_xi / (2 pi) e^{i x xi} F f(xi)``."""
    g = f.grid
    inv = dft_matrix(g.xi, g.x, +1, g.xi_step / (2 * math.pi))
    return inv * spectrum_of(f)[None, :]


def bilinear_apply(sigma: SampledSymbol, f1: SampledField, f2: SampledField, *,
                   allow_alias: bool = False, method: str = "auto", report: bool = False):
    """Evaluate ``T_sigma(f1, f2)`` on the space grid.

    Parameters
    ----------
    sigma : SampledSymbol
        Bilinear symbol on the same grid as the inputs.
    f1, f2 : SampledField
        Inputs; each must declare a Fourier support radius ``<= Xi/2``
        unless ``allow_alias`` is set.
    method : {"auto", "dense", "spectral"}
        ``dense`` contracts the full symbol table; ``spectral`` needs a
        trigonometric symbol.  ``auto`` prefers ``spectral``.
    report : bool
        Return an :class:`OperatorReport` instead of the bare field.
    """
    if sigma.arity != 3:
        raise ValueError("bilinear_apply needs a symbol of (x, xi1, xi2)")
    _guard(sigma, (f1, f2), allow_alias)
    g = sigma.grid
    if method == "auto":
        method = "spectral" if sigma.spectrum is not None else "dense"
    if method == "spectral":
        if sigma.spectrum is None:
            raise ValueError("spectral evaluation needs a trigonometric symbol")
        spec = sigma.spectrum
        S1 = _shift_table(f1, spec.freqs[1])
        S2 = _shift_table(f2, spec.freqs[2])
        # inner sums share the coefficient tensor; contract the largest axis first
        inner = np.einsum("pqr,rx->pqx", spec.coeffs, S2, optimize=True)
        inner = np.einsum("pqx,qx->px", inner, S1)
        E0 = np.exp(1j * np.outer(spec.freqs[0], g.x))
        vals = np.sum(E0 * inner, axis=0)
        P, Q, R = spec.coeffs.shape
        flops = 8 * (P * Q * R * g.nx + P * Q * g.nx + (Q + R) * g.nxi * g.nx)
    elif method == "dense":
        E1 = _phase_table(f1)
        E2 = _phase_table(f2)
        vals = np.einsum("xab,xa,xb->x", sigma.values, E1, E2, optimize=True)
        flops = 8 * g.nx * g.nxi * g.nxi
    else:
        raise ValueError(f"unknown method {method!r}")
    out = SampledField(g, vals)
    if report:
        return OperatorReport(out, int(flops), _boundary_hint(f1, f2))
    return out


def linear_apply(sigma: SampledSymbol, f: SampledField, *, allow_alias: bool = False,
                 method: str = "auto", report: bool = False):
    """Evaluate ``sigma(X, D) f = (2 pi)^{-n} int e^{i x xi} sigma(x, xi) F f(xi) dxi``."""
    if sigma.arity != 2:
        raise ValueError("linear_apply needs a symbol of (x, xi)")
    _guard(sigma, (f,), allow_alias)
    g = sigma.grid
    if method == "auto":
        method = "spectral" if sigma.spectrum is not None else "dense"
    if method == "spectral":
        if sigma.spectrum is None:
            raise ValueError("spectral evaluation needs a trigonometric symbol")
        spec = sigma.spectrum
        S = _shift_table(f, spec.freqs[1])
        E0 = np.exp(1j * np.outer(spec.freqs[0], g.x))
        vals = np.einsum("pq,qx,px->x", spec.coeffs, S, E0, optimize=True)
        flops = 8 * (spec.coeffs.size * g.nx + len(spec.freqs[1]) * g.nxi * g.nx)
    elif method == "dense":
        vals = np.einsum("xa,xa->x", sigma.values, _phase_table(f))
        flops = 8 * g.nx * g.nxi
    else:
        raise ValueError(f"unknown method {method!r}")
    out = SampledField(g, vals)
    if report:
        return OperatorReport(out, int(flops), _boundary_hint(f))
    return out


# ---------------------------------------------------------------- convolutions

def _offsets(grid: GridSpec) -> np.ndarray:
    n = grid.nx
    return np.arange(-(n - 1), n) * grid.x_step


def _full_to_grid(full: np.ndarray, n: int, start: int) -> np.ndarray:
    sl = tuple(slice(start, start + n) for _ in range(full.ndim))
    return full[sl]


def s_kernel(grid: GridSpec) -> np.ndarray:
    """``<d>^{-(n+1)}`` on all grid offsets ``d`` (length ``2 nx - 1`` per axis)."""
    d = _offsets(grid)
    mesh = np.meshgrid(*([d] * grid.dim), indexing="ij", sparse=True)
    return (1.0 + sum(m * m for m in mesh)) ** (-(grid.dim + 1) / 2)


def _s_values(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    a = np.abs(values)
    full = signal.convolve(a, s_kernel(grid), mode="full", method="direct" if grid.dim == 1 else "auto")
    out = _full_to_grid(full, grid.nx, grid.nx - 1) * grid.x_step ** grid.dim
    return np.maximum(out.real, 0.0)


def s_transform(f: SampledField, report: bool = False):
    """``S f(x) = int |f(y)| <x - y>^{-(n+1)} dy`` over the grid box.

    The kernel is truncated to the box.  The hint ``(2/X + h) sup |f|``
    bounds the truncation plus Riemann-sum error at the centre of the box.
    """
    if f.domain != "space":
        raise ValueError("s_transform expects a space-domain field")
    out = SampledField(f.grid, _s_values(f.values, f.grid))
    if report:
        X = f.grid.x_halfwidth
        hint = (2.0 / X + f.grid.x_step) * float(np.max(np.abs(f.values), initial=0.0))
        return OperatorReport(out, int(2 * f.grid.nx ** (2 * f.grid.dim)), hint)
    return out


def convolve(f: SampledField, g: SampledField) -> SampledField:
    """Quadrature ``(f * g)(x) = int f(y) g(x - y) dy`` with both factors zero outside the box."""
    if f.grid != g.grid:
        raise ValueError("grids differ")
    grid = f.grid
    full = signal.convolve(np.asarray(f.values), np.asarray(g.values), mode="full",
                           method="direct" if grid.dim == 1 else "auto")
    out = _full_to_grid(full, grid.nx, grid.nx // 2) * grid.x_step ** grid.dim
    return SampledField(grid, out)


def ball_convolve(values: np.ndarray, grid: GridSpec, radius: float) -> np.ndarray:
    """``int_{|y| <= r} u(x - y) dy`` for 1-D samples ``u`` (trapezoid weights at the rim)."""
    if grid.dim != 1:
        raise ValueError("ball_convolve is implemented for 1-D grids")
    h = grid.x_step
    m = int(math.floor(radius / h + 1e-9))
    w = np.full(2 * m + 1, h)
    if abs(m * h - radius) < 1e-9 * max(1.0, radius):
        w[0] = w[-1] = h / 2
    u = np.asarray(values)
    full = np.convolve(u, w, mode="full")
    return full[m:m + len(u)]
