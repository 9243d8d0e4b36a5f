"""Sampling grids, sampled fields/symbols and dense Fourier quadrature.

Conventions::

    F f(xi)      = int e^{-i xi.x} f(x) dx
    F^{-1} F(x)  = (2 pi)^{-n} int e^{i x.xi} F(xi) dxi
    m(D) f       = F^{-1}[m F f]

Space samples sit at ``x_m = -X + m h_x`` and frequency samples at
``xi_j = -Xi + j h_xi``.  Both ``1/h_x`` and ``1/h_xi`` are integers so the
unit cubes ``nu + [-1/2, 1/2)^n`` and unit frequency translates are unions of
sample cells.  Transforms are dense quadrature sums, never periodic FFTs.
"""
from __future__ import annotations

import functools
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "SampledField",
    "SampledSymbol",
    "SymbolSpectrum",
    "make_grid",
    "default_grid",
    "fourier_forward",
    "fourier_inverse",
    "multiplier_apply",
    "spectrum_of",
    "fourier_leakage",
    "dft_matrix",
    "apply_along_axes",
    "BAND_TOL",
]

#: relative Fourier energy allowed outside a declared support
BAND_TOL = 1e-8


def _as_int(value, what):
    r = round(value)
    if r <= 0 or abs(value - r) > 1e-9 * max(1.0, abs(value)):
        raise ValueError(f"{what} must be a positive integer, got {value!r}")
    return int(r)


@dataclass(frozen=True)
class GridSpec:
    """Commensurate space/frequency lattice on ``[-X, X)^n`` x ``[-Xi, Xi)^n``."""

    dim: int
    x_halfwidth: float
    x_step: float
    xi_halfwidth: float
    xi_step: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        _as_int(self.x_halfwidth, "x_halfwidth")
        _as_int(self.xi_halfwidth, "xi_halfwidth")
        if self.x_step <= 0 or self.xi_step <= 0:
            raise ValueError("steps must be positive")
        _as_int(1.0 / self.x_step, "1/x_step")
        _as_int(1.0 / self.xi_step, "1/xi_step")
        if self.nx % 2 or self.nxi % 2:
            raise ValueError("axis sample counts must be even")

    @property
    def nx(self) -> int:
        return int(round(2 * self.x_halfwidth / self.x_step))

    @property
    def nxi(self) -> int:
        return int(round(2 * self.xi_halfwidth / self.xi_step))

    @property
    def x(self) -> np.ndarray:
        """1-D space axis (shared by all ``dim`` axes)."""
        return _axis(-self.x_halfwidth, self.x_step, self.nx)

    @property
    def xi(self) -> np.ndarray:
        return _axis(-self.xi_halfwidth, self.xi_step, self.nxi)

    @property
    def space_shape(self) -> tuple:
        return (self.nx,) * self.dim

    @property
    def freq_shape(self) -> tuple:
        return (self.nxi,) * self.dim

    @property
    def samples_per_cube(self) -> int:
        return int(round(1.0 / self.x_step))

    @property
    def nyquist(self) -> float:
        """Largest angular frequency resolved by the space samples."""
        return math.pi / self.x_step

    def lattice(self) -> np.ndarray:
        """Integer points ``nu`` whose unit cube meets ``[-X, X)``."""
        X = int(round(self.x_halfwidth))
        return np.arange(-X, X + 1)

    def widened(self, xi_halfwidth: float) -> "GridSpec":
        return GridSpec(self.dim, self.x_halfwidth, self.x_step, xi_halfwidth, self.xi_step)

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "x_halfwidth": self.x_halfwidth,
            "x_step": self.x_step,
            "xi_halfwidth": self.xi_halfwidth,
            "xi_step": self.xi_step,
        }


def _axis(start, step, count):
    # integer arithmetic keeps lattice points exact
    k = int(round(1.0 / step))
    return (np.arange(count) + start * k) / k


def make_grid(dim, x_halfwidth, x_step, xi_halfwidth, xi_step) -> GridSpec:
    return GridSpec(int(dim), float(x_halfwidth), float(x_step), float(xi_halfwidth), float(xi_step))


def default_grid() -> GridSpec:
    """Desk-scale 1-D grid: 256 space points on [-16, 16), 128 frequencies on [-8, 8)."""
    return make_grid(1, 16, 1 / 8, 8, 1 / 8)


# ---------------------------------------------------------------- kernels

@functools.lru_cache(maxsize=64)
def _cached_matrix(src: tuple, dst: tuple, sign: int, weight: float) -> np.ndarray:
    m = weight * np.exp(sign * 1j * np.outer(np.asarray(dst), np.asarray(src)))
    m.setflags(write=False)
    return m


def dft_matrix(src, dst, sign, weight) -> np.ndarray:
    """Dense quadrature matrix ``weight * exp(sign i dst src)`` (rows index ``dst``)."""
    return _cached_matrix(tuple(np.asarray(src, float)), tuple(np.asarray(dst, float)), int(sign), float(weight))


def apply_along_axes(values: np.ndarray, mats: Sequence[Optional[np.ndarray]]) -> np.ndarray:
    """Apply ``mats[a]`` to axis ``a`` of ``values``; ``None`` leaves the axis alone."""
    out = values
    for axis, m in enumerate(mats):
        if m is None:
            continue
        out = np.moveaxis(np.tensordot(m, out, axes=([1], [axis])), 0, axis)
    return out


def _forward_mats(grid: GridSpec):
    m = dft_matrix(grid.x, grid.xi, -1, grid.x_step)
    return [m] * grid.dim


def _inverse_mats(grid: GridSpec):
    m = dft_matrix(grid.xi, grid.x, +1, grid.xi_step / (2 * math.pi))
    return [m] * grid.dim


# ---------------------------------------------------------------- fields

@dataclass(frozen=True, eq=False)
class SampledField:
    """Samples of a function on ``grid`` in the space or frequency domain.

    ``spectrum`` optionally carries the frequency samples of the underlying
    function when they are known exactly (multiplier outputs); band-limit
    checks and multipliers then use it instead of re-transforming the
    truncated space samples.  ``energy_floor`` is a lower bound for the
    energy used as denominator of the leakage ratio; multiplier outputs set
    it from their input so that nearly vanishing pieces inherit the input's
    declared support instead of failing on round-off.
    """

    grid: GridSpec
    values: np.ndarray
    domain: str = "space"
    fsupp_radius: Optional[float] = None
    fsupp_box: Optional[tuple] = None
    spectrum: Optional[np.ndarray] = field(default=None, repr=False)
    energy_floor: Optional[float] = field(default=None, repr=False)

    def __post_init__(self):
        if self.domain not in ("space", "frequency"):
            raise ValueError(f"unknown domain tag {self.domain!r}")
        vals = np.array(self.values, dtype=complex)
        shape = self.grid.space_shape if self.domain == "space" else self.grid.freq_shape
        if vals.shape != shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.spectrum is not None:
            spec = np.array(self.spectrum, dtype=complex)
            if spec.shape != self.grid.freq_shape:
                raise ValueError("spectrum shape does not match frequency grid")
            spec.setflags(write=False)
            object.__setattr__(self, "spectrum", spec)
        if self.fsupp_box is not None:
            box = tuple((float(lo), float(hi)) for lo, hi in self.fsupp_box)
            if len(box) != self.grid.dim:
                raise ValueError("fsupp_box needs one interval per axis")
            object.__setattr__(self, "fsupp_box", box)
        if self.domain == "space" and (self.fsupp_radius is not None or self.fsupp_box is not None):
            ratio = fourier_leakage(self, radius=self.fsupp_radius, box=self.fsupp_box,
                                    floor=self.energy_floor)
            if ratio >= BAND_TOL:
                raise ValueError(
                    f"declared Fourier support violated: leakage ratio {ratio:.3e} >= {BAND_TOL:g}"
                )

    def with_values(self, values, **kw) -> "SampledField":
        kw.setdefault("fsupp_radius", None)
        return SampledField(self.grid, values, self.domain, **kw)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def spectrum_of(f: SampledField) -> np.ndarray:
    """Frequency samples of a space-domain field (cached spectrum when known)."""
    if f.domain != "space":
        raise ValueError("expected a space-domain field")
    if f.spectrum is not None:
        return f.spectrum
    return apply_along_axes(f.values, _forward_mats(f.grid))


def fourier_forward(f: SampledField) -> SampledField:
    """Quadrature ``h_x^n sum_m e^{-i xi.x_m} f(x_m)`` on the frequency grid."""
    if f.domain != "space":
        raise ValueError("fourier_forward expects a space-domain field")
    vals = apply_along_axes(f.values, _forward_mats(f.grid))
    return SampledField(f.grid, vals, "frequency")


def fourier_inverse(F: SampledField) -> SampledField:
    """Quadrature of the inverse transform, including the ``(2 pi)^{-n}`` factor."""
    if F.domain != "frequency":
        raise ValueError("fourier_inverse expects a frequency-domain field")
    vals = apply_along_axes(F.values, _inverse_mats(F.grid))
    return SampledField(F.grid, vals, "space")


def _freq_mesh(grid: GridSpec):
    return np.meshgrid(*([grid.xi] * grid.dim), indexing="ij")


def _sample_profile(m, grid: GridSpec) -> np.ndarray:
    if callable(m):
        vals = np.asarray(m(*_freq_mesh(grid)), dtype=complex)
        return np.broadcast_to(vals, grid.freq_shape)
    vals = np.asarray(m, dtype=complex)
    if vals.shape == ():
        return np.full(grid.freq_shape, vals)
    if vals.shape != grid.freq_shape:
        raise ValueError(f"multiplier shape {vals.shape} does not match frequency grid {grid.freq_shape}")
    return vals


def multiplier_apply(m, f: SampledField, support_radius: Optional[float] = None,
                     support_box: Optional[tuple] = None) -> SampledField:
    """Fourier multiplier ``m(D) f``.

    ``m`` is an array on the frequency grid, a scalar, or a callable of the
    frequency coordinates.  ``support_radius``/``support_box`` declare the
    support of ``m``; the output carries the tighter of that and the input's
    declared radius.
    """
    if f.domain != "space":
        raise ValueError("multiplier_apply expects a space-domain field")
    prof = _sample_profile(m, f.grid)
    src = spectrum_of(f)
    spec = prof * src
    vals = apply_along_axes(spec, _inverse_mats(f.grid))
    radii = [r for r in (f.fsupp_radius, support_radius) if r is not None]
    radius = min(radii) if radii else None
    floor = None
    if f.fsupp_radius is not None or f.fsupp_box is not None:
        base = max(float(np.sum(np.abs(src) ** 2)), f.energy_floor or 0.0)
        floor = float(np.max(np.abs(prof), initial=0.0)) ** 2 * base
    box = support_box if support_box is not None else f.fsupp_box
    return SampledField(f.grid, vals, "space", fsupp_radius=radius, fsupp_box=box,
                        spectrum=spec, energy_floor=floor)


def fourier_leakage(f: SampledField, radius: Optional[float] = None, box: Optional[tuple] = None,
                    floor: Optional[float] = None) -> float:
    """Fraction of Fourier energy outside ``B_radius`` (and/or the box).

    Without a cached spectrum the total energy comes from Plancherel on the
    space samples, so energy beyond the frequency window also counts as
    leakage.  ``floor`` (in units of summed squared spectrum samples) bounds
    the denominator from below.
    """
    grid = f.grid
    mesh = _freq_mesh(grid)
    inside = np.ones(grid.freq_shape, bool)
    if radius is not None:
        inside &= sum(c * c for c in mesh) <= radius * radius + 1e-12
    if box is not None:
        for c, (lo, hi) in zip(mesh, box):
            inside &= (c >= lo - 1e-12) & (c <= hi + 1e-12)
    if f.spectrum is not None:
        energy = np.abs(f.spectrum) ** 2
        total = max(float(energy.sum()), floor or 0.0)
        if total == 0.0:
            return 0.0
        return float(energy[~inside].sum()) / total
    spec = apply_along_axes(f.values, _forward_mats(grid))
    total = (2 * math.pi) ** grid.dim * float(np.sum(np.abs(f.values) ** 2)) * grid.x_step ** grid.dim
    if total == 0.0:
        return 0.0
    inner = float(np.sum(np.abs(spec[inside]) ** 2)) * grid.xi_step ** grid.dim
    return max(total - inner, 0.0) / total


# ---------------------------------------------------------------- symbols

@dataclass(frozen=True, eq=False)
class SymbolSpectrum:
    """Finite trigonometric representation of a band-limited symbol.

    ``sigma(x, xi_1, ..) = sum coeffs[p, q, ..] exp(i (freqs[0][p] x + freqs[1][q] xi_1 + ..))``.
    The Fourier transform is a sum of point masses, so its support is exactly
    the set of listed frequencies.
    """

    freqs: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        freqs = tuple(np.array(a, dtype=float).ravel() for a in self.freqs)
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != tuple(len(a) for a in freqs):
            raise ValueError("coefficient tensor does not match frequency axes")
        for a in freqs:
            a.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def arity(self) -> int:
        return len(self.freqs)

    def evaluate(self, points: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate on the tensor grid spanned by the 1-D ``points`` arrays."""
        out = self.coeffs
        # contract the last axes first so the largest output is built once
        for axis in reversed(range(self.arity)):
            E = np.exp(1j * np.outer(points[axis], self.freqs[axis]))
            out = np.tensordot(out, E, axes=([axis], [1]))
            out = np.moveaxis(out, -1, axis)
        return out

    def radii(self) -> tuple:
        return tuple(float(np.max(np.abs(a[_nonzero_along(self.coeffs, i)]), initial=0.0))
                     for i, a in enumerate(self.freqs))

    def modulated(self, shifts: Sequence[float]) -> "SymbolSpectrum":
        """Spectrum of ``exp(i shifts . z) sigma(z)``."""
        return SymbolSpectrum(tuple(a + s for a, s in zip(self.freqs, shifts)), self.coeffs)

    def masked(self, weights: Sequence[np.ndarray]) -> "SymbolSpectrum":
        """Coefficients multiplied by per-axis weights, with vanished frequencies dropped."""
        c = self.coeffs
        for axis, w in enumerate(weights):
            shape = [1] * self.arity
            shape[axis] = -1
            c = c * np.reshape(w, shape)
        return SymbolSpectrum(self.freqs, c).compact()

    def compact(self) -> "SymbolSpectrum":
        """Drop frequencies whose coefficient slices are all zero (keeps one if all vanish)."""
        keep = [_nonzero_along(self.coeffs, i) for i in range(self.arity)]
        keep = [k if k.any() else (np.arange(k.size) == 0) for k in keep]
        c = self.coeffs[np.ix_(*keep)]
        return SymbolSpectrum(tuple(a[k] for a, k in zip(self.freqs, keep)), c)

    def as_dict(self) -> dict:
        return {
            "freqs": [a.tolist() for a in self.freqs],
            "coeffs": _complex_to_pairs(self.coeffs),
            "shape": list(self.coeffs.shape),
        }


def _nonzero_along(c: np.ndarray, axis: int) -> np.ndarray:
    other = tuple(i for i in range(c.ndim) if i != axis)
    return np.any(c != 0, axis=other) if other else (c != 0)


@dataclass(frozen=True, eq=False)
class SampledSymbol:
    """Samples of ``sigma(x, xi_1[, xi_2])`` on ``grid.x`` x ``grid.xi`` (x ``grid.xi``).

    Either ``values`` or ``spectrum`` must be supplied; with a spectrum the
    samples are evaluated lazily.  Symbols live on 1-D grids only.
    """

    grid: GridSpec
    values_: Optional[np.ndarray] = field(default=None, repr=False)
    spectrum: Optional[SymbolSpectrum] = field(default=None, repr=False)
    fsupp_radii: Optional[tuple] = None
    arity: int = 3

    def __post_init__(self):
        if self.grid.dim != 1:
            raise ValueError("symbols are supported on 1-D grids only")
        if self.arity not in (2, 3):
            raise ValueError("symbol arity must be 2 (linear) or 3 (bilinear)")
        if self.values_ is None and self.spectrum is None:
            raise ValueError("need sample values or a spectrum")
        if self.values_ is not None:
            vals = np.array(self.values_, dtype=complex)
            if vals.shape != self.shape:
                raise ValueError(f"values shape {vals.shape} does not match {self.shape}")
            vals.setflags(write=False)
            object.__setattr__(self, "values_", vals)
        if self.spectrum is not None and self.spectrum.arity != self.arity:
            raise ValueError("spectrum arity does not match symbol arity")
        if self.fsupp_radii is not None:
            radii = tuple(float(r) for r in self.fsupp_radii)
            if len(radii) != self.arity:
                raise ValueError("need one support radius per variable")
            if min(radii) < 1:
                raise ValueError("declared support radii must be >= 1")
            object.__setattr__(self, "fsupp_radii", radii)
            if self.spectrum is not None:
                got = self.spectrum.radii()
                if any(g > r + 1e-12 for g, r in zip(got, radii)):
                    raise ValueError(f"spectrum radii {got} exceed declared {radii}")

    @property
    def shape(self) -> tuple:
        return (self.grid.nx,) + (self.grid.nxi,) * (self.arity - 1)

    @property
    def axes(self) -> list:
        return [self.grid.x] + [self.grid.xi] * (self.arity - 1)

    @functools.cached_property
    def values(self) -> np.ndarray:
        if self.values_ is not None:
            return self.values_
        vals = self.spectrum.evaluate(self.axes)
        vals.setflags(write=False)
        return vals

    # constructors --------------------------------------------------
    @classmethod
    def constant(cls, grid: GridSpec, c: complex = 1.0, arity: int = 3) -> "SampledSymbol":
        spec = SymbolSpectrum(tuple(np.zeros(1) for _ in range(arity)), np.full((1,) * arity, c, complex))
        return cls(grid, spectrum=spec, fsupp_radii=(1.0,) * arity, arity=arity)

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable, arity: int = 3) -> "SampledSymbol":
        axes = [grid.x] + [grid.xi] * (arity - 1)
        mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
        vals = np.broadcast_to(np.asarray(func(*mesh), complex), tuple(len(a) for a in axes))
        return cls(grid, values_=vals, arity=arity)

    @classmethod
    def from_spectrum(cls, grid: GridSpec, freqs, coeffs, fsupp_radii=None) -> "SampledSymbol":
        spec = SymbolSpectrum(tuple(freqs), coeffs)
        return cls(grid, spectrum=spec, fsupp_radii=fsupp_radii, arity=spec.arity)

    # covariance ------------------------------------------------------
    def modulated(self, k: Sequence[float]) -> "SampledSymbol":
        """``exp(i k . (x, xi_1, ..)) sigma``."""
        k = tuple(float(v) for v in k)
        if self.spectrum is not None:
            return SampledSymbol(self.grid, spectrum=self.spectrum.modulated(k), arity=self.arity)
        mesh = np.meshgrid(*self.axes, indexing="ij", sparse=True)
        phase = np.exp(1j * sum(kk * m for kk, m in zip(k, mesh)))
        return SampledSymbol(self.grid, values_=self.values * phase, arity=self.arity)

    def scaled(self, c: complex) -> "SampledSymbol":
        if self.spectrum is not None:
            spec = SymbolSpectrum(self.spectrum.freqs, c * self.spectrum.coeffs)
            return SampledSymbol(self.grid, spectrum=spec, fsupp_radii=self.fsupp_radii, arity=self.arity)
        return SampledSymbol(self.grid, values_=c * self.values, arity=self.arity)

    def translated_x(self, tau: float) -> "SampledSymbol":
        """``sigma(x - tau, ...)``; exact only through the spectrum."""
        if self.spectrum is None:
            raise ValueError("x-translation needs a spectral symbol")
        spec = self.spectrum
        c = spec.coeffs * np.exp(-1j * tau * spec.freqs[0]).reshape((-1,) + (1,) * (self.arity - 1))
        return SampledSymbol(self.grid, spectrum=SymbolSpectrum(spec.freqs, c),
                             fsupp_radii=self.fsupp_radii, arity=self.arity)

    def swapped(self) -> "SampledSymbol":
        """``sigma(x, xi_2, xi_1)``."""
        if self.arity != 3:
            raise ValueError("swap needs a bilinear symbol")
        radii = None if self.fsupp_radii is None else (self.fsupp_radii[0], self.fsupp_radii[2], self.fsupp_radii[1])
        if self.spectrum is not None:
            s = self.spectrum
            spec = SymbolSpectrum((s.freqs[0], s.freqs[2], s.freqs[1]), np.swapaxes(s.coeffs, 1, 2))
            return SampledSymbol(self.grid, spectrum=spec, fsupp_radii=radii)
        return SampledSymbol(self.grid, values_=np.swapaxes(self.values, 1, 2), fsupp_radii=radii)


# ---------------------------------------------------------------- serialization

def _complex_to_pairs(a: np.ndarray) -> list:
    flat = np.asarray(a, complex).ravel()
    return np.stack([flat.real, flat.imag], axis=1).tolist()


def _pairs_to_complex(pairs, shape) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def to_dict(obj) -> dict:
    """Self-describing JSON-ready dictionary for a field or symbol."""
    if isinstance(obj, SampledField):
        d = {
            "kind": "field",
            "grid": obj.grid.as_dict(),
            "domain": obj.domain,
            "fsupp_radius": obj.fsupp_radius,
            "shape": list(obj.values.shape),
            "values": _complex_to_pairs(obj.values),
        }
        if obj.spectrum is not None:
            d["spectrum"] = _complex_to_pairs(obj.spectrum)
        return d
    if isinstance(obj, SampledSymbol):
        d = {
            "kind": "symbol",
            "grid": obj.grid.as_dict(),
            "arity": obj.arity,
            "fsupp_radii": None if obj.fsupp_radii is None else list(obj.fsupp_radii),
        }
        if obj.spectrum is not None:
            d["spectrum"] = obj.spectrum.as_dict()
        else:
            d["shape"] = list(obj.values.shape)
            d["values"] = _complex_to_pairs(obj.values)
        return d
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(d: dict):
    try:
        kind = d["kind"]
        grid = make_grid(**d["grid"])
        if kind == "field":
            shape = tuple(d["shape"])
            spec = d.get("spectrum")
            return SampledField(
                grid,
                _pairs_to_complex(d["values"], shape),
                d.get("domain", "space"),
                fsupp_radius=d.get("fsupp_radius"),
                spectrum=None if spec is None else _pairs_to_complex(spec, grid.freq_shape),
            )
        if kind == "symbol":
            radii = d.get("fsupp_radii")
            if "spectrum" in d:
                s = d["spectrum"]
                return SampledSymbol.from_spectrum(
                    grid, s["freqs"], _pairs_to_complex(s["coeffs"], tuple(s["shape"])), radii)
            return SampledSymbol(grid, values_=_pairs_to_complex(d["values"], tuple(d["shape"])),
                                 fsupp_radii=radii, arity=int(d["arity"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed serialized object: {exc}") from exc
    raise ValueError(f"unknown object kind {kind!r}")


def save(obj, path) -> None:
    """Write ``.json`` (text) or ``.npz`` (binary container with JSON header)."""
    path = str(path)
    d = to_dict(obj)
    if path.endswith(".json"):
        with open(path, "w") as fh:
            json.dump(d, fh)
        return
    arrays = {}
    header = dict(d)
    for key in ("values", "spectrum"):
        if key in header and not isinstance(header[key], dict):
            arrays[key] = np.asarray(header.pop(key))
    if isinstance(header.get("spectrum"), dict):
        s = dict(header["spectrum"])
        arrays["spectrum_coeffs"] = np.asarray(s.pop("coeffs"))
        header["spectrum"] = s
    buf = io.BytesIO()
    np.savez(buf, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8), **arrays)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load(path):
    path = str(path)
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                return from_dict(json.load(fh))
        with np.load(path) as z:
            header = json.loads(bytes(z["header"]).decode())
            for key in ("values", "spectrum"):
                if key in z.files:
                    header[key] = z[key]
            if "spectrum_coeffs" in z.files:
                header["spectrum"]["coeffs"] = z["spectrum_coeffs"]
        return from_dict(header)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
