"""Function- and sequence-space norms computed from sampled data.

Space integrals use the Riemann sum over grid cells, so a unit cube
``nu + [-1/2, 1/2)^n`` is exactly ``(1/h)^n`` cells and cube-wise norms
reassemble the global ones without quadrature mismatch.
"""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import GridSpec, SampledField, SampledSymbol, apply_along_axes, dft_matrix, spectrum_of

__all__ = [
    "NormResult",
    "lp_norm",
    "seq_norm",
    "weak_seq_norm",
    "sobolev_norm",
    "amalgam_norm",
    "uniform_local_l2",
    "modulation_norm",
    "local_hardy_norm",
    "mixed_norm",
    "cube_norms",
    "windowed_amalgam_norm",
    "write_norm_table",
    "parse_space_id",
    "norm_by_id",
]


@dataclass
class NormResult:
    value: float
    space_id: str
    params: list = field(default_factory=list)
    quad_error_hint: float = 0.0

    def __post_init__(self):
        self.value = float(self.value)
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError(f"norm value must be finite and nonnegative, got {self.value}")

    def __float__(self):
        return self.value

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def write_norm_table(results: Iterable[NormResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["space_id", "params", "value"])
        for r in results:
            w.writerow([r.space_id, ";".join(repr(p) for p in r.params), repr(r.value)])


def _check_p(p, what="p"):
    if not (p == math.inf or p >= 1):
        raise ValueError(f"{what} must lie in [1, inf], got {p}")


# ---------------------------------------------------------------- sampled data access

def _space_data(obj):
    """Return ``(values, axes, cell_volume)`` for space-type samples."""
    if isinstance(obj, SampledField):
        if obj.domain != "space":
            raise ValueError("expected a space-domain field")
        g = obj.grid
        return obj.values, [g.x] * g.dim, g.x_step ** g.dim
    if isinstance(obj, SampledSymbol):
        g = obj.grid
        return obj.values, obj.axes, g.x_step * g.xi_step ** (obj.arity - 1)
    raise TypeError(f"unsupported object {type(obj).__name__}")


def _cube_starts(axis: np.ndarray) -> np.ndarray:
    idx = np.floor(axis + 0.5 + 1e-9).astype(int)
    return np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]]), np.unique(idx)


def cube_norms(values: np.ndarray, axes: Sequence[np.ndarray], cell: float, p: float):
    """Array of ``||f||_{L^p(nu + Q)}`` over lattice cubes and the cube centres per axis."""
    _check_p(p)
    a = np.abs(values)
    centers = []
    if p == math.inf:
        for axis, coords in enumerate(axes):
            starts, ids = _cube_starts(coords)
            a = np.maximum.reduceat(a, starts, axis=axis)
            centers.append(ids)
        return a, centers
    a = a ** p
    for axis, coords in enumerate(axes):
        starts, ids = _cube_starts(coords)
        a = np.add.reduceat(a, starts, axis=axis)
        centers.append(ids)
    return (cell * a) ** (1.0 / p), centers


def _lq(a: np.ndarray, q: float) -> float:
    a = np.abs(np.asarray(a)).astype(float).ravel()
    if a.size == 0:
        return 0.0
    if q == math.inf:
        return float(a.max())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((a / m) ** q) ** (1.0 / q))


# ---------------------------------------------------------------- norms

def lp_norm(f, p: float, region: Optional[Sequence[tuple]] = None) -> NormResult:
    """``(int_E |f|^p)^{1/p}``; ``region`` is a half-open box, one ``(lo, hi)`` per axis."""
    _check_p(p)
    vals, axes, cell = _space_data(f)
    a = np.abs(vals)
    if region is not None:
        mask = np.ones(a.shape, bool)
        mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
        for m, (lo, hi) in zip(mesh, region):
            mask = mask & (m >= lo - 1e-12) & (m < hi - 1e-12)
        a = np.where(mask, a, 0.0)
    if p == math.inf:
        return NormResult(float(a.max()) if a.size else 0.0, "L^inf", [p])
    return NormResult(_lq(a, p) * cell ** (1.0 / p), f"L^{p:g}", [p])


def seq_norm(a, q: float) -> NormResult:
    _check_p(q, "q")
    return NormResult(_lq(a, q), f"l^{q:g}", [q])


def weak_seq_norm(a, q: float) -> NormResult:
    """``sup_t t #{|a_k| > t}^{1/q}`` via the decreasing rearrangement: ``max_m m^{1/q} a*_m``."""
    if q == math.inf:
        raise ValueError("weak l^q is defined for finite q only")
    _check_p(q, "q")
    a = np.sort(np.abs(np.asarray(a, float)).ravel())[::-1]
    if a.size == 0:
        return NormResult(0.0, f"l^{q:g},inf", [q])
    m = np.arange(1, a.size + 1, dtype=float)
    return NormResult(float(np.max(m ** (1.0 / q) * a)), f"l^{q:g},inf", [q])


def sobolev_norm(f: SampledField, s: float) -> NormResult:
    """``((2 pi)^{-n} int <xi>^{2s} |F f|^2)^{1/2}``; ``s = 0`` reproduces ``L^2``."""
    g = f.grid
    spec = spectrum_of(f)
    mesh = np.meshgrid(*([g.xi] * g.dim), indexing="ij", sparse=True)
    r2 = sum(m * m for m in mesh)
    w = (1.0 + r2) ** s
    val = math.sqrt(float(np.sum(w * np.abs(spec) ** 2)) * g.xi_step ** g.dim / (2 * math.pi) ** g.dim)
    return NormResult(val, f"H^{s:g}", [s])


def amalgam_norm(f, p: float, q: float) -> NormResult:
    """``l^q`` over lattice cubes of the cube-wise ``L^p`` norms."""
    _check_p(q, "q")
    vals, axes, cell = _space_data(f)
    local, _ = cube_norms(vals, axes, cell, p)
    return NormResult(_lq(local, q), f"(L{p:g},l{q:g})", [p, q])


def uniform_local_l2(obj) -> NormResult:
    """``sup_nu ||f(. + nu)||_{L^2(Q)}``, jointly in all variables of a symbol."""
    vals, axes, cell = _space_data(obj)
    local, _ = cube_norms(vals, axes, cell, 2)
    return NormResult(float(local.max()), "L2ul", [])


def windowed_amalgam_norm(f: SampledField, window, p: float, q: float,
                          shifts: Optional[np.ndarray] = None) -> NormResult:
    """``|| g(x - nu) f(x) ||_{L^p_x l^q_nu}`` for a space window ``g`` (callable, 1-D grids)."""
    _check_p(p)
    _check_p(q, "q")
    g = f.grid
    if g.dim != 1:
        raise ValueError("windowed amalgam norm is implemented for 1-D grids")
    nus = g.lattice() if shifts is None else np.asarray(shifts)
    W = np.asarray(window(g.x[None, :] - nus[:, None]))
    prod = np.abs(W * f.values[None, :])
    if p == math.inf:
        local = prod.max(axis=1)
    else:
        local = np.array([_lq(row, p) for row in prod]) * g.x_step ** (1.0 / p)
    return NormResult(_lq(local, q), f"W(L{p:g},l{q:g})", [p, q])


def modulation_norm(obj, p: float, q: float, window=None) -> NormResult:
    """``|| phi(D - k) f ||_{L^p_x l^q_k}``.

    ``window`` is a :class:`~bpdo.decomp.DecompPair` or partition profile
    (default: the standard partition).  Fields need Fourier support inside
    ``B_{Xi - 2}``; symbols use the tensor partition in all variables and
    the ``L^p`` norm over the grid box.
    """
    from . import decomp

    _check_p(p)
    _check_p(q, "q")
    if window is None:
        pair = None
        phi = decomp.build_partition(1)
    elif isinstance(window, decomp.DecompPair):
        pair = window
        phi = window.phi
    else:
        pair = None
        phi = window
    if isinstance(obj, SampledSymbol):
        if pair is None:
            pair = decomp.DecompPair(1, decomp.build_partition(1), None, None, None, 0.0, None)
        pieces = []
        for k in decomp.symbol_box_window(obj):
            piece = decomp.symbol_box(k, obj, pair)
            if piece.spectrum is not None and not np.any(piece.spectrum.coeffs):
                continue
            pieces.append(lp_norm(piece, p).value)
        return NormResult(_lq(np.array(pieces), q), f"M^{{{p:g},{q:g}}}", [p, q])

    f = obj
    g = f.grid
    limit = g.xi_halfwidth - 2
    if f.fsupp_radius is not None and f.fsupp_radius > limit + 1e-12:
        raise ValueError(f"modulation norm needs Fourier support in B_{limit:g}, declared {f.fsupp_radius}")
    if f.fsupp_radius is None:
        from .grid import fourier_leakage
        if fourier_leakage(f, radius=limit) >= 1e-8:
            raise ValueError(f"field is not band-limited to B_{limit:g}")
    spec = spectrum_of(f)
    Xi = int(round(g.xi_halfwidth))
    ks = np.arange(-Xi, Xi + 1)
    phi1 = phi.func_1d if hasattr(phi, "func_1d") else phi
    P = np.array([phi1(g.xi - k) for k in ks])  # (K, Nxi)
    inv = dft_matrix(g.xi, g.x, +1, g.xi_step / (2 * math.pi))
    cell = g.x_step ** g.dim
    local = []
    if g.dim == 1:
        pieces = (P * spec[None, :]) @ inv.T
        for row in pieces:
            local.append(_lq(row, p) * (cell ** (1.0 / p) if p != math.inf else 1.0))
    else:
        import itertools
        for kk in itertools.product(range(len(ks)), repeat=g.dim):
            w = 1.0
            for axis, i in enumerate(kk):
                shape = [1] * g.dim
                shape[axis] = -1
                w = w * P[i].reshape(shape)
            piece = apply_along_axes(w * spec, [inv] * g.dim)
            local.append(_lq(piece, p) * (cell ** (1.0 / p) if p != math.inf else 1.0))
    return NormResult(_lq(np.array(local), q), f"M^{{{p:g},{q:g}}}", [p, q])


DEFAULT_SCALES = tuple(2.0 ** -j for j in range(9))


def local_hardy_norm(f: SampledField, scales: Optional[Sequence[float]] = None) -> NormResult:
    """``|| max_t |phi_t * f| ||_{L^1}`` for a normalised Gaussian ``phi``.

    ``phi_t * f`` is the multiplier ``exp(-t^2 |xi|^2 / 2)`` applied to the
    spectrum, which stays accurate for scales below the sample spacing.
    """
    scales = DEFAULT_SCALES if scales is None else tuple(scales)
    if not scales:
        raise ValueError("need at least one scale")
    g = f.grid
    spec = spectrum_of(f)
    mesh = np.meshgrid(*([g.xi] * g.dim), indexing="ij", sparse=True)
    r2 = sum(m * m for m in mesh)
    inv = [dft_matrix(g.xi, g.x, +1, g.xi_step / (2 * math.pi))] * g.dim
    best = np.zeros(g.space_shape)
    for t in scales:
        smoothed = apply_along_axes(np.exp(-0.5 * t * t * r2) * spec, inv)
        best = np.maximum(best, np.abs(smoothed))
    return NormResult(float(best.sum()) * g.x_step ** g.dim, "h^1", list(scales))


def mixed_norm(data: np.ndarray, spec: Sequence[tuple]) -> NormResult:
    """Iterated norm, innermost first: ``spec = [(axis, p[, weight]), ...]``.

    ``weight`` is a quadrature cell size for ``L^p`` axes (default 1, i.e.
    ``l^p``).  ``||f||_{X_x Y_y Z_z}`` is ``[(0, X), (1, Y), (2, Z)]``.
    """
    data = np.abs(np.asarray(data))
    axes = [entry[0] for entry in spec]
    if sorted(axes) != list(range(data.ndim)):
        raise ValueError(f"spec must cover axes 0..{data.ndim - 1} exactly once, got {axes}")
    current = data
    remaining = list(range(data.ndim))
    for entry in spec:
        axis, p = entry[0], entry[1]
        weight = entry[2] if len(entry) > 2 else 1.0
        _check_p(p)
        pos = remaining.index(axis)
        if p == math.inf:
            current = current.max(axis=pos)
        else:
            m = current.max(axis=pos, keepdims=True)
            safe = np.where(m > 0, m, 1.0)
            current = (np.squeeze(m, axis=pos)
                       * np.sum((current / safe) ** p, axis=pos) ** (1.0 / p)
                       * weight ** (1.0 / p))
        remaining.pop(pos)
    return NormResult(float(current), "mixed", [list(e) for e in spec])


# ---------------------------------------------------------------- space identifiers

_NUM = r"(inf|[0-9]*\.?[0-9]+)"
_PATTERNS = [
    ("L2ul", re.compile(r"^L\^?2_?ul$")),
    ("hardy", re.compile(r"^h\^?1$")),
    ("amalgam", re.compile(rf"^\(L\^?{_NUM},\s*l\^?{_NUM}\)$")),
    ("modulation", re.compile(rf"^M\^?\{{?{_NUM},\s*{_NUM}\}}?$")),
    ("sobolev", re.compile(r"^H\^?(-?[0-9]*\.?[0-9]+)$")),
    ("lebesgue", re.compile(rf"^L\^?{_NUM}$")),
]


def _num(text: str) -> float:
    return math.inf if text == "inf" else float(text)


def parse_space_id(text: str):
    """Map a space identifier to ``(kind, params)``.

    Accepted forms: ``L2``, ``L1.5``, ``Linf``, ``H^0.25``, ``(L2,l1)``,
    ``L2ul``, ``M^{inf,1}`` (or ``Minf,1``) and ``h1``.
    """
    t = text.strip().replace(" ", "")
    for kind, pat in _PATTERNS:
        m = pat.match(t)
        if m:
            return kind, [_num(g) for g in m.groups()]
    raise ValueError(f"unknown space id {text!r}")


def norm_by_id(obj, space_id: str) -> NormResult:
    """Evaluate the norm named by ``space_id`` on a field or symbol."""
    kind, params = parse_space_id(space_id)
    if kind == "L2ul":
        out = uniform_local_l2(obj)
    elif kind == "hardy":
        out = local_hardy_norm(obj)
    elif kind == "amalgam":
        out = amalgam_norm(obj, *params)
    elif kind == "modulation":
        out = modulation_norm(obj, *params)
    elif kind == "sobolev":
        out = sobolev_norm(obj, params[0])
    else:
        out = lp_norm(obj, params[0])
    out.space_id = space_id.strip()
    return out
