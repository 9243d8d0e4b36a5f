"""Checkers for the auxiliary inequalities: averaging operator, weak-type product sums,
window equivalence of amalgam norms, sup versus local L^2 of frequency pieces, and duality.

Each ``check_*`` function evaluates one instance and returns plain numbers;
the ``*_ensemble`` functions draw seeded ensembles and report worst cases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .. import decomp, samples, spaces
from ..grid import GridSpec, SampledField, SampledSymbol, default_grid, multiplier_apply
from ..op import convolve, s_transform

__all__ = [
    "check_product_lweak",
    "product_lweak_ensemble",
    "check_amalgam_equiv",
    "amalgam_equiv_ensemble",
    "s_prop1_residual",
    "s_prop2_ratio",
    "s_prop3_ratio",
    "s_prop4_ratio",
    "check_s_properties",
    "check_l2ul_linfty",
    "l2ul_linfty_ensemble",
    "check_duality",
    "duality_ensemble",
    "calibrate_spaces",
    "WindowHypothesisError",
]


def _rng(seed, *stream) -> np.random.Generator:
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


# ---------------------------------------------------------------- weak-type product sums

def _centered(a, name):
    a = np.asarray(a, float)
    if a.ndim != 1 or a.size % 2 == 0:
        raise ValueError(f"{name} must be a 1-D array of odd length centred at index 0")
    if np.any(a < 0):
        raise ValueError(f"{name} must be nonnegative")
    return a


def check_product_lweak(f1, f2, A0, A1, A2, p1: float, p2: float) -> float:
    """``sum f1(v1) f2(v2) A0(v1+v2) A1(v1) A2(v2)`` over the weak-norm/l^2 bound.

    All sequences are odd-length arrays centred at 0; ``A0`` is indexed by
    ``v1 + v2`` and may have any odd length.  Sums are exact (no FFT).
    """
    if not (2 < p1 < math.inf and 2 < p2 < math.inf):
        raise ValueError("need 2 < p1, p2 < inf")
    if abs(1 / p1 + 1 / p2 - 0.5) > 1e-12:
        raise ValueError("need 1/p1 + 1/p2 = 1/2")
    f1, f2, A0, A1, A2 = (_centered(a, n) for a, n in zip((f1, f2, A0, A1, A2), ("f1", "f2", "A0", "A1", "A2")))
    if f1.size != A1.size or f2.size != A2.size:
        raise ValueError("f_j and A_j must share an index window")
    conv = np.convolve(f1 * A1, f2 * A2)  # indexed by v1 + v2, centred
    c_conv, c0 = conv.size // 2, A0.size // 2
    half = min(c_conv, c0)
    lhs = float(np.dot(conv[c_conv - half:c_conv + half + 1], A0[c0 - half:c0 + half + 1]))
    rhs = (spaces.weak_seq_norm(f1, p1).value * spaces.weak_seq_norm(f2, p2).value
           * np.linalg.norm(A0) * np.linalg.norm(A1) * np.linalg.norm(A2))
    if rhs == 0:
        raise ValueError("right-hand side vanishes")
    return lhs / float(rhs)


def product_lweak_ensemble(seed: int = 0, trials: int = 10_000, window: int = 32,
                           p1: float = 4.0, p2: float = 4.0, dim: int = 1) -> np.ndarray:
    """Ratios for ``f_j = <v>^{-n/p_j}`` and random nonnegative ``A_j``.

    The ``A_j`` mix flat, peaked and sparse profiles so that both spread-out
    and concentrated configurations are probed.
    """
    v = np.arange(-window, window + 1)
    f1 = (1.0 + v * v) ** (-dim / (2 * p1))
    f2 = (1.0 + v * v) ** (-dim / (2 * p2))
    rng = _rng(seed, 32)
    out = np.empty(trials)
    n, n0 = v.size, 2 * v.size - 1
    for t in range(trials):
        kind = t % 3
        if kind == 0:
            A = [rng.random(n0), rng.random(n), rng.random(n)]
        elif kind == 1:
            e = rng.uniform(1, 12)
            A = [rng.random(n0) ** e, rng.random(n) ** e, rng.random(n) ** e]
        else:
            A = [rng.random(m) * (rng.random(m) < 0.1) for m in (n0, n, n)]
            for a in A:
                if not a.any():
                    a[rng.integers(a.size)] = 1.0
        out[t] = check_product_lweak(f1, f2, A[0], A[1], A[2], p1, p2)
    return out


# ---------------------------------------------------------------- window equivalence

class WindowHypothesisError(ValueError):
    pass


def _window_constant(g: Callable, L: float) -> float:
    """Largest ``c`` with ``c 1_Q <= |g| <= c^{-1} <x>^{-L}``, checked on samples."""
    q = np.linspace(-0.5, 0.5, 801)[:-1]
    c1 = float(np.min(np.abs(g(q))))
    if c1 <= 0:
        raise WindowHypothesisError("window vanishes somewhere on the unit cube")
    cs = []
    for span in (64.0, 256.0):
        x = np.linspace(-span, span, int(16 * span) + 1)
        gx = np.abs(g(x))
        ok = gx > 1e-300
        cs.append(float(np.min((1 + x[ok] ** 2) ** (-L / 2) / gx[ok])) if ok.any() else math.inf)
    if cs[1] < 0.9 * cs[0]:
        raise WindowHypothesisError(f"window decays slower than <x>^-{L:g}")
    return min(c1, cs[1], 1.0)


def check_amalgam_equiv(f: SampledField, g: Callable, p: float, q: float, L: float) -> float:
    """``||f||_{(L^p, l^q)} / ||g(x - v) f(x)||_{L^p_x l^q_v}`` after checking the window hypotheses."""
    if L <= f.grid.dim / min(p, q):
        raise WindowHypothesisError(f"need L > n/min(p, q) = {f.grid.dim / min(p, q):g}")
    _window_constant(g, L)
    X = int(round(f.grid.x_halfwidth))
    shifts = np.arange(-X - 8, X + 9)
    den = spaces.windowed_amalgam_norm(f, g, p, q, shifts=shifts).value
    return spaces.amalgam_norm(f, p, q).value / den


def gaussian_window(x):
    return np.exp(-np.asarray(x, float) ** 2 / 2)


def cube_window(x):
    x = np.asarray(x, float)
    return ((x >= -0.5) & (x < 0.5)).astype(float)


def amalgam_equiv_ensemble(seed: int = 0, members: int = 50, grid: Optional[GridSpec] = None,
                           pq=((2, 1), (2, 2), (1, 1), (2, math.inf))) -> dict:
    """Ratios for the Gaussian window over random fields and the indicator of ``[0, 3)``."""
    grid = grid or default_grid()
    rng = _rng(seed, 21)
    fields = [samples.random_field(grid, rng) for _ in range(members)]
    fields.append(samples.indicator_field(grid, 0, 3))
    ratios = {}
    for p, q in pq:
        L = grid.dim / min(p, q) + 1
        ratios[(p, q)] = np.array([check_amalgam_equiv(f, gaussian_window, p, q, L) for f in fields])
    return ratios


# ---------------------------------------------------------------- averaging operator

def _central(grid: GridSpec, frac: float = 0.25) -> np.ndarray:
    return np.abs(grid.x) <= frac * grid.x_halfwidth


def s_prop1_residual(f: SampledField, g: SampledField) -> float:
    """Relative gap between ``S(f*g)``, ``S(f)*g`` and ``f*S(g)`` on the central quarter of the box.

    Away from the centre the convolutions need ``S f`` beyond the box, so
    only ``|x| <= X/4`` is compared.
    """
    a = s_transform(convolve(f, g)).values.real
    b = convolve(s_transform(f), g).values.real
    c = convolve(f, s_transform(g)).values.real
    m = _central(f.grid)
    scale = float(np.max(np.abs(a[m])))
    return float(max(np.max(np.abs(a[m] - b[m])), np.max(np.abs(a[m] - c[m])))) / scale


def s_prop2_ratio(f: SampledField, radius: float = 1.0) -> float:
    """``max S f(x) / S f(y)`` over grid pairs with ``|x - y| <= radius``."""
    s = s_transform(f).values.real
    k = int(round(radius / f.grid.x_step))
    worst = 1.0
    for d in range(1, k + 1):
        r = s[d:] / s[:-d]
        worst = max(worst, float(r.max()), float((1 / r).max()))
    return worst


def _lattice_on_grid(grid: GridSpec) -> np.ndarray:
    X = int(round(grid.x_halfwidth))
    return np.arange(-X, X) * grid.samples_per_cube


def s_prop3_ratio(f: SampledField, p: float) -> float:
    """``||S f(v)||_{l^p_v} / ||S f||_{L^p}`` over lattice points of the box."""
    sf = s_transform(f)
    idx = _lattice_on_grid(f.grid)
    return spaces.seq_norm(sf.values.real[idx], p).value / spaces.lp_norm(sf, p).value


def s_prop4_ratio(f: SampledField, nu: int, phi) -> float:
    """``max_x |phi(D - v) f(x)|^2 / S(|phi(D - v) f|^2)(x)``."""
    u = multiplier_apply(lambda xi: phi(xi - nu), f)
    e = np.abs(u.values) ** 2
    if not e.any():
        return 0.0
    s = s_transform(SampledField(f.grid, e)).values.real
    keep = s > 0
    return float(np.max(e[keep] / s[keep]))


def _nonneg_narrow(grid: GridSpec, rng) -> SampledField:
    vals = np.zeros(grid.space_shape)
    for _ in range(rng.integers(1, 4)):
        w = rng.uniform(1.25, 2.0)
        c = rng.uniform(-1.5, 1.5)
        vals = vals + rng.uniform(0.2, 1.0) * np.exp(-(grid.x - c) ** 2 / (2 * w * w))
    return SampledField(grid, vals, fsupp_radius=grid.xi_halfwidth / 2)


@dataclass
class SReport:
    prop1_residual: float
    C2: float
    C3: float
    C4: float
    details: dict = field(default_factory=dict)


def check_s_properties(seed: int = 0, members: int = 50, grid: Optional[GridSpec] = None,
                       radius: float = 1.0, nus: Sequence[int] = (-3, -1, 0, 2)) -> SReport:
    """Worst cases of the four averaging-operator properties on seeded ensembles."""
    grid = grid or default_grid()
    rng = _rng(seed, 31)
    res1 = [s_prop1_residual(_nonneg_narrow(grid, rng), _nonneg_narrow(grid, rng)) for _ in range(members)]
    fields = [samples.random_field(grid, rng) for _ in range(members)]
    c2 = [s_prop2_ratio(f, radius) for f in fields]
    c3 = {p: [s_prop3_ratio(f, p) for f in fields] for p in (1, 2, math.inf)}
    phi = decomp.build_partition(1).func_1d
    c4 = [max(s_prop4_ratio(f, nu, phi) for nu in nus) for f in fields]
    spread = max(max(max(v), 1 / min(v)) for v in c3.values())
    return SReport(
        prop1_residual=float(max(res1)),
        C2=float(max(c2)),
        C3=float(spread),
        C4=float(max(c4)),
        details={"prop1": res1, "prop2": c2, "prop3": {str(k): v for k, v in c3.items()}, "prop4": c4},
    )


# ---------------------------------------------------------------- sup versus local L^2

def _piece_in_box(piece, k) -> bool:
    if isinstance(piece, SampledSymbol):
        if piece.spectrum is None:
            ok, _ = _dense_symbol_box_ok(piece, k)
            return ok
        c = piece.spectrum.coeffs
        for i, (a, kk) in enumerate(zip(piece.spectrum.freqs, k)):
            live = a[decomp._nonzero_along(c, i)]
            if live.size and np.max(np.abs(live - kk)) > 1 + 1e-12:
                return False
        return True
    if isinstance(piece, SampledField):
        k = np.broadcast_to(np.asarray(k, float), (piece.grid.dim,))
        box = tuple((v - 1, v + 1) for v in k)
        return decomp.fourier_leakage(piece, box=box) < 1e-8
    raise TypeError(f"unsupported piece {type(piece).__name__}")


def _dense_symbol_box_ok(piece: SampledSymbol, k):
    from ..grid import apply_along_axes, dft_matrix
    grid = piece.grid
    duals = decomp._symbol_dual_axes(grid, piece.arity)
    steps = [grid.x_step] + [grid.xi_step] * (piece.arity - 1)
    fwd = [dft_matrix(a, d, -1, h) for a, d, h in zip(piece.axes, duals, steps)]
    energy = np.abs(apply_along_axes(piece.values, fwd)) ** 2
    mesh = np.meshgrid(*duals, indexing="ij", sparse=True)
    inside = np.ones(energy.shape, bool)
    for m, kk in zip(mesh, k):
        inside = inside & (np.abs(m - kk) <= 1 + 1e-12)
    total = float(energy.sum())
    ratio = 0.0 if total == 0 else float(energy[~inside].sum()) / total
    return ratio < 1e-8, ratio


def check_l2ul_linfty(piece, k) -> float:
    """``||piece||_{L^inf} / ||piece||_{L^2_ul}`` for a piece supported in the boxes ``k_i + [-1, 1]``."""
    if not _piece_in_box(piece, k):
        raise ValueError(f"piece is not frequency-localised to the box around {tuple(k)}")
    vals = piece.values
    sup = float(np.max(np.abs(vals)))
    ul = spaces.uniform_local_l2(piece).value
    if ul == 0:
        raise ValueError("piece vanishes on the grid")
    return sup / ul


def l2ul_linfty_ensemble(seed: int = 0, pieces: int = 100, k_halfwidth: int = 1,
                         radii=(2.0, 2.0, 2.0), grid: Optional[GridSpec] = None):
    """Ratios for ``box_k sigma`` of random symbols with ``k`` in ``[-w, w]^3``.

    Returns ``(ks, ratios)``; symbols are drawn until ``pieces`` nonzero
    pieces are collected.
    """
    grid = grid or default_grid()
    pair = decomp.DecompPair(1, decomp.build_partition(1), None, None, None, 0.0, None)
    rng = _rng(seed, 42)
    ks_window = list(decomp._product([list(range(-k_halfwidth, k_halfwidth + 1))] * 3))
    ks, ratios = [], []
    while len(ratios) < pieces:
        sigma = samples.random_symbol(grid, rng, radii)
        for k in ks_window:
            piece = decomp.symbol_box(k, sigma, pair)
            if not np.any(piece.spectrum.coeffs):
                continue
            ks.append(k)
            ratios.append(check_l2ul_linfty(piece, k))
            if len(ratios) == pieces:
                break
    return ks, np.array(ratios)


# ---------------------------------------------------------------- duality

def check_duality(h: SampledField, theta: Callable, rng: np.random.Generator, n_samples: int = 200):
    """Direct ``(L^2, l^1)`` norm versus the pairing ``sum_mu |int theta(x - mu) h g|`` over random unit ``g``.

    Returns ``(direct, sampled_sup, window_norm)`` where ``window_norm`` is
    ``||theta(x - mu) h||_{L^2_x l^1_mu}``, which bounds the sampled sup
    by Cauchy-Schwarz.
    """
    grid = h.grid
    X = int(round(grid.x_halfwidth))
    mus = np.arange(-X, X + 1)
    TH = theta(grid.x[None, :] - mus[:, None]) * h.values[None, :]  # (mu, x)
    best = 0.0
    for _ in range(n_samples):
        g = samples.random_field(grid, rng, n_atoms=int(rng.integers(1, 8))).values
        g = g / math.sqrt(float(np.sum(np.abs(g) ** 2)) * grid.x_step)
        best = max(best, float(np.sum(np.abs(TH @ g))) * grid.x_step)
    direct = spaces.amalgam_norm(h, 2, 1).value
    window = spaces.windowed_amalgam_norm(h, theta, 2, 1, shifts=mus).value
    return direct, best, window


def duality_ensemble(seed: int = 0, members: int = 10, n_samples: int = 200,
                     grid: Optional[GridSpec] = None) -> np.ndarray:
    """Rows ``(direct, sampled_sup, window_norm)`` for products of random fields."""
    grid = grid or default_grid()
    pair = decomp.build_sugimoto_pair(1)
    rng = _rng(seed, 51)
    rows = []
    for _ in range(members):
        f1 = samples.random_field(grid, rng)
        f2 = samples.random_field(grid, rng)
        h = SampledField(grid, f1.values * f2.values)
        rows.append(check_duality(h, pair.theta.func_1d, rng, n_samples))
    return np.array(rows)


# ---------------------------------------------------------------- space calibrations

def calibrate_spaces(seed: int = 0, members: int = 50, grid: Optional[GridSpec] = None) -> dict:
    """Measured brackets for window-dependent equivalences on random band-limited fields.

    Keys: ``mod22`` (``M^{2,2}`` over ``L^2``), ``h1`` (``L^1`` over ``h^1``),
    ``box_sobolev`` (``||<v>^s box_v f||_{l^2 L^2}`` over ``||f||_{H^s}``, s = 1/4),
    each as an array of ratios.
    """
    grid = grid or default_grid()
    pair = decomp.build_sugimoto_pair(1)
    rng = _rng(seed, 61)
    fields = [samples.random_field(grid, rng) for _ in range(members)]
    mod22, h1, box = [], [], []
    nus = decomp.box_window(fields[0])
    s = 0.25
    for f in fields:
        l2 = spaces.lp_norm(f, 2).value
        mod22.append(spaces.modulation_norm(f, 2, 2, pair).value / l2)
        h1.append(spaces.lp_norm(f, 1).value / spaces.local_hardy_norm(f).value)
        acc = 0.0
        for nu in nus:
            acc += (1 + nu * nu) ** s * spaces.lp_norm(decomp.box_op(nu, f, pair), 2).value ** 2
        box.append(math.sqrt(acc) / spaces.sobolev_norm(f, s).value)
    return {"mod22": np.array(mod22), "h1": np.array(h1), "box_sobolev": np.array(box)}
