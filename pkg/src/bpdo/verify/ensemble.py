"""Ensemble estimates of operator-norm lower bounds for band-limited symbols.

For a trigonometric symbol the bilinear map restricted to a Gabor basis
``b_1, ..., b_K`` is precomputed once as ``T_ik(x) = T_sigma(b_i, b_k)(x)``.
Inputs ``f1 = sum a_i b_i``, ``f2 = sum c_k b_k`` are then improved by
random coordinate perturbations, alternating between the two arguments;
each step costs ``O(K N)`` and Sobolev norms come from Gram matrices.  The
best pair of every restart is re-evaluated with the operator and the norms
of :mod:`bpdo.spaces`, so reported ratios never depend on the shortcuts.

The search gives lower bounds for operator norms, not certified values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Optional, Sequence

import numpy as np

from .. import samples, spaces
from ..grid import GridSpec, SampledField, SampledSymbol, default_grid, spectrum_of
from ..op import _shift_table, bilinear_apply

__all__ = [
    "EnsembleStats",
    "PropConfig",
    "TheoremConfig",
    "BasisSearch",
    "prop_ratio",
    "theorem_ratio",
    "embedding_chain",
    "fit_exponents",
    "estimate_prop_constant",
    "check_theorem",
]

ALLOWED_RADII = (1, 2, 4)
MIN_TRIALS = 20
MIN_RESTARTS = 10


def _rng(seed, *stream) -> np.random.Generator:
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


@dataclass
class EnsembleStats:
    """Ratios of one ensemble with their summary.

    ``rows`` hold one record per trial (a dict with at least ``trial`` and
    ``ratio``) in generation order, so reports are reproducible.
    """

    trials: int
    ratios: np.ndarray
    max_ratio: float
    median_ratio: float
    fitted_exponents: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: list, fitted=None, extra=None) -> "EnsembleStats":
        r = np.array([row["ratio"] for row in rows], float)
        if r.size == 0:
            raise ValueError("empty ensemble")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise ValueError("ensemble ratios must be finite and positive")
        return cls(len(rows), r, float(r.max()), float(np.median(r)), dict(fitted or {}), rows, dict(extra or {}))

    def summary(self) -> dict:
        return {
            "trials": self.trials,
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
            "fitted_exponents": {k: float(v) for k, v in sorted(self.fitted_exponents.items())},
            **{k: v for k, v in sorted(self.extra.items())},
        }


# ---------------------------------------------------------------- ratio functionals

def _radius_factor(sigma: SampledSymbol) -> float:
    if sigma.fsupp_radii is None:
        raise ValueError("symbol radii must be declared")
    return float(np.prod(sigma.fsupp_radii)) ** (sigma.grid.dim / 2)


def prop_ratio(sigma: SampledSymbol, f1: SampledField, f2: SampledField, s1: float, s2: float,
               sigma_ul: Optional[float] = None) -> float:
    """``||T(f1, f2)||_{(L^2, l^1)} / ((R0 R1 R2)^{n/2} ||sigma||_{L^2_ul} ||f1||_{H^s1} ||f2||_{H^s2})``."""
    ul = spaces.uniform_local_l2(sigma).value if sigma_ul is None else sigma_ul
    out = bilinear_apply(sigma, f1, f2)
    den = _radius_factor(sigma) * ul * spaces.sobolev_norm(f1, s1).value * spaces.sobolev_norm(f2, s2).value
    return spaces.amalgam_norm(out, 2, 1).value / den


def theorem_ratio(sigma: SampledSymbol, f1: SampledField, f2: SampledField, s1: float, s2: float,
                  m_inf1: Optional[float] = None) -> float:
    """``||T(f1, f2)||_{(L^2, l^1)} / (||sigma||_{M^{inf,1}} ||f1||_{H^s1} ||f2||_{H^s2})``."""
    m = spaces.modulation_norm(sigma, math.inf, 1).value if m_inf1 is None else m_inf1
    out = bilinear_apply(sigma, f1, f2)
    den = m * spaces.sobolev_norm(f1, s1).value * spaces.sobolev_norm(f2, s2).value
    return spaces.amalgam_norm(out, 2, 1).value / den


def embedding_chain(h: SampledField, rs: Sequence[float] = (1.0, 1.5, 2.0)) -> list:
    """Rows ``(r, ||h||_{L^r}, ||h||_{(L^2, l^r)}, ||h||_{(L^2, l^1)})``."""
    top = spaces.amalgam_norm(h, 2, 1).value
    return [(float(r), spaces.lp_norm(h, r).value, spaces.amalgam_norm(h, 2, r).value, top) for r in rs]


# ---------------------------------------------------------------- basis search

class BasisSearch:
    """Random search for large ``||T(f1, f2)||_{(L^2,l^1)} / (||f1||_{H^s1} ||f2||_{H^s2})``.

    Parameters
    ----------
    sigma : SampledSymbol
        Trigonometric bilinear symbol.
    s1, s2 : float
        Sobolev exponents of the two inputs.
    atoms : ndarray, optional
        Basis samples ``(K, N)``; defaults to :func:`bpdo.samples.gabor_basis`.
    """

    def __init__(self, sigma: SampledSymbol, s1: float, s2: float, atoms: Optional[np.ndarray] = None,
                 atom_radius: Optional[float] = None):
        if sigma.spectrum is None or sigma.arity != 3:
            raise ValueError("basis search needs a trigonometric bilinear symbol")
        g = sigma.grid
        if atoms is None:
            atoms, atom_radius = samples.gabor_basis(g)
        self.grid, self.sigma, self.s = g, sigma, (s1, s2)
        self.atoms = np.asarray(atoms, complex)
        self.radius = g.xi_halfwidth / 2 if atom_radius is None else atom_radius
        fields = [SampledField(g, a, fsupp_radius=self.radius) for a in self.atoms]
        spec = sigma.spectrum
        S1 = np.array([_shift_table(f, spec.freqs[1]) for f in fields])  # (K, Q, N)
        S2 = np.array([_shift_table(f, spec.freqs[2]) for f in fields])  # (K, R, N)
        E0 = np.exp(1j * np.outer(spec.freqs[0], g.x))
        D = np.einsum("pqr,px->qrx", spec.coeffs, E0, optimize=True)
        U = np.einsum("qrx,krx->qkx", D, S2, optimize=True)
        self.T = np.einsum("iqx,qkx->ikx", S1, U, optimize=True)  # (K, K, N)
        specs = np.array([spectrum_of(f) for f in fields])
        w = g.xi_step / (2 * math.pi)
        self.gram = []
        for s in (s1, s2):
            weight = (1.0 + g.xi ** 2) ** s
            self.gram.append((np.conj(specs) * weight) @ specs.T * w)
        self.starts, _ = spaces._cube_starts(g.x)
        self.h = g.x_step

    def _amalgam(self, out: np.ndarray) -> float:
        return float(np.sum(np.sqrt(np.add.reduceat(np.abs(out) ** 2, self.starts, axis=-1) * self.h), axis=-1))

    def _hs2(self, j: int, a: np.ndarray) -> float:
        return float(np.real(np.conj(a) @ self.gram[j] @ a))

    def objective(self, a: np.ndarray, c: np.ndarray) -> float:
        out = np.einsum("i,k,ikx->x", a, c, self.T)
        return self._amalgam(out) / math.sqrt(self._hs2(0, a) * self._hs2(1, c))

    def fields(self, a: np.ndarray, c: np.ndarray):
        g = self.grid
        return (SampledField(g, a @ self.atoms, fsupp_radius=self.radius),
                SampledField(g, c @ self.atoms, fsupp_radius=self.radius))

    def _improve(self, coef: np.ndarray, M: np.ndarray, out: np.ndarray, j: int, rng, scale: float):
        """One coordinate move on ``coef`` (unit ``H^s`` norm) with ``out = coef @ M``.

        Returns ``(coef, out, moved)`` with the new coefficients renormalised.
        """
        i = int(rng.integers(coef.size))
        delta = scale * (rng.normal() + 1j * rng.normal()) / math.sqrt(2 * self.gram[j][i, i].real)
        trial = coef.copy()
        trial[i] += delta
        norm = math.sqrt(self._hs2(j, trial))
        new_out = out + delta * M[i]
        if self._amalgam(new_out) / norm > self._amalgam(out):
            return trial / norm, new_out / norm, True
        return coef, out, False

    def run(self, rng: np.random.Generator, restarts: int = MIN_RESTARTS, steps: int = 200):
        """Best ``(ratio, a, c)`` over the restarts; the ratio is the basis-level objective."""
        K = self.atoms.shape[0]
        best = (-1.0, None, None)
        for _ in range(restarts):
            a = rng.normal(size=K) + 1j * rng.normal(size=K)
            c = rng.normal(size=K) + 1j * rng.normal(size=K)
            a /= math.sqrt(self._hs2(0, a))
            c /= math.sqrt(self._hs2(1, c))
            scale = 0.5
            Ma = Mc = None  # tables for moving a (depends on c) and moving c (depends on a)
            for step in range(steps):
                if step % 2 == 0:
                    if Ma is None:
                        Ma = np.einsum("k,ikx->ix", c, self.T)
                    a, _, moved = self._improve(a, Ma, a @ Ma, 0, rng, scale)
                    if moved:
                        Mc = None
                else:
                    if Mc is None:
                        Mc = np.einsum("i,ikx->kx", a, self.T)
                    c, _, moved = self._improve(c, Mc, c @ Mc, 1, rng, scale)
                    if moved:
                        Ma = None
                scale = min(scale * 1.1, 1.0) if moved else max(scale * 0.95, 1e-3)
            val = self.objective(a, c)
            if val > best[0]:
                best = (val, a, c)
        return best


# ---------------------------------------------------------------- configs

def _check_s(s1, s2, dim):
    if s1 <= 0 or s2 <= 0 or abs(s1 + s2 - dim / 2) > 1e-12:
        raise ValueError(f"need s1, s2 > 0 with s1 + s2 = {dim / 2:g}, got ({s1}, {s2})")


@dataclass
class PropConfig:
    """Configuration of the radius-scaling ensemble."""

    triples: Sequence[tuple] = tuple(product(ALLOWED_RADII, repeat=3))
    trials: int = MIN_TRIALS
    restarts: int = MIN_RESTARTS
    steps: int = 200
    s: tuple = (0.25, 0.25)
    seed: int = 0
    grid: Optional[GridSpec] = None

    @classmethod
    def coerce(cls, config) -> "PropConfig":
        if config is None:
            return cls()
        if isinstance(config, cls):
            return config
        if isinstance(config, Mapping):
            kw = dict(config)
            if "triples" in kw:
                kw["triples"] = tuple(tuple(t) for t in kw["triples"])
            if "s" in kw:
                kw["s"] = tuple(kw["s"])
            return cls(**kw)
        raise TypeError(f"cannot build a PropConfig from {type(config).__name__}")

    def validate(self) -> None:
        if self.trials < MIN_TRIALS:
            raise ValueError(f"need at least {MIN_TRIALS} trials per triple, got {self.trials}")
        if self.restarts < MIN_RESTARTS:
            raise ValueError(f"need at least {MIN_RESTARTS} search restarts, got {self.restarts}")
        if not self.triples:
            raise ValueError("no radius triples configured")
        for t in self.triples:
            if len(t) != 3 or any(r not in ALLOWED_RADII for r in t):
                raise ValueError(f"radius triple {t} is not in {set(ALLOWED_RADII)}^3")
        g = self.grid or default_grid()
        _check_s(*self.s, g.dim)


@dataclass
class TheoremConfig:
    """Configuration of the Sjostrand-class ensemble."""

    s_pairs: Sequence[tuple] = ((0.25, 0.25), (0.125, 0.375))
    random_symbols: int = 6
    piece_symbols: int = 6
    radii_choices: Sequence[float] = (1.0, 2.0)
    restarts: int = MIN_RESTARTS
    steps: int = 200
    rs: Sequence[float] = (1.0, 1.5, 2.0)
    seed: int = 0
    grid: Optional[GridSpec] = None

    @classmethod
    def coerce(cls, config) -> "TheoremConfig":
        if config is None:
            return cls()
        if isinstance(config, cls):
            return config
        if isinstance(config, Mapping):
            kw = dict(config)
            if "s_pairs" in kw:
                kw["s_pairs"] = tuple(tuple(p) for p in kw["s_pairs"])
            return cls(**kw)
        raise TypeError(f"cannot build a TheoremConfig from {type(config).__name__}")

    def validate(self) -> None:
        g = self.grid or default_grid()
        if not self.s_pairs:
            raise ValueError("no Sobolev pairs configured")
        for s1, s2 in self.s_pairs:
            _check_s(s1, s2, g.dim)
        if self.random_symbols + self.piece_symbols < 1:
            raise ValueError("need at least one symbol")
        if self.restarts < 1 or self.steps < 0:
            raise ValueError("restarts must be >= 1 and steps >= 0")
        for r in self.rs:
            if not 1 <= r <= 2:
                raise ValueError(f"embedding exponent r = {r} outside [1, 2]")


# ---------------------------------------------------------------- estimators

def fit_exponents(rows: list, value_key: str = "norm_est") -> dict:
    """Least-squares slopes of ``log max value`` against ``log R_i``, one radius at a time.

    For each radius value the maximum is taken over all rows sharing it, so
    the fit tracks the worst case over the other two radii.
    """
    out = {}
    for name in ("R0", "R1", "R2"):
        values = sorted({row[name] for row in rows})
        if len(values) < 2:
            continue
        peaks = [max(row[value_key] for row in rows if row[name] == v) for v in values]
        slope = np.polyfit(np.log(values), np.log(peaks), 1)[0]
        out[name] = float(slope)
    return out


def estimate_prop_constant(config=None) -> EnsembleStats:
    """Radius-scaling ensemble for band-limited symbols.

    Every trial draws complex noise on the symbol lattice masked to
    ``B_R0 x B_R1 x B_R2`` and searches for inputs maximising the ratio to
    ``(R0 R1 R2)^{n/2} ||sigma||_{L^2_ul} ||f1||_{H^s1} ||f2||_{H^s2}``.
    """
    cfg = PropConfig.coerce(config)
    cfg.validate()
    g = cfg.grid or default_grid()
    s1, s2 = cfg.s
    atoms, radius = samples.gabor_basis(g)
    rows = []
    for t_index, triple in enumerate(cfg.triples):
        for trial in range(cfg.trials):
            rng = _rng(cfg.seed, 1, t_index, trial)
            sigma = samples.random_symbol(g, rng, triple)
            ul = spaces.uniform_local_l2(sigma).value
            search = BasisSearch(sigma, s1, s2, atoms, radius)
            _, a, c = search.run(rng, cfg.restarts, cfg.steps)
            f1, f2 = search.fields(a, c)
            ratio = prop_ratio(sigma, f1, f2, s1, s2, sigma_ul=ul)
            rows.append({
                "trial": len(rows), "R0": triple[0], "R1": triple[1], "R2": triple[2],
                "ratio": ratio, "norm_est": ratio * _radius_factor(sigma),
            })
    fitted = fit_exponents(rows)
    return EnsembleStats.from_rows(rows, fitted, {"s": list(cfg.s), "seed": cfg.seed})


def check_theorem(config=None) -> EnsembleStats:
    """Sjostrand-class ensemble: random band-limited symbols and sparse modulated pieces.

    Rows carry the ratio to ``||sigma||_{M^{inf,1}} ||f1||_{H^s1} ||f2||_{H^s2}``,
    the embedding chain of the output and its local Hardy norm ratio.
    """
    cfg = TheoremConfig.coerce(config)
    cfg.validate()
    g = cfg.grid or default_grid()
    atoms, radius = samples.gabor_basis(g)
    symbols = []
    for i in range(cfg.random_symbols):
        rng = _rng(cfg.seed, 2, 0, i)
        radii = tuple(float(rng.choice(cfg.radii_choices)) for _ in range(3))
        symbols.append(("random", samples.random_symbol(g, rng, radii)))
    for i in range(cfg.piece_symbols):
        rng = _rng(cfg.seed, 2, 1, i)
        symbols.append(("pieces", samples.modulated_pieces_symbol(g, rng)))
    rows = []
    chain_ok = True
    chain_worst = 0.0
    for sym_index, (kind, sigma) in enumerate(symbols):
        m = spaces.modulation_norm(sigma, math.inf, 1).value
        for pair_index, (s1, s2) in enumerate(cfg.s_pairs):
            rng = _rng(cfg.seed, 3, sym_index, pair_index)
            search = BasisSearch(sigma, s1, s2, atoms, radius)
            _, a, c = search.run(rng, cfg.restarts, cfg.steps)
            f1, f2 = search.fields(a, c)
            out = bilinear_apply(sigma, f1, f2)
            norms = spaces.sobolev_norm(f1, s1).value * spaces.sobolev_norm(f2, s2).value
            top = spaces.amalgam_norm(out, 2, 1).value
            chain = embedding_chain(out, cfg.rs)
            for r, lr, mid, hi in chain:
                ok = lr <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12)
                chain_ok &= ok
                chain_worst = max(chain_worst, lr / mid, mid / hi)
            rows.append({
                "trial": len(rows), "kind": kind, "symbol": sym_index, "s1": s1, "s2": s2,
                "ratio": top / (m * norms), "h1_ratio": spaces.local_hardy_norm(out).value / (m * norms),
                **{f"Lr{r:g}": lr for r, lr, _, _ in chain},
                **{f"L2l{r:g}": mid for r, _, mid, _ in chain},
                "L2l1": top,
            })
    extra = {"chain_ok": bool(chain_ok), "chain_worst": float(chain_worst),
             "h1_max": float(max(r["h1_ratio"] for r in rows)), "seed": cfg.seed}
    return EnsembleStats.from_rows(rows, {}, extra)
