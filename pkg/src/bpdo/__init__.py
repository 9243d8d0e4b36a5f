"""Bilinear pseudo-differential operators on discretized grids.

Submodules
----------
grid     sampling grids, fields, symbols and Fourier quadrature
spaces   function- and sequence-space norms
decomp   partitions of unity, the (kappa, chi) pair and symbol decompositions
op       the bilinear operator, the linear operator and the averaging operator S
verify   lemma checkers, proof traces and ensemble estimates
cli      experiment runner
"""
from .grid import (
    GridSpec,
    SampledField,
    SampledSymbol,
    SymbolSpectrum,
    default_grid,
    fourier_forward,
    fourier_inverse,
    make_grid,
    multiplier_apply,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "SampledField",
    "SampledSymbol",
    "SymbolSpectrum",
    "default_grid",
    "fourier_forward",
    "fourier_inverse",
    "make_grid",
    "multiplier_apply",
]
