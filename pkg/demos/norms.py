"""Norms of a Gaussian in the spaces used by the estimates.

The L^2 norm of exp(-x^2/2) is pi^(1/4); the amalgam and modulation norms are
window dependent and only compared against each other.
"""
from bpdo import default_grid
from bpdo.samples import gaussian_field
from bpdo.spaces import norm_by_id

grid = default_grid()
f = gaussian_field(grid, 1.0)
for space in ("L2", "L1", "Linf", "H^0.25", "(L2,l1)", "(L2,l2)", "M^{2,2}", "h1"):
    print(f"{space:>8}  {norm_by_id(f, space).value:.6f}")
