"""Frequency decomposition of a random band-limited field and symbol.

The pieces chi(D - nu) kappa(D - nu) f sum back to f, and the pieces of
a symbol rebuild the symbol.
"""
import numpy as np

from bpdo import default_grid, multiplier_apply
from bpdo.decomp import box_op, box_window, build_sugimoto_pair, decompose_symbol
from bpdo.samples import random_field, random_symbol

grid = default_grid()
rng = np.random.default_rng(3)
pair = build_sugimoto_pair(1)

f = random_field(grid, rng)
pieces = [multiplier_apply(pair.chi.shifted((v,)), box_op((v,), f, pair)).values for v in box_window(f)]
print("field pieces:", len(pieces), " reconstruction error:", np.max(np.abs(sum(pieces) - f.values)))

sigma = random_symbol(grid, rng, (1.0, 2.0, 2.0))
family = decompose_symbol(sigma, pair)
print("symbol pieces:", len(family), " reconstruction error:",
      np.max(np.abs(family.reconstruct() - sigma.values)))
