"""Apply the bilinear operator to Gaussians and compare with closed forms.

A constant symbol gives the pointwise product, a separable symbol gives the
product of two multiplier outputs, and the averaging operator S applied to a
constant reproduces the arctangent integral.
"""
import numpy as np

from bpdo import SampledField, SampledSymbol, default_grid, multiplier_apply
from bpdo.op import bilinear_apply, s_transform
from bpdo.samples import gaussian_field

grid = default_grid()
f1 = gaussian_field(grid, 1.0, center=-1.0, fsupp_radius=4)
f2 = gaussian_field(grid, 2.0, center=1.0, freq=0.5, fsupp_radius=4)

one = SampledSymbol.constant(grid, 1.0)
out = bilinear_apply(one, f1, f2)
print("sigma = 1, max |T(f1,f2) - f1 f2| =", np.max(np.abs(out.values - f1.values * f2.values)))

m1 = lambda xi: np.exp(-xi ** 2 / 4)
m2 = lambda xi: 1 / (1 + xi ** 2)
sep = SampledSymbol.from_function(grid, lambda x, a, b: m1(a) * m2(b) + 0 * x, 3)
ref = multiplier_apply(m1, f1).values * multiplier_apply(m2, f2).values
print("separable symbol, max error =", np.max(np.abs(bilinear_apply(sep, f1, f2).values - ref)))

res = s_transform(SampledField(grid, np.ones(grid.space_shape, complex)), report=True)
centre = res.output.values[grid.space_shape[0] // 2].real
print(f"S(1)(0) = {centre:.6f} vs pi = {np.pi:.6f}; hint {res.quad_error_hint:.3g}")
