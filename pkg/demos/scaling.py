"""Small ensemble estimate of how the bilinear bound grows with the symbol radii.

Uses three diagonal radius triples and few trials so it runs in under a
minute; the full estimate is ``bpdo run --suite prop``.
"""
from bpdo.verify import PropConfig, estimate_prop_constant

config = PropConfig(triples=((1, 1, 1), (2, 2, 2), (4, 4, 4)), trials=20, restarts=10, steps=100)
stats = estimate_prop_constant(config)
print("fitted exponents:", {k: round(v, 3) for k, v in stats.fitted_exponents.items()})
print(f"max ratio {stats.max_ratio:.3f}, median {stats.median_ratio:.3f}")
