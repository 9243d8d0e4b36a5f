"""Trace the duality argument on one seeded instance and print every step.

Each row is an inequality lhs <= C rhs of the chain together with the
constant it is checked against.
"""
from bpdo.decomp import build_sugimoto_pair
from bpdo.verify import load_constants, proof_trace, trace_instance

sigma, f1, f2, g, mu, s1, s2 = trace_instance(seed=0, index=0)
tr = proof_trace(sigma, f1, f2, g, mu, build_sugimoto_pair(1), s1, s2)
print(f"I direct {tr.I_value:.6e}, decomposed {tr.I_decomposed:.6e}, transferred {tr.I_transferred:.6e}")
for label, lhs, rhs, c, ok in tr.check(load_constants().get("constants", {})):
    print(f"{label:>26}  lhs {lhs:.3e}  rhs {rhs:.3e}  C {c:.3g}  {'ok' if ok else 'FAIL'}")
