"""Verification harness: inequality checkers, the traced duality argument,
ensemble estimates of implicit constants, and the frozen constants table."""
from .constants import HEADROOM, TABLE_VERSION, constants_path, get_constant, load_constants, write_constants
from .ensemble import (BasisSearch, EnsembleStats, PropConfig, TheoremConfig, check_theorem, embedding_chain,
                       estimate_prop_constant, fit_exponents, prop_ratio, theorem_ratio)
from .lemmas import (SReport, WindowHypothesisError, amalgam_equiv_ensemble, calibrate_spaces,
                     check_amalgam_equiv, check_duality, check_l2ul_linfty, check_product_lweak,
                     check_s_properties, duality_ensemble, l2ul_linfty_ensemble, product_lweak_ensemble)
from .suites import CheckResult, SuiteResult, run_suite, run_suites, trace_instance, write_reports
from .trace import ProofTrace, a0_ratio, proof_trace

__all__ = [
    "HEADROOM", "TABLE_VERSION", "constants_path", "get_constant", "load_constants", "write_constants",
    "BasisSearch", "EnsembleStats", "PropConfig", "TheoremConfig", "check_theorem", "embedding_chain",
    "estimate_prop_constant", "fit_exponents", "prop_ratio", "theorem_ratio",
    "SReport", "WindowHypothesisError", "amalgam_equiv_ensemble", "calibrate_spaces", "check_amalgam_equiv",
    "check_duality", "check_l2ul_linfty", "check_product_lweak", "check_s_properties", "duality_ensemble",
    "l2ul_linfty_ensemble", "product_lweak_ensemble",
    "CheckResult", "SuiteResult", "run_suite", "run_suites", "trace_instance", "write_reports",
    "ProofTrace", "a0_ratio", "proof_trace",
]
