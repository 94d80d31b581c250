"""Idempotents, supports and the quasi-trace on the finite factors M_n(C)."""
from .constructions import (
    doubling_isomorphism,
    f_inverse,
    idempotent_to_projection,
    lemma4_unitary,
    lemma5_pipeline,
    orthogonal_additivity_check,
    similarity_invariance_check,
    star_combination_check,
    theorem6_verify,
)
from .matrix import (
    SpectralDecomposition,
    apply_spectral_function,
    hermitian_eigen,
    numerical_rank,
    svd,
)
from .quasitrace import (
    FiniteSpectrumElement,
    Q,
    QuasiTraceValue,
    bin_approximation,
    check_axioms,
    finite_spectrum_value,
    quasi_trace,
    quasi_trace_hermitian,
)
from .report import SuiteConfig, SuiteReport, emit_report, parse_report
from .star import (
    Idempotent,
    PartialIsometry,
    Projection,
    approximate_invertible,
    dimension,
    lattice_join,
    lattice_meet,
    left_support,
    mvn_equivalent,
    polar_decompose,
    random_idempotent,
    right_support,
)
from .suites import run_suite

__version__ = "0.1.0"
