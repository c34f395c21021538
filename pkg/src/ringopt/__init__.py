"""Polynomial evaluation plans from semantic annotations on C functions."""

__version__ = "0.1.0"

from .analysis import CostReport, compare_schemes, count_ops, critical_path, llvm_fixture_deg4
from .annotations import AnnotatedFunction, parse_expression, parse_math_exp, parse_ring_prop, scan_source
from .codegen import emit_benchmark, emit_function, transform_source
from .expr import INTEGER_RING, Polynomial, RingSpec, degree, normalize
from .oracle import Binding, Exhaustive, Sampled, eval_dag, eval_poly_reference, verify_equivalence
from .schemes import EvalDag, scheme_balanced, scheme_horner, scheme_incremental, scheme_naive

__all__ = [
    "AnnotatedFunction",
    "Binding",
    "CostReport",
    "EvalDag",
    "Exhaustive",
    "INTEGER_RING",
    "Polynomial",
    "RingSpec",
    "Sampled",
    "compare_schemes",
    "count_ops",
    "critical_path",
    "degree",
    "emit_benchmark",
    "emit_function",
    "eval_dag",
    "eval_poly_reference",
    "llvm_fixture_deg4",
    "normalize",
    "parse_expression",
    "parse_math_exp",
    "parse_ring_prop",
    "scan_source",
    "scheme_balanced",
    "scheme_horner",
    "scheme_incremental",
    "scheme_naive",
    "transform_source",
    "verify_equivalence",
]
