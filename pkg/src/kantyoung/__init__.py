"""Refined Young and reverse Young inequalities with Kantorovich factors.

Scalar chains live in :mod:`kantyoung.scalar`, dense symmetric matrix kernels
in :mod:`kantyoung.dense`, Loewner-order checks in
:mod:`kantyoung.operators`, Hilbert-Schmidt norm checks in
:mod:`kantyoung.hsnorm` and batch verification in :mod:`kantyoung.harness`.
"""
from .errors import DomainError, HypothesisError, NumericError, UsageError
from .scalar import (
    ChainResult,
    InequalityReport,
    RefinementSeq,
    Weight,
    arith_mean,
    baseline_bounds,
    chain_y1,
    chain_y3,
    chain_y5,
    dyadic_equality,
    geo_mean,
    heinz_chain,
    heinz_mean,
    heinz_reverse,
    kantorovich,
    parse_weight,
    refinement_seq,
    refinement_sum,
    refinement_sum_swapped,
    reverse_y2,
    reverse_y4,
    reverse_y6,
)

__version__ = "0.1.0"
