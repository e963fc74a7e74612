"""Exact-arithmetic toolkit for probabilistic generating circuits.

Circuits over rationals, PGC-to-PC compilation by division elimination,
marginals by single evaluation, a randomized set-multilinearity test,
distribution-preserving composition, determinantal embeddings of formulas and
ABPs, and matching-count reductions with brute-force oracles.
"""

from __future__ import annotations

from .circuit import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    evaluate,
    expand,
    random_point_equal,
    substitute,
    syntactic_degree,
    validate,
)
from .compiler import compile_pgc_to_smlpc, eliminate_divisions, ratio_substitute, taylor_shift
from .compose import ScopedDistributionCircuit, extend_smooth, hierarchical, leaf_distribution, mixture, product
from .dpp import (
    Abp,
    DppRepresentation,
    StGadget,
    abp_to_dpp,
    add_gadgets,
    base_gadget,
    exact_determinant,
    formula_to_dpp,
    mul_gadgets,
    parse_formula,
    psd_shift,
    verify_gadget,
)
from .hardness import (
    BipartiteGraph,
    count_perfect_matchings,
    quaternary_pgc_from_graph,
    random_regular_bipartite,
    rmatch,
    rmatch_poly,
    ternary_pgc_from_graph,
    verify_quaternary_identity,
    verify_ternary_identity,
)
from .marginal import MarginalQuery, VariablePartition, indicator_point, marginalize_pgc_binary, marginalize_smlpc
from .pgc import DistributionTable, Pgc, check_distribution, selective_marginal_oracle, table_to_pgc
from .poly import BudgetExceeded, SparsePolynomial
from .smltest import phase1_part_coverage, phase2_pairwise, test_set_multilinear

__version__ = "0.1.0"

__all__ = [
    "Abp",
    "BipartiteGraph",
    "BudgetExceeded",
    "Circuit",
    "CircuitBuilder",
    "CircuitError",
    "DistributionTable",
    "DppRepresentation",
    "MarginalQuery",
    "Pgc",
    "ScopedDistributionCircuit",
    "SparsePolynomial",
    "StGadget",
    "VariablePartition",
    "abp_to_dpp",
    "add_gadgets",
    "base_gadget",
    "check_distribution",
    "compile_pgc_to_smlpc",
    "count_perfect_matchings",
    "eliminate_divisions",
    "evaluate",
    "exact_determinant",
    "expand",
    "extend_smooth",
    "formula_to_dpp",
    "hierarchical",
    "indicator_point",
    "leaf_distribution",
    "marginalize_pgc_binary",
    "marginalize_smlpc",
    "mixture",
    "mul_gadgets",
    "parse_formula",
    "phase1_part_coverage",
    "phase2_pairwise",
    "product",
    "psd_shift",
    "quaternary_pgc_from_graph",
    "random_point_equal",
    "random_regular_bipartite",
    "ratio_substitute",
    "rmatch",
    "rmatch_poly",
    "selective_marginal_oracle",
    "substitute",
    "syntactic_degree",
    "table_to_pgc",
    "taylor_shift",
    "ternary_pgc_from_graph",
    "test_set_multilinear",
    "validate",
    "verify_gadget",
    "verify_quaternary_identity",
    "verify_ternary_identity",
]
