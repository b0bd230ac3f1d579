"""Exact dimension computations for polynomial neural networks.

A network with widths ``(d_0, ..., d_h)`` and activation ``x -> x**r`` computes
``d_h`` homogeneous polynomials of degree ``r**(h-1)`` in ``d_0`` variables.
The closure of all such maps is an algebraic variety; this package computes its
dimension from exact Jacobian ranks, compares it with closed-form bounds and
searches for minimal filling architectures.
"""

__version__ = "0.1.0"

from .algebra import QQ, PrimeField, RationalField, is_prime, random_prime, rank
from .bounds import (
    alexander_hirschowitz,
    bottleneck_flags,
    bound_report,
    naive_bound,
    recursive_bound,
    thm2_filling_guaranteed,
)
from .dimension import (
    DimensionEstimate,
    Verdict,
    dimension,
    jacobian_ff_interpolated,
    jacobian_ff_stacked,
    jacobian_symbolic,
)
from .errors import PolynetError
from .network import Architecture, Weights, forward, random_weights
from .poly import HomogPoly, MonomialBasis, PolyVector
from .search import SearchSpec, check_unimodality, dimension_table, find_minimal_filling

__all__ = [
    "QQ",
    "Architecture",
    "DimensionEstimate",
    "HomogPoly",
    "MonomialBasis",
    "PolyVector",
    "PolynetError",
    "PrimeField",
    "RationalField",
    "SearchSpec",
    "Verdict",
    "Weights",
    "alexander_hirschowitz",
    "bottleneck_flags",
    "bound_report",
    "check_unimodality",
    "dimension",
    "dimension_table",
    "find_minimal_filling",
    "forward",
    "is_prime",
    "jacobian_ff_interpolated",
    "jacobian_ff_stacked",
    "jacobian_symbolic",
    "naive_bound",
    "random_prime",
    "random_weights",
    "rank",
    "recursive_bound",
    "thm2_filling_guaranteed",
]
