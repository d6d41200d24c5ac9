"""Ramsey-number bounds and copy-efficient LOCC discrimination of orthogonal product states."""

from .cliques import orthogonality_summary
from .ramsey import (BoundInterval, CertificationVerdict, Ledger, RamseyQuery, Status, brute_force_ramsey,
                     check_exclusion_conditions, default_ledger, derive_bounds, lookup)
from .states import EdgeColoring, ProductStateSet, extract_coloring, random_coloring, realize, validate

__version__ = "0.1.0"

__all__ = [
    "RamseyQuery", "BoundInterval", "CertificationVerdict", "Ledger", "Status",
    "lookup", "derive_bounds", "check_exclusion_conditions", "brute_force_ramsey", "default_ledger",
    "ProductStateSet", "EdgeColoring", "validate", "extract_coloring", "random_coloring", "realize",
    "orthogonality_summary",
]
