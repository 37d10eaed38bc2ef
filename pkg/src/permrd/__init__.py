"""Lossy compression of permutations under four distortion measures."""
from .metrics import chebyshev, footrule, inversion_l1, kendall_tau
from .perm_core import (
    InsertionVector,
    InversionVector,
    Permutation,
    PermutationError,
    from_inversion_vector,
    insertion_to_extended_inversion,
    inverse,
    to_inversion_vector,
    validate,
)

__version__ = "0.1.0"
