"""The four distortion measures on permutations.

All distances are exact integers. Scalar functions take two permutations of
the same size; the ``*_batch`` variants take (rows, n) arrays and return one
distance per row (a single-row argument is broadcast against the other).
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .perm_core import (
    DegenerateSizeError,
    Permutation,
    as_perm_array,
    count_inversions,
    inverse,
    same_size,
    to_inversion_vector,
    to_inversion_vectors,
    validate,
)


def _pair(s1, s2) -> tuple[Permutation, Permutation, int]:
    s1, s2 = validate(s1), validate(s2)
    return s1, s2, same_size(s1, s2)


def footrule(s1: Sequence[int], s2: Sequence[int]) -> int:
    """Spearman's footrule: sum over positions of |s1(i) - s2(i)|."""
    s1, s2, _ = _pair(s1, s2)
    return sum(abs(a - b) for a, b in zip(s1, s2))


def chebyshev(s1: Sequence[int], s2: Sequence[int]) -> int:
    """Largest displacement max_i |s1(i) - s2(i)|."""
    s1, s2, _ = _pair(s1, s2)
    return max(abs(a - b) for a, b in zip(s1, s2))


def kendall_tau(s1: Sequence[int], s2: Sequence[int]) -> int:
    """Minimum number of adjacent swaps taking s1 to s2.

    Equal to the number of value pairs whose left-to-right order differs
    between the two arrays, computed as the inversion count of
    ``inverse(s2) o s1`` in O(n log n).
    """
    s1, s2, _ = _pair(s1, s2)
    pos2 = inverse(s2)
    relative = Permutation._trusted(pos2[v - 1] for v in s1)
    return count_inversions(relative)


def inversion_l1(s1: Sequence[int], s2: Sequence[int]) -> int:
    """l1 distance between the inversion vectors of s1 and s2."""
    s1, s2, n = _pair(s1, s2)
    if n < 2:
        raise DegenerateSizeError("inversion-vector distance needs n >= 2")
    x1, x2 = to_inversion_vector(s1), to_inversion_vector(s2)
    return sum(abs(a - b) for a, b in zip(x1, x2))


def _batch_pair(a, b):
    a, b = as_perm_array(a), as_perm_array(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"permutation sizes differ: {a.shape[1]} and {b.shape[1]}")
    if a.shape[0] == 1 and b.shape[0] > 1:
        # all four metrics are symmetric, so broadcast whichever side is single
        a, b = b, a
    if b.shape[0] not in (1, a.shape[0]):
        raise ValueError("second argument must have one row or as many rows as the first")
    return a, b


def footrule_batch(a, b) -> np.ndarray:
    a, b = _batch_pair(a, b)
    return np.abs(a - b).sum(axis=1)


def chebyshev_batch(a, b) -> np.ndarray:
    a, b = _batch_pair(a, b)
    return np.abs(a - b).max(axis=1)


def kendall_tau_batch(a, b) -> np.ndarray:
    a, b = _batch_pair(a, b)
    return _kernels.kendall_distances(a, b)


def inversion_l1_batch(a, b) -> np.ndarray:
    a, b = _batch_pair(a, b)
    return np.abs(to_inversion_vectors(a) - to_inversion_vectors(b)).sum(axis=1)


METRICS: dict[str, Callable[[Sequence[int], Sequence[int]], int]] = {
    "tau": kendall_tau,
    "l1": footrule,
    "linf": chebyshev,
    "invl1": inversion_l1,
}

BATCH_METRICS = {
    "tau": kendall_tau_batch,
    "l1": footrule_batch,
    "linf": chebyshev_batch,
    "invl1": inversion_l1_batch,
}

_ALIASES = {
    "tau": "tau", "kendall": "tau", "kendall_tau": "tau", "kt": "tau",
    "l1": "l1", "footrule": "l1", "spearman": "l1",
    "linf": "linf", "chebyshev": "linf", "l_inf": "linf",
    "invl1": "invl1", "inv-l1": "invl1", "inversion_l1": "invl1", "inv_l1": "invl1",
}


def canonical_space(name: str) -> str:
    """Normalise a metric name to one of tau, l1, linf, invl1."""
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown metric {name!r}; expected one of {sorted(METRICS)}") from None


def distance(space: str, s1, s2) -> int:
    return METRICS[canonical_space(space)](s1, s2)


def distance_batch(space: str, a, b) -> np.ndarray:
    return BATCH_METRICS[canonical_space(space)](a, b)


def max_distance(space: str, n: int) -> int:
    """Largest value the metric takes on S_n."""
    space = canonical_space(space)
    if space == "l1":
        return n * n // 2
    if space == "linf":
        return n - 1
    return n * (n - 1) // 2
