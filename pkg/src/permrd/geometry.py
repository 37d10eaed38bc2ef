"""Ball sizes in permutation spaces: Mahonian numbers, exact counts, bounds.

Exact counts are Python integers. ``K_n(k)`` is the number of permutations of
n with k inversions, the coefficient of z^k in prod_{i=0}^{n-1} (1 + ... + z^i).
A Kendall ball of radius D holds ``T_n(D) = K_n(0) + ... + K_n(D)``
permutations whatever its center.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .metrics import canonical_space, distance_batch
from .perm_core import to_inversion_vector, validate

ENUMERATION_LIMIT = 8


def _convolve_box(row: list[int], width: int, kmax: int) -> list[int]:
    """Multiply a coefficient row by 1 + z + ... + z^(width-1), truncated at kmax."""
    prefix = [0]
    for c in row:
        prefix.append(prefix[-1] + c)
    size = min(len(row) + width - 1, kmax + 1)
    last = len(row)
    return [prefix[min(k + 1, last)] - prefix[max(k + 1 - width, 0)] for k in range(size)]


@lru_cache(maxsize=64)
def _mahonian_row(n: int, kmax: int) -> tuple[int, ...]:
    row = [1]
    for i in range(2, n + 1):
        row = _convolve_box(row, i, kmax)
    return tuple(row)


def max_inversions(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True)
class MahonianTable:
    """K_n(k) for k = 0..n(n-1)/2."""

    n: int
    counts: tuple[int, ...]

    @classmethod
    def build(cls, n: int) -> "MahonianTable":
        if n < 1:
            raise ValueError("n must be >= 1")
        return cls(n, _mahonian_row(n, max_inversions(n)))

    def __getitem__(self, k: int) -> int:
        return self.counts[k] if 0 <= k < len(self.counts) else 0


def mahonian(n: int, k: int) -> int:
    """K_n(k); zero for k outside 0..n(n-1)/2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= k <= max_inversions(n):
        return 0
    return _mahonian_row(n, k)[k]


def mahonian_row(n: int, kmax: int | None = None) -> list[int]:
    """[K_n(0), ..., K_n(kmax)] (kmax defaults to the largest possible count)."""
    top = max_inversions(n) if kmax is None else min(kmax, max_inversions(n))
    return list(_mahonian_row(n, top))


def mahonian_by_recurrence(n: int, k: int) -> int:
    """K_n(k) for k < n from K_n(k) = K_n(k-1) + K_{n-1}(k). Cross-check only."""
    if not 0 <= k < n:
        raise ValueError("the recurrence holds for 0 <= k < n")

    @lru_cache(maxsize=None)
    def K(nn, kk):
        if kk == 0:
            return 1
        if nn == 1:
            return 0
        if kk >= nn:
            return mahonian(nn, kk)
        return K(nn, kk - 1) + K(nn - 1, kk)

    return K(n, k)


def cumulative_T(n: int, D: int) -> int:
    """Number of permutations of n with at most D inversions."""
    if not 0 <= D <= max_inversions(n):
        raise ValueError(f"radius {D} outside 0..{max_inversions(n)}")
    return sum(_mahonian_row(n, D))


def log_cumulative_T(n: int, D: float, base: float = 2.0) -> float:
    """log T_n(floor(D)) via a rescaled floating-point convolution.

    Suitable for n in the thousands where exact integers get slow.
    """
    top = min(int(math.floor(D)), max_inversions(n))
    if top < 0:
        raise ValueError("radius must be non-negative")
    row = np.ones(1)
    log_scale = 0.0
    for i in range(2, n + 1):
        c = np.concatenate(([0.0], np.cumsum(row)))
        size = min(row.size + i - 1, top + 1)
        k = np.arange(size)
        hi = np.minimum(k + 1, row.size)
        lo = np.maximum(k + 1 - i, 0)
        row = c[hi] - c[lo]
        peak = row.max()
        row /= peak
        log_scale += math.log(peak)
    return (log_scale + math.log(row.sum())) / math.log(base)


# exact inversion-l1 balls

def _coordinate_offsets(x: int, i: int) -> list[int]:
    """How many y in 0..i sit at each distance d = |x - y| from x."""
    counts = [0] * (max(x, i - x) + 1)
    for y in range(i + 1):
        counts[abs(x - y)] += 1
    return counts


def invl1_ball_size(center: Sequence[int], D: int) -> int:
    """Exact number of permutations within inversion-l1 distance D of ``center``."""
    x = to_inversion_vector(center)
    row = [1]
    for i, xi in enumerate(x, 1):
        offsets = _coordinate_offsets(xi, i)
        new = [0] * min(len(row) + len(offsets) - 1, D + 1)
        for d, c in enumerate(offsets):
            if d > D:
                break
            for k in range(min(len(row), D + 1 - d)):
                new[k + d] += c * row[k]
        row = new
    return sum(row)


def widest_invl1_center(n: int):
    """A center whose inversion-l1 balls are the largest: x(i) = floor(i/2)."""
    from .perm_core import from_inversion_vector

    return from_inversion_vector([i // 2 for i in range(1, n)])


def max_invl1_ball_size(n: int, D: int) -> int:
    """Largest inversion-l1 ball of radius D over all centers in S_n.

    Coordinate i is uniform-like on 0..i; a center at floor(i/2) has the most
    values within any given distance, and the product structure makes that
    choice optimal for every coordinate at once.
    """
    if n < 2:
        return 1
    return invl1_ball_size(widest_invl1_center(n), D)


# brute force

def all_permutations(n: int) -> np.ndarray:
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to n <= {ENUMERATION_LIMIT}, got {n}")
    return np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64)


def ball_brute(metric: str, center: Sequence[int], D: float,
               limit: int = ENUMERATION_LIMIT) -> int:
    """|{pi : d(pi, center) <= D}| by enumerating S_n."""
    center = validate(center)
    n = len(center)
    if n > limit:
        raise ValueError(f"enumeration limited to n <= {limit}, got {n}")
    perms = all_permutations(n)
    dist = distance_batch(canonical_space(metric), perms, np.asarray(center)[None, :])
    return int((dist <= D).sum())


# bounds

def log_binomial(n: float, k: float) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def kendall_ball_bound(n: int, D: int) -> int:
    """C(n+D-1, D), valid for 0 <= D <= n."""
    if not 0 <= D <= n:
        raise ValueError("the binomial Kendall-ball bound needs 0 <= D <= n")
    return math.comb(n + D - 1, D)


def invl1_ball_bound(n: int, D: int) -> int:
    """2^min(n, D) * C(n+D, D), valid for 0 <= D <= n(n-1)/2."""
    if not 0 <= D <= max_inversions(n):
        raise ValueError(f"radius {D} outside 0..{max_inversions(n)}")
    return 2 ** min(n, D) * math.comb(n + D, D)


def mahonian_binomial_bound(n: int, k: int) -> int:
    """C(n+k-2, k), an upper bound on K_n(k) for 1 <= k < n."""
    if not 1 <= k < n:
        raise ValueError("bound stated for 1 <= k < n")
    return math.comb(n + k - 2, k)


def binary_entropy(p: float) -> float:
    """H_b(p) in bits."""
    if p <= 0 or p >= 1:
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def mahonian_entropy_bound(n: int, k: float) -> float:
    """2^{n(1+c) H_b(1/(1+c))} / sqrt(2 pi n c/(1+c)) with c = k/n; bounds K_n(k)."""
    if k <= 0:
        raise ValueError("bound needs k > 0")
    c = k / n
    expo = n * (1 + c) * binary_entropy(1 / (1 + c))
    return 2.0 ** expo / math.sqrt(2 * math.pi * n * c / (1 + c))


def ball_upper_bound(space: str, n: int, D: int, base: float = 2.0) -> float:
    """log of a finite-n upper bound on the largest ball of radius D.

    Kendall uses C(n+D-1, D) when D <= n and otherwise falls back to the
    inversion-l1 bound, since Kendall balls sit inside inversion-l1 balls.
    """
    space = canonical_space(space)
    if space not in ("tau", "invl1"):
        raise ValueError("finite ball bounds are available for tau and invl1")
    if space == "tau" and D <= n:
        return math.log(kendall_ball_bound(n, D)) / math.log(base)
    D = min(D, max_inversions(n))
    return (min(n, D) * math.log(2) + log_binomial(n + D, D)) / math.log(base)


def ball_upper_bound_leading(space: str, regime: str, n: int, *, a: float | None = None,
                             delta: float | None = None, b: float | None = None,
                             base: float = 2.0) -> float:
    """Leading-order term of the regime bounds on log max ball size.

    Remainders (O(n^delta), o(n), O(n), O(log n)) are dropped, so the value is
    not a guaranteed bound at finite n.
    """
    space = canonical_space(space)
    if space not in ("tau", "invl1"):
        raise ValueError("regime bounds are stated for tau and invl1")
    lb = math.log(base)
    if regime == "small":
        if delta < 1:
            return a * (1 - delta) * n ** delta * math.log(n) / lb
        val = n * math.log((1 + a) ** (1 + a) / a ** a) / lb
        if space == "invl1":
            # two bits per element for the sign choices
            val += 2 * n * math.log(2) / lb
        return val
    if regime == "moderate":
        return delta * n * math.log(n) / lb
    if regime == "large":
        return n * math.log(2 * b * math.e * n) / lb
    raise ValueError(f"unknown regime {regime!r}")
