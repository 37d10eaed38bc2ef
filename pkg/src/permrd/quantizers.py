"""Lossy codes for permutations and the parameter schedules that tune them.

Two code families:

* block sorting: sort the first ``k`` consecutive length-``m`` blocks of a
  permutation (Kendall tau), or of its inverse (footrule, Chebyshev);
* scalar quantization of the inversion vector, one uniform quantizer per
  coordinate (inversion-l1).

``schedule`` picks code parameters for a target distortion in the small,
moderate or large distortion regime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .metrics import canonical_space
from .perm_core import (
    InversionVector,
    Permutation,
    as_perm_array,
    inverse_batch,
    validate,
)


class ScheduleError(ValueError):
    """Requested (space, regime, n, target) has no valid code parameters."""


# data types

@dataclass(frozen=True)
class BlockSortCode:
    """Sort the first ``k`` blocks of length ``m`` of an n-permutation."""

    n: int
    k: int
    m: int

    def __post_init__(self):
        if not 2 <= self.m <= self.n:
            raise ValueError(f"block length m={self.m} must lie in 2..n={self.n}")
        if self.k < 1:
            raise ValueError(f"number of blocks k={self.k} must be >= 1")
        if self.k * self.m > self.n:
            raise ValueError(f"k*m = {self.k * self.m} exceeds n = {self.n}")

    def log_codebook_size(self, base: float = 2.0) -> float:
        return (math.lgamma(self.n + 1) - self.k * math.lgamma(self.m + 1)) / math.log(base)

    def codebook_size(self) -> int:
        return math.factorial(self.n) // math.factorial(self.m) ** self.k


@dataclass(frozen=True)
class ScalarQuantizerSpec:
    """Level counts ``levels[k-2] = m_k`` for inversion-vector coordinates k = 2..n.

    Coordinate k takes values in 0..k-1 (it is entry k-1 of the vector).
    """

    levels: tuple[int, ...]

    def __post_init__(self):
        levels = tuple(int(v) for v in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("need at least one coordinate (n >= 2)")
        for k, mk in enumerate(levels, 2):
            if not 1 <= mk <= k:
                raise ValueError(f"m_{k} = {mk} must lie in 1..{k}")

    @property
    def n(self) -> int:
        return len(self.levels) + 1

    def log_codebook_size(self, base: float = 2.0) -> float:
        return sum(math.log(mk) for mk in self.levels) / math.log(base)

    def codebook_size(self) -> int:
        return math.prod(self.levels)

    def max_errors(self) -> list[int]:
        """Exact worst-case error of each coordinate under the balanced grid."""
        return [scalar_max_error(k, mk) for k, mk in enumerate(self.levels, 2)]


REGIMES = ("small", "moderate", "large")


@dataclass(frozen=True)
class RegimeParams:
    """Distortion regime and its coefficients.

    small: target a * n**delta; moderate: n**(1 + delta) (n**delta for
    Chebyshev); large: b * n**2.
    """

    regime: str
    a: float | None = None
    delta: float | None = None
    b: float | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        needed = {"small": {"a", "delta"}, "moderate": {"delta"}, "large": {"b"}}[self.regime]
        given = {name for name in ("a", "delta", "b") if getattr(self, name) is not None}
        if given != needed:
            raise ValueError(
                f"{self.regime} regime takes exactly {sorted(needed)}, got {sorted(given)}")
        if self.a is not None and not self.a > 0:
            raise ValueError("a must be > 0")
        if self.delta is not None and not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.b is not None and not 0 < self.b <= 0.5:
            raise ValueError("b must lie in (0, 1/2]")

    @classmethod
    def small(cls, a: float, delta: float) -> "RegimeParams":
        return cls("small", a=a, delta=delta)

    @classmethod
    def moderate(cls, delta: float) -> "RegimeParams":
        return cls("moderate", delta=delta)

    @classmethod
    def large(cls, b: float) -> "RegimeParams":
        return cls("large", b=b)

    def target(self, space: str, n: int) -> float:
        """Default distortion target D_n for this regime."""
        space = canonical_space(space)
        if self.regime == "small":
            return self.a * n ** self.delta
        if self.regime == "large":
            return self.b * n * n
        if space == "linf":
            return n ** self.delta
        return n ** (1 + self.delta)


# block sorting

def _check_code(code: BlockSortCode, n: int):
    if code.n != n:
        raise ValueError(f"code is for n={code.n}, permutation has n={n}")


def block_sort_encode(sigma: Sequence[int], code: BlockSortCode) -> Permutation:
    """Sort each of the first k length-m blocks; later positions are kept."""
    sigma = validate(sigma)
    _check_code(code, len(sigma))
    out = list(sigma)
    for start in range(0, code.k * code.m, code.m):
        out[start:start + code.m] = sorted(out[start:start + code.m])
    return Permutation._trusted(out)


def block_sort_encode_inverse_domain(sigma: Sequence[int], code: BlockSortCode) -> Permutation:
    """Block-sort the inverse permutation and invert back."""
    sigma = validate(sigma)
    _check_code(code, len(sigma))
    pos = [0] * len(sigma)
    for i, v in enumerate(sigma, 1):
        pos[v - 1] = i
    for start in range(0, code.k * code.m, code.m):
        pos[start:start + code.m] = sorted(pos[start:start + code.m])
    out = [0] * len(sigma)
    for v, i in enumerate(pos, 1):
        out[i - 1] = v
    return Permutation._trusted(out)


def block_sort_batch(perms, code: BlockSortCode) -> np.ndarray:
    arr = as_perm_array(perms).copy()
    _check_code(code, arr.shape[1])
    km = code.k * code.m
    head = arr[:, :km].reshape(arr.shape[0], code.k, code.m)
    arr[:, :km] = np.sort(head, axis=2).reshape(arr.shape[0], km)
    return arr


def block_sort_inverse_domain_batch(perms, code: BlockSortCode) -> np.ndarray:
    return inverse_batch(block_sort_batch(inverse_batch(perms), code))


def delta_log_size(code: BlockSortCode, base: float = 2.0) -> float:
    """Log of the codebook shrink factor, k * log(m!)."""
    return code.k * math.lgamma(code.m + 1) / math.log(base)


def block_sort_distortion_bounds(code: BlockSortCode, space: str, mode: str = "worst") -> Fraction:
    """Worst-case or mean distortion of the block-sorting code.

    Kendall tau uses direct-domain sorting; footrule and Chebyshev use the
    inverse domain. For Chebyshev only the worst case (m - 1) is known and
    it is returned for both modes as an upper bound.
    """
    space = canonical_space(space)
    k, m = code.k, code.m
    if mode not in ("worst", "average"):
        raise ValueError(f"mode must be 'worst' or 'average', got {mode!r}")
    if space == "tau":
        return Fraction(k * m * (m - 1), 2 if mode == "worst" else 4)
    if space == "l1":
        return Fraction(k * (m * m // 2)) if mode == "worst" else Fraction(k * (m * m - 1), 3)
    if space == "linf":
        return Fraction(m - 1)
    raise ValueError("block sorting is not used for the inversion-l1 space")


# scalar quantization of inversion vectors

def scalar_cells(k: int, m: int) -> list[tuple[int, int, int]]:
    """Balanced partition of 0..k-1 into m cells as (low, size, representative).

    The first ``k mod m`` cells have size ceil(k/m), the rest floor(k/m).
    Each representative is the cell midpoint rounded down.
    """
    if not 1 <= m <= k:
        raise ValueError(f"need 1 <= m <= k, got m={m}, k={k}")
    q, r = divmod(k, m)
    cells = []
    lo = 0
    for c in range(m):
        size = q + 1 if c < r else q
        cells.append((lo, size, lo + (size - 1) // 2))
        lo += size
    return cells


def scalar_max_error(k: int, m: int) -> int:
    """Exact worst error of the balanced grid, ceil((ceil(k/m) - 1) / 2)."""
    return -(-(-(-k // m) - 1) // 2)


def levels_for_error(k: int, d: int) -> int:
    """Fewest levels on 0..k-1 keeping the error <= d: ceil(k / (2d + 1))."""
    return -(-k // (2 * d + 1))


def _encode_columns(x: np.ndarray, levels: np.ndarray) -> np.ndarray:
    # x has one column per coordinate k = 2..n
    ks = np.arange(2, levels.size + 2)
    q, r = np.divmod(ks, levels)
    big = r * (q + 1)  # values covered by the larger cells
    in_big = x < big
    cell = np.where(in_big, x // (q + 1), r + (x - big) // q)
    lo = np.where(in_big, cell * (q + 1), big + (cell - r) * q)
    size = np.where(cell < r, q + 1, q)
    return lo + (size - 1) // 2


def scalar_quantize_encode(x: Sequence[int], spec: ScalarQuantizerSpec) -> InversionVector:
    """Map each coordinate to its nearest reproduction point (ties go down)."""
    if not isinstance(x, InversionVector):
        x = InversionVector(x)
    if len(x) != len(spec.levels):
        raise ValueError(f"vector has {len(x)} coordinates, spec has {len(spec.levels)}")
    out = _encode_columns(np.asarray(x, dtype=np.int64)[None, :],
                          np.asarray(spec.levels, dtype=np.int64))[0]
    bounds = spec.max_errors()
    for k, (v, w, bound, mk) in enumerate(zip(x, out, bounds, spec.levels), 2):
        assert abs(v - w) <= bound, (k, v, w, mk)
    return InversionVector._trusted(out)


def scalar_quantize_batch(xs, spec: ScalarQuantizerSpec) -> np.ndarray:
    arr = np.asarray(xs, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != len(spec.levels):
        raise ValueError(f"vectors have {arr.shape[1]} coordinates, spec has {len(spec.levels)}")
    return _encode_columns(arr, np.asarray(spec.levels, dtype=np.int64))


# schedules

ALPHA = {
    ("l1", "average"): Fraction(1, 3),
    ("l1", "worst"): Fraction(1, 2),
    ("tau", "average"): Fraction(1, 4),
    ("tau", "worst"): Fraction(1, 2),
}

SUPPORTED = {
    "tau": {"small", "moderate", "large"},
    "invl1": {"small", "moderate", "large"},
    "l1": {"moderate"},
    "linf": {"moderate"},
}


def _block(n: int, k: int, m: int) -> BlockSortCode:
    if m < 2:
        raise ScheduleError(f"target too small for block sorting at n={n} (m={m})")
    if m > n:
        m = n
    k = min(k, n // m)
    if k < 1:
        raise ScheduleError(f"no complete block of length {m} fits in n={n}")
    return BlockSortCode(n, k, m)


def schedule(space: str, n: int, params: RegimeParams, mode: str = "worst",
             target: float | None = None):
    """Code parameters meeting distortion ``target`` (default: the regime's D_n).

    Returns a BlockSortCode for tau, l1 and linf, and a ScalarQuantizerSpec
    for invl1. Small and large regimes are defined for tau and invl1 only.
    """
    space = canonical_space(space)
    if mode not in ("worst", "average"):
        raise ValueError(f"mode must be 'worst' or 'average', got {mode!r}")
    if params.regime not in SUPPORTED[space]:
        raise ScheduleError(f"no {params.regime}-regime schedule for the {space} space")
    if n < 2:
        raise ScheduleError("n must be >= 2")
    d = params.target(space, n) if target is None else float(target)
    if d < 0:
        raise ScheduleError("target distortion must be non-negative")
    regime = params.regime

    if regime == "moderate":
        if space == "linf":
            m = math.floor(d) + 1
            return _block(n, n // min(m, n), m)
        if space in ("tau", "l1"):
            m = math.floor(math.floor(d / n) / ALPHA[space, mode])
            return _block(n, n // max(min(m, n), 1), m)
        levels = []
        for k in range(2, n + 1):
            # per-coordinate budget k*d/(n+1)^2, floored so errors stay integral
            budget = math.floor(k * d / (n + 1) ** 2)
            levels.append(levels_for_error(k, budget))
        return ScalarQuantizerSpec(tuple(levels))

    if regime == "small":
        a, delta = params.a, params.delta
        if space == "tau":
            if a >= 1:
                m = math.floor(2 * a)
                # d / a is n**delta unless an explicit target was given
                k = math.floor(d / a / m)
            else:
                m = 2
                k = math.floor(d / 2)
            if k < 1:
                raise ScheduleError(f"target {d:g} too small for one sorted block at n={n}")
            if k * m > n:
                raise ScheduleError(f"k*m = {k * m} exceeds n = {n}")
            return BlockSortCode(n, k, m)
        levels = []
        if a > 1:
            tail = n - math.floor(n ** delta)
            for k in range(2, n + 1):
                levels.append(k if k <= tail else math.ceil(k / (2 * a - 1)))
        else:
            cut = math.ceil(d)
            for k in range(2, n + 1):
                levels.append(math.ceil(k / 3) if k < cut else k)
        return ScalarQuantizerSpec(tuple(levels))

    b = params.b
    if space == "tau":
        k = math.ceil(1 / (2 * b))
        m = n // k
        if m < 2:
            raise ScheduleError(f"n={n} too small for {k} blocks")
        return BlockSortCode(n, k, m)
    return ScalarQuantizerSpec(tuple(
        math.ceil(k / (4 * b * (k - 1) + 1)) for k in range(2, n + 1)))


def guaranteed_distortion(code, space: str, mode: str = "worst") -> Fraction:
    """Distortion guarantee of a code in ``space``.

    Block codes use the closed forms of block_sort_distortion_bounds; scalar
    specs sum the exact per-coordinate worst errors.
    """
    space = canonical_space(space)
    if isinstance(code, BlockSortCode):
        return block_sort_distortion_bounds(code, space, mode)
    if isinstance(code, ScalarQuantizerSpec):
        if space != "invl1":
            raise ValueError("scalar quantizer specs are inversion-l1 codes")
        if mode == "average":
            return sum((scalar_mean_error(k, mk) for k, mk in enumerate(code.levels, 2)),
                       Fraction(0))
        return Fraction(sum(code.max_errors()))
    raise TypeError(f"unknown code type {type(code).__name__}")


def scalar_mean_error(k: int, m: int) -> Fraction:
    """Mean absolute error of the balanced grid for a uniform value on 0..k-1."""
    total = 0
    for lo, size, rep in scalar_cells(k, m):
        left, right = rep - lo, lo + size - 1 - rep
        total += left * (left + 1) // 2 + right * (right + 1) // 2
    return Fraction(total, k)


def encode(code, space: str, perms) -> np.ndarray:
    """Encode a (rows, n) batch of permutations with a scheduled code."""
    from .perm_core import from_inversion_vectors, to_inversion_vectors

    space = canonical_space(space)
    if isinstance(code, ScalarQuantizerSpec):
        return from_inversion_vectors(scalar_quantize_batch(to_inversion_vectors(perms), code))
    if space == "tau":
        return block_sort_batch(perms, code)
    return block_sort_inverse_domain_batch(perms, code)


# non-equivalence construction

@dataclass(frozen=True)
class CounterexampleCode:
    """Sort the inverse permutation over k index sets of size m, one wrapping.

    Set j < k is {(j-1)m+2, ..., jm+1}; set k is {(k-1)m+2, ..., n, 1}. Each
    set's entries of the inverse are sorted in place, in increasing index
    order. The code has footrule distortion O(k m^2 + n), yet whenever value 1
    changes position, the position it left receives a value above (k-1)m+1,
    so the Chebyshev distortion is about n.
    """

    n: int
    m: int
    requested_n: int

    @classmethod
    def build(cls, n: int, delta: float) -> "CounterexampleCode":
        """Block length ceil(n**delta); n is rounded down to a multiple of it."""
        if not 0 < delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        m = math.ceil(n ** delta - 1e-9)
        m = max(m, 2)
        used = (n // m) * m
        if used // m < 2:
            raise ValueError(f"n={n} too small for two blocks of length {m}")
        return cls(used, m, n)

    @property
    def k(self) -> int:
        return self.n // self.m

    @property
    def adjusted(self) -> bool:
        return self.n != self.requested_n

    def index_sets(self) -> list[list[int]]:
        """The k index sets, 1-based, each in increasing order."""
        m, k = self.m, self.k
        sets = [list(range((j - 1) * m + 2, j * m + 2)) for j in range(1, k)]
        sets.append([1] + list(range((k - 1) * m + 2, self.n + 1)))
        return sets

    def encode(self, sigma: Sequence[int]) -> Permutation:
        sigma = validate(sigma)
        return Permutation._trusted(self.encode_batch(np.asarray(sigma)[None, :])[0])

    def encode_batch(self, perms) -> np.ndarray:
        arr = as_perm_array(perms)
        if arr.shape[1] != self.n:
            raise ValueError(f"code is for n={self.n}, got n={arr.shape[1]}")
        idx = np.asarray(self.index_sets(), dtype=np.int64) - 1
        pos = inverse_batch(arr)
        pos[:, idx] = np.sort(pos[:, idx], axis=2)
        return inverse_batch(pos)

    def l1_bound(self) -> Fraction:
        """Footrule bound (k-1) m^2 / 2 + (m-1)^2 + 2n."""
        return Fraction((self.k - 1) * self.m ** 2, 2) + (self.m - 1) ** 2 + 2 * self.n

    def linf_floor(self) -> int:
        """Chebyshev distortion guaranteed once value 1 changes position."""
        return (self.k - 1) * self.m + 1
