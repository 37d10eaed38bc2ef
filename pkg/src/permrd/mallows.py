"""Mallows distribution over permutations.

P(sigma) = q**kendall_tau(sigma, reference) / [n]_q!, sampled through the
repeated insertion model: step i draws how far from the end value i is
inserted, a geometric variable truncated to 0..i-1. Those offsets are exactly
the inversion vector of the sample (before relabelling by the reference).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import binary_entropy
from .metrics import kendall_tau
from .perm_core import Permutation, from_inversion_vectors, validate


def _log_q_number(i: int, q: float) -> float:
    """Natural log of [i]_q = 1 + q + ... + q^(i-1)."""
    if q == 1:
        return math.log(i)
    if q > 1:
        return (i - 1) * math.log(q) + _log_q_number(i, 1 / q)
    lq = math.log(q)
    return math.log(-math.expm1(i * lq)) - math.log(-math.expm1(lq))


def q_factorial(n: int, q: float, base: float = math.e) -> float:
    """log [n]_q! = sum_i log [i]_q (natural log unless ``base`` is given)."""
    if q <= 0:
        raise ValueError("q must be > 0")
    if n < 0:
        raise ValueError("n must be >= 0")
    return sum(_log_q_number(i, q) for i in range(1, n + 1)) / math.log(base)


@dataclass(frozen=True)
class MallowsModel:
    q: float
    reference: Permutation

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("q must be > 0")
        object.__setattr__(self, "reference", validate(self.reference))

    @classmethod
    def centered(cls, n: int, q: float) -> "MallowsModel":
        return cls(q, Permutation.identity(n))

    @property
    def n(self) -> int:
        return len(self.reference)

    def log_pmf(self, sigma: Sequence[int]) -> float:
        d = kendall_tau(sigma, self.reference)
        return d * math.log(self.q) - q_factorial(self.n, self.q)

    def pmf(self, sigma: Sequence[int]) -> float:
        return math.exp(self.log_pmf(sigma))

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """One permutation, or a (size, n) array of them when ``size`` is given."""
        out = sample_rim(self, rng, 1 if size is None else size)
        return Permutation._trusted(out[0]) if size is None else out


def pmf(sigma: Sequence[int], model: MallowsModel) -> float:
    return model.pmf(sigma)


def truncated_geometric(q: float, u: np.ndarray, tops: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw of X with P(X = j) proportional to q^j on 0..tops-1.

    ``u`` holds uniforms in [0, 1); ``tops`` broadcasts against it. Requires
    q <= 1.
    """
    if q == 1:
        x = np.floor(u * tops)
    else:
        lq = math.log(q)
        # P(X <= x) = (1 - q^(x+1)) / (1 - q^top), solved for x in stable form
        x = np.floor(np.log1p(u * np.expm1(tops * lq)) / lq)
    return np.clip(x, 0, tops - 1).astype(np.int64)


def insertion_offsets(n: int, q: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Extended inversion vectors (offset from the end at each insertion step).

    Column i-1 is distributed on 0..i-1 with weights q^j. For q > 1 the
    caller reverses the reference and uses 1/q.
    """
    u = rng.random((size, n))
    return truncated_geometric(q, u, np.arange(1, n + 1, dtype=np.float64))


def sample_rim(model: MallowsModel, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Draw ``size`` permutations from the model, one per row.

    For q > 1 the model equals the one with parameter 1/q and the reversed
    reference, because reversing the reference turns every Kendall distance d
    into n(n-1)/2 - d.
    """
    q, ref = model.q, np.asarray(model.reference, dtype=np.int64)
    n = ref.size
    if q > 1:
        q, ref = 1 / q, ref[::-1].copy()
    if n == 1:
        return np.ones((size, 1), dtype=np.int64)
    offsets = insertion_offsets(n, q, rng, size)
    centered = from_inversion_vectors(offsets[:, 1:])
    return ref[centered - 1]


# entropy

def _hb_nats(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log1p(-p)


def _hb_power(lq: float, j: int) -> float:
    """H_b(q^j) in nats from log q, stable for small q^j."""
    s = math.exp(j * lq)
    if s <= 0.0:
        return 0.0
    return -s * j * lq - (1 - s) * math.log1p(-s)


@dataclass(frozen=True)
class EntropyResult:
    """Entropy of a Mallows model, split as linear_coefficient * n - remainder.

    For q = 1 the distribution is uniform and the split is undefined: both
    linear_coefficient and remainder are infinite.
    """

    n: int
    q: float
    total: float
    linear_coefficient: float
    remainder: float
    base: float


def entropy(n: int, q: float, base: float = 2.0) -> EntropyResult:
    """Entropy of the Mallows model on S_n; depends only on n and q.

    It is the sum over steps of the entropies of truncated geometric
    variables on 0..k, k = 0..n-1, each equal to H_b(q)/(1-q) - H_b(Q_k)/Q_k
    with Q_k = 1 - q^(k+1).
    """
    if not q > 0:
        raise ValueError("q must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    lb = math.log(base)
    if q == 1:
        return EntropyResult(n, q, math.lgamma(n + 1) / lb, math.inf, math.inf, base)
    qq = 1 / q if q > 1 else q
    lq = math.log(qq)
    linear = _hb_nats(qq) / (1 - qq)
    total = 0.0
    remainder = 0.0
    for k in range(n):
        big_q = -math.expm1((k + 1) * lq)
        hk = _hb_power(lq, k + 1) / big_q
        total += linear - hk
        remainder += hk
    return EntropyResult(n, q, total / lb, linear / lb, remainder / lb, base)


def remainder_bound(q: float, base: float = 2.0) -> float:
    """Upper bound on the remainder valid for every n, for q != 1.

    Uses H_b(s) <= s log(1/s) + s log e and 1/(1 - q^k) <= 1/(1 - q), giving
    (q log(1/q)/(1-q)^2 + q log(e)/(1-q)) / (1-q).
    """
    if q == 1:
        return math.inf
    qq = 1 / q if q > 1 else q
    lq = -math.log(qq)
    nats = (qq * lq / (1 - qq) ** 2 + qq / (1 - qq)) / (1 - qq)
    return nats / math.log(base)


# concentration around the mode

def typical_exponent(c: float, q: float) -> float:
    """(1+c) H_b(1/(1+c)) - c log2(1/q), in bits.

    The mass at Kendall radius c*n from the mode is at most about
    2^(n * exponent).
    """
    if c < 0:
        raise ValueError("c must be >= 0")
    if c == 0:
        return 0.0
    return (1 + c) * binary_entropy(1 / (1 + c)) - c * math.log2(1 / q)


def typical_radius_constant(q: float, eps: float = 0.05, tol: float = 1e-9) -> float:
    """Smallest c with typical_exponent(c, q) <= -eps.

    The exponent is concave in c, zero at c = 0 and maximal at c = q/(1-q),
    so the crossing is unique beyond the maximum and is found by bisection.
    """
    if not 0 < q < 1:
        raise ValueError("the radius constant is defined for 0 < q < 1")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    lo = q / (1 - q)
    hi = max(2 * lo, 1.0)
    while typical_exponent(hi, q) > -eps:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if typical_exponent(mid, q) > -eps:
            lo = mid
        else:
            hi = mid
    return hi
