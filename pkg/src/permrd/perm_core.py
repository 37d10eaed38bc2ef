"""Permutations in vector notation and their inversion / insertion coordinates.

Permutations are 1-indexed: ``sigma(i)`` is the value at position ``i``.
Three coordinate systems describe the same object:

* vector notation ``[sigma(1), ..., sigma(n)]``
* the inversion vector ``x`` of length n-1, where ``x[i'-2]`` counts the
  values ``j' < i'`` that sit to the right of ``i'``
* the insertion vector ``a`` of length n, where ``a[i-1]`` is the slot in
  which value ``i`` is inserted when the permutation is built by inserting
  1, 2, ..., n one after another
"""
from __future__ import annotations

import operator
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from . import _kernels


class PermutationError(ValueError):
    """Base class for malformed permutation data."""


class EmptyPermutationError(PermutationError):
    pass


class DuplicateValueError(PermutationError):
    def __init__(self, value, first, second):
        self.value, self.first, self.second = value, first, second
        super().__init__(
            f"duplicate value {value} at positions {first} and {second}")


class OutOfRangeError(PermutationError):
    def __init__(self, value, position, n):
        self.value, self.position, self.n = value, position, n
        super().__init__(
            f"value {value} at position {position} is outside 1..{n}")


class DegenerateSizeError(PermutationError):
    """Inversion-vector coordinates need n >= 2."""


class SizeMismatchError(PermutationError):
    pass


class InvalidVectorError(PermutationError):
    """An inversion or insertion vector entry is outside its allowed range."""


def _as_ints(raw) -> tuple[int, ...]:
    try:
        return tuple(operator.index(v) for v in raw)
    except TypeError as exc:
        raise PermutationError(f"entries must be integers: {exc}") from None


class Permutation(tuple):
    """An immutable permutation of 1..n in vector notation.

    Calling the object applies it: ``p(i)`` is the value at 1-based position i.
    """

    __slots__ = ()

    def __new__(cls, raw: Iterable[int]):
        entries = _as_ints(raw)
        n = len(entries)
        if n == 0:
            raise EmptyPermutationError("a permutation needs at least one entry")
        seen = [0] * (n + 1)
        for pos, v in enumerate(entries, 1):
            if v < 1 or v > n:
                raise OutOfRangeError(v, pos, n)
            if seen[v]:
                raise DuplicateValueError(v, seen[v], pos)
            seen[v] = pos
        return tuple.__new__(cls, entries)

    @classmethod
    def _trusted(cls, entries) -> "Permutation":
        # skip validation for values produced by this package
        return tuple.__new__(cls, (int(v) for v in entries))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        if n < 1:
            raise EmptyPermutationError("a permutation needs at least one entry")
        return cls._trusted(range(1, n + 1))

    @property
    def n(self) -> int:
        return len(self)

    def __call__(self, i: int) -> int:
        if not 1 <= i <= len(self):
            raise IndexError(f"position {i} outside 1..{len(self)}")
        return tuple.__getitem__(self, i - 1)

    def __repr__(self):
        return f"Permutation({list(self)})"

    def to_array(self) -> np.ndarray:
        return np.asarray(self, dtype=np.int64)


class InversionVector(tuple):
    """Length n-1 vector with ``0 <= x(i) <= i`` (1-based i)."""

    __slots__ = ()

    def __new__(cls, raw: Iterable[int]):
        entries = _as_ints(raw)
        if len(entries) == 0:
            raise DegenerateSizeError(
                "an inversion vector describes a permutation of n >= 2 "
                "and so has at least one entry")
        for i, v in enumerate(entries, 1):
            if not 0 <= v <= i:
                raise InvalidVectorError(
                    f"inversion vector entry {i} is {v}, must lie in 0..{i}")
        return tuple.__new__(cls, entries)

    @classmethod
    def _trusted(cls, entries) -> "InversionVector":
        return tuple.__new__(cls, (int(v) for v in entries))

    @property
    def n(self) -> int:
        """Size of the permutation this vector describes."""
        return len(self) + 1

    def __repr__(self):
        return f"InversionVector({list(self)})"


class InsertionVector(tuple):
    """Length n vector with ``1 <= a_i <= i``."""

    __slots__ = ()

    def __new__(cls, raw: Iterable[int]):
        entries = _as_ints(raw)
        if len(entries) == 0:
            raise EmptyPermutationError("an insertion vector needs at least one entry")
        for i, v in enumerate(entries, 1):
            if not 1 <= v <= i:
                raise InvalidVectorError(
                    f"insertion vector entry {i} is {v}, must lie in 1..{i}")
        return tuple.__new__(cls, entries)

    @property
    def n(self) -> int:
        return len(self)

    def __repr__(self):
        return f"InsertionVector({list(self)})"


def validate(raw: Sequence[int]) -> Permutation:
    """Check that ``raw`` is a bijection on 1..len(raw) and wrap it."""
    if isinstance(raw, Permutation):
        return raw
    return Permutation(raw)


def same_size(p: Permutation, q: Permutation) -> int:
    if len(p) != len(q):
        raise SizeMismatchError(f"permutations have sizes {len(p)} and {len(q)}")
    return len(p)


def inverse(sigma: Sequence[int]) -> Permutation:
    sigma = validate(sigma)
    inv = [0] * len(sigma)
    for pos, v in enumerate(sigma, 1):
        inv[v - 1] = pos
    return Permutation._trusted(inv)


def compose(outer: Sequence[int], inner: Sequence[int]) -> Permutation:
    """Return ``outer o inner``, i.e. ``i -> outer(inner(i))``."""
    outer, inner = validate(outer), validate(inner)
    same_size(outer, inner)
    return Permutation._trusted(outer[v - 1] for v in inner)


def count_inversions(sigma: Sequence[int]) -> int:
    """Number of position pairs i < j with sigma(i) > sigma(j)."""
    sigma = validate(sigma)
    n = len(sigma)
    tree = [0] * (n + 1)
    total = 0
    for v in reversed(sigma):
        i = v - 1
        while i > 0:
            total += tree[i]
            i -= i & -i
        i = v
        while i <= n:
            tree[i] += 1
            i += i & -i
    return total


def to_inversion_vector(sigma: Sequence[int]) -> InversionVector:
    """Inversion vector in O(n log n) with a binary indexed tree."""
    sigma = validate(sigma)
    n = len(sigma)
    if n < 2:
        raise DegenerateSizeError("inversion vectors need n >= 2")
    tree = [0] * (n + 1)
    out = [0] * (n - 1)
    # scan right to left; smaller values already seen are exactly the
    # smaller values to the right
    for v in reversed(sigma):
        smaller = 0
        i = v - 1
        while i > 0:
            smaller += tree[i]
            i -= i & -i
        if v >= 2:
            out[v - 2] = smaller
        i = v
        while i <= n:
            tree[i] += 1
            i += i & -i
    return InversionVector._trusted(out)


def to_inversion_vector_naive(sigma: Sequence[int]) -> InversionVector:
    """Quadratic reference: count smaller values to the right of each value."""
    sigma = validate(sigma)
    n = len(sigma)
    if n < 2:
        raise DegenerateSizeError("inversion vectors need n >= 2")
    pos = inverse(sigma)
    return InversionVector._trusted(
        sum(1 for j in range(1, i) if pos[j - 1] > pos[i - 1])
        for i in range(2, n + 1))


def from_inversion_vector(x: Sequence[int]) -> Permutation:
    """Rebuild the permutation whose inversion vector is ``x``.

    Values are placed from n down to 1. Value v has ``x(v-1)`` smaller values
    to its right, so among the slots still free (which will hold 1..v) it
    takes the ``(v - x(v-1))``-th from the left. The free slots live in a
    binary indexed tree, giving O(n log n).
    """
    if not isinstance(x, InversionVector):
        x = InversionVector(x)
    n = len(x) + 1
    tree = [0] * (n + 1)
    for i in range(1, n + 1):
        tree[i] = i & -i
    top = 1 << (n.bit_length() - 1)
    out = [0] * n
    for v in range(n, 0, -1):
        rank = v - x[v - 2] if v >= 2 else 1
        pos, step = 0, top
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] < rank:
                pos = nxt
                rank -= tree[nxt]
            step >>= 1
        slot = pos + 1
        out[slot - 1] = v
        i = slot
        while i <= n:
            tree[i] -= 1
            i += i & -i
    return Permutation._trusted(out)


def insertion_to_extended_inversion(a: Sequence[int]) -> InversionVector:
    """Map an insertion vector to the inversion vector of the same permutation.

    Inserting value i into slot a_i of the i-1 values placed so far leaves
    ``i - a_i`` smaller values to its right, and later (larger) insertions do
    not change that count. The leading entry for value 1 is always 0 and is
    dropped.
    """
    if not isinstance(a, InsertionVector):
        a = InsertionVector(a)
    if len(a) < 2:
        raise DegenerateSizeError("inversion vectors need n >= 2")
    return InversionVector._trusted(i - ai for i, ai in enumerate(a, 1) if i >= 2)


def inversion_to_insertion(x: Sequence[int]) -> InsertionVector:
    if not isinstance(x, InversionVector):
        x = InversionVector(x)
    return InsertionVector((1,) + tuple(i - xi for i, xi in enumerate(x, 2)))


def insert_repeatedly(a: Sequence[int]) -> Permutation:
    """Build a permutation by literally inserting 1..n at the slots in ``a``.

    Quadratic; used as the reference for :func:`insertion_to_extended_inversion`.
    """
    if not isinstance(a, InsertionVector):
        a = InsertionVector(a)
    seq: list[int] = []
    for i, slot in enumerate(a, 1):
        seq.insert(slot - 1, i)
    return Permutation._trusted(seq)


# batch helpers over (rows, n) arrays of 1-based values

def as_perm_array(perms) -> np.ndarray:
    arr = np.ascontiguousarray(perms, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise PermutationError("expected a non-empty (rows, n) array of permutations")
    return arr


def check_perm_array(perms) -> np.ndarray:
    """Validate every row of a (rows, n) array as a permutation of 1..n."""
    arr = as_perm_array(perms)
    n = arr.shape[1]
    if arr.min() < 1 or arr.max() > n:
        r, c = np.argwhere((arr < 1) | (arr > n))[0]
        raise OutOfRangeError(int(arr[r, c]), int(c) + 1, n)
    s = np.sort(arr, axis=1)
    bad = np.nonzero((s[:, 1:] == s[:, :-1]).any(axis=1))[0]
    if bad.size:
        row = arr[bad[0]]
        dup = int(s[bad[0]][np.nonzero(s[bad[0], 1:] == s[bad[0], :-1])[0][0]])
        first, second = np.nonzero(row == dup)[0][:2] + 1
        raise DuplicateValueError(dup, int(first), int(second))
    return arr


def inverse_batch(perms) -> np.ndarray:
    arr = as_perm_array(perms)
    out = np.empty_like(arr)
    rows = np.arange(arr.shape[0])[:, None]
    out[rows, arr - 1] = np.arange(1, arr.shape[1] + 1)
    return out


def inversion_counts(perms) -> np.ndarray:
    return _kernels.inversion_counts(as_perm_array(perms))


def to_inversion_vectors(perms) -> np.ndarray:
    arr = as_perm_array(perms)
    if arr.shape[1] < 2:
        raise DegenerateSizeError("inversion vectors need n >= 2")
    return _kernels.inversion_vectors(arr)


def from_inversion_vectors(xs) -> np.ndarray:
    arr = np.ascontiguousarray(xs, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise DegenerateSizeError("expected a (rows, n-1) array with n >= 2")
    caps = np.arange(1, arr.shape[1] + 1)
    if (arr < 0).any() or (arr > caps).any():
        raise InvalidVectorError("inversion vector entry outside 0..i")
    return _kernels.from_inversion_vectors(arr)


# randomness

def task_rng(seed: int, *task_key: int) -> np.random.Generator:
    """Independent generator for one task, derived from ``(seed, task_key)``.

    Results depend only on the seed and the task's key, never on which worker
    runs it or in what order.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=task_key))


def random_permutations(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random permutations of 1..n, one per row."""
    if n < 1:
        raise EmptyPermutationError("n must be >= 1")
    return rng.permuted(np.tile(np.arange(1, n + 1, dtype=np.int64), (count, 1)), axis=1)


# text format: one permutation per line, space-separated 1-based values

def parse_line(line: str, lineno: int | None = None) -> Permutation | None:
    """Parse one line; blank lines and ``#`` comments give None."""
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    where = f"line {lineno}: " if lineno is not None else ""
    values = []
    for col, tok in enumerate(body.split(), 1):
        try:
            values.append(int(tok))
        except ValueError:
            raise PermutationError(f"{where}token {col} ({tok!r}) is not an integer") from None
    try:
        return Permutation(values)
    except PermutationError as exc:
        # keep the specific error class, add the location
        exc.args = (f"{where}{exc}",)
        exc.lineno = lineno
        raise


def read_permutations(stream: TextIO) -> Iterator[Permutation]:
    for lineno, line in enumerate(stream, 1):
        p = parse_line(line, lineno)
        if p is not None:
            yield p


def format_permutation(p: Sequence[int]) -> str:
    return " ".join(str(int(v)) for v in p)


def write_permutations(stream: TextIO, perms: Iterable[Sequence[int]]) -> None:
    for p in perms:
        stream.write(format_permutation(p) + "\n")
