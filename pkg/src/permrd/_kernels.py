"""Compiled batch kernels over rows of 1-based permutations.

Every kernel takes C-contiguous int64 arrays with one permutation (or
inversion vector) per row and uses a per-row binary indexed tree, so the
cost is O(n log n) per row. Inputs are assumed valid; the public wrappers in
``perm_core`` and ``metrics`` do the checking.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def inversion_counts(perms):
    rows, n = perms.shape
    out = np.zeros(rows, np.int64)
    tree = np.zeros(n + 1, np.int64)
    for r in range(rows):
        tree[:] = 0
        total = 0
        for p in range(n - 1, -1, -1):
            v = perms[r, p]
            i = v - 1
            while i > 0:
                total += tree[i]
                i -= i & -i
            i = v
            while i <= n:
                tree[i] += 1
                i += i & -i
        out[r] = total
    return out


@njit(cache=True, nogil=True)
def inversion_vectors(perms):
    rows, n = perms.shape
    out = np.zeros((rows, n - 1), np.int64)
    tree = np.zeros(n + 1, np.int64)
    for r in range(rows):
        tree[:] = 0
        for p in range(n - 1, -1, -1):
            v = perms[r, p]
            smaller = 0
            i = v - 1
            while i > 0:
                smaller += tree[i]
                i -= i & -i
            if v >= 2:
                out[r, v - 2] = smaller
            i = v
            while i <= n:
                tree[i] += 1
                i += i & -i
    return out


@njit(cache=True, nogil=True)
def from_inversion_vectors(xs):
    rows, width = xs.shape
    n = width + 1
    out = np.zeros((rows, n), np.int64)
    tree = np.zeros(n + 1, np.int64)
    top = 1
    while top * 2 <= n:
        top *= 2
    for r in range(rows):
        # all n slots start free
        for i in range(1, n + 1):
            tree[i] = i & -i
        for v in range(n, 0, -1):
            rank = v
            if v >= 2:
                rank = v - xs[r, v - 2]
            # smallest slot whose free-prefix count reaches rank
            pos = 0
            step = top
            while step > 0:
                nxt = pos + step
                if nxt <= n and tree[nxt] < rank:
                    pos = nxt
                    rank -= tree[nxt]
                step //= 2
            slot = pos + 1
            out[r, slot - 1] = v
            i = slot
            while i <= n:
                tree[i] -= 1
                i += i & -i
    return out


@njit(cache=True, nogil=True)
def kendall_distances(a, b):
    """Discordant value pairs between rows of ``a`` and rows of ``b``.

    ``b`` may have a single row, which is then used against every row of ``a``.
    """
    rows, n = a.shape
    out = np.zeros(rows, np.int64)
    tree = np.zeros(n + 1, np.int64)
    pos_b = np.zeros(n + 1, np.int64)
    shared = b.shape[0] == 1
    if shared:
        for p in range(n):
            pos_b[b[0, p]] = p + 1
    for r in range(rows):
        if not shared:
            for p in range(n):
                pos_b[b[r, p]] = p + 1
        tree[:] = 0
        total = 0
        for p in range(n - 1, -1, -1):
            v = pos_b[a[r, p]]
            i = v - 1
            while i > 0:
                total += tree[i]
                i -= i & -i
            i = v
            while i <= n:
                tree[i] += 1
                i += i & -i
        out[r] = total
    return out
