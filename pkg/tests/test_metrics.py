import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from permrd.metrics import (
    canonical_space,
    chebyshev,
    distance,
    distance_batch,
    footrule,
    inversion_l1,
    kendall_tau,
    max_distance,
)
from permrd.perm_core import (
    DegenerateSizeError,
    Permutation,
    SizeMismatchError,
    compose,
    inverse,
    random_permutations,
    task_rng,
    to_inversion_vector,
)

S1, S2 = (1, 5, 4, 2, 3), (3, 4, 5, 1, 2)
FUNCS = {"tau": kendall_tau, "l1": footrule, "linf": chebyshev, "invl1": inversion_l1}


def pair_of_perms(max_n=30, min_n=1):
    return st.integers(min_n, max_n).flatmap(lambda n: st.tuples(
        st.permutations(range(1, n + 1)), st.permutations(range(1, n + 1))))


def test_worked_examples():
    assert kendall_tau(S1, S2) == 7
    assert footrule(S1, S2) == 6
    assert chebyshev(S1, S2) == 2
    assert inversion_l1(S1, S2) == 3
    assert footrule((1, 2, 3), (3, 2, 1)) == 4
    assert chebyshev((1, 2, 3), (3, 2, 1)) == 2
    assert kendall_tau((2, 1, 3), (1, 2, 3)) == 1
    assert inversion_l1((2, 1, 3), (1, 2, 3)) == 1


def test_errors():
    with pytest.raises(SizeMismatchError):
        kendall_tau((1, 2), (1, 2, 3))
    with pytest.raises(DegenerateSizeError):
        inversion_l1((1,), (1,))
    with pytest.raises(ValueError):
        canonical_space("hamming")


@pytest.mark.parametrize("n", range(1, 6))
def test_all_metrics_match_oracles_exhaustive(n):
    ps = oracles.perms(n)
    table = oracles.kendall_bfs_table(n)
    for p, q in itertools.product(ps, repeat=2):
        assert footrule(p, q) == oracles.footrule(p, q)
        assert chebyshev(p, q) == oracles.chebyshev(p, q)
        k = kendall_tau(p, q)
        assert k == oracles.kendall_pairs(p, q) == oracles.kendall_bfs(p, q, table)
        if n >= 2:
            assert inversion_l1(p, q) == oracles.inversion_l1(p, q)


@pytest.mark.parametrize("n", range(1, 6))
def test_metric_axioms_exhaustive(n):
    ps = oracles.perms(n)
    names = ["tau", "l1", "linf"] + (["invl1"] if n >= 2 else [])
    for name in names:
        f = FUNCS[name]
        d = {(p, q): f(p, q) for p in ps for q in ps}
        for p, q in itertools.product(ps, repeat=2):
            assert d[p, q] >= 0
            assert (d[p, q] == 0) == (p == q)
            assert d[p, q] == d[q, p]
        for p, q, r in itertools.product(ps, repeat=3):
            assert d[p, r] <= d[p, q] + d[q, r]


def test_triangle_inequality_n6_for_permutation_metrics():
    ps = oracles.perms(6)
    arr = np.asarray(ps)
    for name in ("tau", "l1", "linf"):
        # full distance matrix via batch kernels
        mat = np.stack([distance_batch(name, arr, np.asarray(p)[None, :]) for p in ps])
        assert (mat == mat.T).all()
        for i in range(0, len(ps), 7):
            # d(p_i, r) <= d(p_i, q) + d(q, r) for all q, r at once
            assert (mat[i][None, :] <= mat[i][:, None] + mat).all()


@pytest.mark.parametrize("n", range(2, 7))
def test_inequality_chain_exhaustive(n):
    ps = oracles.perms(n)
    inv = {p: inverse(p) for p in ps}
    for p, q in itertools.product(ps, repeat=2):
        l1, linf = footrule(p, q), chebyshev(p, q)
        tau_inv = kendall_tau(inv[p], inv[q])
        assert n * linf >= l1 >= tau_inv
        assert 2 * tau_inv >= l1
        assert inversion_l1(p, q) <= kendall_tau(p, q)


@pytest.mark.parametrize("n", range(3, 7))
def test_kendall_over_inversion_l1_ratio_exhaustive(n):
    # Kendall can exceed (n - 1) times the inversion-vector distance: moving
    # value 1 from the end to the front of a suffix changes a single
    # coordinate by one but costs 2n - 3 swaps. 2n - 3 is the worst ratio.
    ps = oracles.perms(n)
    worst = max(Fraction(kendall_tau(p, q), inversion_l1(p, q))
                for p in ps for q in ps if p != q)
    assert worst == 2 * n - 3
    rest = tuple(range(n, 2, -1))
    p, q = (2,) + rest + (1,), (1,) + rest + (2,)
    assert inversion_l1(p, q) == 1 and kendall_tau(p, q) == 2 * n - 3


@pytest.mark.parametrize("n", range(2, 7))
def test_distance_to_identity_is_inversion_count(n):
    ident = Permutation.identity(n)
    for p in oracles.perms(n):
        inv_count = sum(to_inversion_vector(p))
        assert kendall_tau(p, ident) == inv_count == inversion_l1(p, ident)


@pytest.mark.parametrize("n", range(2, 7))
def test_kendall_relabelling_invariance(n):
    # relabelling values by a common pi (pi o sigma) leaves the distance unchanged
    ps = oracles.perms(n)
    rnd = random.Random(n)
    for _ in range(3):
        pi = rnd.choice(ps)
        for p, q in itertools.product(ps[:: max(1, len(ps) // 40)], repeat=2):
            assert kendall_tau(compose(pi, p), compose(pi, q)) == kendall_tau(p, q)


@pytest.mark.parametrize("n", range(2, 7))
def test_footrule_and_chebyshev_position_invariance(n):
    # permuting positions (sigma o pi) leaves the vector distances unchanged
    ps = oracles.perms(n)
    rnd = random.Random(100 + n)
    pi = rnd.choice(ps)
    for p, q in itertools.product(ps[:: max(1, len(ps) // 40)], repeat=2):
        assert footrule(compose(p, pi), compose(q, pi)) == footrule(p, q)
        assert chebyshev(compose(p, pi), compose(q, pi)) == chebyshev(p, q)


def test_kendall_is_not_position_invariant():
    # composing on the right reorders positions, which can change the distance
    pi = (3, 1, 2)
    values = {kendall_tau(compose(a, pi), compose(b, pi)) - kendall_tau(a, b)
              for a in oracles.perms(3) for b in oracles.perms(3)}
    assert values != {0}


def test_inversion_l1_lower_bound_tight_in_s4():
    n = 4
    ps = oracles.perms(n)
    assert any((n - 1) * inversion_l1(p, q) == kendall_tau(p, q)
               for p in ps for q in ps if p != q)
    assert kendall_tau((1, 3, 4, 2), (2, 4, 3, 1)) == 6
    assert inversion_l1((1, 3, 4, 2), (2, 4, 3, 1)) == 2


def test_maximum_values():
    for n in range(2, 7):
        ps = oracles.perms(n)
        ident = ps[0]
        for name in FUNCS:
            assert max(FUNCS[name](ident, p) for p in ps) <= max_distance(name, n)
        assert max(footrule(p, q) for p in ps for q in ps) == n * n // 2


@given(pair_of_perms(80, 2))
def test_batch_equals_scalar(pq):
    p, q = pq
    for name, f in FUNCS.items():
        got = distance_batch(name, np.asarray([p]), np.asarray([q]))
        assert int(got[0]) == f(p, q) == distance(name, p, q)


def test_batch_broadcasts_single_row_either_side():
    rng = task_rng(5)
    arr = random_permutations(30, 40, rng)
    c = arr[:1]
    for name in FUNCS:
        assert np.array_equal(distance_batch(name, arr, c), distance_batch(name, c, arr))


@given(pair_of_perms(40, 1))
def test_kendall_fast_equals_pair_count(pq):
    p, q = pq
    assert kendall_tau(p, q) == oracles.kendall_pairs(p, q)
