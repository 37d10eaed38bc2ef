"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and shown in the terminal summary under
"acceptance criteria". Criteria that fail do so because the checked claim
does not hold for the faithful implementation; the detail field shows the
measured numbers.
"""
import itertools
import math
import time

import numpy as np

import oracles
from permrd.geometry import (
    all_permutations,
    ball_brute,
    cumulative_T,
    invl1_ball_size,
    mahonian,
    mahonian_row,
)
from permrd.mallows import (
    MallowsModel,
    entropy,
    sample_rim,
    typical_radius_constant,
)
from permrd.metrics import (
    chebyshev,
    chebyshev_batch,
    footrule,
    footrule_batch,
    inversion_l1,
    inversion_l1_batch,
    kendall_tau,
    kendall_tau_batch,
)
from permrd.perm_core import (
    count_inversions,
    from_inversion_vector,
    insertion_to_extended_inversion,
    inverse,
    inverse_batch,
    random_permutations,
    task_rng,
    to_inversion_vector,
)
from permrd.quantizers import (
    BlockSortCode,
    CounterexampleCode,
    RegimeParams,
    block_sort_batch,
    block_sort_encode,
    block_sort_inverse_domain_batch,
    scalar_cells,
    scalar_max_error,
)
from permrd.rd_harness import (
    achieved_higher_order,
    achieved_rate,
    covering_lower_bound,
    failure_scaling_ok,
    higher_order_bounds,
    moment_monte_carlo,
    relationship_sweep,
)


def test_criterion_01_oracle_equivalence(criterion):
    start = time.perf_counter()
    mismatches = 0
    for n in range(1, 6):
        ps = oracles.perms(n)
        table = oracles.kendall_bfs_table(n)
        for p, q in itertools.product(ps, repeat=2):
            k = kendall_tau(p, q)
            mismatches += k != oracles.kendall_pairs(p, q) or k != oracles.kendall_bfs(p, q, table)
            mismatches += footrule(p, q) != oracles.footrule(p, q)
            mismatches += chebyshev(p, q) != oracles.chebyshev(p, q)
            if n >= 2:
                mismatches += inversion_l1(p, q) != oracles.inversion_l1(p, q)
    ps = oracles.perms(6)
    arr = np.asarray(ps)
    for p in ps:
        fast = kendall_tau_batch(arr, np.asarray(p)[None, :])
        slow = [oracles.kendall_pairs(q, p) for q in ps]
        mismatches += int((fast != np.asarray(slow)).sum())
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 30
    criterion(1, "metrics equal brute-force oracles on S_n, n <= 5 (Kendall n = 6)", ok,
              f"mismatches={mismatches} runtime={elapsed:.1f}s")
    assert ok


def test_criterion_02_bijection(criterion):
    failures = cases = 0
    for n in range(2, 8):
        for p in itertools.permutations(range(1, n + 1)):
            x = to_inversion_vector(p)
            cases += 1
            failures += from_inversion_vector(x) != p or sum(x) != count_inversions(p)
    ok = failures == 0
    criterion(2, "inversion-vector round trip, n <= 7", ok, f"cases={cases} failures={failures}")
    assert ok


def test_criterion_03_worked_examples(criterion):
    s1, s2 = (1, 5, 4, 2, 3), (3, 4, 5, 1, 2)
    checks = {
        "kendall": kendall_tau(s1, s2) == 7,
        "x1": to_inversion_vector(s1) == (0, 0, 2, 3),
        "x2": to_inversion_vector(s2) == (0, 2, 2, 2),
        "invl1": inversion_l1(s1, s2) == 3,
        "inverse": inverse((2, 5, 4, 3, 1)) == (5, 1, 4, 3, 2),
        "insertion": from_inversion_vector(insertion_to_extended_inversion((1, 1, 1, 1)))
        == (4, 3, 2, 1),
    }
    ok = all(checks.values())
    criterion(3, "worked examples", ok, " ".join(f"{k}={'ok' if v else 'WRONG'}"
                                                 for k, v in checks.items()))
    assert ok


def test_criterion_04_inequality_chain(criterion):
    chain_bad = upper = lower = 0
    for n in range(2, 7):
        arr = all_permutations(n)
        inv = inverse_batch(arr)
        for i in range(arr.shape[0]):
            p, pinv = arr[i:i + 1], inv[i:i + 1]
            l1 = footrule_batch(arr, p)
            linf = chebyshev_batch(arr, p)
            tau_inv = kendall_tau_batch(inv, pinv)
            tau = kendall_tau_batch(arr, p)
            x = inversion_l1_batch(arr, p)
            chain_bad += int(((n * linf < l1) | (l1 < tau_inv) | (2 * tau_inv < l1)).sum())
            upper += int((x > tau).sum())
            lower += int(((n - 1) * x < tau).sum())
    ps = oracles.perms(4)
    witness = any(p != q and 3 * inversion_l1(p, q) == kendall_tau(p, q) for p in ps for q in ps)
    ok = chain_bad == 0 and upper == 0 and lower == 0 and witness
    criterion(4, "deterministic inequality chain, exhaustive n <= 6", ok,
              f"footrule/chebyshev/kendall violations={chain_bad} "
              f"invl1<=kendall violations={upper} "
              f"kendall/(n-1)<=invl1 violations={lower} S4 tightness witness={witness}")
    assert ok


def test_criterion_05_probabilistic_bounds(criterion):
    start = time.perf_counter()
    reports = relationship_sweep([50, 100, 200, 400], 100_000, seed=0)
    elapsed = time.perf_counter() - start
    linf_ok = failure_scaling_ok(reports, "linf_rate")
    tau_ok = failure_scaling_ok(reports, "tau_rate")
    ok = linf_ok and tau_ok and elapsed < 120
    detail = " ".join(f"n={r.n}:linf={r.linf_rate:.5f},tau={r.tau_rate:.5f}" for r in reports)
    criterion(5, "failure rates of c1=0.3 / c2=0.45 bounds fall with n and stay < 10/n", ok,
              f"{detail} runtime={elapsed:.1f}s")
    assert ok


def test_criterion_06_moments(criterion):
    n, trials = 50, 100_000
    tau_mean, tau_var = moment_monte_carlo("tau", n, trials, seed=0)
    l1_mean, _ = moment_monte_carlo("l1", n, trials, seed=0)
    x_mean, _ = moment_monte_carlo("invl1", n, trials, seed=0)
    checks = [
        abs(tau_mean / 612.5 - 1) < 0.01,
        abs(tau_var / (n * (2 * n + 5) * (n - 1) / 72) - 1) < 0.05,
        abs(l1_mean / ((n * n - 1) / 3) - 1) < 0.01,
        x_mean >= n * (n - 1) / 8,
    ]
    ok = all(checks)
    criterion(6, "Monte Carlo moments at n = 50", ok,
              f"tau mean={tau_mean:.2f} var={tau_var:.1f} footrule mean={l1_mean:.2f} "
              f"invl1 mean={x_mean:.2f}")
    assert ok


def test_criterion_07_quantizer_guarantees(criterion):
    code = BlockSortCode(1000, 100, 10)
    perms = random_permutations(1000, 10_000, task_rng(7))
    direct = block_sort_batch(perms, code)
    inv = block_sort_inverse_domain_batch(perms, code)
    tau = kendall_tau_batch(perms, direct)
    l1 = footrule_batch(perms, inv)
    linf = chebyshev_batch(perms, inv)
    worst_ok = tau.max() <= 4500 and linf.max() <= 9 and l1.max() <= 100 * 50
    mean_ok = abs(tau.mean() / 2250 - 1) < 0.02 and abs(l1.mean() / 3300 - 1) < 0.02

    image_ok = True
    for n in range(2, 7):
        ps = oracles.perms(n)
        for m in range(2, n + 1):
            for k in range(1, n // m + 1):
                c = BlockSortCode(n, k, m)
                size = len({block_sort_encode(p, c) for p in ps})
                image_ok &= size == math.factorial(n) // math.factorial(m) ** k

    scalar_ok = True
    for k in range(1, 65):
        for m in range(1, k + 1):
            reps = [rep for _, _, rep in scalar_cells(k, m)]
            err = max(abs(v - oracles.nearest_point(v, reps)) for v in range(k))
            scalar_ok &= err <= math.ceil((k / m - 1) / 2) and err == scalar_max_error(k, m)
    ok = worst_ok and mean_ok and image_ok and scalar_ok
    criterion(7, "block-sort and scalar quantizer guarantees", ok,
              f"tau max={tau.max()} mean={tau.mean():.1f}; footrule max={l1.max()} "
              f"mean={l1.mean():.1f}; chebyshev max={linf.max()}; image sizes ok={image_ok}; "
              f"scalar bound ok={scalar_ok}")
    assert ok


def test_criterion_08_rate_scaling(criterion):
    start = time.perf_counter()
    ns = (100, 316, 1000)
    params = RegimeParams.moderate(0.5)
    parts, ok = [], True
    for space in ("tau", "l1", "invl1", "linf"):
        rates = [achieved_rate(space, n, params) for n in ns]
        gaps = [abs(r - 0.5) for r in rates]
        within = all(g < 0.1 for g in gaps)
        shrinking = all(b < a for a, b in zip(gaps, gaps[1:]))
        ok &= within and shrinking
        parts.append(f"{space}: rates={[round(r, 4) for r in rates]} "
                     f"within0.1={within} gap shrinking={shrinking}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    criterion(8, "moderate-regime code rates approach 1 - delta = 0.5", ok, "; ".join(parts))
    assert ok


def test_criterion_09_geometry(criterion):
    mahonian_ok = all(mahonian_row(n) == oracles.mahonian_by_enumeration(n) for n in range(1, 8))
    cumulative_ok = all(cumulative_T(n, D) == mahonian(n + 1, D)
                        for n in range(1, 11) for D in range(min(n, n * (n - 1) // 2) + 1))
    binomial_ok = all(mahonian(n, k) <= math.comb(n + k - 2, k)
                      for n in range(2, 13) for k in range(1, n))
    ball_ok = True
    for n in range(1, 6):
        ps = oracles.perms(n)
        for D in range(n * (n - 1) // 2 + 1):
            sizes = [ball_brute("tau", p, D) for p in ps]
            ball_ok &= set(sizes) == {cumulative_T(n, D)}
            if n >= 2:
                ball_ok &= all(s <= invl1_ball_size(p, D) for p, s in zip(ps, sizes))
    ok = mahonian_ok and cumulative_ok and binomial_ok and ball_ok
    criterion(9, "Mahonian numbers, cumulative counts, ball sizes", ok,
              f"dp=enumeration:{mahonian_ok} T_n=K_n+1:{cumulative_ok} "
              f"binomial bound:{binomial_ok} balls:{ball_ok}")
    assert ok


def test_criterion_10_mallows(criterion):
    n, q = 5, 0.5
    samples = sample_rim(MallowsModel.centered(n, q), task_rng(10), 1_000_000)
    codes = samples @ (n ** np.arange(n))
    keys, counts = np.unique(codes, return_counts=True)
    freq = dict(zip(keys.tolist(), (counts / samples.shape[0]).tolist()))
    exact = oracles.mallows_probabilities(n, q)
    tv = 0.5 * sum(abs(freq.get(int(np.dot(p, n ** np.arange(n))), 0.0) - prob)
                   for p, prob in exact.items())

    enum_err = max(abs(entropy(6, qq).total - oracles.entropy_by_enumeration(6, qq))
                   for qq in (0.3, 0.7))
    sym_err = max(abs(entropy(m, qq).total - entropy(m, 1 / qq).total)
                  for qq in (0.3, 0.7, 2.0, 3.0) for m in (2, 10, 50))
    uniform_err = max(abs(entropy(m, 1.0).total - math.lgamma(m + 1) / math.log(2))
                      for m in (1, 5, 50))
    big = entropy(10_000, 0.7)
    asym = abs(big.total / 10_000 / big.linear_coefficient - 1)

    c0 = typical_radius_constant(0.5)
    draws = sample_rim(MallowsModel.centered(200, 0.5), task_rng(11), 10_000)
    d = kendall_tau_batch(draws, np.arange(1, 201)[None, :])
    inside = float((d <= c0 * 200).mean())

    ok = tv < 0.01 and enum_err < 1e-9 and sym_err < 1e-9 and uniform_err < 1e-9
    ok = ok and asym < 0.01 and inside >= 0.99
    criterion(10, "Mallows sampler, entropy and concentration", ok,
              f"TV={tv:.5f} entropy vs enumeration={enum_err:.1e} symmetry={sym_err:.1e} "
              f"uniform={uniform_err:.1e} per-element rel err={asym:.5f} "
              f"c0={c0:.4f} inside fraction={inside:.4f}")
    assert ok


def test_criterion_11_counterexample(criterion):
    code = CounterexampleCode.build(10_000, 0.5)
    n, m, k = code.n, code.m, code.k
    scale = n ** 1.5
    l1_ratios, literal_misses, literal_cases, corrected_misses = [], 0, 0, 0
    last = np.asarray(code.index_sets()[-1]) - 1
    for chunk in range(4):
        perms = random_permutations(n, 250, task_rng(11, chunk))
        coded = code.encode_batch(perms)
        l1 = footrule_batch(perms, coded)
        linf = chebyshev_batch(perms, coded)
        l1_ratios.extend((l1 / scale).tolist())
        floor = 0.9 * (k - 1) * m
        literal = perms[:, 0] != 1
        literal_cases += int(literal.sum())
        literal_misses += int((literal & (linf < floor)).sum())
        # the large error needs value 1 to leave its place, i.e. its position
        # is not the smallest among the positions in the wrapped index set
        pos = inverse_batch(perms)
        moved = pos[:, 0] != pos[:, last].min(axis=1)
        corrected_misses += int((moved & (linf < code.linf_floor())).sum())
    bound_ratio = float(code.l1_bound()) / scale
    l1_ok = max(l1_ratios) <= bound_ratio
    ok = l1_ok and literal_misses == 0
    criterion(11, "sorted-subsequence code: small footrule, large Chebyshev", ok,
              f"n={n} m={m} k={k} max footrule/n^1.5={max(l1_ratios):.4f} "
              f"(bound {bound_ratio:.4f}); sigma(1)!=1 cases={literal_cases} "
              f"with chebyshev < 0.9(k-1)m: {literal_misses}; "
              f"misses when value 1 actually moves: {corrected_misses}")
    assert ok


def test_criterion_12_higher_order(criterion):
    unordered, finite_crossings = [], 0
    for space in ("tau", "invl1"):
        for a in np.linspace(0.1, 4.0, 40):
            for delta in np.linspace(0.05, 1.0, 20):
                hb = higher_order_bounds(space, "small", 2000, a=float(a), delta=float(delta))
                if not hb.asymptotically_ordered():
                    unordered.append((space, "small", a, delta))
                # leading-order values alone may cross at finite n near delta = 1
                finite_crossings += hb.r_lower > hb.r_upper
        for b in np.linspace(0.01, 0.5, 50):
            hb = higher_order_bounds(space, "large", 2000, b=float(b))
            if not hb.asymptotically_ordered() or hb.r_lower > hb.r_upper:
                unordered.append((space, "large", b))

    # finite-n converse: no code beats the covering bound
    n = 2000
    covering_bad = 0
    for a in (0.5, 1.0, 2.0, 4.0):
        for delta in (0.3, 0.6, 1.0):
            params = RegimeParams.small(a, delta)
            got = achieved_higher_order("tau", n, params)
            covering_bad += covering_lower_bound("tau", n, params.target("tau", n), "small") > got

    band_bad = []
    slack_unit = math.log2(n)
    for space in ("tau", "invl1"):
        for b in (0.02, 0.05, 0.1, 0.2, 0.25, 0.4, 0.5):
            hb = higher_order_bounds(space, "large", n, b=b)
            got = achieved_higher_order(space, n, RegimeParams.large(b))
            slack = (math.ceil(1 / (2 * b)) + 1) * slack_unit
            if not hb.r_lower - slack <= got <= hb.r_upper + slack:
                band_bad.append((space, b, got, hb.r_lower, hb.r_upper))
    ok = not unordered and covering_bad == 0 and not band_bad
    criterion(12, "higher-order bounds ordered; large-regime codes inside the band", ok,
              f"unordered={len(unordered)} finite-n leading-order crossings "
              f"at n=2000 (reported only)={finite_crossings} covering violations={covering_bad} "
              f"outside band={band_bad}")
    assert ok
