"""Rate-distortion calculators and Monte Carlo experiments.

Rates are log codebook size divided by log n!. All logs are base 2 unless a
``base`` argument says otherwise.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import geometry
from .mallows import MallowsModel, sample_rim
from .metrics import canonical_space, distance_batch
from .perm_core import (
    inverse_batch,
    task_rng,
    to_inversion_vector,
    to_inversion_vectors,
)
from .quantizers import (
    RegimeParams,
    ScalarQuantizerSpec,
    encode,
    guaranteed_distortion,
    schedule,
)

SCHEMA_VERSION = 1
CHUNK = 10_000  # rows per random stream in the large Monte Carlo loops
MAX_CELLS = 200_000_000  # trials * n ceiling for run_experiment


def log_factorial(n: int, base: float = 2.0) -> float:
    return math.lgamma(n + 1) / math.log(base)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PERMRD_THREADS", "1")))
    except ValueError:
        return 1


# limit rates

@dataclass(frozen=True)
class RateResult:
    """Limit rate R for a distortion level, with the exponent it was read from.

    ``delta`` is inferred from one (n, D) pair, so it is a diagnostic reading
    of the asymptotic law, not a parameter. ``r_lower``/``r_upper`` carry
    higher-order bounds when the caller attaches them.
    """

    R: float
    delta: float | None
    diagnostic: bool = True
    r_lower: float | None = None
    r_upper: float | None = None


def rate_function(space: str, n: int, D: float) -> RateResult:
    """R = 1 - delta with delta read off D = n^(1+delta) (D = n^delta for linf)."""
    space = canonical_space(space)
    if D < 0:
        raise ValueError("distortion must be non-negative")
    if n < 2:
        raise ValueError("n must be >= 2")
    if D <= 1:
        return RateResult(1.0, None if D == 0 else math.log(max(D, 1e-300)) / math.log(n))
    delta = math.log(D) / math.log(n)
    if space != "linf":
        delta -= 1
    return RateResult(min(1.0, max(0.0, 1 - delta)), delta)


# higher-order terms

@dataclass(frozen=True)
class Term:
    """coef * n^power * (log n)^log_power, for ordering asymptotic growth."""

    coef: float
    power: float
    log_power: int = 0

    def value(self, n: int, base: float = 2.0) -> float:
        return self.coef * n ** self.power * math.log(n) ** self.log_power / math.log(base)

    def key(self):
        # sign first, then growth rate, then coefficient
        if self.coef == 0:
            return (0, 0.0, 0, 0.0)
        s = 1 if self.coef > 0 else -1
        return (s, s * self.power, s * self.log_power, self.coef)


@dataclass(frozen=True)
class HigherOrderBounds:
    """Leading terms of the lower and upper bounds on r(D_n).

    ``remainder_lower``/``remainder_upper`` name the dropped terms; values are
    leading order only and are not guaranteed at finite n.
    """

    space: str
    regime: str
    n: int
    r_lower: float
    r_upper: float
    lower_term: Term
    upper_term: Term
    remainder_lower: str
    remainder_upper: str
    leading_order: bool = True

    def asymptotically_ordered(self) -> bool:
        """True when the lower leading term grows no faster than the upper one."""
        return self.lower_term.key() <= self.upper_term.key()


def _ln(x: float) -> float:
    return math.log(x)


def higher_order_terms(space: str, regime: str, *, a=None, delta=None, b=None):
    """(lower, upper, lower remainder, upper remainder) as natural-log Terms."""
    space = canonical_space(space)
    if space not in ("tau", "invl1"):
        raise ValueError("higher-order bounds are stated for tau and invl1 only")
    if regime == "small":
        if a is None or delta is None or not a > 0 or not 0 < delta <= 1:
            raise ValueError("small regime needs a > 0 and 0 < delta <= 1")
        if delta < 1:
            lower = Term(-a * (1 - delta), delta, 1)
            rem_lo = "O(n^delta)"
        else:
            lower = Term(-_ln((1 + a) ** (1 + a) / a ** a), 1.0)
            rem_lo = "o(n)"
        if space == "invl1":
            if delta == 1:
                lower = Term(lower.coef - _ln(2), 1.0)
            else:
                # the extra -n^delta log 2 is below the leading n^delta log n
                rem_lo = "O(n^delta) including -n^delta log 2"
        if space == "tau":
            if a < 1:
                upper = Term(-a * _ln(2) / 2, delta)
            else:
                m = math.floor(2 * a)
                upper = Term(-math.lgamma(m + 1) / m, delta)
            rem_up = "O(1)"
        else:
            if a > 1:
                # floor(n^delta) log(2a - 1)
                upper = Term(-_ln(2 * a - 1), delta)
                rem_up = "O(1) from floor(n^delta)"
            else:
                upper = Term(-a * _ln(3), delta)
                rem_up = "O(1) from ceil(a n^delta)"
        return lower, upper, rem_lo, rem_up
    if regime == "large":
        if b is None or not 0 < b <= 0.5:
            raise ValueError("large regime needs 0 < b <= 1/2")
        lower = Term(max(0.0, _ln(1 / (2 * b * math.e ** 2))), 1.0)
        if space == "tau":
            upper = Term(_ln(math.ceil(1 / (2 * b))), 1.0)
            rem_up = "O(log n)"
        else:
            upper = Term(_ln(math.ceil(1 / (4 * b))), 1.0)
            rem_up = "O(1)"
        return lower, upper, "none", rem_up
    raise ValueError(f"no higher-order bounds for regime {regime!r}")


def higher_order_bounds(space: str, regime: str, n: int, *, a=None, delta=None, b=None,
                        base: float = 2.0) -> HigherOrderBounds:
    """Leading-order lower and upper bounds on r(D_n) = log A(n, D_n) - log n! * R."""
    space = canonical_space(space)
    lower, upper, rem_lo, rem_up = higher_order_terms(space, regime, a=a, delta=delta, b=b)
    r_lo, r_up = lower.value(n, base), upper.value(n, base)
    if regime == "small" and space == "invl1" and delta < 1:
        r_lo -= n ** delta * math.log(2) / math.log(base)
    if regime == "small" and space == "invl1" and a > 1:
        r_up = -math.floor(n ** delta) * math.log(2 * a - 1) / math.log(base)
    elif regime == "small" and space == "invl1":
        r_up = -math.ceil(a * n ** delta) * math.log(3) / math.log(base)
    return HigherOrderBounds(space, regime, n, r_lo, r_up, lower, upper, rem_lo, rem_up)


def achieved_higher_order(space: str, n: int, params: RegimeParams, base: float = 2.0) -> float:
    """r of the scheduled code: log|C| minus log n! times the limit rate."""
    code = schedule(space, n, params)
    limit = {"small": 1.0, "large": 0.0}.get(params.regime)
    if limit is None:
        raise ValueError("higher-order terms are defined for the small and large regimes")
    return code.log_codebook_size(base) - limit * log_factorial(n, base)


def covering_lower_bound(space: str, n: int, D: float, regime: str, base: float = 2.0) -> float:
    """Finite-n converse on r: log(n!/N(D)) - R log n!, with N(D) the largest ball.

    Every code of worst-case distortion D needs |C| * N(D) >= n!.
    """
    space = canonical_space(space)
    limit = {"small": 1.0, "large": 0.0}[regime]
    radius = int(math.floor(D))
    if space == "tau":
        log_ball = geometry.log_cumulative_T(n, radius, base)
    elif space == "invl1":
        log_ball = math.log(geometry.max_invl1_ball_size(n, radius)) / math.log(base)
    else:
        raise ValueError("covering bound implemented for tau and invl1")
    return log_factorial(n, base) - log_ball - limit * log_factorial(n, base)


# moments of distances to a uniform permutation

@dataclass(frozen=True)
class MomentReference:
    """Reference mean and variance; each kind is exact, lower, upper or leading."""

    metric: str
    n: int
    mean: Fraction | float | None
    mean_kind: str
    variance: Fraction | float | None
    variance_kind: str


def moment_reference(metric: str, n: int) -> MomentReference:
    metric = canonical_space(metric)
    if n < 2:
        raise ValueError("n must be >= 2")
    if metric == "tau":
        return MomentReference(metric, n, Fraction(n * (n - 1), 4), "exact",
                               Fraction(n * (2 * n + 5) * (n - 1), 72), "exact")
    if metric == "l1":
        return MomentReference(metric, n, Fraction(n * n - 1, 3), "exact",
                               Fraction(2 * n ** 3, 45), "leading")
    if metric == "invl1":
        return MomentReference(metric, n, Fraction(n * (n - 1), 8), "lower",
                               Fraction((n + 1) * (n + 2) * (2 * n + 3), 6), "upper")
    return MomentReference(metric, n, Fraction(n), "upper", None, "unknown")


def invl1_mean_exact(center: Sequence[int]) -> Fraction:
    """Exact mean inversion-l1 distance from ``center`` to a uniform permutation."""
    total = Fraction(0)
    for i, a in enumerate(to_inversion_vector(center), 1):
        m1, m2 = min(i - a, a), max(i - a, a)
        total += Fraction(m1 * m1 + m2 * m2 + i, 2 * (i + 1))
    return total


def _uniform_chunk(n: int, rows: int, seed: int, *key: int) -> np.ndarray:
    rng = task_rng(seed, *key)
    return rng.permuted(np.tile(np.arange(1, n + 1, dtype=np.int64), (rows, 1)), axis=1)


def _chunks(total: int, size: int = CHUNK):
    for idx, start in enumerate(range(0, total, size)):
        yield idx, min(size, total - start)


def moment_monte_carlo(metric: str, n: int, trials: int, seed: int = 0, center=None):
    """Sample mean and variance of d(center, sigma) over uniform sigma.

    Draws come in chunks of CHUNK rows, chunk c using stream (seed, n, c).
    """
    metric = canonical_space(metric)
    c = np.arange(1, n + 1)[None, :] if center is None else np.asarray(center)[None, :]
    values = []
    for idx, rows in _chunks(trials):
        sig = _uniform_chunk(n, rows, seed, n, idx)
        values.append(distance_batch(metric, sig, c))
    v = np.concatenate(values).astype(np.float64)
    return float(v.mean()), float(v.var(ddof=1))


# relationships between metrics

@dataclass(frozen=True)
class RelationshipReport:
    n: int
    samples: int
    chain_violations: int
    linf_failures: int  # c1 * n * linf > footrule
    tau_failures: int  # c2 * tau > inversion-l1
    c1: Fraction
    c2: Fraction

    @property
    def linf_rate(self) -> float:
        return self.linf_failures / self.samples

    @property
    def tau_rate(self) -> float:
        return self.tau_failures / self.samples


def relationship_tests(n: int, samples: int, seed: int = 0, c1=Fraction(3, 10),
                       c2=Fraction(9, 20)) -> RelationshipReport:
    """Check the deterministic inequality chain and count probabilistic failures.

    A center pi is drawn once from stream (seed, n); sigma is uniform, in
    chunks with streams (seed, n, c + 1). Comparisons are exact integer
    arithmetic on the rational constants.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    c1, c2 = Fraction(c1), Fraction(c2)
    center = task_rng(seed, n).permutation(n)[None, :] + 1
    center_inv = inverse_batch(center)
    chain = lf = tf = 0
    for idx, rows in _chunks(samples):
        sig = _uniform_chunk(n, rows, seed, n, idx + 1)
        l1 = distance_batch("l1", center, sig)
        linf = distance_batch("linf", center, sig)
        tau = distance_batch("tau", center, sig)
        tau_inv = distance_batch("tau", inverse_batch(sig), center_inv)
        x = to_inversion_vectors(sig)
        invl1 = np.abs(x - to_inversion_vectors(center)).sum(axis=1)
        bad = (n * linf < l1) | (l1 < tau_inv) | (2 * tau_inv < l1)
        bad |= ((n - 1) * invl1 < tau) | (invl1 > tau)
        chain += int(bad.sum())
        lf += int((c1.numerator * n * linf > c1.denominator * l1).sum())
        tf += int((c2.numerator * tau > c2.denominator * invl1).sum())
    return RelationshipReport(n, samples, chain, lf, tf, c1, c2)


def relationship_sweep(ns: Iterable[int], samples: int, seed: int = 0, c1=Fraction(3, 10),
                       c2=Fraction(9, 20)) -> list[RelationshipReport]:
    return [relationship_tests(n, samples, seed, c1, c2) for n in ns]


def failure_scaling_ok(reports: Sequence[RelationshipReport], attr: str) -> bool:
    """Rates never increase along the sweep and stay below 10/n."""
    rates = [getattr(r, attr) for r in reports]
    below = all(rate < 10 / r.n for rate, r in zip(rates, reports))
    return below and all(b <= a for a, b in zip(rates, rates[1:]))


# experiments

CSV_COLUMNS = (
    "schema_version", "space", "scheme", "n", "delta", "a", "b", "target_d",
    "log2_codebook", "worst_d", "mean_d", "trials", "seed",
    "regime", "mode", "bound_d", "rate", "source", "q",
)


@dataclass(frozen=True)
class ExperimentRecord:
    """One experiment: scheduled code, analytic bound and observed distortions.

    ``worst_d`` is the largest distortion seen over the sampled trials, not
    the true maximum; ``bound_d`` is the code's analytic guarantee.
    """

    space: str
    scheme: str
    n: int
    delta: float | None
    a: float | None
    b: float | None
    target_d: float
    log2_codebook: float
    worst_d: int
    mean_d: float
    trials: int
    seed: int
    regime: str
    mode: str
    bound_d: float
    rate: float
    source: str = "uniform"
    q: float | None = None
    schema_version: int = SCHEMA_VERSION

    def row(self) -> dict:
        d = asdict(self)
        return {k: ("" if d[k] is None else d[k]) for k in CSV_COLUMNS}


def _trial_block(n: int, start: int, stop: int, seed: int, model: MallowsModel | None):
    rows = []
    for t in range(start, stop):
        rng = task_rng(seed, t)
        if model is None:
            rows.append(rng.permutation(n) + 1)
        else:
            rows.append(sample_rim(model, rng, 1)[0])
    return np.asarray(rows, dtype=np.int64)


def run_experiment(space: str, n: int, params: RegimeParams, trials: int = 10_000,
                   seed: int = 0, mode: str = "worst", target: float | None = None,
                   source: str = "uniform", q: float | None = None,
                   threads: int | None = None, code=None) -> ExperimentRecord:
    """Encode ``trials`` random permutations with the scheduled code.

    Trial t draws from stream (seed, t), so results do not depend on thread
    count or block size. ``source`` is "uniform" or "mallows" (with ``q``,
    centred on the identity). ``code`` overrides the schedule.
    """
    space = canonical_space(space)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if trials * n > MAX_CELLS:
        raise ValueError(f"trials * n = {trials * n} exceeds the limit {MAX_CELLS}")
    model = None
    if source == "mallows":
        if q is None:
            raise ValueError("a Mallows source needs q")
        model = MallowsModel.centered(n, q)
    elif source != "uniform":
        raise ValueError(f"unknown source {source!r}")
    d_target = params.target(space, n) if target is None else float(target)
    if code is None:
        code = schedule(space, n, params, mode, target)
    scheme = "scalar" if isinstance(code, ScalarQuantizerSpec) else (
        "block-sort" if space == "tau" else "block-sort-inverse")

    threads = default_threads() if threads is None else max(1, threads)
    step = 2_000
    bounds = [(s, min(s + step, trials)) for s in range(0, trials, step)]

    def work(span):
        perms = _trial_block(n, span[0], span[1], seed, model)
        return distance_batch(space, perms, encode(code, space, perms))

    if threads == 1:
        parts = [work(span) for span in bounds]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, bounds))
    dist = np.concatenate(parts)
    log2c = code.log_codebook_size(2.0)
    return ExperimentRecord(
        space=space, scheme=scheme, n=n, delta=params.delta, a=params.a, b=params.b,
        target_d=d_target, log2_codebook=log2c, worst_d=int(dist.max()),
        mean_d=int(dist.sum()) / trials, trials=trials, seed=seed,
        regime=params.regime, mode=mode, bound_d=float(guaranteed_distortion(code, space, mode)),
        rate=log2c / log_factorial(n), source=source, q=q)


def achieved_rate(space: str, n: int, params: RegimeParams, mode: str = "worst",
                  target: float | None = None) -> float:
    """log|C| / log n! of the scheduled code (no sampling needed)."""
    code = schedule(space, n, params, mode, target)
    return code.log_codebook_size(2.0) / log_factorial(n)


def rd_curve(space: str, n: int, deltas: Iterable[float], mode: str = "worst") -> list[dict]:
    """Limit rate and scheduled-code rate for each delta in the moderate regime."""
    rows = []
    for delta in deltas:
        params = RegimeParams.moderate(delta)
        d = params.target(space, n)
        try:
            code = schedule(space, n, params, mode)
            rate = code.log_codebook_size(2.0) / log_factorial(n)
            bound = float(guaranteed_distortion(code, space, mode))
        except ValueError:
            rate = bound = float("nan")
        rows.append({"schema_version": SCHEMA_VERSION, "space": canonical_space(space),
                     "n": n, "delta": delta, "target_d": d,
                     "limit_rate": rate_function(space, n, d).R,
                     "code_rate": rate, "bound_d": bound, "mode": mode})
    return rows


def write_csv(rows: Iterable[dict], stream, columns: Sequence[str] | None = None) -> None:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    writer = csv.DictWriter(stream, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)


def write_records_csv(records: Iterable[ExperimentRecord], stream) -> None:
    write_csv((r.row() for r in records), stream, CSV_COLUMNS)


# sweep configuration

_RUN_KEYS = {"space", "n", "regime", "a", "delta", "b", "trials", "seed", "mode", "target",
             "source", "q"}


def load_sweep(config) -> list[dict]:
    """Expand a sweep config into a list of run settings.

    ``config`` is a path or a dict with optional ``defaults`` (shared
    settings), ``runs`` (explicit settings) and ``grid`` (lists whose
    Cartesian product is added). Keys: space, n, regime, a, delta, b, trials,
    seed, mode, target, source, q.
    """
    if not isinstance(config, dict):
        config = json.loads(Path(config).read_text())
    unknown = set(config) - {"defaults", "runs", "grid"}
    if unknown:
        raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
    defaults = dict(config.get("defaults", {}))
    runs = [dict(defaults, **r) for r in config.get("runs", [])]
    grid = config.get("grid")
    if grid:
        keys = sorted(grid)
        for combo in itertools.product(*(grid[k] for k in keys)):
            runs.append(dict(defaults, **dict(zip(keys, combo))))
    for r in runs:
        bad = set(r) - _RUN_KEYS
        if bad:
            raise ValueError(f"unknown run settings: {sorted(bad)}")
        for need in ("space", "n", "regime"):
            if need not in r:
                raise ValueError(f"run {r} is missing {need!r}")
    return runs


def run_sweep(config, threads: int | None = None) -> list[ExperimentRecord]:
    records = []
    for r in load_sweep(config):
        params = RegimeParams(r["regime"], a=r.get("a"), delta=r.get("delta"), b=r.get("b"))
        records.append(run_experiment(
            r["space"], int(r["n"]), params, trials=int(r.get("trials", 10_000)),
            seed=int(r.get("seed", 0)), mode=r.get("mode", "worst"), target=r.get("target"),
            source=r.get("source", "uniform"), q=r.get("q"), threads=threads))
    return records
