"""Command-line interface: ``permrd <command> ...``.

Permutation files hold one permutation per line as space-separated 1-based
integers; blank lines and text after ``#`` are ignored. Tables are written as
CSV with a leading schema_version column. Output goes to stdout unless
``--out`` is given. Logs are base 2 unless ``--nats`` is passed.
"""
from __future__ import annotations

import argparse
import contextlib
import math
import sys
from typing import Sequence

import numpy as np

from . import geometry, mallows, rd_harness
from .metrics import canonical_space, distance, distance_batch
from .perm_core import (
    PermutationError,
    format_permutation,
    parse_line,
    read_permutations,
    task_rng,
    validate,
)
from .quantizers import RegimeParams, encode, guaranteed_distortion, schedule

SCHEMA_VERSION = rd_harness.SCHEMA_VERSION


class CLIError(Exception):
    pass


def _base(args) -> float:
    return math.e if getattr(args, "nats", False) else 2.0


def _unit(args) -> str:
    return "nats" if getattr(args, "nats", False) else "bits"


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


@contextlib.contextmanager
def _input(path):
    if path is None or path == "-":
        yield sys.stdin
    else:
        try:
            fh = open(path)
        except OSError as exc:
            raise CLIError(f"cannot read {path}: {exc.strerror}") from None
        with fh:
            yield fh


def _perm_arg(text: str):
    return parse_line(text.replace(",", " "))


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# commands

def cmd_dist(args) -> int:
    metric = canonical_space(args.metric)
    with _input(args.input) as fh:
        perms = list(read_permutations(fh))
    if len(perms) % 2:
        raise CLIError(f"expected pairs of permutations, got an odd count ({len(perms)})")
    rows = []
    for i in range(0, len(perms), 2):
        p, q = perms[i], perms[i + 1]
        if len(p) != len(q):
            raise CLIError(f"pair {i // 2 + 1}: sizes {len(p)} and {len(q)} differ")
        rows.append(distance(metric, p, q))
    with _output(args.out) as out:
        if args.format == "csv":
            rd_harness.write_csv(
                ({"schema_version": SCHEMA_VERSION, "pair": k + 1, "metric": metric,
                  "distance": d} for k, d in enumerate(rows)),
                out, ["schema_version", "pair", "metric", "distance"])
        else:
            for d in rows:
                out.write(f"{d}\n")
    return 0


def _regime(args) -> RegimeParams:
    if args.small:
        if args.a is None or args.delta is None:
            raise CLIError("--small needs --a and --delta")
        return RegimeParams.small(args.a, args.delta)
    if args.large:
        if args.b is None:
            raise CLIError("--large needs --b")
        return RegimeParams.large(args.b)
    if args.delta is None:
        raise CLIError("--moderate needs --delta")
    return RegimeParams.moderate(args.delta)


def cmd_quantize(args) -> int:
    space = canonical_space(args.space)
    params = _regime(args)
    if args.input is None and args.n is None:
        raise CLIError("give --n (random input) or --input FILE")
    if args.input is not None:
        with _input(args.input) as fh:
            perms = list(read_permutations(fh))
        if not perms:
            raise CLIError("input holds no permutations")
        n = len(perms[0])
        for k, p in enumerate(perms, 1):
            if len(p) != n:
                raise CLIError(f"permutation {k} has size {len(p)}, expected {n}")
        arr = np.asarray(perms, dtype=np.int64)
    else:
        n = args.n
        rng = task_rng(args.seed, 0)
        arr = np.stack([rng.permutation(n) + 1 for _ in range(args.count)])
    code = schedule(space, n, params, args.mode, args.target)
    coded = encode(code, space, arr)
    dist = distance_batch(space, arr, coded)
    base = _base(args)
    with _output(args.out) as out:
        for row in coded:
            out.write(format_permutation(row) + "\n")
        params_txt = " ".join(f"{k}={getattr(code, k)}" for k in ("k", "m") if hasattr(code, k))
        out.write(
            f"# space={space} regime={params.regime} mode={args.mode} n={n} "
            f"{params_txt + ' ' if params_txt else ''}"
            f"log_codebook={code.log_codebook_size(base):.6f} {_unit(args)} "
            f"bound={float(guaranteed_distortion(code, space, args.mode)):g} "
            f"target={params.target(space, n) if args.target is None else args.target:g} "
            f"observed_max={int(dist.max())} observed_mean={dist.mean():.6g}\n")
    return 0


def cmd_mallows(args) -> int:
    base = _base(args)
    if args.action == "entropy":
        if args.n is None:
            raise CLIError("entropy needs --n")
        res = mallows.entropy(args.n, args.q, base)
        with _output(args.out) as out:
            rd_harness.write_csv([{
                "schema_version": SCHEMA_VERSION, "n": res.n, "q": res.q,
                "unit": _unit(args), "total": repr(res.total),
                "linear_coefficient": repr(res.linear_coefficient),
                "remainder": repr(res.remainder)}], out)
        return 0
    reference = _perm_arg(args.reference) if args.reference else None
    if args.action == "pmf":
        if not args.perm:
            raise CLIError("pmf needs --perm")
        sigma = _perm_arg(args.perm)
        if reference is None:
            reference = validate(range(1, len(sigma) + 1))
        model = mallows.MallowsModel(args.q, reference)
        if len(sigma) != model.n:
            raise CLIError("--perm and --reference sizes differ")
        with _output(args.out) as out:
            out.write(f"{model.pmf(sigma)!r}\n")
        return 0
    if reference is None:
        if args.n is None:
            raise CLIError("sample needs --n or --reference")
        reference = validate(range(1, args.n + 1))
    model = mallows.MallowsModel(args.q, reference)
    rng = task_rng(args.seed, 0)
    samples = mallows.sample_rim(model, rng, args.count)
    with _output(args.out) as out:
        for row in samples:
            out.write(format_permutation(row) + "\n")
    return 0


def cmd_rdcurve(args) -> int:
    deltas = args.deltas or [round(0.1 * i, 10) for i in range(1, 10)]
    rows = rd_harness.rd_curve(args.space, args.n, deltas, args.mode)
    with _output(args.out) as out:
        rd_harness.write_csv(rows, out)
    return 0


def cmd_ballsize(args) -> int:
    metric = canonical_space(args.metric)
    n = args.n
    top = geometry.max_inversions(n) if args.dmax is None else args.dmax
    center = _perm_arg(args.center) if args.center else None
    if metric in ("l1", "linf") and n > geometry.ENUMERATION_LIMIT:
        raise CLIError(f"{metric} balls are counted by enumeration, n <= "
                       f"{geometry.ENUMERATION_LIMIT}")
    rows = []
    for D in range(args.dmin, top + 1):
        if metric == "tau":
            size = geometry.cumulative_T(n, min(D, geometry.max_inversions(n)))
            bound = geometry.kendall_ball_bound(n, D) if D <= n else ""
        elif metric == "invl1":
            c = center if center is not None else geometry.widest_invl1_center(n)
            size = geometry.invl1_ball_size(c, D)
            bound = geometry.invl1_ball_bound(n, min(D, geometry.max_inversions(n)))
        else:
            c = center if center is not None else validate(range(1, n + 1))
            size = geometry.ball_brute(metric, c, D)
            bound = ""
        rows.append({"schema_version": SCHEMA_VERSION, "metric": metric, "n": n, "D": D,
                     "size": size, "bound": bound})
    with _output(args.out) as out:
        rd_harness.write_csv(rows, out, ["schema_version", "metric", "n", "D", "size", "bound"])
    return 0


def cmd_moments(args) -> int:
    metric = canonical_space(args.metric)
    mean, var = rd_harness.moment_monte_carlo(metric, args.n, args.trials, args.seed)
    ref = rd_harness.moment_reference(metric, args.n)
    row = {"schema_version": SCHEMA_VERSION, "metric": metric, "n": args.n,
           "trials": args.trials, "seed": args.seed, "mean": repr(mean), "variance": repr(var),
           "ref_mean": "" if ref.mean is None else float(ref.mean), "ref_mean_kind": ref.mean_kind,
           "ref_variance": "" if ref.variance is None else float(ref.variance),
           "ref_variance_kind": ref.variance_kind}
    with _output(args.out) as out:
        rd_harness.write_csv([row], out)
    return 0


def cmd_experiment(args) -> int:
    try:
        runs = rd_harness.load_sweep(args.config)
    except (OSError, ValueError) as exc:
        raise CLIError(f"bad config {args.config}: {exc}") from None
    records = rd_harness.run_sweep({"runs": runs}, threads=args.threads)
    with _output(args.out) as out:
        rd_harness.write_records_csv(records, out)
    return 0


def cmd_relations(args) -> int:
    reports = rd_harness.relationship_sweep(args.ns, args.samples, args.seed)
    rows = [{"schema_version": SCHEMA_VERSION, "n": r.n, "samples": r.samples,
             "chain_violations": r.chain_violations, "linf_failure_rate": r.linf_rate,
             "tau_failure_rate": r.tau_rate, "ten_over_n": 10 / r.n} for r in reports]
    with _output(args.out) as out:
        rd_harness.write_csv(rows, out)
    return 0


# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permrd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, nats=False):
        p.add_argument("--out", help="write output to this file instead of stdout")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if nats:
            p.add_argument("--nats", action="store_true", help="natural-log units")

    p = sub.add_parser("dist", help="distance between consecutive pairs of permutations")
    p.add_argument("--metric", required=True, help="tau, l1 (footrule), linf, invl1")
    p.add_argument("--input", help="permutation file (default stdin)")
    p.add_argument("--format", choices=("plain", "csv"), default="plain")
    common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("quantize", help="encode permutations with a scheduled code")
    p.add_argument("--space", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--small", action="store_true")
    g.add_argument("--moderate", action="store_true")
    g.add_argument("--large", action="store_true")
    p.add_argument("--a", type=_positive_float)
    p.add_argument("--delta", type=_positive_float)
    p.add_argument("--b", type=_positive_float)
    p.add_argument("--target", type=float, help="override the regime's distortion target")
    p.add_argument("--mode", choices=("worst", "average"), default="worst")
    p.add_argument("--n", type=_positive_int, help="size of random input permutations")
    p.add_argument("--count", type=_positive_int, default=10)
    p.add_argument("--input", help="permutation file instead of random input")
    common(p, seed=True, nats=True)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("mallows", help="Mallows model: sample, entropy, pmf")
    p.add_argument("action", choices=("sample", "entropy", "pmf"))
    p.add_argument("--q", type=_positive_float, required=True)
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--count", type=_positive_int, default=1)
    p.add_argument("--reference", help="reference permutation, e.g. '2 1 3'")
    p.add_argument("--perm", help="permutation whose probability is wanted")
    common(p, seed=True, nats=True)
    p.set_defaults(func=cmd_mallows)

    p = sub.add_parser("rdcurve", help="limit rate and code rate over delta (moderate regime)")
    p.add_argument("--space", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--deltas", type=_float_list, help="comma-separated, default 0.1..0.9")
    p.add_argument("--mode", choices=("worst", "average"), default="worst")
    common(p)
    p.set_defaults(func=cmd_rdcurve)

    p = sub.add_parser("ballsize", help="exact ball sizes and upper bounds")
    p.add_argument("--metric", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--dmin", type=int, default=0)
    p.add_argument("--dmax", type=int)
    p.add_argument("--center", help="ball center (default: identity, or widest for invl1)")
    common(p)
    p.set_defaults(func=cmd_ballsize)

    p = sub.add_parser("moments", help="Monte Carlo mean/variance against references")
    p.add_argument("--metric", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--trials", type=lambda t: _positive_int(str(int(float(t)))), default=10_000)
    common(p, seed=True)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("experiment", help="run a JSON sweep of quantizer experiments")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=_positive_int,
                   help="worker threads (default: PERMRD_THREADS or 1)")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("relations", help="failure rates of the metric relationships")
    p.add_argument("--ns", type=_int_list, default=[50, 100, 200, 400])
    p.add_argument("--samples", type=_positive_int, default=100_000)
    common(p, seed=True)
    p.set_defaults(func=cmd_relations)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, PermutationError, ValueError) as exc:
        print(f"permrd {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
