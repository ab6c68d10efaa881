"""Command-line front end.

Subcommands: ``count`` (one pass over files or stdin), ``merge``,
``inspect`` and ``simulate``.  Exit codes: 0 success, 1 failed check,
2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import BinaryIO, Iterator, Sequence

from . import __version__
from ._backend import BACKEND
from .estimators import XI1, XI2, XI3, XI_HAT, estimate, parse_estimator_id
from .simharness import (
    CSV_COLUMNS,
    EXACT,
    INDEPENDENT,
    ModelSpec,
    coverage_probability,
    ks_critical_1pct,
    limit_law_ks,
    model_entries,
    mse_dominance,
    trial_stats,
)
from .estimators import estimate_batch
from .sketch import ConfigMismatchError, Sketch, SketchConfig, SketchFormatError, deserialize, serialize

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

_BATCH = 1 << 16
ALL_ESTIMATORS = (XI_HAT, XI3, XI1, XI2)


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value) or value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _estimator(text: str) -> str:
    try:
        parse_estimator_id(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2, matching EXIT_USAGE
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmvcount", description="Distinct-element counting with a bucketed k-minimum-values sketch.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sketch_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--k", type=_positive_int, default=None, help="minima kept per bucket (default 8)")
        p.add_argument("--m", type=_positive_int, default=None, help="number of buckets (default 128)")
        p.add_argument("--seed", type=_seed, default=None, help="hash seed (default 0)")

    def out_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", choices=("text", "json", "csv"), default="text")

    p = sub.add_parser("count", help="estimate the number of distinct tokens in files or stdin")
    p.add_argument("paths", nargs="*", help="input files; stdin when omitted or '-'")
    sketch_flags(p)
    p.add_argument("--estimator", type=_estimator, default="xi-hat", help="xi-hat | xi3 | moment:ALPHA")
    p.add_argument("--all-estimators", action="store_true", help="also report xi3, moment:-1 and moment:0.5")
    p.add_argument("--tokens", choices=("line", "word"), default="line")
    out_flag(p)
    p.add_argument("--sketch-in", type=Path, help="resume from a saved sketch")
    p.add_argument("--sketch-out", type=Path, help="write the final sketch here")

    p = sub.add_parser("merge", help="merge sketch files built with identical parameters")
    p.add_argument("sketches", nargs="+", type=Path)
    p.add_argument("--sketch-out", type=Path, required=True)
    p.add_argument("--estimator", type=_estimator, default="xi-hat")
    out_flag(p)

    p = sub.add_parser("inspect", help="print a sketch file's parameters and estimate")
    p.add_argument("sketch", type=Path)
    p.add_argument("--estimator", type=_estimator, default="xi-hat")
    out_flag(p)

    p = sub.add_parser("simulate", help="Monte-Carlo experiments on the estimators")
    p.add_argument("--model", choices=(INDEPENDENT, EXACT), default=INDEPENDENT)
    p.add_argument("--theta", type=_positive_int, default=10**6)
    p.add_argument("--k", type=_positive_int, default=3)
    p.add_argument("--m", type=_positive_int, default=64)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--rng-seed", type=_seed, default=0)
    p.add_argument(
        "--estimator",
        type=_estimator,
        action="append",
        help="estimator(s) to evaluate; repeatable (default: xi-hat)",
    )
    p.add_argument("--check", default="", help="comma list of mean, variance, dominance")
    p.add_argument("--coverage", action="store_true", help="coverage probability against its bound (exact model)")
    p.add_argument("--ks", action="store_true", help="KS test of the scaled k-th minima against Gamma(k, 1)")
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    return parser


# -- helpers -----------------------------------------------------------------


def _open_inputs(paths: Sequence[str]) -> Iterator[BinaryIO]:
    if not paths:
        paths = ["-"]
    for path in paths:
        if path == "-":
            yield sys.stdin.buffer
        else:
            try:
                fh = open(path, "rb")
            except OSError as exc:
                raise UsageError(f"cannot read {path}: {exc.strerror}") from None
            with fh:
                yield fh


def iter_tokens(stream: BinaryIO, mode: str) -> Iterator[bytes]:
    """Yield tokens lazily: whole lines (without the line ending) or whitespace-split words."""
    for line in stream:
        if line.endswith(b"\n"):
            line = line[:-1]
            if line.endswith(b"\r"):
                line = line[:-1]
        if mode == "line":
            yield line
        else:
            yield from line.split()


def _feed(sk: Sketch, tokens: Iterator[bytes]) -> None:
    batch: list[bytes] = []
    for tok in tokens:
        batch.append(tok)
        if len(batch) >= _BATCH:
            sk.insert_many(batch)
            batch.clear()
    if batch:
        sk.insert_many(batch)


def _read_sketch(path: Path) -> Sketch:
    try:
        return deserialize(path.read_bytes())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except SketchFormatError as exc:
        raise UsageError(f"{path}: malformed sketch: {exc}") from None


def _write_sketch(path: Path, sk: Sketch) -> None:
    try:
        path.write_bytes(serialize(sk))
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _report(sk: Sketch, estimators: Sequence[str]) -> dict:
    kv = sk.kth_values()
    c = sk.config
    results = {}
    for name in estimators:
        try:
            est = estimate(kv, name)
            results[est.estimator_id] = est.value
        except ValueError as exc:
            results[parse_estimator_id(name)[0]] = None
            print(f"kmvcount: {name}: {exc}", file=sys.stderr)
    return {
        "estimator": parse_estimator_id(estimators[0])[0],
        "estimate": results[parse_estimator_id(estimators[0])[0]],
        "estimates": results,
        "k": c.k,
        "m": c.m,
        "seed": c.seed,
        "hash_id": c.hash_id,
        "items_seen": sk.items_seen,
        "stored": sk.stored,
    }


def _emit_report(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        json.dump(report, out, sort_keys=True)
        out.write("\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["estimator", "estimate", "k", "m", "seed", "items_seen"])
        for name, value in report["estimates"].items():
            w.writerow([name, repr(value), report["k"], report["m"], report["seed"], report["items_seen"]])
    else:
        out.write(f"estimate: {report['estimate']!r}\n")
        out.write(f"estimator: {report['estimator']}\n")
        for name, value in report["estimates"].items():
            if name != report["estimator"]:
                out.write(f"  {name}: {value!r}\n")
        out.write(f"k: {report['k']}\nm: {report['m']}\nseed: {report['seed']}\n")
        out.write(f"items_seen: {report['items_seen']}\nstored: {report['stored']}\n")


# -- commands ----------------------------------------------------------------


def cmd_count(args, out) -> int:
    if args.sketch_in is not None:
        sk = _read_sketch(args.sketch_in)
        c = sk.config
        for flag, have in (("k", c.k), ("m", c.m), ("seed", c.seed)):
            want = getattr(args, flag)
            if want is not None and want != have:
                raise UsageError(f"--{flag} {want} does not match {args.sketch_in} ({flag}={have})")
    else:
        try:
            config = SketchConfig(
                k=8 if args.k is None else args.k,
                m=128 if args.m is None else args.m,
                seed=0 if args.seed is None else args.seed,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        sk = Sketch(config)
    for stream in _open_inputs(args.paths):
        _feed(sk, iter_tokens(stream, args.tokens))
    names = [args.estimator]
    if args.all_estimators:
        names += [e for e in ALL_ESTIMATORS if e != parse_estimator_id(args.estimator)[0]]
    _emit_report(_report(sk, names), args.out, out)
    if args.sketch_out is not None:
        _write_sketch(args.sketch_out, sk)
    return EXIT_OK


def cmd_merge(args, out) -> int:
    if len(args.sketches) < 2:
        raise UsageError("merge needs at least two sketch files")
    merged = _read_sketch(args.sketches[0])
    for path in args.sketches[1:]:
        try:
            merged = merged.merge(_read_sketch(path))
        except ConfigMismatchError as exc:
            raise UsageError(f"{path}: {exc}") from None
    _write_sketch(args.sketch_out, merged)
    _emit_report(_report(merged, [args.estimator]), args.out, out)
    return EXIT_OK


def cmd_inspect(args, out) -> int:
    sk = _read_sketch(args.sketch)
    report = _report(sk, [args.estimator])
    report["bucket_counts"] = [int(c) for c in sk.bucket_counts]
    report["covered"] = sk.is_covered()
    if args.out == "text":
        _emit_report(report, "text", out)
        full = sum(c == sk.config.k for c in report["bucket_counts"])
        out.write(f"full_buckets: {full}/{sk.config.m}\n")
    else:
        _emit_report(report, args.out, out)
    return EXIT_OK


_CHECKS = ("mean", "variance", "dominance")


def cmd_simulate(args, out) -> int:
    checks = [c.strip() for c in args.check.split(",") if c.strip()]
    for c in checks:
        if c not in _CHECKS:
            raise UsageError(f"unknown check {c!r}; choose from {', '.join(_CHECKS)}")
    try:
        spec = ModelSpec(args.model, args.theta, args.k, args.m, args.trials, args.rng_seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if (args.coverage or args.ks) and spec.model != EXACT:
        raise UsageError("--coverage and --ks need --model exact")
    names = args.estimator or ["xi-hat"]
    if "dominance" in checks and parse_estimator_id(names[0])[0] == XI_HAT and len(names) == 1:
        names = [XI_HAT, XI3, XI1, XI2]
    ids = [parse_estimator_id(n)[0] for n in names]

    results: list[dict] = []
    summary: dict = {"checks": {}}
    rows = []
    if checks or not (args.coverage or args.ks):
        entries = model_entries(spec)
        stats = {}
        for name, eid in zip(names, ids):
            try:
                stats[eid] = trial_stats(estimate_batch(entries, spec.k, name), spec, name)
            except ValueError as exc:
                raise UsageError(f"{name}: {exc}") from None
            rows.append(stats[eid].csv_row())
        var_band = 0.1 if spec.model == INDEPENDENT else 0.2
        for eid, st in stats.items():
            if "mean" in checks:
                ok = abs(st.sample_mean - st.theta) <= 3 * st.standard_error_of_mean
                summary["checks"][f"mean:{eid}"] = ok
            if "variance" in checks and eid == XI_HAT:
                ok = abs(st.rel_var_ratio - 1.0) <= var_band
                summary["checks"][f"variance:{eid}"] = ok
        if "dominance" in checks:
            best = ids[0]
            for eid in ids[1:]:
                gap, se = mse_dominance(entries, spec, best, eid)
                summary["checks"][f"dominance:{best}<{eid}"] = gap >= 3 * se
    if args.coverage:
        rep = coverage_probability(spec)
        summary["coverage"] = {"empirical_p": rep.empirical_p, "bound": rep.bound, "trials": rep.trials}
        summary["checks"]["coverage"] = rep.satisfied()
    if args.ks:
        d = limit_law_ks(spec.theta, spec.k, spec.m, spec.trials, spec.rng_seed)
        crit = ks_critical_1pct(spec.m * spec.trials)
        summary["ks"] = {"statistic": d, "critical_1pct": crit, "n": spec.m * spec.trials}
        summary["checks"]["ks"] = d <= crit
    summary["passed"] = all(summary["checks"].values())
    summary["rows"] = rows

    if args.out == "json":
        json.dump(summary, out, sort_keys=True)
        out.write("\n")
    else:
        w = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        for name, ok in summary["checks"].items():
            print(f"check {name}: {'PASS' if ok else 'FAIL'}", file=sys.stderr)
        if "coverage" in summary:
            print(f"coverage: {summary['coverage']}", file=sys.stderr)
        if "ks" in summary:
            print(f"ks: {summary['ks']}", file=sys.stderr)
    return EXIT_OK if summary["passed"] else EXIT_CHECK_FAILED


_COMMANDS = {"count": cmd_count, "merge": cmd_merge, "inspect": cmd_inspect, "simulate": cmd_simulate}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"kmvcount: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
