"""Command-line front door: generate instances, run algorithms, compare
against the exhaustive optimum, and audit the accounting checks.

Subcommands: ``run`` (corpus sweeps with an aggregate CSV), ``gen`` (write
instance files), ``trace`` (human-readable step log of one run), ``verify``
(full check suite on one instance).  All output values are exact rational
strings; ratios additionally get a fixed 6-decimal rounding so the CSV is
bit-identical across repeated runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .algos import ALGORITHMS, build_algorithm
from .analysis import analyze
from .engine import run, trace_to_json
from .errors import MlapdError
from .gen import generate, parse_gen
from .model import (format_rational, instance_to_json, load_instance,
                    save_instance, schedule_cost)
from .oracle import DEFAULT_MAX_REQUESTS, brute_force_opt, opt_to_json


def _decimal6(x: Fraction) -> str:
    scaled = round(x * 10 ** 6)
    return f"{scaled // 10 ** 6}.{scaled % 10 ** 6:06d}"


def _seed_offset() -> int:
    return int(os.environ.get("MLAP_SEED", "0"))


def _sources(args) -> list:
    """(instance_id, source) pairs; source is ('file', path, perturb) or ('spec', GenSpec)."""
    out = []
    for path in args.instance or []:
        out.append((Path(path).stem, ("file", path, getattr(args, "perturb", False))))
    for text in getattr(args, "gen", None) or []:
        for spec in parse_gen(text, seed_offset=_seed_offset()):
            out.append((spec.tag(), ("spec", spec)))
    if not out:
        raise MlapdError("no instances given; use --instance and/or --gen")
    return out


def _materialize(source):
    if source[0] == "file":
        return None, load_instance(source[1], perturb=source[2])
    return source[1], generate(source[1])


def _bound_for(kind, spec, alg: str, depth: int):
    """Proven worst-case ratio for this algorithm on this instance family."""
    if alg == "waterfall":
        return Fraction(depth)
    if alg == "noadd" and kind == "increasing":
        return Fraction(depth)
    if alg == "noadd" and kind == "l_increasing":
        return spec.l_factor / (spec.l_factor - 1)
    if alg == "double" and kind in ("path", "geometric_path"):
        if depth % 2 == 0:
            return Fraction(4) - Fraction(2, 2 ** (depth // 2))
        return Fraction(4) - Fraction(1, 2 ** depth)
    return None


CSV_FIELDS = ("instance", "algorithm", "D", "requests", "alg_cost", "opt_cost",
              "ratio", "ratio_6dp", "bound", "within_bound", "feasible", "verified")


def _run_cell(task):
    """One (instance, algorithm) cell; returns (row, failures, artifacts)."""
    instance_id, source, alg_name, want_opt, want_verify, max_oracle = task
    spec, instance = _materialize(source)
    kind = spec.kind if spec is not None else None
    tree = instance.tree

    row = dict.fromkeys(CSV_FIELDS, "")
    row.update(instance=instance_id, algorithm=alg_name, D=str(tree.depth),
               requests=str(len(instance.requests)))
    failures: list = []
    artifacts: dict = {}

    algorithm = build_algorithm(alg_name, tree)
    trace = run(instance, algorithm)
    alg_cost = schedule_cost(tree, trace.schedule)
    row["alg_cost"] = format_rational(alg_cost)
    row["feasible"] = "yes"  # run() raises otherwise
    artifacts["trace"] = trace_to_json(instance, trace)

    if want_opt and instance.requests:
        opt = brute_force_opt(instance, max_requests=max_oracle)
        ratio = alg_cost / opt.cost
        row["opt_cost"] = format_rational(opt.cost)
        row["ratio"] = format_rational(ratio)
        row["ratio_6dp"] = _decimal6(ratio)
        bound = _bound_for(kind, spec, alg_name, tree.depth)
        if bound is not None:
            row["bound"] = format_rational(bound)
            row["within_bound"] = "yes" if ratio <= bound else "no"
            if ratio > bound:
                failures.append(
                    f"{instance_id}/{alg_name}: ratio {ratio} exceeds proven bound {bound}")
        if want_verify and alg_name == "waterfall":
            report = analyze(instance, trace, opt)
            row["verified"] = "yes" if report.ok else "no"
            artifacts["report"] = report.to_json()
            for check in report.checks:
                for failure in check.failures:
                    failures.append(f"{instance_id}/{alg_name}: {check.name}: {failure}")
        if failures:
            artifacts["opt"] = opt_to_json(instance, opt)

    if failures:
        artifacts["instance"] = instance_to_json(instance)
    return row, failures, artifacts


def cmd_run(args) -> int:
    algs = []
    for chunk in args.alg:
        algs.extend(a for a in chunk.split(",") if a)
    for a in algs:
        if a not in ALGORITHMS:
            raise MlapdError(f"unknown algorithm {a!r}; choose from {sorted(ALGORITHMS)}")
    if args.verify and not args.opt:
        raise MlapdError("--verify needs the optimum; pass --opt as well")

    tasks = [(instance_id, source, alg, args.opt, args.verify, args.max_oracle_requests)
             for instance_id, source in _sources(args)
             for alg in algs]

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=8))
    else:
        results = [_run_cell(t) for t in tasks]

    out_dir = Path(args.out) if args.out else None
    rows, all_failures = [], []
    for (instance_id, _, alg, *_), (row, failures, artifacts) in zip(tasks, results):
        rows.append(row)
        all_failures.extend(failures)
        if out_dir:
            traces = out_dir / "traces"
            traces.mkdir(parents=True, exist_ok=True)
            _dump_json(traces / f"{instance_id}-{alg}.json", artifacts["trace"])
        if failures and out_dir:
            bad = out_dir / "counterexamples"
            bad.mkdir(parents=True, exist_ok=True)
            for name, doc in artifacts.items():
                _dump_json(bad / f"{instance_id}-{alg}.{name}.json", doc)

    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "results.csv", "w", newline="") as fh:
            _write_csv(fh, rows)
    else:
        _write_csv(sys.stdout, rows)

    for failure in all_failures:
        print(f"FAIL {failure}", file=sys.stderr)
    return 1 if all_failures else 0


def _write_csv(fh, rows) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def _dump_json(path: Path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_gen(args) -> int:
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for text in args.gen:
        for spec in parse_gen(text, seed_offset=_seed_offset()):
            instance = generate(spec)
            path = out_dir / f"{spec.tag()}.json"
            save_instance(instance, path)
            _dump_json(out_dir / f"{spec.tag()}.spec.json", spec.to_json())
            print(path)
    return 0


def _format_path(tree, path) -> str:
    return "[" + " ".join(str(tree.label(u)) for u in path) + "]"


def _print_fall(tree, fall) -> None:
    label = tree.label(fall.node)
    print(f"  fall {label} (budget {fall.budget}):")
    for event in fall.events:
        if event[0] == "add":
            _, rid, path, price, left = event
            print(f"    add {_format_path(tree, path)} for request {rid}: "
                  f"price {price}, budget left {left}")
        elif event[0] == "overflow":
            _, rid, path, price, b, before, after = event
            print(f"    request {rid} path {_format_path(tree, path)} "
                  f"price {price} > budget {b}")
            for u, pb, pa in zip(path, before, after):
                print(f"    overflow at {tree.label(u)}: price {pb} -> {pa}")
        elif event[0] == "stop":
            _, rid, path, price = event
            print(f"    budget exhausted before request {rid} "
                  f"(path {_format_path(tree, path)} price {price})")
    if not fall.events:
        print("    nothing to do")


def cmd_trace(args) -> int:
    sources = _sources(args)
    if len(sources) != 1:
        raise MlapdError("trace wants exactly one instance")
    _, instance = _materialize(sources[0][1])
    tree = instance.tree
    algorithm = build_algorithm(args.alg, tree)
    trace = run(instance, algorithm)

    services = trace.diagnostics.get("services", ())
    by_time = {t: falls for t, _, falls in services}
    for rec in trace.records:
        nodes = "{" + " ".join(str(tree.label(v)) for v in sorted(rec.nodes)) + "}"
        print(f"service @ t={rec.time} triggered by request {rec.trigger_id}: "
              f"nodes {nodes}, cost {rec.cost}")
        for fall in by_time.get(rec.time, ()):
            _print_fall(tree, fall)
    rejections = trace.diagnostics.get("rejections", ())
    for t, rid, extended, limit in rejections:
        print(f"rejected extension to request {rid} at t={t}: "
              f"cost {extended} > cap {limit}")
    total = schedule_cost(tree, trace.schedule)
    print(f"total cost {total} over {len(trace.records)} services")
    return 0


def cmd_verify(args) -> int:
    sources = _sources(args)
    if len(sources) != 1:
        raise MlapdError("verify wants exactly one instance")
    _, instance = _materialize(sources[0][1])
    algorithm = build_algorithm("waterfall", instance.tree)
    trace = run(instance, algorithm)
    opt = brute_force_opt(instance, max_requests=args.max_oracle_requests)
    report = analyze(instance, trace, opt)
    for check in report.checks:
        mark = "ok  " if check.ok else "FAIL"
        print(f"[{mark}] {check.name}: {check.checked} checks")
        for failure in check.failures:
            print(f"       {failure}")
    if args.out:
        _dump_json(Path(args.out), report.to_json())
    if instance.requests:
        alg_cost = schedule_cost(instance.tree, trace.schedule)
        print(f"alg {alg_cost}, opt {opt.cost}, ratio {alg_cost / opt.cost} "
              f"(D = {instance.tree.depth})")
    return 0 if report.ok else 1


def _add_source_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", action="append", metavar="FILE",
                   help="instance JSON file (repeatable)")
    p.add_argument("--gen", action="append", metavar="SPEC",
                   help="generator spec kind:key=value:... (repeatable; "
                        "seed accepts a..b ranges)")
    p.add_argument("--perturb", action="store_true",
                   help="break duplicate deadlines in loaded files")
    p.add_argument("--max-oracle-requests", type=int, default=DEFAULT_MAX_REQUESTS,
                   metavar="N", help="refuse the exhaustive optimum beyond N requests")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlapd",
        description="Online multi-level aggregation with deadlines: "
                    "algorithms, exhaustive optimum, and accounting checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run algorithms over instances, emit CSV")
    _add_source_flags(p_run)
    p_run.add_argument("--alg", action="append", required=True,
                       help="algorithm name or comma list (repeatable)")
    p_run.add_argument("--opt", action="store_true",
                       help="compute the exhaustive optimum and ratios")
    p_run.add_argument("--verify", action="store_true",
                       help="run the accounting checks (waterfall cells)")
    p_run.add_argument("--out", metavar="DIR",
                       help="write results.csv and per-cell traces here")
    p_run.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       metavar="N", help="parallel worker processes")
    p_run.set_defaults(fn=cmd_run)

    p_gen = sub.add_parser("gen", help="write generated instances to files")
    p_gen.add_argument("--gen", action="append", required=True, metavar="SPEC")
    p_gen.add_argument("--out", metavar="DIR", help="output directory (default .)")
    p_gen.set_defaults(fn=cmd_gen)

    p_trace = sub.add_parser("trace", help="step-by-step log of one run")
    _add_source_flags(p_trace)
    p_trace.add_argument("--alg", default="waterfall",
                         choices=sorted(ALGORITHMS))
    p_trace.set_defaults(fn=cmd_trace)

    p_verify = sub.add_parser("verify", help="full check suite on one instance")
    _add_source_flags(p_verify)
    p_verify.add_argument("--out", metavar="FILE", help="write the report JSON here")
    p_verify.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except MlapdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
