#!/usr/bin/env python3
"""Time the compiled assignment-search kernel against the pure-Python one.

Both kernels get the identical prepared inputs and must return the identical
(answer, assignment) pair; the point of the benchmark is the speed gap on
growing request counts, where the enumeration is exponential.

    python3 benchmarks/bench_oracle.py --requests 6 8 9 --repeat 3
"""

import argparse
import statistics
import time

from mlapd import GenSpec, generate
from mlapd.oracle import ORACLE_BACKEND, prepare_search_inputs
from mlapd import _opt_fallback

try:
    from mlapd import _opt_core
except ImportError:
    _opt_core = None


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        times.append(time.perf_counter() - t0)
    return result, min(times), statistics.mean(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--requests", type=int, nargs="+", default=[5, 7, 8, 9])
    ap.add_argument("--nodes", type=int, default=12)
    ap.add_argument("--seeds", type=int, default=5, help="instances per size")
    ap.add_argument("--repeat", type=int, default=3, help="timings per instance")
    args = ap.parse_args()

    print(f"active backend: {ORACLE_BACKEND}")
    if _opt_core is None:
        print("compiled kernel not built; timing the fallback only")

    header = f"{'reqs':>5} {'pure (ms)':>12}"
    if _opt_core is not None:
        header += f" {'compiled (ms)':>14} {'speedup':>8}"
    print(header)

    for n_req in args.requests:
        pure_total = fast_total = 0.0
        for seed in range(args.seeds):
            spec = GenSpec(kind="random", seed=seed, n_nodes=args.nodes,
                           n_requests=n_req)
            candidates, masks, scaled, times, _ = prepare_search_inputs(
                generate(spec))
            kernel_args = (candidates, masks, scaled, len(times))

            slow, t_pure, _ = best_of(_opt_fallback.search_assignments,
                                      kernel_args, args.repeat)
            pure_total += t_pure
            if _opt_core is not None:
                fast, t_fast, _ = best_of(
                    _opt_core.search_assignments,
                    ([list(c) for c in candidates], list(masks), list(scaled),
                     len(times)), args.repeat)
                fast_total += t_fast
                assert fast == slow, f"kernel mismatch on {spec.tag()}"

        line = f"{n_req:>5} {pure_total * 1e3:>12.2f}"
        if _opt_core is not None:
            line += f" {fast_total * 1e3:>14.2f} {pure_total / fast_total:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
