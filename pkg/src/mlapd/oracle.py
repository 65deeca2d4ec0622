"""Exact offline optimum by exhaustive assignment of requests to service times.

Some optimal schedule transmits only at request deadlines, so it suffices to
try, for every request, each deadline value inside the request's window and
take the cheapest resulting schedule.  The enumeration kernel exists twice
with identical semantics: a compiled extension (``_opt_core``, built from
Cython when available) and a pure-Python fallback.  The compiled kernel works
on 64-bit node masks and integer-scaled costs; instances that do not fit
those limits are routed to the fallback automatically, so results never
depend on which backend is installed.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from . import _opt_fallback
from .errors import OracleBoundError
from .model import Instance, Schedule, Service, check_feasible, schedule_cost

try:
    from . import _opt_core
except ImportError:
    _opt_core = None

ORACLE_BACKEND = "compiled" if _opt_core is not None else "pure"

DEFAULT_MAX_REQUESTS = 10

# C-kernel limits: node masks must fit 64 bits and no partial assignment cost
# may overflow int64.  sum(costs) * n_times bounds every total from above.
_MASK_BITS = 63
_COST_LIMIT = 2 ** 62


@dataclass(frozen=True)
class OptResult:
    schedule: Schedule
    cost: Fraction
    assignment: dict
    fingerprint: str


def _require_size(instance: Instance, max_requests: int) -> None:
    n = len(instance.requests)
    if n > max_requests:
        raise OracleBoundError(
            f"instance has {n} requests; the exhaustive oracle is limited to "
            f"{max_requests} (raise max_requests / --max-oracle-requests to override)")


def prepare_search_inputs(instance: Instance):
    """Build the kernel arguments for an instance.

    Returns ``(candidates, masks, scaled_costs, times, scale)`` where
    ``candidates[i]`` lists indices into ``times`` that request ``i`` (in
    request-id order) may be assigned to, ``masks[i]`` is the bitmask of the
    request's root path, and ``scaled_costs`` are node costs multiplied by
    ``scale`` to make them integers.
    """
    tree = instance.tree
    reqs = sorted(instance.requests, key=lambda r: r.id)
    times = sorted({r.deadline for r in reqs})
    index = {t: i for i, t in enumerate(times)}
    candidates = []
    masks = []
    for r in reqs:
        cand = [index[t] for t in times if r.arrival <= t <= r.deadline]
        assert cand, "own deadline always qualifies"
        candidates.append(cand)
        mask = 0
        for v in tree.path_to_root(r.node):
            mask |= 1 << v
        masks.append(mask)
    scale = math.lcm(*(c.denominator for c in tree.costs))
    scaled = [int(c * scale) for c in tree.costs]
    return candidates, masks, scaled, times, scale


def _run_kernel(candidates, masks, scaled, n_times):
    if (_opt_core is not None
            and len(scaled) <= _MASK_BITS
            and sum(scaled) * n_times < _COST_LIMIT):
        return _opt_core.search_assignments(
            [list(c) for c in candidates], list(masks), list(scaled), n_times)
    return _opt_fallback.search_assignments(candidates, masks, scaled, n_times)


def brute_force_opt(instance: Instance,
                    max_requests: int = DEFAULT_MAX_REQUESTS) -> OptResult:
    """Minimum-cost schedule over all deadline-time assignments.

    Ties are broken toward the lexicographically smallest assignment vector
    in request-id order, earlier times first, so repeated runs (and both
    kernels) return the identical schedule.
    """
    _require_size(instance, max_requests)
    tree = instance.tree
    reqs = sorted(instance.requests, key=lambda r: r.id)
    if not reqs:
        return OptResult(Schedule(()), Fraction(0), {}, instance.fingerprint)

    candidates, masks, scaled, times, scale = prepare_search_inputs(instance)
    best_scaled, chosen = _run_kernel(candidates, masks, scaled, len(times))

    by_time: dict = {}
    assignment = {}
    for r, ti in zip(reqs, chosen):
        assignment[r.id] = times[ti]
        by_time.setdefault(ti, set()).update(tree.path_to_root(r.node))
    services = tuple(Service(times[ti], frozenset(nodes))
                     for ti, nodes in sorted(by_time.items()))
    schedule = Schedule(services)
    cost = schedule_cost(tree, schedule)
    assert cost * scale == best_scaled, "kernel cost disagrees with exact recount"
    assert check_feasible(instance, schedule)
    return OptResult(schedule, cost, assignment, instance.fingerprint)


def opt_including_times(opt: OptResult, node: int) -> list:
    """Sorted times of the optimum's services that contain ``node``."""
    return sorted(s.time for s in opt.schedule.services if node in s.nodes)


def next_inclusion(times, t):
    """First entry of ``times`` strictly after ``t``; ``inf`` when none."""
    i = bisect_right(times, t)
    return times[i] if i < len(times) else math.inf


def reference_opt(instance: Instance,
                  max_requests: int = DEFAULT_MAX_REQUESTS) -> OptResult:
    """Independent exhaustive optimum admitting arrivals as service times.

    Deliberately shares no code with :func:`brute_force_opt`: plain
    ``itertools.product`` over per-request candidate times (all deadlines and
    all arrivals inside the window) with unscaled rational arithmetic.  Used
    to cross-check that restricting to deadlines loses nothing.
    """
    _require_size(instance, max_requests)
    tree = instance.tree
    reqs = sorted(instance.requests, key=lambda r: r.id)
    if not reqs:
        return OptResult(Schedule(()), Fraction(0), {}, instance.fingerprint)

    points = sorted({r.deadline for r in reqs} | {r.arrival for r in reqs})
    cands = [[t for t in points if r.arrival <= t <= r.deadline] for r in reqs]
    paths = [frozenset(tree.path_to_root(r.node)) for r in reqs]

    best_cost = None
    best_assign = None
    for assign in itertools.product(*cands):
        groups: dict = {}
        for t, path in zip(assign, paths):
            groups.setdefault(t, set()).update(path)
        cost = sum((tree.costs[v] for nodes in groups.values() for v in nodes),
                   Fraction(0))
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_assign = assign
    groups = {}
    for t, path in zip(best_assign, paths):
        groups.setdefault(t, set()).update(path)
    schedule = Schedule(tuple(Service(t, frozenset(nodes))
                              for t, nodes in sorted(groups.items())))
    assignment = {r.id: t for r, t in zip(reqs, best_assign)}
    return OptResult(schedule, best_cost, assignment, instance.fingerprint)


def opt_to_json(instance: Instance, opt: OptResult) -> dict:
    from .model import format_rational, schedule_to_json
    doc = schedule_to_json(instance.tree, opt.schedule)
    doc["assignment"] = {str(rid): format_rational(t)
                         for rid, t in sorted(opt.assignment.items())}
    return doc
