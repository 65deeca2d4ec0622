"""Deadline-triggered simulation loop.

The engine owns all satisfaction bookkeeping: it advances time to the next
due unsatisfied request, hands the plugged-in algorithm a fresh view of the
active requests, validates the returned node set, and applies it.  Algorithms
never see requests that have not arrived, and cannot mark anything satisfied
themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContractViolation, InputError, ValidationError
from .model import (Instance, Schedule, Service, Tree, check_feasible,
                    format_rational, schedule_to_json, service_cost,
                    validate_service_nodes)
from .oracle import DEFAULT_MAX_REQUESTS, brute_force_opt


@dataclass(frozen=True)
class OnlineView:
    """What an algorithm is allowed to observe at a firing instant.

    ``active_requests`` holds exactly the arrived, still-unsatisfied requests
    sorted by deadline ascending; the first one is the trigger.  No entry has
    a deadline before ``now`` — the engine fires at the earliest deadline.
    """
    tree: Tree
    now: Fraction
    active_requests: tuple


@dataclass(frozen=True)
class ServiceRecord:
    time: Fraction
    trigger_id: int
    nodes: frozenset
    cost: Fraction


@dataclass(frozen=True)
class RunTrace:
    fingerprint: str
    algorithm: str
    schedule: Schedule
    records: tuple
    diagnostics: dict = field(default_factory=dict)


def run(instance: Instance, algorithm) -> RunTrace:
    """Simulate ``algorithm`` on ``instance`` and return the full trace.

    Raises :class:`ContractViolation` if the algorithm ever returns a node
    set that is not a root-containing subtree or that omits the due
    request's node.
    """
    tree = instance.tree
    name = getattr(algorithm, "name", type(algorithm).__name__)
    pending = sorted(instance.requests, key=lambda r: r.deadline)
    records = []
    services = []
    while pending:
        due = pending[0]
        t = due.deadline
        active = tuple(sorted((r for r in pending if r.arrival <= t),
                              key=lambda r: r.deadline))
        view = OnlineView(tree=tree, now=t, active_requests=active)
        nodes = frozenset(algorithm.on_due(view, due))
        try:
            validate_service_nodes(tree, nodes)
        except (ValidationError, InputError) as exc:
            raise ContractViolation(
                f"{name} returned an invalid service at t={t}: {exc}") from exc
        if due.node not in nodes:
            raise ContractViolation(
                f"{name} omitted the due request's node "
                f"{tree.label(due.node)} from its service at t={t}")
        services.append(Service(t, nodes))
        records.append(ServiceRecord(t, due.id, nodes, service_cost(tree, Service(t, nodes))))
        pending = [r for r in pending if not (r.arrival <= t and r.node in nodes)]

    schedule = Schedule(tuple(services))
    verdict = check_feasible(instance, schedule)
    if not verdict:
        raise ContractViolation(
            "engine produced an infeasible schedule: " + "; ".join(verdict.violations))
    diagnostics = algorithm.finalize() if hasattr(algorithm, "finalize") else {}
    return RunTrace(instance.fingerprint, name, schedule, tuple(records), diagnostics)


def measure_ratio(instance: Instance, algorithm,
                  max_requests: int = DEFAULT_MAX_REQUESTS):
    """(alg_cost, opt_cost, ratio) with the ratio as an exact rational.

    Raises :class:`OracleBoundError` when the instance exceeds the oracle's
    request bound, and :class:`InputError` on empty instances (no requests
    means opt cost 0, so no ratio exists).
    """
    if not instance.requests:
        raise InputError("competitive ratio is undefined without requests")
    trace = run(instance, algorithm)
    opt = brute_force_opt(instance, max_requests=max_requests)
    alg_cost = sum((rec.cost for rec in trace.records), Fraction(0))
    return alg_cost, opt.cost, alg_cost / opt.cost


def trace_to_json(instance: Instance, trace: RunTrace) -> dict:
    tree = instance.tree
    doc = schedule_to_json(tree, trace.schedule)
    doc["algorithm"] = trace.algorithm
    doc["fingerprint"] = trace.fingerprint
    doc["triggers"] = [
        {"time": format_rational(rec.time), "request": rec.trigger_id,
         "cost": format_rational(rec.cost)}
        for rec in trace.records
    ]
    return doc
