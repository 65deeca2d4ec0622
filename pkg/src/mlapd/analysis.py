"""Post-hoc verification of the accounting behind Waterfall's guarantee.

Given a run trace and the canonical offline optimum, this module classifies
every (node, service-time) pair as late / critically overdue, rebuilds the
investment totals from the ledger, and checks the structural facts the
competitive analysis rests on: per-fall budget accounting, the investment
bounds I(v,t) ≤ L_v·c(v) and IM(v,t) ≤ (D−L_v)·c(v), the charge-set
construction Σ I = c(v), and the phase structure.  Everything is exact
rational arithmetic — a check either holds with equality/inequality exactly
or it is a named counterexample.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .algos import InvestmentLedger
from .engine import RunTrace
from .errors import InputError
from .model import Instance, Tree
from .oracle import OptResult, next_inclusion, opt_including_times


@dataclass(frozen=True)
class PairStatus:
    """Lateness classification of one node occurrence in the run.

    ``urgency`` is the earliest deadline among active requests under the node
    just before the service fired (``inf`` when there are none, with
    ``urgent_node`` None); ``nos`` is the optimum's next inclusion of the
    node strictly after ``time`` (``inf`` when it never happens again).
    ``phase`` counts the optimum's inclusions of the node at or before
    ``time``, so services sharing a phase index lie between the same two
    optimum inclusions.
    """
    node: int
    time: Fraction
    urgency: object
    urgent_node: int | None
    nos: object
    phase: int
    late: bool
    critically_overdue: bool


@dataclass
class CheckResult:
    name: str
    checked: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass
class AnalysisReport:
    fingerprint: str
    algorithm: str
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_json(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "algorithm": self.algorithm,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "ok": c.ok, "checked": c.checked,
                 "failures": list(c.failures)}
                for c in self.checks
            ],
        }


def _check_same_instance(instance: Instance, trace: RunTrace, opt: OptResult) -> None:
    if trace.fingerprint != instance.fingerprint:
        raise InputError("trace does not belong to this instance")
    if opt.fingerprint != instance.fingerprint:
        raise InputError("optimum does not belong to this instance")


def classify_pairs(instance: Instance, trace: RunTrace, opt: OptResult) -> list:
    """One :class:`PairStatus` per (node, time) occurrence in the trace."""
    _check_same_instance(instance, trace, opt)
    tree = instance.tree
    opt_times = {v: opt_including_times(opt, v) for v in range(len(tree))}

    raw = []
    pending = set(instance.requests)
    for rec in trace.records:
        t = rec.time
        active = [r for r in pending if r.arrival <= t]
        for v in sorted(rec.nodes):
            below = [r for r in active if tree.in_subtree(r.node, v)]
            if below:
                earliest = min(below, key=lambda r: r.deadline)
                urgency, urgent_node = earliest.deadline, earliest.node
            else:
                urgency, urgent_node = math.inf, None
            nos = next_inclusion(opt_times[v], t)
            phase = bisect_right(opt_times[v], t)
            raw.append((v, t, urgency, urgent_node, nos, phase, urgency < nos))
        pending -= {r for r in active if r.node in rec.nodes}

    # Critically overdue = late with no later *late* occurrence of the node
    # before the optimum includes it again.
    late_times: dict = {}
    for v, t, _, _, _, _, late in raw:
        if late:
            late_times.setdefault(v, []).append(t)
    statuses = []
    for v, t, urgency, urgent_node, nos, phase, late in raw:
        overdue = late and not any(
            t < t2 < nos for t2 in late_times.get(v, ()))
        statuses.append(PairStatus(v, t, urgency, urgent_node, nos, phase,
                                   late, overdue))
    return statuses


# ---------------------------------------------------------------------------
# Investment totals.  Direct entries compose along chains: an investor owns
# amount/c(investee-node) of the investee pair and participates in all of the
# investee's onward investments at that fraction.

def _by_investee(ledger: InvestmentLedger) -> dict:
    out: dict = {}
    for e in ledger.entries:
        out.setdefault(e.investee, []).append(e)
    return out


def _by_investor(ledger: InvestmentLedger) -> dict:
    out: dict = {}
    for e in ledger.entries:
        out.setdefault(e.investor, []).append(e)
    return out


def invested_in(ledger: InvestmentLedger) -> dict:
    """I(v,t): self-investment c(v) plus scaled investments of all investors."""
    costs = ledger.tree.costs
    incoming = _by_investee(ledger)
    memo: dict = {}

    def total(pair):
        if pair not in memo:
            acc = costs[pair[0]]
            for e in incoming.get(pair, ()):
                acc += total(e.investor) / costs[e.investor[0]] * e.amount
            memo[pair] = acc
        return memo[pair]

    for pair in ledger.included:
        total(pair)
    return memo


def invested_onward(ledger: InvestmentLedger) -> dict:
    """IM(v,t): total investment made to proper descendants, chains included."""
    costs = ledger.tree.costs
    outgoing = _by_investor(ledger)
    memo: dict = {}

    def total(pair):
        if pair not in memo:
            acc = Fraction(0)
            for e in outgoing.get(pair, ()):
                acc += e.amount + e.amount / costs[e.investee[0]] * total(e.investee)
            memo[pair] = acc
        return memo[pair]

    for pair in ledger.included:
        total(pair)
    return memo


def pair_investment(ledger: InvestmentLedger):
    """Returns I_from(src, dst): total investment of pair ``src`` in ``dst``.

    ``I_from(p, p) = c(node)`` by the self-investment convention; otherwise
    investments flow through the direct investees, each chain weighted by
    amount/c at every hop.
    """
    tree = ledger.tree
    costs = tree.costs
    outgoing = _by_investor(ledger)
    memo: dict = {}

    def I_from(src, dst):
        if src == dst:
            return costs[src[0]]
        if not tree.in_subtree(dst[0], src[0]):
            return Fraction(0)
        key = (src, dst)
        if key not in memo:
            # chains strictly descend the tree, so the recursion terminates
            memo[key] = sum(
                (e.amount / costs[e.investee[0]] * I_from(e.investee, dst)
                 for e in outgoing.get(src, ())),
                Fraction(0))
        return memo[key]

    return I_from


def charge_shares(pair, ledger: InvestmentLedger, statuses) -> dict:
    """How a late pair's cost lands on critically-overdue pairs.

    A critically-overdue pair keeps its whole cost; any other late pair
    splits its cost over its direct investees in proportion amount/c(investee)
    and lets them distribute onward.  Chains therefore stop at the first
    critically-overdue pair they meet — an investment that merely passes
    through one is that pair's own business, not the originator's.  Returned
    is {critically-overdue pair: amount}; the amounts sum to c(v) exactly
    whenever every late non-critically-overdue pair en route invested its
    full cost.  Raises :class:`InputError` if the recursion meets a pair
    that is not late (the analysis says that cannot happen; reaching one
    means a bug).
    """
    status = {(s.node, s.time): s for s in statuses}
    outgoing = _by_investor(ledger)
    costs = ledger.tree.costs
    memo: dict = {}

    def build(p):
        if p in memo:
            return memo[p]
        st = status.get(p)
        if st is None or not st.late:
            raise InputError(f"charge-set recursion reached a non-late pair {p}")
        if st.critically_overdue:
            memo[p] = {p: costs[p[0]]}
            return memo[p]
        entries = outgoing.get(p, ())
        if not entries:
            raise InputError(
                f"late pair {p} is not critically overdue yet invested nothing")
        acc: dict = {}
        for e in entries:
            fraction_owned = e.amount / costs[e.investee[0]]
            for q, amount in build(e.investee).items():
                acc[q] = acc.get(q, Fraction(0)) + fraction_owned * amount
        memo[p] = acc
        return acc

    return build(pair)


def construct_charge_set(pair, ledger: InvestmentLedger, statuses) -> frozenset:
    """The set of critically-overdue pairs a late pair's cost is charged to."""
    return frozenset(charge_shares(pair, ledger, statuses))


# ---------------------------------------------------------------------------
# Named verification passes.  Each returns a CheckResult; failures carry a
# printable counterexample.

def verify_late_paths(instance: Instance, trace: RunTrace, statuses) -> CheckResult:
    """Late pairs propagate: the whole in-service path from a late node down
    toward its most urgent request is late too."""
    tree = instance.tree
    status = {(s.node, s.time): s for s in statuses}
    failures = []
    checked = 0
    for s in statuses:
        if not s.late or s.urgent_node is None:
            continue
        for u in tree.path_down(s.node, s.urgent_node):
            other = status.get((u, s.time))
            if other is None:
                continue
            checked += 1
            if not other.late:
                failures.append(
                    f"({tree.label(s.node)}, t={s.time}) is late toward node "
                    f"{tree.label(s.urgent_node)} but ({tree.label(u)}, t={s.time}) is early")
    return CheckResult("late_paths", checked, failures)


def verify_investment_bounds(ledger: InvestmentLedger, tree: Tree) -> CheckResult:
    """Per-pair budget accounting and the two investment bounds.

    made(v,t) ≤ c(v), with equality whenever the fall overflowed;
    received(v,t) = c(v) exactly for fall-added pairs and < c(v) for
    trigger-path pairs; I(v,t) ≤ L_v·c(v); IM(v,t) ≤ (D−L_v)·c(v).
    """
    failures = []
    checked = 0
    made = ledger.made_totals()
    received = ledger.received_totals()
    labels = tree.labels

    for pair, total in sorted(made.items()):
        v = pair[0]
        checked += 1
        if total > tree.costs[v]:
            failures.append(f"made({labels[v]}, t={pair[1]}) = {total} > c = {tree.costs[v]}")
    for pair in sorted(ledger.overflowed):
        v = pair[0]
        checked += 1
        if made.get(pair) != tree.costs[v]:
            failures.append(
                f"fall of ({labels[v]}, t={pair[1]}) overflowed but made "
                f"{made.get(pair)} != c = {tree.costs[v]}")
    for pair, fall_added in sorted(ledger.included.items()):
        v = pair[0]
        got = received.get(pair, Fraction(0))
        checked += 1
        if fall_added and got != tree.costs[v]:
            failures.append(
                f"received({labels[v]}, t={pair[1]}) = {got} != c = {tree.costs[v]} for a fall-added pair")
        if not fall_added and got >= tree.costs[v]:
            failures.append(
                f"received({labels[v]}, t={pair[1]}) = {got} >= c = {tree.costs[v]} for a trigger-path pair")

    depth = tree.depth
    inv_in = invested_in(ledger)
    inv_out = invested_onward(ledger)
    for pair, total in sorted(inv_in.items()):
        v = pair[0]
        checked += 1
        if total > tree.levels[v] * tree.costs[v]:
            failures.append(
                f"I({labels[v]}, t={pair[1]}) = {total} > L·c = {tree.levels[v] * tree.costs[v]}")
    for pair, total in sorted(inv_out.items()):
        v = pair[0]
        checked += 1
        if total > (depth - tree.levels[v]) * tree.costs[v]:
            failures.append(
                f"IM({labels[v]}, t={pair[1]}) = {total} > (D-L)·c = "
                f"{(depth - tree.levels[v]) * tree.costs[v]}")
    return CheckResult("investment_bounds", checked, failures)


def verify_charge_sets(instance: Instance, ledger: InvestmentLedger,
                       statuses) -> CheckResult:
    """Every late pair charges critically-overdue pairs for exactly c(v)."""
    tree = instance.tree
    status = {(s.node, s.time): s for s in statuses}
    failures = []
    checked = 0
    for s in statuses:
        if not s.late:
            continue
        pair = (s.node, s.time)
        checked += 1
        try:
            shares = charge_shares(pair, ledger, statuses)
        except InputError as exc:
            failures.append(str(exc))
            continue
        bad = [q for q in shares if not status[q].critically_overdue]
        if bad:
            failures.append(f"charge set of {pair} contains non-overdue pairs {bad}")
            continue
        total = sum(shares.values(), Fraction(0))
        if total != tree.costs[s.node]:
            failures.append(
                f"charge set of ({tree.label(s.node)}, t={s.time}) sums to "
                f"{total} != c = {tree.costs[s.node]}")
    return CheckResult("charge_sets", checked, failures)


def verify_phase_structure(statuses) -> CheckResult:
    """Within each phase: a late prefix, at most one critically-overdue pair
    (the last late one), root phases entirely late, phase 0 entirely early."""
    groups: dict = {}
    for s in statuses:
        groups.setdefault((s.node, s.phase), []).append(s)
    failures = []
    checked = 0
    for (node, phase), members in sorted(groups.items()):
        members.sort(key=lambda s: s.time)
        flags = [s.late for s in members]
        checked += 1
        if flags != sorted(flags, reverse=True):
            failures.append(f"node {node} phase {phase}: lateness {flags} is not a prefix")
        overdue = [s for s in members if s.critically_overdue]
        if len(overdue) > 1:
            failures.append(f"node {node} phase {phase}: {len(overdue)} critically-overdue pairs")
        if any(flags):
            last_late = max(i for i, f in enumerate(flags) if f)
            if overdue != [members[last_late]]:
                failures.append(
                    f"node {node} phase {phase}: critically-overdue pair is not the last late one")
        if node == 0 and not all(flags):
            failures.append(f"root phase {phase} contains an early service")
        if phase == 0 and any(flags):
            failures.append(f"node {node} phase 0 (before the optimum's first "
                            f"inclusion) contains a late service")
    return CheckResult("phase_structure", checked, failures)


def verify_competitive_bound(instance: Instance, trace: RunTrace,
                             opt: OptResult, statuses) -> CheckResult:
    """The charging scheme end to end: alg cost ≤ D · opt cost, with the
    per-pair charge limits and the early-pair coverage facts it rests on."""
    tree = instance.tree
    ledger = trace.diagnostics["ledger"]
    status = {(s.node, s.time): s for s in statuses}
    I_from = pair_investment(ledger)
    received = ledger.received_totals()
    incoming = _by_investee(ledger)
    failures = []
    checked = 0

    charges: dict = {}
    for s in statuses:
        if not s.late:
            continue
        pair = (s.node, s.time)
        try:
            for q, amount in charge_shares(pair, ledger, statuses).items():
                charges[q] = charges.get(q, Fraction(0)) + amount
        except InputError as exc:
            failures.append(str(exc))

    for q, charge in sorted(charges.items()):
        checked += 1
        limit = tree.levels[q[0]] * tree.costs[q[0]]
        if charge > limit:
            failures.append(f"late-side charge to {q} is {charge} > L·c = {limit}")

    for s in statuses:
        pair = (s.node, s.time)
        if s.late:
            if status[pair].critically_overdue:
                early_total = sum(
                    (I_from(pair, q) for q in status
                     if not status[q].late and tree.in_subtree(q[0], s.node)),
                    Fraction(0))
                checked += 1
                limit = (tree.depth - tree.levels[s.node]) * tree.costs[s.node]
                if early_total > limit:
                    failures.append(
                        f"early-side charge from {pair} is {early_total} > (D-L)·c = {limit}")
            continue
        # Early pairs: their cost arrives entirely as direct investment, and
        # every investor is itself critically overdue or early.
        checked += 1
        if received.get(pair, Fraction(0)) != tree.costs[s.node]:
            failures.append(
                f"early pair {pair} received {received.get(pair, Fraction(0))} "
                f"!= c = {tree.costs[s.node]}")
        for e in incoming.get(pair, ()):
            st = status.get(e.investor)
            if st is None or (st.late and not st.critically_overdue):
                failures.append(
                    f"early pair {pair} has a late non-critically-overdue investor {e.investor}")

    alg_cost = sum((rec.cost for rec in trace.records), Fraction(0))
    checked += 1
    if alg_cost > tree.depth * opt.cost:
        failures.append(
            f"alg cost {alg_cost} exceeds D·opt = {tree.depth} * {opt.cost}")
    return CheckResult("competitive_bound", checked, failures)


def analyze(instance: Instance, trace: RunTrace, opt: OptResult) -> AnalysisReport:
    """Run every verification pass that applies to this trace."""
    statuses = classify_pairs(instance, trace, opt)
    checks = [
        verify_late_paths(instance, trace, statuses),
        verify_phase_structure(statuses),
    ]
    ledger = trace.diagnostics.get("ledger")
    if ledger is not None:
        checks.insert(0, verify_investment_bounds(ledger, instance.tree))
        checks.append(verify_charge_sets(instance, ledger, statuses))
        checks.append(verify_competitive_bound(instance, trace, opt, statuses))
    return AnalysisReport(instance.fingerprint, trace.algorithm, tuple(checks))
