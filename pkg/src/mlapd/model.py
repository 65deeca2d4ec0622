"""Core data model: rooted node-weighted trees, timed requests, services,
schedules, and the feasibility / cost primitives shared by every other module.

All quantities (costs, times, prices) are exact rationals
(:class:`fractions.Fraction`).  Floating point is never used for anything that
feeds a comparison or an accounting identity; several downstream checks rely
on exact equality.

Node ids are canonicalized at construction: internally nodes are dense
integers ``0..n-1`` with the root at ``0``.  Input files may use arbitrary
integer ids; the original labels are kept on the tree and restored on output.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError, ValidationError

_RATIONAL = re.compile(r"[+-]?\d+(?:/\d+)?")

FORMAT_VERSION = 1


def parse_rational(text: str) -> Fraction:
    """Parse a rational string: optional sign, integer, optional ``/integer``."""
    if not isinstance(text, str) or not _RATIONAL.fullmatch(text):
        raise InputError(f"not a rational string: {text!r}")
    return Fraction(text)


def format_rational(value) -> str:
    return str(Fraction(value))


class Tree:
    """Immutable rooted node-weighted tree.

    ``parents[v]`` is the parent id (``None`` for the root, which is node 0),
    ``costs[v]`` the strictly positive node cost, ``levels[v]`` the number of
    nodes on the root-to-``v`` path (root level is 1), and ``depth`` the
    maximum level, i.e. the node count of the longest root-to-leaf path.
    """

    __slots__ = ("parents", "costs", "levels", "children", "depth", "labels",
                 "_label_index", "_tin", "_tout")

    def __init__(self, parents, costs, labels=None):
        n = len(parents)
        if n == 0:
            raise InputError("tree must contain at least one node")
        if len(costs) != n:
            raise InputError("parents and costs length mismatch")
        if parents[0] is not None:
            raise InputError("node 0 must be the root (parent None)")
        self.parents = tuple(parents)
        self.costs = tuple(Fraction(c) for c in costs)
        for v, c in enumerate(self.costs):
            if c <= 0:
                raise InputError(f"node {v} has non-positive cost {c}")
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(set(self.labels)) != n:
            raise InputError("duplicate node labels")
        self._label_index = {lab: v for v, lab in enumerate(self.labels)}

        children = [[] for _ in range(n)]
        for v in range(1, n):
            p = self.parents[v]
            if not isinstance(p, int) or not 0 <= p < n:
                raise InputError(f"node {v} has invalid parent {p!r}")
            children[p].append(v)
        if any(p is None for p in self.parents[1:]):
            raise InputError("more than one root")
        self.children = tuple(tuple(ch) for ch in children)

        # BFS from the root assigns levels and detects unreachable nodes
        # (which, with n parent links, can only arise from a cycle).
        levels = [0] * n
        levels[0] = 1
        order = [0]
        for v in order:
            for ch in self.children[v]:
                levels[ch] = levels[v] + 1
                order.append(ch)
        if len(order) != n:
            raise InputError("parent links contain a cycle")
        self.levels = tuple(levels)
        self.depth = max(levels)

        # Euler intervals give O(1) subtree membership tests.
        tin = [0] * n
        tout = [0] * n
        clock = 0
        stack = [(0, False)]
        while stack:
            v, done = stack.pop()
            if done:
                tout[v] = clock
                continue
            tin[v] = clock
            clock += 1
            stack.append((v, True))
            for ch in reversed(self.children[v]):
                stack.append((ch, False))
        self._tin = tuple(tin)
        self._tout = tuple(tout)

    @classmethod
    def from_nodes(cls, nodes) -> "Tree":
        """Build from ``(label, parent_label_or_None, cost)`` triples."""
        roots = [lab for lab, par, _ in nodes if par is None]
        if len(roots) != 1:
            raise InputError(f"expected exactly one root, found {len(roots)}")
        labels = [roots[0]] + [lab for lab, par, _ in nodes if par is not None]
        if len(set(labels)) != len(labels):
            raise InputError("duplicate node ids")
        index = {lab: v for v, lab in enumerate(labels)}
        parents: list = [None] * len(labels)
        costs: list = [None] * len(labels)
        for lab, par, cost in nodes:
            v = index[lab]
            costs[v] = Fraction(cost)
            if par is not None:
                if par not in index:
                    raise InputError(f"node {lab!r} references unknown parent {par!r}")
                parents[v] = index[par]
        return cls(parents, costs, labels)

    def __len__(self) -> int:
        return len(self.parents)

    @property
    def root(self) -> int:
        return 0

    def check_node(self, v) -> None:
        if not isinstance(v, int) or not 0 <= v < len(self):
            raise InputError(f"unknown node id {v!r}")

    def label(self, v: int):
        return self.labels[v]

    def index(self, label) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise InputError(f"unknown node label {label!r}") from None

    def in_subtree(self, node: int, ancestor: int) -> bool:
        """True iff ``node`` lies in the subtree rooted at ``ancestor``."""
        return (self._tin[ancestor] <= self._tin[node]
                and self._tout[node] <= self._tout[ancestor])

    def path_to_root(self, v: int) -> list:
        """The unique root-to-``v`` node sequence, root first."""
        self.check_node(v)
        path = []
        u = v
        while u is not None:
            path.append(u)
            u = self.parents[u]
        path.reverse()
        return path

    def path_down(self, v: int, target: int) -> list:
        """Nodes on the ``v``-to-``target`` path, ``v`` first.

        ``target`` must be a descendant-or-self of ``v``.
        """
        self.check_node(v)
        self.check_node(target)
        if not self.in_subtree(target, v):
            raise InputError(f"node {target} is not in the subtree of {v}")
        return self.path_to_root(target)[self.levels[v] - 1:]

    def path_outside(self, v: int, target: int, covered) -> list:
        """``path_down(v, target)`` minus the nodes already in ``covered``,
        kept in root-ward-to-leaf-ward order."""
        return [u for u in self.path_down(v, target) if u not in covered]

    @property
    def is_path(self) -> bool:
        return all(len(ch) <= 1 for ch in self.children)

    def subtree_cost(self) -> Fraction:
        return sum(self.costs, Fraction(0))


@dataclass(frozen=True)
class Request:
    """A unit of demand: must be covered at ``node`` within [arrival, deadline]."""
    id: int
    node: int
    arrival: Fraction
    deadline: Fraction


@dataclass(frozen=True)
class Service:
    """A timestamped root-containing subtree."""
    time: Fraction
    nodes: frozenset


@dataclass(frozen=True)
class Schedule:
    services: tuple


@dataclass(frozen=True)
class Instance:
    tree: Tree
    requests: tuple
    fingerprint: str


def build_instance(tree: Tree, requests, perturb: bool = False) -> Instance:
    """Validate requests against the tree and assemble an instance.

    Deadlines must be pairwise distinct.  With ``perturb=True`` duplicates are
    broken by adding ``i * eps`` to every deadline in request-id order, where
    ``eps`` is small enough to preserve the relative order of all distinct
    deadline values.
    """
    reqs = [Request(int(r.id), int(r.node), Fraction(r.arrival), Fraction(r.deadline))
            for r in requests]
    ids = [r.id for r in reqs]
    if len(set(ids)) != len(ids):
        raise InputError("duplicate request ids")
    for r in reqs:
        tree.check_node(r.node)
        if r.arrival > r.deadline:
            raise InputError(f"request {r.id}: arrival {r.arrival} after deadline {r.deadline}")

    deadlines = [r.deadline for r in reqs]
    if len(set(deadlines)) != len(deadlines):
        if not perturb:
            raise InputError("duplicate deadlines (use perturb to break ties)")
        distinct = sorted(set(deadlines))
        gaps = [b - a for a, b in zip(distinct, distinct[1:])]
        min_gap = min(gaps) if gaps else Fraction(1)
        max_den = max(d.denominator for d in deadlines)
        eps = min_gap / (2 * max_den * (len(reqs) + 1))
        by_id = sorted(range(len(reqs)), key=lambda i: reqs[i].id)
        for rank, i in enumerate(by_id):
            r = reqs[i]
            reqs[i] = Request(r.id, r.node, r.arrival, r.deadline + rank * eps)
        assert len({r.deadline for r in reqs}) == len(reqs)

    inst = Instance(tree, tuple(reqs), "")
    doc = instance_to_json(inst)
    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
    return Instance(tree, tuple(reqs), digest)


def validate_service_nodes(tree: Tree, nodes) -> None:
    """Raise unless ``nodes`` is a nonempty root-containing subtree."""
    if tree.root not in nodes:
        raise ValidationError("service does not contain the root")
    for v in nodes:
        tree.check_node(v)
        p = tree.parents[v]
        if p is not None and p not in nodes:
            raise ValidationError(f"service contains node {v} but not its parent {p}")


def service_cost(tree: Tree, service: Service) -> Fraction:
    validate_service_nodes(tree, service.nodes)
    return sum((tree.costs[v] for v in service.nodes), Fraction(0))


def schedule_cost(tree: Tree, schedule: Schedule) -> Fraction:
    return sum((service_cost(tree, s) for s in schedule.services), Fraction(0))


@dataclass
class Verdict:
    ok: bool
    violations: list

    def __bool__(self) -> bool:
        return self.ok


def check_feasible(instance: Instance, schedule: Schedule) -> Verdict:
    """Check that every request is satisfied and every service is well formed.

    A request is satisfied by a service when its node is in the service and
    the service time lies in the closed window [arrival, deadline].  The
    verdict enumerates every violation rather than stopping at the first.
    """
    tree = instance.tree
    violations = []
    for idx, svc in enumerate(schedule.services):
        try:
            validate_service_nodes(tree, svc.nodes)
        except (ValidationError, InputError) as exc:
            violations.append(f"service {idx} at t={svc.time}: {exc}")
    for a, b in zip(schedule.services, schedule.services[1:]):
        if a.time >= b.time:
            violations.append(f"service times not strictly increasing at t={b.time}")
    for req in instance.requests:
        covering = [s for s in schedule.services if req.node in s.nodes]
        if any(req.arrival <= s.time <= req.deadline for s in covering):
            continue
        if covering:
            violations.append(
                f"request {req.id} served after deadline or before arrival: "
                f"node {tree.label(req.node)} covered only outside [{req.arrival}, {req.deadline}]")
        else:
            violations.append(
                f"request {req.id} unserved: node {tree.label(req.node)} "
                f"absent from every service")
    return Verdict(not violations, violations)


# ---------------------------------------------------------------------------
# Canonical JSON formats.

def instance_to_json(instance: Instance) -> dict:
    tree = instance.tree
    return {
        "version": FORMAT_VERSION,
        "nodes": [
            {"id": tree.labels[v],
             "parent": None if tree.parents[v] is None else tree.labels[tree.parents[v]],
             "cost": format_rational(tree.costs[v])}
            for v in range(len(tree))
        ],
        "requests": [
            {"id": r.id, "node": tree.labels[r.node],
             "arrival": format_rational(r.arrival),
             "deadline": format_rational(r.deadline)}
            for r in instance.requests
        ],
    }


def instance_from_json(doc: dict, perturb: bool = False) -> Instance:
    if not isinstance(doc, dict):
        raise InputError("instance document must be a JSON object")
    if doc.get("version") != FORMAT_VERSION:
        raise InputError(f"unsupported instance format version {doc.get('version')!r}")
    try:
        nodes = [(n["id"], n["parent"], parse_rational(n["cost"])) for n in doc["nodes"]]
        raw = [(int(r["id"]), r["node"], parse_rational(r["arrival"]),
                parse_rational(r["deadline"])) for r in doc.get("requests", [])]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed instance document: {exc}") from None
    tree = Tree.from_nodes(nodes)
    reqs = [Request(rid, tree.index(node), arr, dl) for rid, node, arr, dl in raw]
    return build_instance(tree, reqs, perturb=perturb)


def load_instance(path, perturb: bool = False) -> Instance:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read instance file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"instance file {path} is not valid JSON: {exc}") from exc
    return instance_from_json(doc, perturb=perturb)


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_json(instance), fh, indent=2)
        fh.write("\n")


def schedule_to_json(tree: Tree, schedule: Schedule) -> dict:
    return {
        "services": [
            {"time": format_rational(s.time),
             "nodes": sorted(tree.labels[v] for v in s.nodes)}
            for s in schedule.services
        ],
        "total_cost": format_rational(schedule_cost(tree, schedule)),
    }
