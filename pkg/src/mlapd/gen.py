"""Seeded instance generators.

Five families: ``random`` trees, ``path`` chains, ``increasing`` and
``l_increasing`` trees (costs grow along every root-to-leaf path, strictly or
by a factor), and ``geometric_path`` — a fixed escalation of path costs whose
nested requests force the doubling algorithm's rejection branch.

Deadlines are distinct by construction: integer draws get rank-spaced
fractional offsets, so generated corpora never need perturbation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import ConfigurationError
from .model import Instance, Request, Tree, build_instance, parse_rational

KINDS = ("random", "path", "increasing", "l_increasing", "geometric_path")


@dataclass(frozen=True)
class GenSpec:
    kind: str
    seed: int
    n_nodes: int = 8
    n_requests: int = 6
    depth: int | None = None
    l_factor: Fraction = Fraction(2)
    cost_min: int = 1
    cost_max: int = 20
    horizon: int = 24

    def tag(self) -> str:
        return f"{self.kind}-s{self.seed}-n{self.n_nodes}-r{self.n_requests}"

    def to_json(self) -> dict:
        return {
            "kind": self.kind, "seed": self.seed, "n_nodes": self.n_nodes,
            "n_requests": self.n_requests, "depth": self.depth,
            "l_factor": str(self.l_factor), "cost_min": self.cost_min,
            "cost_max": self.cost_max, "horizon": self.horizon,
        }


def _validate(spec: GenSpec) -> None:
    if spec.kind not in KINDS:
        raise ConfigurationError(f"unknown generator kind {spec.kind!r}; choose from {KINDS}")
    if spec.n_nodes < 1:
        raise ConfigurationError("n_nodes must be at least 1")
    if spec.n_requests < 0:
        raise ConfigurationError("n_requests must be nonnegative")
    if spec.depth is not None and not 1 <= spec.depth <= spec.n_nodes:
        raise ConfigurationError(f"depth {spec.depth} impossible with {spec.n_nodes} nodes")
    if not 1 <= spec.cost_min <= spec.cost_max:
        raise ConfigurationError("need 1 <= cost_min <= cost_max")
    if spec.l_factor <= 1:
        raise ConfigurationError("l_factor must exceed 1")
    if spec.horizon < 1:
        raise ConfigurationError("horizon must be positive")


def _tree_shape(spec: GenSpec, rng: random.Random) -> list:
    """Parent indices; node 0 is the root."""
    if spec.kind in ("path", "geometric_path"):
        return [None] + list(range(spec.n_nodes - 1))
    parents: list = [None]
    levels = [1]
    for v in range(1, spec.n_nodes):
        if spec.depth is None:
            pool = range(v)
        else:
            pool = [u for u in range(v) if levels[u] < spec.depth]
        p = rng.choice(list(pool))
        parents.append(p)
        levels.append(levels[p] + 1)
    return parents


def _costs(spec: GenSpec, rng: random.Random, parents: list) -> list:
    if spec.kind == "geometric_path":
        # Root prefix sums are 1, 4, 13, 40, ...: each more than twice the
        # previous, so absorbing the next deeper request always busts the cap.
        return [Fraction(3) ** v for v in range(spec.n_nodes)]
    costs = [Fraction(rng.randint(spec.cost_min, spec.cost_max))]
    for v in range(1, spec.n_nodes):
        parent_cost = costs[parents[v]]
        if spec.kind == "increasing":
            costs.append(parent_cost + rng.randint(1, spec.cost_max))
        elif spec.kind == "l_increasing":
            costs.append(parent_cost * spec.l_factor + rng.randint(0, spec.cost_max))
        else:
            costs.append(Fraction(rng.randint(spec.cost_min, spec.cost_max)))
    return costs


def _requests(spec: GenSpec, rng: random.Random, tree: Tree) -> list:
    if spec.kind == "geometric_path":
        # One request per non-root node, shallowest due first, all present
        # from time zero: a nested sequence for the doubling cap to refuse.
        k = min(spec.n_requests, len(tree) - 1) or 0
        return [Request(i, i + 1, Fraction(0), Fraction(i + 1)) for i in range(k)]
    reqs = []
    for i in range(spec.n_requests):
        node = rng.randrange(len(tree))
        arrival = rng.randint(0, spec.horizon - 1)
        deadline = arrival + rng.randint(0, max(1, spec.horizon - arrival))
        reqs.append(Request(i, node, Fraction(arrival), Fraction(deadline)))
    # Rank-spacing keeps integer ordering while making deadlines distinct.
    order = sorted(range(len(reqs)), key=lambda i: (reqs[i].deadline, reqs[i].id))
    for rank, i in enumerate(order):
        r = reqs[i]
        reqs[i] = Request(r.id, r.node, r.arrival,
                          r.deadline + Fraction(rank + 1, len(reqs) + 1))
    return reqs


def generate(spec: GenSpec) -> Instance:
    """Deterministic instance for the spec; same spec, same instance."""
    _validate(spec)
    rng = random.Random(spec.seed)
    parents = _tree_shape(spec, rng)
    costs = _costs(spec, rng, parents)
    tree = Tree(parents, costs)
    instance = build_instance(tree, _requests(spec, rng, tree))

    if spec.kind in ("path", "geometric_path"):
        assert tree.is_path
    if spec.kind == "increasing":
        assert all(tree.costs[v] > tree.costs[parents[v]] for v in range(1, len(tree)))
    if spec.kind == "l_increasing":
        assert all(tree.costs[v] >= spec.l_factor * tree.costs[parents[v]]
                   for v in range(1, len(tree)))
    return instance


_KEYS = {
    "seed": ("seed", int),
    "n": ("n_nodes", int),
    "reqs": ("n_requests", int),
    "depth": ("depth", int),
    "L": ("l_factor", parse_rational),
    "cmin": ("cost_min", int),
    "cmax": ("cost_max", int),
    "horizon": ("horizon", int),
}


def parse_gen(text: str, seed_offset: int = 0) -> list:
    """Parse ``kind:key=value:...`` into one GenSpec per seed.

    ``seed`` accepts a single value or an inclusive range ``a..b``;
    ``seed_offset`` (the MLAP_SEED mechanism) shifts every seed so a whole
    sweep can be re-rolled without editing specs.
    """
    parts = text.split(":")
    kind = parts[0]
    fields: dict = {}
    seeds = [0]
    for part in parts[1:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise ConfigurationError(f"malformed generator parameter {part!r}")
        if key == "seed":
            if ".." in value:
                lo, _, hi = value.partition("..")
                seeds = list(range(int(lo), int(hi) + 1))
                if not seeds:
                    raise ConfigurationError(f"empty seed range {value!r}")
            else:
                seeds = [int(value)]
            continue
        if key not in _KEYS:
            raise ConfigurationError(
                f"unknown generator parameter {key!r}; choose from {sorted(_KEYS)} or seed")
        name, conv = _KEYS[key]
        try:
            fields[name] = conv(value)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {value!r}") from exc
    base = GenSpec(kind=kind, seed=0, **fields)
    _validate(base)
    return [replace(base, seed=s + seed_offset) for s in seeds]
