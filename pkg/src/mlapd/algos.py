"""The three online algorithms.

Noadd transmits exactly the due request's root path.  Double (path instances
only) extends that path toward later requests while the total stays within
twice the trigger path's cost.  Waterfall keeps a persistent price on every
node and, for each node included in a service, spends that node's cost as a
budget on the pending requests below it — adding paths it can afford and
durably discounting the prices of the first path it cannot.  Every amount of
budget moved is logged in an :class:`InvestmentLedger` so the accounting can
be audited after the run.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .engine import OnlineView
from .errors import ConfigurationError
from .model import Request, Tree


class Noadd:
    """Serve exactly the root path of the due request, nothing else."""

    name = "noadd"

    def __init__(self, tree: Tree):
        self.tree = tree

    def on_due(self, view: OnlineView, due: Request) -> frozenset:
        return frozenset(self.tree.path_to_root(due.node))


class Double:
    """Greedy path extension capped at twice the trigger path's cost.

    Starting from the due request's root path, repeatedly absorb the next
    request in deadline order unless the extended cost would strictly exceed
    the cap (cost exactly equal to the cap is accepted).  The first rejection
    ends the service; rejections are kept for diagnostics.
    """

    name = "double"

    def __init__(self, tree: Tree):
        if not tree.is_path:
            raise ConfigurationError("double runs only on path-shaped trees")
        self.tree = tree
        self.rejections = []

    def on_due(self, view: OnlineView, due: Request) -> frozenset:
        tree = self.tree
        covered = set(tree.path_to_root(due.node))
        cost = sum((tree.costs[v] for v in covered), Fraction(0))
        limit = 2 * cost
        for req in view.active_requests:
            if req.node in covered:
                continue
            extension = tree.path_outside(tree.root, req.node, covered)
            extended = cost + sum((tree.costs[u] for u in extension), Fraction(0))
            if extended > limit:
                self.rejections.append((view.now, req.id, extended, limit))
                break
            covered.update(extension)
            cost = extended
        return frozenset(covered)

    def finalize(self) -> dict:
        return {"rejections": tuple(self.rejections)}


class PriceState:
    """Persistent per-node prices with 0 ≤ p(v) ≤ c(v), initially p = c."""

    __slots__ = ("tree", "_p")

    def __init__(self, tree: Tree):
        self.tree = tree
        self._p = list(tree.costs)

    def __getitem__(self, v: int) -> Fraction:
        return self._p[v]

    def path_total(self, path) -> Fraction:
        return sum((self._p[u] for u in path), Fraction(0))

    def reset(self, v: int) -> None:
        self._p[v] = self.tree.costs[v]

    def scale(self, v: int, factor: Fraction) -> None:
        p = self._p[v] * factor
        assert 0 <= p <= self.tree.costs[v]
        self._p[v] = p

    def snapshot(self) -> tuple:
        return tuple(self._p)


@dataclass(frozen=True)
class Investment:
    """One direct investment: ``investor`` pair put ``amount`` into ``investee``."""
    investor: tuple
    investee: tuple
    amount: Fraction
    overflow: bool


class InvestmentLedger:
    """Record of every direct investment (v,t) → (w,t') with exact amounts.

    Overflow amounts are held pending until the target node is next included
    in a service — that inclusion (possibly later within the same service)
    fixes the investee pair's time.  A run may end with pending amounts for
    nodes never included again; those are reported separately and never enter
    per-pair received totals.
    """

    def __init__(self, tree: Tree):
        self.tree = tree
        self.entries = []
        # pair -> True if a fall added it, False if it was on the trigger path
        self.included = {}
        # investor pairs whose fall broke on an unaffordable path
        self.overflowed = set()
        self._pending = {}

    def note_inclusion(self, node: int, time, fall_added: bool) -> None:
        pair = (node, time)
        assert pair not in self.included, "node included twice in one service"
        self.included[pair] = fall_added
        for investor, amount in self._pending.pop(node, ()):
            self.entries.append(Investment(investor, pair, amount, True))

    def record_direct(self, investor: tuple, investee: tuple, amount) -> None:
        assert amount >= 0
        if amount > 0:
            self.entries.append(Investment(investor, investee, amount, False))

    def record_overflow(self, investor: tuple, node: int, amount) -> None:
        self.overflowed.add(investor)
        if amount > 0:
            self._pending.setdefault(node, []).append((investor, amount))

    def pending(self) -> dict:
        """Unmaterialized overflow amounts, keyed by target node."""
        return {node: tuple(lst) for node, lst in self._pending.items() if lst}

    def made_totals(self) -> dict:
        """Total direct investment committed by each investor pair.

        Pending overflow amounts count: the investor spent that budget at its
        own fall regardless of when (or whether) the target is included.
        """
        totals: dict = {}
        for e in self.entries:
            totals[e.investor] = totals.get(e.investor, Fraction(0)) + e.amount
        for lst in self._pending.values():
            for investor, amount in lst:
                totals[investor] = totals.get(investor, Fraction(0)) + amount
        return totals

    def received_totals(self) -> dict:
        """Total direct investment materialized into each investee pair."""
        totals: dict = {}
        for e in self.entries:
            totals[e.investee] = totals.get(e.investee, Fraction(0)) + e.amount
        return totals


@dataclass(frozen=True)
class FallResult:
    """Outcome of one fall: what node ``node``'s budget bought at ``time``.

    ``overflow_path`` is empty unless the fall broke on an unaffordable path
    with budget still remaining; in that case ``remaining_budget`` > 0 and
    ``overflow_request`` names the request whose path overflowed.  ``events``
    is a step log for human-readable traces.
    """
    node: int
    time: Fraction
    budget: Fraction
    added: tuple
    remaining_budget: Fraction
    overflow_path: tuple
    overflow_request: int | None
    events: tuple


class Waterfall:
    """Price-driven aggregation; persistent state across the whole run."""

    name = "waterfall"

    def __init__(self, tree: Tree, keep_snapshots: bool = False):
        self.tree = tree
        self.prices = PriceState(tree)
        self.ledger = InvestmentLedger(tree)
        self.services = []
        self.snapshots = [] if keep_snapshots else None

    def on_due(self, view: OnlineView, due: Request) -> frozenset:
        tree = self.tree
        t = view.now
        covered: set = set()
        queue: deque = deque()
        # Trigger path first: include it, reset its prices, seed the queue
        # root-to-leaf.  Falls run FIFO; nodes a fall adds are enqueued in
        # the order they were appended.
        for v in tree.path_to_root(due.node):
            covered.add(v)
            self.ledger.note_inclusion(v, t, fall_added=False)
            self.prices.reset(v)
            queue.append(v)
        falls = []
        while queue:
            v = queue.popleft()
            outcome = self._fall(v, covered, view, t)
            falls.append(outcome)
            queue.extend(outcome.added)
        self.services.append((t, due.id, tuple(falls)))
        if self.snapshots is not None:
            self.snapshots.append((t, self.prices.snapshot()))
        return frozenset(covered)

    def _fall(self, v: int, covered: set, view: OnlineView, t) -> FallResult:
        tree, prices, ledger = self.tree, self.prices, self.ledger
        investor = (v, t)
        budget = tree.costs[v]
        b = budget
        added: list = []
        events: list = []
        for req in view.active_requests:
            if req.node in covered or not tree.in_subtree(req.node, v):
                continue
            path = tree.path_outside(v, req.node, covered)
            price = prices.path_total(path)
            if price > b:
                if b == 0:
                    # budget spent exactly; by convention no overflow nodes
                    events.append(("stop", req.id, tuple(path), price))
                    return FallResult(v, t, budget, tuple(added), b, (), None,
                                      tuple(events))
                before = tuple(prices[u] for u in path)
                share = b / price
                for u in path:
                    ledger.record_overflow(investor, u, prices[u] * share)
                    prices.scale(u, 1 - share)
                after = tuple(prices[u] for u in path)
                events.append(("overflow", req.id, tuple(path), price, b,
                               before, after))
                return FallResult(v, t, budget, tuple(added), b, tuple(path),
                                  req.id, tuple(events))
            for u in path:
                ledger.note_inclusion(u, t, fall_added=True)
                ledger.record_direct(investor, (u, t), prices[u])
                covered.add(u)
                added.append(u)
                prices.reset(u)
            b -= price
            events.append(("add", req.id, tuple(path), price, b))
        return FallResult(v, t, budget, tuple(added), b, (), None, tuple(events))

    def finalize(self) -> dict:
        out = {
            "prices": self.prices,
            "ledger": self.ledger,
            "services": tuple(self.services),
        }
        if self.snapshots is not None:
            out["snapshots"] = tuple(self.snapshots)
        return out


ALGORITHMS = {"noadd": Noadd, "double": Double, "waterfall": Waterfall}


def build_algorithm(name: str, tree: Tree, **options):
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    return cls(tree, **options)
