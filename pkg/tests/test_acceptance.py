"""The package's headline guarantees, checked end to end on fixed corpora.

Everything here is exact rational arithmetic against the exhaustive optimum:
worst-case ratio bounds for the three algorithms on the instance families
they are proven for, and the full investment-accounting argument behind the
waterfall's depth bound.  Tolerances are zero throughout; a failure means a
real bug, not noise.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction

import pytest

from mlapd import (GenSpec, brute_force_opt, build_algorithm, charge_shares,
                   check_feasible, classify_pairs, generate, invested_in,
                   invested_onward, run, schedule_cost)
from mlapd.algos import Investment
from mlapd.analysis import verify_charge_sets, verify_phase_structure
from mlapd.gen import KINDS
from mlapd.oracle import reference_opt

from conftest import GOLDEN_NODES, GOLDEN_REQUESTS, make_instance

F = Fraction

SWEEP_SEEDS = range(1, 1001)


@dataclass
class Cell:
    spec: GenSpec
    instance: object
    traces: dict
    opt: object = None
    statuses: list = field(default_factory=list)  # waterfall pair statuses


@pytest.fixture(scope="session")
def sweep():
    """1000 mixed instances (5-15 nodes, 3-9 requests), all algorithms run,
    optimum and waterfall classification precomputed."""
    cells = []
    t0 = time.perf_counter()
    for seed in SWEEP_SEEDS:
        spec = GenSpec(kind=KINDS[seed % len(KINDS)], seed=seed,
                       n_nodes=5 + seed % 11, n_requests=3 + seed % 7)
        instance = generate(spec)
        names = ["noadd", "waterfall"] + (["double"] if instance.tree.is_path else [])
        traces = {name: run(instance, build_algorithm(name, instance.tree))
                  for name in names}
        cells.append(Cell(spec, instance, traces))
    run_seconds = time.perf_counter() - t0
    for cell in cells:
        cell.opt = brute_force_opt(cell.instance)
        cell.statuses = classify_pairs(cell.instance, cell.traces["waterfall"],
                                       cell.opt)
    return cells, run_seconds


def ratio(cell, name):
    return schedule_cost(cell.instance.tree, cell.traces[name].schedule) / cell.opt.cost


def test_criterion_01_every_schedule_is_feasible_fast(sweep):
    cells, run_seconds = sweep
    assert len(cells) == 1000
    assert all(len(c.instance.tree) <= 15 and len(c.instance.requests) <= 10
               for c in cells)
    for cell in cells:
        for trace in cell.traces.values():
            verdict = check_feasible(cell.instance, trace.schedule)
            assert verdict.ok, (cell.spec.tag(), verdict.violations)
    assert run_seconds < 60, f"sweep took {run_seconds:.1f}s"


def test_criterion_02_waterfall_never_exceeds_depth(sweep):
    cells, _ = sweep
    for cell in cells:
        assert ratio(cell, "waterfall") <= cell.instance.tree.depth, cell.spec.tag()


def test_criterion_03_noadd_bounds_on_increasing_trees():
    for seed in range(1, 201):
        inst = generate(GenSpec(kind="increasing", seed=seed,
                                n_nodes=5 + seed % 9, n_requests=3 + seed % 7))
        _, _, r = _measured(inst, "noadd")
        assert r <= inst.tree.depth, seed

    for l_factor, bound in ((F(2), F(2)), (F(3), F(3, 2))):
        for seed in range(1, 201):
            inst = generate(GenSpec(kind="l_increasing", seed=seed,
                                    n_nodes=5 + seed % 9, n_requests=3 + seed % 7,
                                    l_factor=l_factor))
            _, _, r = _measured(inst, "noadd")
            assert r <= bound, (str(l_factor), seed)


def test_criterion_04_double_bounds_on_paths():
    for kind in ("path", "geometric_path"):
        for seed in range(1, 101):
            inst = generate(GenSpec(kind=kind, seed=seed,
                                    n_nodes=5 + seed % 9, n_requests=3 + seed % 7))
            depth = inst.tree.depth
            _, _, r = _measured(inst, "double")
            assert r <= 4 - F(1, 2 ** depth), (kind, seed)
            if depth % 2 == 0:
                assert r <= 4 - F(2, 2 ** (depth // 2)), (kind, seed)


def _measured(instance, name):
    trace = run(instance, build_algorithm(name, instance.tree))
    opt = brute_force_opt(instance)
    alg_cost = schedule_cost(instance.tree, trace.schedule)
    return alg_cost, opt.cost, alg_cost / opt.cost


def test_criterion_05_direct_investment_accounting(sweep):
    cells, _ = sweep
    for cell in cells:
        ledger = cell.traces["waterfall"].diagnostics["ledger"]
        costs = cell.instance.tree.costs
        made = ledger.made_totals()
        for (v, t), total in made.items():
            assert total <= costs[v], cell.spec.tag()
        for pair in ledger.overflowed:
            assert made[pair] == costs[pair[0]], cell.spec.tag()
        received = ledger.received_totals()
        for pair, fall_added in ledger.included.items():
            if fall_added:
                assert received.get(pair, F(0)) == costs[pair[0]], cell.spec.tag()


def test_criterion_06_chained_investment_bounds(sweep):
    cells, _ = sweep
    for cell in cells:
        tree = cell.instance.tree
        ledger = cell.traces["waterfall"].diagnostics["ledger"]
        for (v, t), total in invested_in(ledger).items():
            assert total <= tree.levels[v] * tree.costs[v], cell.spec.tag()
        for (v, t), total in invested_onward(ledger).items():
            assert total <= (tree.depth - tree.levels[v]) * tree.costs[v], \
                cell.spec.tag()


def test_criterion_07_charge_sets_distribute_cost_exactly(sweep):
    cells, _ = sweep
    for cell in cells:
        ledger = cell.traces["waterfall"].diagnostics["ledger"]
        result = verify_charge_sets(cell.instance, ledger, cell.statuses)
        assert result.ok, (cell.spec.tag(), result.failures)
        # spot the content of the check: only critically-overdue targets,
        # amounts summing exactly to the pair's node cost
        overdue = {(s.node, s.time) for s in cell.statuses if s.critically_overdue}
        for s in cell.statuses:
            if not s.late:
                continue
            shares = charge_shares((s.node, s.time), ledger, cell.statuses)
            assert set(shares) <= overdue
            assert sum(shares.values()) == cell.instance.tree.costs[s.node]


def test_criterion_08_phase_structure_for_every_algorithm(sweep):
    cells, _ = sweep
    for cell in cells:
        for name, trace in cell.traces.items():
            statuses = (cell.statuses if name == "waterfall"
                        else classify_pairs(cell.instance, trace, cell.opt))
            result = verify_phase_structure(statuses)
            assert result.ok, (cell.spec.tag(), name, result.failures)


def test_criterion_09_pinned_four_node_trace():
    inst = make_instance(GOLDEN_NODES, GOLDEN_REQUESTS)
    r, u, w, x = (inst.tree.index(k) for k in "ruwx")
    trace = run(inst, build_algorithm("waterfall", inst.tree))

    assert len(trace.records) == 1
    assert trace.records[0].nodes == frozenset({r, u, w, x})
    assert trace.records[0].cost == 10

    falls = trace.diagnostics["services"][0][2]
    overflow = falls[0].events[-1]
    assert overflow[0] == "overflow"
    assert overflow[5] == (F(3),) and overflow[6] == (F(1),)  # p(x): 3 -> 1
    assert trace.diagnostics["prices"][x] == 3  # reset on inclusion

    ledger = trace.diagnostics["ledger"]
    assert ledger.entries == [
        Investment((r, F(1)), (w, F(1)), F(2), False),
        Investment((r, F(1)), (x, F(1)), F(2), True),
        Investment((u, F(1)), (x, F(1)), F(1), False),
    ]


def test_criterion_10_secondary_oracle_agreement():
    count = 0
    for seed in range(200):
        if count == 100:
            break
        spec = GenSpec(kind=KINDS[seed % len(KINDS)], seed=seed,
                       n_nodes=4 + seed % 6, n_requests=1 + seed % 3)
        inst = generate(spec)
        assert len(inst.requests) <= 3
        primary = brute_force_opt(inst)
        secondary = reference_opt(inst)
        assert primary.cost == secondary.cost, spec.tag()
        assert check_feasible(inst, primary.schedule).ok
        assert check_feasible(inst, secondary.schedule).ok
        count += 1
    assert count == 100
