"""Lateness classification, investment composition, and the charging checks."""

import math
from fractions import Fraction

import pytest

from mlapd import (GenSpec, InputError, analyze, brute_force_opt,
                   build_algorithm, charge_shares, classify_pairs,
                   construct_charge_set, generate, invested_in,
                   invested_onward, pair_investment, run)
from mlapd.analysis import (verify_charge_sets, verify_competitive_bound,
                            verify_investment_bounds, verify_late_paths,
                            verify_phase_structure)

from conftest import GOLDEN_NODES, make_instance

F = Fraction


def waterfall_run(instance):
    trace = run(instance, build_algorithm("waterfall", instance.tree))
    return trace, brute_force_opt(instance)


def test_golden_classification(golden_run):
    inst, trace, opt = golden_run
    tree = inst.tree
    statuses = {(tree.label(s.node), s.time): s
                for s in classify_pairs(inst, trace, opt)}
    assert set(statuses) == {("r", 1), ("u", 1), ("w", 1), ("x", 1)}
    # the optimum serves once at t=1, so every pair is late and, having no
    # later occurrence, critically overdue
    for s in statuses.values():
        assert s.nos == math.inf and s.phase == 1
        assert s.late and s.critically_overdue
    assert statuses[("r", 1)].urgency == 1
    assert statuses[("r", 1)].urgent_node == inst.tree.index("u")
    assert statuses[("x", 1)].urgency == 3


def test_golden_investment_composition(golden_run):
    inst, trace, opt = golden_run
    tree = inst.tree
    ledger = trace.diagnostics["ledger"]
    r, u, w, x = (tree.index(k) for k in "ruwx")

    I = invested_in(ledger)
    assert I == {(r, F(1)): F(4), (u, F(1)): F(1),
                 (w, F(1)): F(4), (x, F(1)): F(6)}

    IM = invested_onward(ledger)
    assert IM == {(r, F(1)): F(4), (u, F(1)): F(1),
                  (w, F(1)): F(0), (x, F(1)): F(0)}
    # IM(u) sits exactly at its (D - L)·c = 1 ceiling

    I_from = pair_investment(ledger)
    assert I_from((r, F(1)), (x, F(1))) == 2
    assert I_from((u, F(1)), (x, F(1))) == 1
    assert I_from((w, F(1)), (x, F(1))) == 0
    # total incoming equals c(x) plus the investments from every other pair
    assert tree.costs[x] + I_from((r, F(1)), (x, F(1))) \
        + I_from((u, F(1)), (x, F(1))) == I[(x, F(1))]


def test_golden_charge_sets_are_identities(golden_run):
    inst, trace, opt = golden_run
    ledger = trace.diagnostics["ledger"]
    statuses = classify_pairs(inst, trace, opt)
    for s in statuses:
        pair = (s.node, s.time)
        assert charge_shares(pair, ledger, statuses) == {
            pair: inst.tree.costs[s.node]}
        assert construct_charge_set(pair, ledger, statuses) == frozenset({pair})


def test_golden_full_report(golden_run):
    inst, trace, opt = golden_run
    report = analyze(inst, trace, opt)
    assert report.ok
    by_name = {c.name: c for c in report.checks}
    assert by_name["investment_bounds"].checked == 15
    assert by_name["late_paths"].checked == 5
    assert by_name["phase_structure"].checked == 4
    assert by_name["charge_sets"].checked == 4
    assert by_name["competitive_bound"].checked == 9
    doc = report.to_json()
    assert doc["ok"] is True and doc["algorithm"] == "waterfall"


EARLY_VARIANT = [("u", 0, 1), ("w", 0, 2), ("x", 0, 3), ("x", 2, 8)]


def test_early_pair_classification():
    # a second x-request pulls the optimum's x-service to t=2, so the
    # waterfall's t=1 inclusion of x (urgency 3) is early, in phase 0
    inst = make_instance(GOLDEN_NODES, EARLY_VARIANT)
    trace, opt = waterfall_run(inst)
    tree = inst.tree
    statuses = classify_pairs(inst, trace, opt)
    by_key = {(tree.label(s.node), s.time): s for s in statuses}

    x1 = by_key[("x", 1)]
    assert (x1.urgency, x1.nos, x1.phase) == (3, 2, 0)
    assert not x1.late and not x1.critically_overdue

    for key in (("r", 1), ("u", 1)):
        s = by_key[key]
        assert s.nos == 2 and s.late and s.critically_overdue

    assert analyze(inst, trace, opt).ok

    ledger = trace.diagnostics["ledger"]
    with pytest.raises(InputError, match="non-late"):
        charge_shares((tree.index("x"), F(1)), ledger, statuses)


def test_chained_charge_shares_regression():
    # a critically-overdue pair that keeps investing afterwards creates two
    # parallel investment chains out of the root; the charge recursion must
    # stop at that pair rather than follow both chains and overcount
    inst = generate(GenSpec(kind="increasing", seed=117, n_nodes=13, n_requests=8))
    trace, opt = waterfall_run(inst)
    report = analyze(inst, trace, opt)
    assert report.ok, [f for c in report.checks for f in c.failures]

    statuses = classify_pairs(inst, trace, opt)
    ledger = trace.diagnostics["ledger"]
    root_pair = (0, F(64, 9))
    shares = charge_shares(root_pair, ledger, statuses)
    assert shares == {(1, F(110, 9)): F(108, 19),
                      (8, F(71, 3)): F(880, 323),
                      (10, F(71, 3)): F(1160, 323)}
    assert sum(shares.values()) == inst.tree.costs[0] == 12


def test_individual_checks_on_generated_corpus():
    for seed in (3, 17, 44, 85):
        inst = generate(GenSpec(kind="random", seed=seed, n_nodes=9, n_requests=8))
        trace, opt = waterfall_run(inst)
        statuses = classify_pairs(inst, trace, opt)
        ledger = trace.diagnostics["ledger"]
        assert verify_late_paths(inst, trace, statuses).ok
        assert verify_investment_bounds(ledger, inst.tree).ok
        assert verify_charge_sets(inst, ledger, statuses).ok
        assert verify_phase_structure(statuses).ok
        assert verify_competitive_bound(inst, trace, opt, statuses).ok


def test_analyze_rejects_mismatched_artifacts(golden_run):
    inst, trace, _ = golden_run
    other = make_instance(GOLDEN_NODES, EARLY_VARIANT)
    other_opt = brute_force_opt(other)
    with pytest.raises(InputError, match="does not belong"):
        analyze(inst, trace, other_opt)
    with pytest.raises(InputError, match="does not belong"):
        classify_pairs(other, trace, other_opt)
