"""Instance generators: determinism, family constraints, spec parsing."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlapd import ConfigurationError, GenSpec, generate, parse_gen
from mlapd import build_algorithm, run
from mlapd.gen import KINDS


def test_same_spec_same_instance():
    spec = GenSpec(kind="random", seed=7, n_nodes=9, n_requests=6)
    a, b = generate(spec), generate(spec)
    assert a.fingerprint == b.fingerprint
    assert a.requests == b.requests
    assert generate(GenSpec(kind="random", seed=8, n_nodes=9, n_requests=6)
                    ).fingerprint != a.fingerprint


@given(st.sampled_from(KINDS), st.integers(min_value=0, max_value=10 ** 6))
@settings(max_examples=100, deadline=None)
def test_generated_instances_are_well_formed(kind, seed):
    spec = GenSpec(kind=kind, seed=seed, n_nodes=8, n_requests=6)
    inst = generate(spec)
    assert len(inst.tree) == 8
    deadlines = [r.deadline for r in inst.requests]
    assert len(set(deadlines)) == len(deadlines)
    for r in inst.requests:
        assert 0 <= r.arrival <= r.deadline


def test_increasing_costs_grow_along_every_path():
    inst = generate(GenSpec(kind="increasing", seed=5, n_nodes=12, n_requests=4))
    tree = inst.tree
    for v in range(1, len(tree)):
        assert tree.costs[v] > tree.costs[tree.parents[v]]


def test_l_increasing_respects_the_factor():
    spec = GenSpec(kind="l_increasing", seed=5, n_nodes=8, n_requests=4,
                   l_factor=Fraction(3))
    tree = generate(spec).tree
    for v in range(1, len(tree)):
        assert tree.costs[v] >= 3 * tree.costs[tree.parents[v]]


def test_path_kinds_are_paths():
    for kind in ("path", "geometric_path"):
        assert generate(GenSpec(kind=kind, seed=2, n_nodes=6, n_requests=4)).tree.is_path


def test_geometric_path_defeats_doubling():
    # nested requests on 3^v costs: every extension busts the doubling cap,
    # so the run must log at least one rejection
    inst = generate(GenSpec(kind="geometric_path", seed=0, n_nodes=6, n_requests=5))
    assert [str(c) for c in inst.tree.costs] == ["1", "3", "9", "27", "81", "243"]
    trace = run(inst, build_algorithm("double", inst.tree))
    assert len(trace.diagnostics["rejections"]) >= 1
    assert len(trace.records) == 5  # nothing ever merges


def test_depth_cap_is_respected():
    spec = GenSpec(kind="random", seed=11, n_nodes=14, n_requests=3, depth=3)
    assert generate(spec).tree.depth <= 3


def test_validation_errors():
    with pytest.raises(ConfigurationError, match="unknown generator kind"):
        generate(GenSpec(kind="star", seed=1))
    with pytest.raises(ConfigurationError, match="n_nodes"):
        generate(GenSpec(kind="random", seed=1, n_nodes=0))
    with pytest.raises(ConfigurationError, match="l_factor"):
        generate(GenSpec(kind="l_increasing", seed=1, l_factor=Fraction(1)))
    with pytest.raises(ConfigurationError, match="depth"):
        generate(GenSpec(kind="random", seed=1, n_nodes=4, depth=9))


def test_parse_gen_single_and_range():
    (spec,) = parse_gen("increasing:seed=4:n=10:reqs=5:cmax=9")
    assert spec == GenSpec(kind="increasing", seed=4, n_nodes=10,
                           n_requests=5, cost_max=9)

    specs = parse_gen("path:seed=1..5:n=6")
    assert [s.seed for s in specs] == [1, 2, 3, 4, 5]
    assert all(s.kind == "path" and s.n_nodes == 6 for s in specs)

    (spec,) = parse_gen("l_increasing:seed=2:L=5/2")
    assert spec.l_factor == Fraction(5, 2)


def test_parse_gen_seed_offset_rebases_sweeps():
    specs = parse_gen("random:seed=1..3", seed_offset=100)
    assert [s.seed for s in specs] == [101, 102, 103]


def test_parse_gen_rejects_garbage():
    with pytest.raises(ConfigurationError):
        parse_gen("random:seed=1:wat=2")
    with pytest.raises(ConfigurationError):
        parse_gen("nosuchkind:seed=1")
    with pytest.raises(ConfigurationError):
        parse_gen("random:seed")  # missing '='
    (spec,) = parse_gen("random")  # seed defaults to 0
    assert spec.seed == 0
