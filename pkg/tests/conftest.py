"""Shared fixtures: the hand-checked 4-node instance and small builders."""

from fractions import Fraction

import pytest

from mlapd import Request, Tree, build_instance


def make_tree(nodes):
    return Tree.from_nodes(nodes)


def make_instance(nodes, requests, perturb=False):
    """requests: (label, arrival, deadline) triples, ids assigned in order."""
    tree = Tree.from_nodes(nodes)
    reqs = [Request(i, tree.index(lab), Fraction(a), Fraction(d))
            for i, (lab, a, d) in enumerate(requests)]
    return build_instance(tree, reqs, perturb=perturb)


GOLDEN_NODES = [("r", None, 4), ("u", "r", 1), ("w", "r", 2), ("x", "u", 3)]
GOLDEN_REQUESTS = [("u", 0, 1), ("w", 0, 2), ("x", 0, 3)]


@pytest.fixture
def golden_instance():
    return make_instance(GOLDEN_NODES, GOLDEN_REQUESTS)


@pytest.fixture
def golden_run(golden_instance):
    """(instance, trace, opt) for the waterfall on the 4-node instance."""
    from mlapd import brute_force_opt, build_algorithm, run
    trace = run(golden_instance, build_algorithm("waterfall", golden_instance.tree))
    opt = brute_force_opt(golden_instance)
    return golden_instance, trace, opt
