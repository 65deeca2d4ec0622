"""Pure-Python enumeration kernel for the exhaustive offline optimum.

Same contract as the compiled kernel in ``_opt_core``: given per-request
candidate time slots, per-request root-path bitmasks and integer node costs,
enumerate every assignment of requests to slots and return the cheapest one.
Arbitrary-width Python integers, so there are no size limits here.
"""

from __future__ import annotations


def search_assignments(candidates, path_masks, node_costs, n_times):
    """Exhaustively minimize total service cost over request-to-slot assignments.

    ``candidates[i]`` lists the admissible time-slot indices for request ``i``
    in increasing time order; ``path_masks[i]`` is the bitmask of nodes on the
    request's root path; ``node_costs[b]`` the integer cost of the node behind
    bit ``b``.  Returns ``(best_cost, best_assignment)`` where the assignment
    is the lexicographically smallest minimizer in request order (enumeration
    is in lexicographic order and only strict improvements are kept).
    """
    n = len(candidates)
    if n == 0:
        return 0, ()

    by_time = [0] * n_times
    chosen = [0] * n
    best_cost = None
    best_assign = None

    def bits_cost(bits):
        total = 0
        while bits:
            low = bits & -bits
            total += node_costs[low.bit_length() - 1]
            bits ^= low
        return total

    def descend(i, total):
        nonlocal best_cost, best_assign
        if i == n:
            if best_cost is None or total < best_cost:
                best_cost = total
                best_assign = tuple(chosen)
            return
        mask = path_masks[i]
        for t in candidates[i]:
            old = by_time[t]
            extra = mask & ~old
            chosen[i] = t
            if extra:
                by_time[t] = old | extra
                descend(i + 1, total + bits_cost(extra))
                by_time[t] = old
            else:
                descend(i + 1, total)

    descend(0, 0)
    return best_cost, best_assign
