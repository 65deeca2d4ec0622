# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernel for the exhaustive offline optimum.

Mirrors ``_opt_fallback.search_assignments`` exactly (same inputs, same
lexicographic tie-break), but runs the depth-first enumeration over C arrays.
Callers must guarantee that node masks fit in 64 bits and that the total cost
of any assignment fits in a signed 64-bit integer; ``oracle`` checks both and
falls back to the Python kernel otherwise.
"""

from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc


def search_assignments(list candidates, list path_masks, list node_costs, int n_times):
    cdef int n = len(candidates)
    cdef int n_nodes = len(node_costs)
    cdef int total_cands = 0
    cdef int i, j, k, t, level
    cdef uint64_t old, extra
    cdef int64_t delta, total, best_cost
    cdef bint found
    cdef int *cand_flat = NULL
    cdef int *cand_off = NULL
    cdef uint64_t *masks = NULL
    cdef int64_t *costs = NULL
    cdef uint64_t *by_time = NULL
    cdef int *choice = NULL
    cdef int *saved_time = NULL
    cdef uint64_t *saved_mask = NULL
    cdef int64_t *saved_delta = NULL
    cdef int *best_assign = NULL

    if n == 0:
        return 0, ()
    for i in range(n):
        total_cands += len(candidates[i])

    cand_flat = <int *> malloc(total_cands * sizeof(int))
    cand_off = <int *> malloc((n + 1) * sizeof(int))
    masks = <uint64_t *> malloc(n * sizeof(uint64_t))
    costs = <int64_t *> malloc(n_nodes * sizeof(int64_t))
    by_time = <uint64_t *> malloc(n_times * sizeof(uint64_t))
    choice = <int *> malloc(n * sizeof(int))
    saved_time = <int *> malloc(n * sizeof(int))
    saved_mask = <uint64_t *> malloc(n * sizeof(uint64_t))
    saved_delta = <int64_t *> malloc(n * sizeof(int64_t))
    best_assign = <int *> malloc(n * sizeof(int))
    if (cand_flat == NULL or cand_off == NULL or masks == NULL or costs == NULL
            or by_time == NULL or choice == NULL or saved_time == NULL
            or saved_mask == NULL or saved_delta == NULL or best_assign == NULL):
        free(cand_flat); free(cand_off); free(masks); free(costs); free(by_time)
        free(choice); free(saved_time); free(saved_mask); free(saved_delta)
        free(best_assign)
        raise MemoryError()

    try:
        k = 0
        for i in range(n):
            cand_off[i] = k
            for j in range(len(candidates[i])):
                cand_flat[k] = candidates[i][j]
                k += 1
            masks[i] = path_masks[i]
        cand_off[n] = k
        for i in range(n_nodes):
            costs[i] = node_costs[i]
        for i in range(n_times):
            by_time[i] = 0

        total = 0
        best_cost = 0
        found = False
        level = 0
        choice[0] = 0

        # Depth-first odometer over all assignments; levels are requests.
        # Candidates per request are in increasing time order and only strict
        # improvements replace the incumbent, so the first minimum found is
        # the lexicographically smallest one.
        while level >= 0:
            if level == n:
                if not found or total < best_cost:
                    found = True
                    best_cost = total
                    for i in range(n):
                        best_assign[i] = cand_flat[cand_off[i] + choice[i]]
                level -= 1
                by_time[saved_time[level]] = saved_mask[level]
                total -= saved_delta[level]
                choice[level] += 1
                continue
            if choice[level] >= cand_off[level + 1] - cand_off[level]:
                level -= 1
                if level >= 0:
                    by_time[saved_time[level]] = saved_mask[level]
                    total -= saved_delta[level]
                    choice[level] += 1
                continue
            t = cand_flat[cand_off[level] + choice[level]]
            old = by_time[t]
            extra = masks[level] & ~old
            delta = 0
            j = 0
            while extra:
                if extra & 1:
                    delta += costs[j]
                extra >>= 1
                j += 1
            saved_time[level] = t
            saved_mask[level] = old
            saved_delta[level] = delta
            by_time[t] = old | masks[level]
            total += delta
            level += 1
            if level < n:
                choice[level] = 0

        return best_cost, tuple(best_assign[i] for i in range(n))
    finally:
        free(cand_flat); free(cand_off); free(masks); free(costs); free(by_time)
        free(choice); free(saved_time); free(saved_mask); free(saved_delta)
        free(best_assign)
