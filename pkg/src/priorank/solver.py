"""Exact minimum-violation ordering solver.

Given weighted soft precedence constraints and optional hard ones, find the
minimum achievable total weight of violated soft constraints over all
permutations of the requirements, and enumerate every optimal permutation up
to a cap.

The constraint digraph decomposes into strongly connected components: pairs
in different components can always be ordered for free along the condensation,
so the optimal cost is the sum of per-component optima and conflicts stay
localized. Components small enough get an exact subset-DP cost table, which
doubles as a perfect lower bound during enumeration; oversized components fall
back to branch and bound with the classic pairwise bound. Enumeration walks
prefixes in canonical id order, so solutions come out already sorted
lexicographically.

All arithmetic is exact: weights are scaled to integers (fractions via their
common denominator), so cost comparisons never suffer float rounding.
"""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InfeasibleError, ModelValidationError
from .model import HARD, ConstraintGraph, Ranking, Weight

DEFAULT_SOLUTION_CAP = 50

# Components up to this size get the exact subset-DP table (2^size states).
_DP_LIMIT = 16


@dataclass(frozen=True)
class SolverInstance:
    """A flattened ordering problem.

    ``requirement_ids`` is the canonical (lexicographic) id order; soft edges
    are ``(before, after, weight)`` with finite positive weights; hard edges
    must be respected outright and are not costed.
    """

    requirement_ids: tuple[str, ...]
    soft_edges: tuple[tuple[str, str, int | Fraction], ...] = ()
    hard_edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.requirement_ids:
            raise ModelValidationError("solver instance needs at least one requirement")
        if len(set(self.requirement_ids)) != len(self.requirement_ids):
            raise ModelValidationError("solver instance has duplicate requirement ids")
        known = set(self.requirement_ids)
        for before, after, weight in self.soft_edges:
            _check_endpoints(before, after, known)
            if isinstance(weight, bool) or not isinstance(weight, (int, Fraction)) or weight <= 0:
                raise ModelValidationError(f"soft edge weight must be positive and exact, got {weight!r}")
        for before, after in self.hard_edges:
            _check_endpoints(before, after, known)

    @classmethod
    def from_graphs(
        cls,
        requirement_ids: Iterable[str],
        graphs: Sequence[ConstraintGraph],
    ) -> "SolverInstance":
        """Flatten several constraint graphs into one instance.

        Edges repeated across graphs stay separate soft constraints (a shared
        pair costs once per graph); HARD edges go to the hard set.
        """
        ids = tuple(sorted(set(requirement_ids)))
        soft: list[tuple[str, str, int | Fraction]] = []
        hard: list[tuple[str, str]] = []
        for graph in graphs:
            for edge in graph.edges:
                if edge.is_hard:
                    hard.append((edge.before, edge.after))
                else:
                    soft.append((edge.before, edge.after, _exact(edge.weight)))
        return cls(ids, tuple(soft), tuple(hard))


@dataclass(frozen=True)
class SolverResult:
    """Minimum violation cost plus the optimal permutations found.

    ``exhausted`` is True iff every optimal permutation is present; when the
    enumeration hit the cap, the list holds exactly the cap lexicographically
    smallest ones. ``nodes`` counts search-tree nodes expanded, a
    deterministic measure of effort.
    """

    cost: int | Fraction
    solutions: tuple[Ranking, ...]
    exhausted: bool
    nodes: int = 0


def _check_endpoints(before: str, after: str, known: set[str]) -> None:
    if before == after:
        raise ModelValidationError(f"self-loop edge on {before!r}")
    for endpoint in (before, after):
        if endpoint not in known:
            raise ModelValidationError(f"edge references unknown requirement {endpoint!r}")


def _exact(weight: Weight) -> int | Fraction:
    if weight is HARD:
        raise ModelValidationError("HARD weight cannot be used as a soft edge")
    if isinstance(weight, float):
        if weight.is_integer():
            return int(weight)
        # Use the decimal rendering so 0.1 means 1/10, not its binary float.
        return Fraction(str(weight))
    return weight


def violation_cost(ranking: Ranking, instance: SolverInstance) -> int | Fraction:
    """Total weight of soft edges the ranking places in the wrong order."""
    ranking.check_universe(instance.requirement_ids)
    total: int | Fraction = 0
    for before, after, weight in instance.soft_edges:
        if ranking.position(before) > ranking.position(after):
            total += weight
    return total


def _find_hard_cycle(n: int, successors: list[list[int]], ids: Sequence[str]) -> tuple[str, ...] | None:
    """Return one directed cycle in the hard-edge graph, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = [WHITE] * n
    parent = [-1] * n
    for root in range(n):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(successors[root]))]
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for child in it:
                if color[child] == WHITE:
                    color[child] = GREY
                    parent[child] = node
                    stack.append((child, iter(successors[child])))
                    advanced = True
                    break
                if color[child] == GREY:
                    cycle = [child]
                    cur = node
                    while cur != child:
                        cycle.append(cur)
                        cur = parent[cur]
                    cycle.reverse()
                    return tuple(ids[i] for i in cycle)
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def _strongly_connected_components(n: int, adjacency: list[list[int]]) -> tuple[list[int], list[list[int]]]:
    """Kosaraju, iterative. Returns (component id per node, member lists)."""
    order: list[int] = []
    visited = [False] * n
    for root in range(n):
        if visited[root]:
            continue
        visited[root] = True
        stack: list[tuple[int, int]] = [(root, 0)]
        while stack:
            node, ptr = stack[-1]
            if ptr < len(adjacency[node]):
                stack[-1] = (node, ptr + 1)
                child = adjacency[node][ptr]
                if not visited[child]:
                    visited[child] = True
                    stack.append((child, 0))
            else:
                order.append(node)
                stack.pop()
    reverse: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for v in adjacency[u]:
            reverse[v].append(u)
    component = [-1] * n
    members: list[list[int]] = []
    for root in reversed(order):
        if component[root] != -1:
            continue
        cid = len(members)
        component[root] = cid
        group = [root]
        work = [root]
        while work:
            u = work.pop()
            for v in reverse[u]:
                if component[v] == -1:
                    component[v] = cid
                    group.append(v)
                    work.append(v)
        members.append(sorted(group))
    return component, members


def _component_cost_table(
    members: list[int],
    w: list[list[int]],
    hard_pred: list[int],
) -> list[int]:
    """Exact min internal violation cost for every subset of one component.

    ``table[mask]`` is the cheapest internal cost of ordering exactly the
    members in ``mask`` (local bit positions follow ``members`` order),
    honoring hard edges inside the component. Computed by picking each
    feasible first element: it pays the weight of edges wanting any other
    subset member before it.
    """
    s = len(members)
    size = 1 << s
    position = {node: i for i, node in enumerate(members)}
    # local hard predecessor masks
    hard_local = [0] * s
    for li, node in enumerate(members):
        mask = 0
        preds = hard_pred[node]
        for lj, other in enumerate(members):
            if preds >> other & 1:
                mask |= 1 << lj
        hard_local[li] = mask

    # prefix_pay[k][T]: weight of edges wanting any member of T before k
    prefix_pay: list[list[int]] = []
    for li, node in enumerate(members):
        column = [w[other][node] for other in members]
        row = [0] * size
        for mask in range(1, size):
            low = (mask & -mask).bit_length() - 1
            row[mask] = row[mask & (mask - 1)] + column[low]
        prefix_pay.append(row)

    table = [0] * size
    for mask in range(1, size):
        best = -1
        rest_bits = mask
        while rest_bits:
            bit = rest_bits & -rest_bits
            rest_bits ^= bit
            k = bit.bit_length() - 1
            rest = mask ^ bit
            if hard_local[k] & rest:
                continue  # a hard predecessor of k is still in the subset
            value = prefix_pay[k][rest] + table[rest]
            if best < 0 or value < best:
                best = value
        table[mask] = best
    return table


def _classic_min_cost(
    members: list[int],
    w: list[list[int]],
    hard_pred: list[int],
    deadline: "_Deadline",
    counter: list[int],
) -> int:
    """Branch and bound with the pairwise bound, for one oversized component."""
    s = len(members)
    wl = [[w[a][b] for b in members] for a in members]
    hard_local = [0] * s
    index = {node: i for i, node in enumerate(members)}
    for li, node in enumerate(members):
        for other in members:
            if hard_pred[node] >> other & 1:
                hard_local[li] |= 1 << index[other]

    pair_min = [[min(wl[i][j], wl[j][i]) if i != j else 0 for j in range(s)] for i in range(s)]
    inc = [sum(wl[r][k] for r in range(s) if r != k) for k in range(s)]
    min_out = [sum(pair_min[k][r] for r in range(s) if r != k) for k in range(s)]
    pending = sum(min_out) // 2
    unplaced = list(range(s))
    full = (1 << s) - 1

    def place(k: int) -> None:
        nonlocal pending
        pending -= min_out[k]
        unplaced.remove(k)
        for j in unplaced:
            inc[j] -= wl[k][j]
            min_out[j] -= pair_min[k][j]

    def unplace(k: int) -> None:
        nonlocal pending
        bisect.insort(unplaced, k)
        for j in unplaced:
            if j != k:
                inc[j] += wl[k][j]
                min_out[j] += pair_min[k][j]
        pending += min_out[k]

    # greedy incumbent
    best = 0
    order = []
    placed = 0
    for _ in range(s):
        pick = None
        for k in unplaced:
            if hard_local[k] & ~placed:
                continue
            if pick is None or inc[k] < inc[pick]:
                pick = k
        best += inc[pick]
        order.append(pick)
        placed |= 1 << pick
        place(pick)
    for k in reversed(order):
        unplace(k)
    if best == 0:
        return 0

    memo: dict[int, int] = {}

    def walk(placed: int, g: int) -> None:
        nonlocal best
        counter[0] += 1
        if placed == full:
            if g < best:
                best = g
            return
        if g + pending >= best:
            return
        seen = memo.get(placed)
        if seen is not None and g >= seen:
            return
        memo[placed] = g
        if deadline.expired():
            return
        candidates = [k for k in unplaced if not (hard_local[k] & ~placed)]
        candidates.sort(key=lambda k: (inc[k], k))
        for k in candidates:
            step = inc[k]
            if g + step + pending - min_out[k] >= best:
                continue
            place(k)
            walk(placed | (1 << k), g + step)
            unplace(k)

    walk(0, 0)
    return best


class _Deadline:
    __slots__ = ("at",)

    def __init__(self, seconds: float | None):
        self.at = None if seconds is None else time.monotonic() + seconds

    def expired(self) -> bool:
        return self.at is not None and time.monotonic() > self.at


class _Search:
    """Decomposed search state for one instance."""

    def __init__(self, instance: SolverInstance, deadline: _Deadline):
        ids = instance.requirement_ids
        self.ids = ids
        self.n = n = len(ids)
        index = {rid: i for i, rid in enumerate(ids)}
        self.deadline = deadline
        self.nodes = 0

        # Scale all weights to integers; costs are divided back at the end.
        scale = 1
        for _, _, weight in instance.soft_edges:
            if isinstance(weight, Fraction):
                scale = math.lcm(scale, weight.denominator)
        self.scale = scale

        # w[x][y] = total soft weight wanting x before y; placing y first costs it.
        w = [[0] * n for _ in range(n)]
        for before, after, weight in instance.soft_edges:
            w[index[before]][index[after]] += int(weight * scale)
        self.w = w

        self.hard_pred = [0] * n
        hard_successors: list[list[int]] = [[] for _ in range(n)]
        for before, after in instance.hard_edges:
            b, a = index[before], index[after]
            self.hard_pred[a] |= 1 << b
            hard_successors[b].append(a)
        cycle = _find_hard_cycle(n, hard_successors, ids)
        if cycle is not None:
            raise InfeasibleError(cycle)

        adjacency: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            row = w[i]
            for j in range(n):
                if row[j] > 0:
                    adjacency[i].append(j)
        for b in range(n):
            for a in hard_successors[b]:
                if w[b][a] == 0:
                    adjacency[b].append(a)

        self.comp_of, self.components = _strongly_connected_components(n, adjacency)

        # Exact cost tables for small components; oversized ones use the
        # pairwise bound and a dedicated branch and bound for their optimum.
        self.tables: dict[int, list[int]] = {}
        self.local_bit: list[int] = [0] * n
        self.local_mask: list[int] = []
        self.big: list[int] = []
        for cid, members in enumerate(self.components):
            self.local_mask.append((1 << len(members)) - 1)
            if len(members) == 1:
                continue
            for li, node in enumerate(members):
                self.local_bit[node] = 1 << li
            if len(members) <= _DP_LIMIT:
                self.tables[cid] = _component_cost_table(members, w, self.hard_pred)
            else:
                self.big.append(cid)

        self.h_exact = sum(table[-1] for table in self.tables.values())

        # Pairwise-bound machinery, restricted to pairs inside big components.
        big_set = set(self.big)
        self.pair_min = [[0] * n for _ in range(n)]
        for i in range(n):
            ci = self.comp_of[i]
            if ci not in big_set:
                continue
            for j in range(n):
                if i != j and self.comp_of[j] == ci:
                    self.pair_min[i][j] = min(w[i][j], w[j][i])
        self.min_out = [sum(self.pair_min[k][r] for r in range(n) if r != k) for k in range(n)]
        self.pending_min = sum(self.min_out) // 2

        self.inc = [sum(w[r][k] for r in range(n) if r != k) for k in range(n)]
        self.unplaced = list(range(n))
        self.full_mask = (1 << n) - 1

    # -- incremental state ----------------------------------------------

    def _place(self, k: int) -> None:
        cid = self.comp_of[k]
        table = self.tables.get(cid)
        if table is not None:
            mask = self.local_mask[cid]
            shrunk = mask & ~self.local_bit[k]
            self.h_exact += table[shrunk] - table[mask]
            self.local_mask[cid] = shrunk
        w_k = self.w[k]
        pm_k = self.pair_min[k]
        inc = self.inc
        min_out = self.min_out
        self.pending_min -= min_out[k]
        for j in self.unplaced:
            if j != k:
                inc[j] -= w_k[j]
                min_out[j] -= pm_k[j]
        self.unplaced.remove(k)

    def _unplace(self, k: int) -> None:
        bisect.insort(self.unplaced, k)
        w_k = self.w[k]
        pm_k = self.pair_min[k]
        inc = self.inc
        min_out = self.min_out
        for j in self.unplaced:
            if j != k:
                inc[j] += w_k[j]
                min_out[j] += pm_k[j]
        self.pending_min += self.min_out[k]
        cid = self.comp_of[k]
        table = self.tables.get(cid)
        if table is not None:
            mask = self.local_mask[cid]
            grown = mask | self.local_bit[k]
            self.h_exact += table[grown] - table[mask]
            self.local_mask[cid] = grown

    def _child_bound_delta(self, k: int) -> int:
        """Lower-bound decrease of h if k is placed next (for pre-pruning)."""
        cid = self.comp_of[k]
        table = self.tables.get(cid)
        if table is not None:
            mask = self.local_mask[cid]
            return table[mask] - table[mask & ~self.local_bit[k]]
        return self.min_out[k]

    # -- passes ----------------------------------------------------------

    def greedy_order(self) -> tuple[list[int], int]:
        """Hard-feasible cheapest-next order; the deadline fallback answer."""
        order: list[int] = []
        cost = 0
        placed = 0
        for _ in range(self.n):
            pick = None
            for k in self.unplaced:
                if self.hard_pred[k] & ~placed:
                    continue
                if pick is None or self.inc[k] < self.inc[pick]:
                    pick = k
            cost += self.inc[pick]
            order.append(pick)
            placed |= 1 << pick
            self._place(pick)
        for k in reversed(order):
            self._unplace(k)
        return order, cost

    def optimal_cost(self) -> int:
        """Sum of per-component optima (scaled integer)."""
        total = self.h_exact
        counter = [0]
        for cid in self.big:
            total += _classic_min_cost(
                self.components[cid], self.w, self.hard_pred, self.deadline, counter
            )
        self.nodes += counter[0]
        return total

    def enumerate_optima(self, target: int, cap: int) -> tuple[list[Ranking], bool]:
        """Collect permutations costing exactly ``target`` (scaled).

        Children are tried in canonical id order, so solutions arrive sorted
        lexicographically; the walk stops after cap+1 finds to flag
        truncation. With every component under the DP limit the bound is
        exact, making each expanded node part of some optimal completion.
        """
        memo: dict[int, int] = {}
        found: list[Ranking] = []
        prefix: list[int] = []
        hard_pred = self.hard_pred
        inc = self.inc
        limit = cap + 1

        def walk(placed: int, g: int) -> bool:
            self.nodes += 1
            if placed == self.full_mask:
                found.append(Ranking(tuple(self.ids[i] for i in prefix)))
                return len(found) < limit
            seen = memo.get(placed)
            if seen is not None and g > seen:
                return True
            memo[placed] = g
            if self.deadline.expired():
                return False
            slack = target - g - self.h_exact - self.pending_min
            for k in list(self.unplaced):
                if hard_pred[k] & ~placed:
                    continue
                if inc[k] - self._child_bound_delta(k) > slack:
                    continue
                step = inc[k]
                self._place(k)
                prefix.append(k)
                keep_going = walk(placed | (1 << k), g + step)
                prefix.pop()
                self._unplace(k)
                if not keep_going:
                    return False
            return True

        completed = walk(0, 0)
        truncated = len(found) > cap or (not completed and self.deadline.expired())
        return found[:cap], not truncated


def solve(
    instance: SolverInstance,
    solution_cap: int = DEFAULT_SOLUTION_CAP,
    *,
    time_budget: float | None = None,
) -> SolverResult:
    """Find the minimum violation cost and all optimal permutations.

    Deterministic: the same instance and cap always produce the same result.
    ``time_budget`` (seconds) is a safety valve for oversized instances; when
    it expires the best solution known so far is returned with ``exhausted``
    False. Raises :class:`InfeasibleError` when the hard edges contain a
    cycle.
    """
    if solution_cap < 1:
        raise ModelValidationError(f"solution_cap must be >= 1, got {solution_cap}")
    deadline = _Deadline(time_budget)
    search = _Search(instance, deadline)
    cost = search.optimal_cost()
    timed_out = deadline.expired()
    solutions, exhausted = search.enumerate_optima(cost, solution_cap)
    if timed_out:
        exhausted = False
    if not solutions:
        # Deadline starvation: fall back to the greedy order so the result
        # always carries at least one ranking consistent with its cost.
        order, cost = search.greedy_order()
        solutions = [Ranking(tuple(instance.requirement_ids[i] for i in order))]
        exhausted = False
    return SolverResult(
        cost=_descale(cost, search.scale),
        solutions=tuple(solutions),
        exhausted=exhausted,
        nodes=search.nodes,
    )


def _descale(cost: int, scale: int) -> int | Fraction:
    if scale == 1:
        return cost
    value = Fraction(cost, scale)
    return int(value) if value.denominator == 1 else value
