"""Evaluation measures: pairwise disagreement and average index distance.

Disagreement between two total orders is the number of requirement pairs they
order oppositely (the Kendall inversion count). Against a constraint graph it
is counted over the graph's transitive closure, self-pairs excluded, which for
unit weights coincides with the solver's violation cost on a closed graph.
"""

from __future__ import annotations

from typing import Sequence, Union

from .errors import ModelValidationError
from .model import ConstraintGraph, Ranking, transitive_closure

OrderLike = Union[Ranking, ConstraintGraph]


def _graph_pairs(graph: ConstraintGraph) -> list[tuple[str, str]]:
    return [(a, b) for a, b in transitive_closure(graph) if a != b]


def _check_same_universe(a: Ranking, b: Ranking) -> None:
    if a.id_set() != b.id_set():
        raise ModelValidationError("rankings cover different requirement sets")


def disagreement(ord1: OrderLike, ord2: Ranking) -> int:
    """Count pairs ordered one way by ``ord1`` and the other way by ``ord2``.

    ``ord1`` may be a total order or a constraint graph (its closure is the
    pair set). Graph endpoints must all appear in ``ord2``.
    """
    if isinstance(ord1, Ranking):
        _check_same_universe(ord1, ord2)
        pairs = [
            (x, y)
            for i, x in enumerate(ord1.order)
            for y in ord1.order[i + 1 :]
        ]
    else:
        pairs = _graph_pairs(ord1)
        known = ord2.id_set()
        for x, y in pairs:
            if x not in known or y not in known:
                raise ModelValidationError(f"graph pair ({x}, {y}) not covered by the ranking")
    return sum(1 for x, y in pairs if ord2.position(y) < ord2.position(x))


def multiset_disagreement(graphs: Sequence[ConstraintGraph], ranking: Ranking) -> int:
    """Sum of per-graph disagreements; a pair shared by k graphs counts k times.

    This mirrors how the solver costs duplicated constraints.
    """
    return sum(disagreement(graph, ranking) for graph in graphs)


def union_disagreement(graphs: Sequence[ConstraintGraph], ranking: Ranking) -> int:
    """Disagreement over the distinct closure pairs of all graphs together."""
    pairs: set[tuple[str, str]] = set()
    for graph in graphs:
        pairs.update(_graph_pairs(graph))
    known = ranking.id_set()
    for x, y in pairs:
        if x not in known or y not in known:
            raise ModelValidationError(f"graph pair ({x}, {y}) not covered by the ranking")
    return sum(1 for x, y in pairs if ranking.position(y) < ranking.position(x))


def average_distance(ranking: Ranking, gold: Ranking) -> float:
    """Mean absolute index displacement of each requirement between two orders."""
    _check_same_universe(ranking, gold)
    n = len(ranking)
    return sum(abs(ranking.position(r) - gold.position(r)) for r in ranking.order) / n
