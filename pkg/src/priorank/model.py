"""Domain model: requirements, precedence-constraint graphs, and rankings.

A precedence edge ``(before, after)`` always means "``before`` must occupy an
earlier position than ``after``" in the final ordering. Soft edges carry a
positive weight and may be violated at that cost; edges weighted :data:`HARD`
are non-negotiable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import ModelValidationError


class _HardWeight:
    """Singleton marker for non-retractable edges."""

    _instance: "_HardWeight | None" = None

    def __new__(cls) -> "_HardWeight":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "HARD"

    def __deepcopy__(self, memo: dict) -> "_HardWeight":
        return self


HARD = _HardWeight()

Weight = Union[int, float, Fraction, _HardWeight]

PRIO_GRAPH = "Prio"
DEP_GRAPH = "Dep"
ELI_GRAPH = "Eli"


def _check_id(value: str, what: str) -> str:
    if not isinstance(value, str) or not value or value.strip() != value or " " in value:
        raise ModelValidationError(f"{what} must be a non-empty token, got {value!r}")
    return value


@dataclass(frozen=True)
class Requirement:
    """An atomic prioritizable item.

    ``priority_level`` is the end-user priority: a positive integer where 1 is
    the highest priority. Only the relative order of levels matters.
    """

    id: str
    title: str = ""
    priority_level: int = 1

    def __post_init__(self) -> None:
        _check_id(self.id, "requirement id")
        if not isinstance(self.priority_level, int) or isinstance(self.priority_level, bool):
            raise ModelValidationError(f"priority_level must be an integer, got {self.priority_level!r}")
        if self.priority_level < 1:
            raise ModelValidationError(f"priority_level must be >= 1, got {self.priority_level}")


@dataclass(frozen=True)
class Dependency:
    """``requirement`` cannot be implemented until ``depends_on`` is."""

    requirement: str
    depends_on: str

    def __post_init__(self) -> None:
        _check_id(self.requirement, "dependency requirement")
        _check_id(self.depends_on, "dependency prerequisite")
        if self.requirement == self.depends_on:
            raise ModelValidationError(f"requirement {self.requirement!r} cannot depend on itself")


def _check_weight(weight: Weight) -> Weight:
    if weight is HARD:
        return weight
    if isinstance(weight, bool) or not isinstance(weight, (int, float, Fraction)):
        raise ModelValidationError(f"edge weight must be a positive number or HARD, got {weight!r}")
    if isinstance(weight, float):
        if weight != weight or weight in (float("inf"), float("-inf")):
            raise ModelValidationError("edge weight must be finite")
        if weight.is_integer():
            weight = int(weight)
    if weight <= 0:
        raise ModelValidationError(f"edge weight must be > 0, got {weight!r}")
    return weight


@dataclass(frozen=True)
class PrecedenceEdge:
    """A weighted claim that ``before`` precedes ``after``."""

    before: str
    after: str
    weight: Weight = 1

    def __post_init__(self) -> None:
        _check_id(self.before, "edge endpoint")
        _check_id(self.after, "edge endpoint")
        if self.before == self.after:
            raise ModelValidationError(f"self-loop edge on {self.before!r}")
        object.__setattr__(self, "weight", _check_weight(self.weight))

    @property
    def is_hard(self) -> bool:
        return self.weight is HARD


def _heavier(a: Weight, b: Weight) -> Weight:
    if a is HARD or b is HARD:
        return HARD
    return a if a >= b else b


@dataclass(frozen=True)
class ConstraintGraph:
    """A named set of precedence edges, at most one per ordered pair.

    Individual graphs are typically acyclic, but nothing here enforces that:
    the union of several knowledge sources may well contain cycles, and it is
    the solver's job to arbitrate them.
    """

    name: str
    edges: tuple[PrecedenceEdge, ...] = ()

    def __post_init__(self) -> None:
        seen: set[tuple[str, str]] = set()
        for edge in self.edges:
            key = (edge.before, edge.after)
            if key in seen:
                raise ModelValidationError(f"graph {self.name!r} has duplicate edge {key}")
            seen.add(key)

    @classmethod
    def build(
        cls,
        name: str,
        edges: Iterable[PrecedenceEdge],
        universe: Iterable[str] | None = None,
    ) -> "ConstraintGraph":
        """Build a graph, collapsing duplicate ordered pairs onto the max weight.

        When ``universe`` is given, every endpoint must resolve to it.
        """
        known = set(universe) if universe is not None else None
        collapsed: dict[tuple[str, str], PrecedenceEdge] = {}
        for edge in edges:
            if known is not None:
                for endpoint in (edge.before, edge.after):
                    if endpoint not in known:
                        raise ModelValidationError(
                            f"graph {name!r} references unknown requirement {endpoint!r}"
                        )
            key = (edge.before, edge.after)
            prior = collapsed.get(key)
            if prior is None:
                collapsed[key] = edge
            else:
                collapsed[key] = PrecedenceEdge(edge.before, edge.after, _heavier(prior.weight, edge.weight))
        return cls(name, tuple(collapsed.values()))

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {(e.before, e.after) for e in self.edges}


@dataclass(frozen=True, init=False)
class Ranking:
    """A total order over requirement ids; ``position`` is 1-based."""

    order: tuple[str, ...]
    _positions: dict = field(default_factory=dict, repr=False, compare=False)

    def __init__(self, order: Sequence[str]):
        order = tuple(order)
        if not order:
            raise ModelValidationError("ranking cannot be empty")
        if len(set(order)) != len(order):
            raise ModelValidationError("ranking contains duplicate ids")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_positions", {rid: i + 1 for i, rid in enumerate(order)})

    def position(self, requirement_id: str) -> int:
        try:
            return self._positions[requirement_id]
        except KeyError:
            raise ModelValidationError(f"ranking does not contain {requirement_id!r}") from None

    def id_set(self) -> frozenset[str]:
        return frozenset(self.order)

    def check_universe(self, universe: Iterable[str]) -> "Ranking":
        expected = set(universe)
        if set(self.order) != expected:
            missing = sorted(expected - set(self.order))
            extra = sorted(set(self.order) - expected)
            raise ModelValidationError(
                f"ranking does not cover the requirement set (missing {missing}, extra {extra})"
            )
        return self

    def __len__(self) -> int:
        return len(self.order)

    def __str__(self) -> str:
        return "<" + ", ".join(self.order) + ">"


def check_unique_ids(requirements: Sequence[Requirement]) -> dict[str, Requirement]:
    """Index requirements by id, rejecting duplicates."""
    by_id: dict[str, Requirement] = {}
    for req in requirements:
        if req.id in by_id:
            raise ModelValidationError(f"duplicate requirement id {req.id!r}")
        by_id[req.id] = req
    return by_id


def build_prio_graph(requirements: Sequence[Requirement]) -> ConstraintGraph:
    """Translate end-user priority levels into precedence constraints.

    Emits one weight-1 edge (X, Y) for every ordered pair where X sits on a
    strictly higher priority level than Y (numerically lower level), i.e. the
    transitively complete cross-level relation. Same-level pairs contribute
    nothing.
    """
    if not requirements:
        raise ModelValidationError("cannot build a priority graph from zero requirements")
    by_id = check_unique_ids(requirements)
    edges = []
    for x in requirements:
        for y in requirements:
            if x.priority_level < y.priority_level:
                edges.append(PrecedenceEdge(x.id, y.id, 1))
    return ConstraintGraph.build(PRIO_GRAPH, edges, by_id)


def build_dep_graph(
    dependencies: Sequence[Dependency],
    universe: Iterable[str],
) -> ConstraintGraph:
    """Translate technical dependencies into precedence constraints.

    Each dependency yields one weight-1 edge (prerequisite, dependent): the
    thing depended on should be implemented first. Duplicate dependencies
    collapse to a single edge.
    """
    known = set(universe)
    edges = []
    for i, dep in enumerate(dependencies):
        for endpoint in (dep.requirement, dep.depends_on):
            if endpoint not in known:
                raise ModelValidationError(f"dependency #{i} references unknown requirement {endpoint!r}")
        edges.append(PrecedenceEdge(dep.depends_on, dep.requirement, 1))
    return ConstraintGraph.build(DEP_GRAPH, edges, known)


def transitive_closure(graph: ConstraintGraph) -> set[tuple[str, str]]:
    """All ordered pairs (X, Y) with a directed path X -> ... -> Y, length >= 1.

    Cycles are fine; closing over one produces self-pairs (X, X), which
    consumers of the closure are expected to ignore.
    """
    adjacency: dict[str, list[str]] = {}
    for edge in graph.edges:
        adjacency.setdefault(edge.before, []).append(edge.after)

    closure: set[tuple[str, str]] = set()
    for start in adjacency:
        stack = list(adjacency[start])
        seen: set[str] = set()
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            closure.add((start, node))
            stack.extend(adjacency.get(node, ()))
    return closure
