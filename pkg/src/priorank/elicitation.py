"""Interactive elicitation loop.

A session alternates exact solving with pairwise elicitation: whenever several
optimal orderings tie, the pairs they disagree on are put to an analyst, whose
verdicts become weight-1 edges in an "Eli" constraint graph that feeds the
next solve. The loop ends when a unique optimum remains (CONVERGED), the pair
budget runs out (BUDGET_EXHAUSTED), or every disagreement pair has already
been asked (PLATEAU).

Mutations on a session are meant to be serialized by the caller; reads of the
dataclass fields are safe on any stable snapshot. Independent sessions can run
in parallel freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import ModelValidationError, SessionStateError
from .model import (
    ELI_GRAPH,
    ConstraintGraph,
    PrecedenceEdge,
    Ranking,
    Requirement,
    check_unique_ids,
)
from .solver import DEFAULT_SOLUTION_CAP, SolverInstance, SolverResult, solve

DEFAULT_MAX_ELI_PAIR = 100

Pair = tuple[str, str]


class SessionStatus(str, Enum):
    ACTIVE = "active"
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget_exhausted"
    PLATEAU = "plateau"


class Verdict(str, Enum):
    FIRST_PRECEDES = "first_precedes"
    SECOND_PRECEDES = "second_precedes"
    UNDECIDED = "undecided"


def canonical_pair(a: str, b: str) -> Pair:
    """Unordered pair in canonical id order."""
    if a == b:
        raise ModelValidationError(f"pair needs two distinct ids, got {a!r} twice")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class ComparisonQuery:
    """One pair to put to the analyst.

    ``frequency`` counts how many solution pairs of the latest solve disagree
    on it; higher means answering it discriminates more ties.
    """

    pair: Pair
    frequency: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "pair", canonical_pair(*self.pair))


@dataclass(frozen=True)
class AnalystResponse:
    """A verdict on a pair, relative to the pair's canonical id order."""

    pair: Pair
    verdict: Verdict

    def __post_init__(self) -> None:
        object.__setattr__(self, "pair", canonical_pair(*self.pair))
        object.__setattr__(self, "verdict", Verdict(self.verdict))

    @classmethod
    def preferring(cls, winner: str, loser: str) -> "AnalystResponse":
        """Convenience: the response stating ``winner`` precedes ``loser``."""
        pair = canonical_pair(winner, loser)
        verdict = Verdict.FIRST_PRECEDES if pair[0] == winner else Verdict.SECOND_PRECEDES
        return cls(pair=pair, verdict=verdict)

    def preferred(self) -> Pair | None:
        """(preferred, other) ids, or None for UNDECIDED."""
        if self.verdict is Verdict.UNDECIDED:
            return None
        a, b = self.pair
        return (a, b) if self.verdict is Verdict.FIRST_PRECEDES else (b, a)


@dataclass(frozen=True)
class HistoryEntry:
    pair: Pair
    verdict: Verdict
    iteration: int


def pairs_in_disagreement(a: Ranking, b: Ranking) -> set[Pair]:
    """Unordered pairs the two total orders place oppositely."""
    if a.id_set() != b.id_set():
        raise ModelValidationError("rankings cover different requirement sets")
    out: set[Pair] = set()
    for i, x in enumerate(a.order):
        for y in a.order[i + 1 :]:
            if b.position(y) < b.position(x):
                out.add(canonical_pair(x, y))
    return out


@dataclass
class ElicitationSession:
    """Mutable state of one elicitation run.

    ``source_graphs`` hold the fixed domain knowledge; analyst verdicts
    accumulate separately and are exposed as :meth:`eli_graph`.
    """

    requirements: tuple[Requirement, ...]
    source_graphs: tuple[ConstraintGraph, ...]
    max_eli_pair: int = DEFAULT_MAX_ELI_PAIR
    solution_cap: int = DEFAULT_SOLUTION_CAP
    gold: Ranking | None = None
    time_budget: float | None = None

    eli_pair: int = 0
    asked_pairs: set[Pair] = field(default_factory=set)
    pending_queries: tuple[ComparisonQuery, ...] = ()
    last_result: SolverResult | None = None
    status: SessionStatus = SessionStatus.ACTIVE
    history: list[HistoryEntry] = field(default_factory=list)
    iteration: int = 0
    total_nodes: int = 0
    warnings: list[str] = field(default_factory=list)
    # directed Eli edges keyed by canonical pair; the analyst's latest word wins
    eli_edges: dict[Pair, Pair] = field(default_factory=dict)

    def __post_init__(self) -> None:
        by_id = check_unique_ids(self.requirements)
        if self.max_eli_pair < 0:
            raise ModelValidationError(f"max_eli_pair must be >= 0, got {self.max_eli_pair}")
        if self.gold is not None:
            self.gold.check_universe(by_id)
        for graph in self.source_graphs:
            for edge in graph.edges:
                if edge.before not in by_id or edge.after not in by_id:
                    raise ModelValidationError(
                        f"graph {graph.name!r} references unknown requirement"
                    )

    # -- derived views -------------------------------------------------

    @property
    def requirement_ids(self) -> tuple[str, ...]:
        return tuple(sorted(r.id for r in self.requirements))

    def eli_graph(self) -> ConstraintGraph:
        edges = tuple(
            PrecedenceEdge(before, after, 1)
            for _, (before, after) in sorted(self.eli_edges.items())
        )
        return ConstraintGraph(ELI_GRAPH, edges)

    def budget_remaining(self) -> int:
        return self.max_eli_pair - self.eli_pair

    def solver_instance(self) -> SolverInstance:
        return SolverInstance.from_graphs(
            self.requirement_ids, (*self.source_graphs, self.eli_graph())
        )

    # -- state machine -------------------------------------------------

    def step(self) -> "ElicitationSession":
        """Re-solve with everything known and advance the loop.

        Ends the session when a single optimum remains, the budget is spent,
        or no unasked disagreement pair exists; otherwise fills
        ``pending_queries`` for the analyst.
        """
        if self.status is not SessionStatus.ACTIVE:
            raise SessionStateError(f"cannot step a {self.status.value} session")
        if self.pending_queries:
            raise SessionStateError("cannot step while answers are outstanding")
        result = solve(self.solver_instance(), self.solution_cap, time_budget=self.time_budget)
        self.last_result = result
        self.iteration += 1
        self.total_nodes += result.nodes
        if not result.exhausted:
            self.warnings.append(
                f"iteration {self.iteration}: optimal set truncated at {self.solution_cap};"
                " disagreement pairs were mined from the truncated set"
            )
        if len(result.solutions) == 1:
            self.status = SessionStatus.CONVERGED
        elif self.eli_pair >= self.max_eli_pair:
            self.status = SessionStatus.BUDGET_EXHAUSTED
        else:
            self.next_queries()
        return self

    def next_queries(self) -> tuple[ComparisonQuery, ...]:
        """Mine unasked disagreement pairs from the tied optima.

        Pairs are ranked by how many solution pairs they discriminate, then by
        canonical pair order, and truncated to the remaining budget. An empty
        result means no further discrimination is possible: PLATEAU.
        """
        if self.status is not SessionStatus.ACTIVE:
            raise SessionStateError(f"cannot elicit on a {self.status.value} session")
        if self.last_result is None or len(self.last_result.solutions) < 2:
            raise SessionStateError("need at least two tied solutions to elicit")
        counts: dict[Pair, int] = {}
        solutions = self.last_result.solutions
        for i, a in enumerate(solutions):
            for b in solutions[i + 1 :]:
                for pair in pairs_in_disagreement(a, b):
                    counts[pair] = counts.get(pair, 0) + 1
        fresh = [
            ComparisonQuery(pair=pair, frequency=freq)
            for pair, freq in counts.items()
            if pair not in self.asked_pairs
        ]
        fresh.sort(key=lambda q: (-q.frequency, q.pair))
        self.pending_queries = tuple(fresh[: self.budget_remaining()])
        if not self.pending_queries:
            self.status = SessionStatus.PLATEAU
        return self.pending_queries

    def submit_responses(self, responses: Sequence[AnalystResponse]) -> "ElicitationSession":
        """Record analyst verdicts for pending pairs.

        Every presented pair consumes budget, UNDECIDED included. Answering a
        subset keeps the rest pending; once nothing is pending the caller
        should :meth:`step` again. The session is untouched when any response
        is invalid.
        """
        if self.status is not SessionStatus.ACTIVE:
            raise SessionStateError(f"cannot submit to a {self.status.value} session")
        pending = {q.pair for q in self.pending_queries}
        seen: set[Pair] = set()
        for response in responses:
            if response.pair not in pending:
                raise SessionStateError(f"pair {response.pair} is not pending")
            if response.pair in seen:
                raise SessionStateError(f"duplicate response for pair {response.pair}")
            seen.add(response.pair)

        for response in responses:
            preferred = response.preferred()
            if preferred is not None:
                self.eli_edges[response.pair] = preferred
            self.asked_pairs.add(response.pair)
            self.history.append(
                HistoryEntry(pair=response.pair, verdict=response.verdict, iteration=self.iteration)
            )
        self.eli_pair += len(responses)
        self.pending_queries = tuple(
            q for q in self.pending_queries if q.pair not in seen
        )
        return self

    def final_ranking(self) -> Ranking:
        """The ranking a finished session settles on.

        The solver returns a cost-uniform, lexicographically sorted solution
        list, so the first entry is the deterministic tie-break.
        """
        if self.status is SessionStatus.ACTIVE:
            raise SessionStateError("session is still active")
        if self.last_result is None:
            raise SessionStateError("session was never solved")
        return self.last_result.solutions[0]

    def is_terminal(self) -> bool:
        return self.status is not SessionStatus.ACTIVE


def build_session(
    requirements: Sequence[Requirement],
    graphs: Iterable[ConstraintGraph],
    *,
    max_eli_pair: int = DEFAULT_MAX_ELI_PAIR,
    solution_cap: int = DEFAULT_SOLUTION_CAP,
    gold: Ranking | None = None,
    time_budget: float | None = None,
) -> ElicitationSession:
    """Assemble a fresh session; call :meth:`ElicitationSession.step` to start."""
    return ElicitationSession(
        requirements=tuple(requirements),
        source_graphs=tuple(graphs),
        max_eli_pair=max_eli_pair,
        solution_cap=solution_cap,
        gold=gold,
        time_budget=time_budget,
    )
