from __future__ import annotations

import random

import pytest

from priorank.elicitation import (
    AnalystResponse,
    ComparisonQuery,
    ElicitationSession,
    SessionStatus,
    Verdict,
    build_session,
    pairs_in_disagreement,
)
from priorank.errors import ModelValidationError, SessionStateError
from priorank.model import Ranking, build_dep_graph, build_prio_graph
from priorank.oracle import SimulatedAnalyst

PR1 = Ranking(("R2", "R1", "R4", "R3", "R5"))
PR2 = Ranking(("R2", "R3", "R1", "R4", "R5"))
PR3 = Ranking(("R2", "R1", "R3", "R4", "R5"))
GOLD = PR3


@pytest.fixture
def sample_session(sample_requirements, sample_dependencies):
    ids = [r.id for r in sample_requirements]
    graphs = [build_prio_graph(sample_requirements), build_dep_graph(sample_dependencies, ids)]

    def make(budget: int = 100) -> ElicitationSession:
        return build_session(sample_requirements, graphs, max_eli_pair=budget)

    return make


class TestPairsInDisagreement:
    def test_first_and_second_optimum(self):
        assert pairs_in_disagreement(PR1, PR2) == {("R1", "R3"), ("R3", "R4")}

    def test_second_and_third_optimum(self):
        assert pairs_in_disagreement(PR2, PR3) == {("R1", "R3")}

    def test_first_and_third_optimum(self):
        assert pairs_in_disagreement(PR1, PR3) == {("R3", "R4")}

    def test_self_is_empty(self):
        assert pairs_in_disagreement(PR1, PR1) == set()

    def test_symmetry(self):
        assert pairs_in_disagreement(PR1, PR2) == pairs_in_disagreement(PR2, PR1)

    def test_mismatched_universe_rejected(self):
        with pytest.raises(ModelValidationError):
            pairs_in_disagreement(PR1, Ranking(("R1", "R2")))


class TestFirstStep:
    def test_fresh_session_mines_two_queries(self, sample_session):
        session = sample_session().step()
        assert session.status is SessionStatus.ACTIVE
        assert session.last_result.cost == 2
        assert len(session.last_result.solutions) == 3
        assert {q.pair for q in session.pending_queries} == {("R1", "R3"), ("R3", "R4")}
        assert all(q.frequency == 2 for q in session.pending_queries)

    def test_budget_zero_terminates_immediately(self, sample_session):
        session = sample_session(budget=0).step()
        assert session.status is SessionStatus.BUDGET_EXHAUSTED
        assert session.final_ranking() == PR3  # lexicographic first of the tied optima

    def test_step_requires_no_pending(self, sample_session):
        session = sample_session().step()
        with pytest.raises(SessionStateError):
            session.step()


class TestSubmitResponses:
    def test_two_edges_recorded(self, sample_session):
        session = sample_session().step()
        session.submit_responses(
            [AnalystResponse.preferring("R4", "R3"), AnalystResponse.preferring("R3", "R1")]
        )
        assert session.eli_pair == 2
        assert session.eli_graph().edge_pairs() == {("R4", "R3"), ("R3", "R1")}
        assert session.pending_queries == ()
        assert session.asked_pairs == {("R1", "R3"), ("R3", "R4")}

    def test_undecided_consumes_budget_without_edges(self, sample_session):
        session = sample_session().step()
        pair = session.pending_queries[0].pair
        session.submit_responses([AnalystResponse(pair=pair, verdict=Verdict.UNDECIDED)])
        assert session.eli_pair == 1
        assert session.eli_graph().edges == ()
        assert pair in session.asked_pairs
        assert len(session.pending_queries) == 1  # partial batch keeps the rest pending

    def test_unknown_pair_rejected_without_side_effects(self, sample_session):
        session = sample_session().step()
        before = session.eli_pair
        with pytest.raises(SessionStateError):
            session.submit_responses([AnalystResponse.preferring("R5", "R1")])
        assert session.eli_pair == before
        assert len(session.pending_queries) == 2

    def test_duplicate_response_rejected(self, sample_session):
        session = sample_session().step()
        pair = session.pending_queries[0].pair
        duplicate = [
            AnalystResponse(pair=pair, verdict=Verdict.FIRST_PRECEDES),
            AnalystResponse(pair=pair, verdict=Verdict.SECOND_PRECEDES),
        ]
        with pytest.raises(SessionStateError):
            session.submit_responses(duplicate)
        assert session.eli_pair == 0

    def test_submit_on_terminal_session_rejected(self, sample_session):
        session = sample_session(budget=0).step()
        with pytest.raises(SessionStateError):
            session.submit_responses([])


class TestLoop:
    def test_gold_consistent_answers_converge(self, sample_session):
        session = sample_session()
        analyst = SimulatedAnalyst(gold=GOLD, error_rate=0.0, seed=1)
        session.step()
        while session.status is SessionStatus.ACTIVE:
            session.submit_responses([analyst.answer(q) for q in session.pending_queries])
            session.step()
        assert session.status is SessionStatus.CONVERGED
        assert session.final_ranking() == GOLD
        assert len(session.last_result.solutions) == 1

    def test_undecided_everywhere_reaches_plateau(self, sample_session):
        session = sample_session().step()
        session.submit_responses(
            [AnalystResponse(pair=q.pair, verdict=Verdict.UNDECIDED) for q in session.pending_queries]
        )
        session.step()
        assert session.status is SessionStatus.PLATEAU
        assert session.eli_pair == 2
        assert session.eli_pair < session.max_eli_pair
        # the tied set is unchanged: nothing new was learned
        assert len(session.last_result.solutions) == 3

    def test_budget_never_exceeded(self, sample_session):
        rng = random.Random(17)
        for budget in (0, 1, 2, 3, 10):
            session = sample_session(budget=budget).step()
            while session.status is SessionStatus.ACTIVE:
                responses = []
                for q in session.pending_queries:
                    verdict = rng.choice(list(Verdict))
                    responses.append(AnalystResponse(pair=q.pair, verdict=verdict))
                session.submit_responses(responses)
                session.step()
                assert session.eli_pair <= session.max_eli_pair
            assert session.eli_pair <= budget

    def test_queries_are_never_reasked(self, sample_session):
        session = sample_session().step()
        seen: set = set()
        while session.status is SessionStatus.ACTIVE:
            batch = {q.pair for q in session.pending_queries}
            assert not (batch & seen)
            seen |= batch
            session.submit_responses(
                [AnalystResponse(pair=q.pair, verdict=Verdict.UNDECIDED) for q in session.pending_queries]
            )
            session.step()

    def test_budget_one_presents_single_query(self, sample_session):
        session = sample_session(budget=1).step()
        assert len(session.pending_queries) == 1
        # the tie-break between equal frequencies is canonical pair order
        assert session.pending_queries[0].pair == ("R1", "R3")

    def test_replay_determinism(self, sample_session):
        def run():
            session = sample_session().step()
            answers = [AnalystResponse.preferring("R4", "R3"), AnalystResponse.preferring("R3", "R1")]
            session.submit_responses(answers)
            session.step()
            while session.status is SessionStatus.ACTIVE:
                session.submit_responses(
                    [AnalystResponse(pair=q.pair, verdict=Verdict.UNDECIDED) for q in session.pending_queries]
                )
                session.step()
            return session.status, session.final_ranking()

        assert run() == run()


class TestFinalRanking:
    def test_active_session_has_no_final_ranking(self, sample_session):
        session = sample_session().step()
        with pytest.raises(SessionStateError):
            session.final_ranking()

    def test_never_solved_session(self, sample_requirements):
        session = build_session(sample_requirements, [], max_eli_pair=0)
        session.status = SessionStatus.BUDGET_EXHAUSTED
        with pytest.raises(SessionStateError):
            session.final_ranking()

    def test_budget_exhausted_returns_lexicographic_first(self, sample_session):
        session = sample_session(budget=0).step()
        assert session.final_ranking().order == ("R2", "R1", "R3", "R4", "R5")


class TestComparisonQueryValidation:
    def test_pair_canonicalized(self):
        q = ComparisonQuery(pair=("R3", "R1"), frequency=2)
        assert q.pair == ("R1", "R3")

    def test_identical_ids_rejected(self):
        with pytest.raises(ModelValidationError):
            ComparisonQuery(pair=("R1", "R1"), frequency=1)

    def test_preferring_helper(self):
        assert AnalystResponse.preferring("R4", "R3").verdict is Verdict.SECOND_PRECEDES
        assert AnalystResponse.preferring("R3", "R4").verdict is Verdict.FIRST_PRECEDES
