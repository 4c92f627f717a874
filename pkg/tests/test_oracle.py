from __future__ import annotations

import pytest

from priorank.elicitation import ComparisonQuery, Verdict
from priorank.errors import ModelValidationError
from priorank.model import Ranking
from priorank.oracle import SimulatedAnalyst

GOLD = Ranking(("R2", "R1", "R3", "R4", "R5"))


def test_error_free_answer_follows_gold():
    analyst = SimulatedAnalyst(gold=GOLD, error_rate=0.0, seed=1)
    response = analyst.answer(ComparisonQuery(pair=("R1", "R3"), frequency=1))
    assert response.preferred() == ("R1", "R3")


def test_certain_error_reverses_gold():
    analyst = SimulatedAnalyst(gold=GOLD, error_rate=1.0, seed=1)
    response = analyst.answer(ComparisonQuery(pair=("R1", "R3"), frequency=1))
    assert response.preferred() == ("R3", "R1")


def test_never_undecided():
    analyst = SimulatedAnalyst(gold=GOLD, error_rate=0.5, seed=42)
    for _ in range(200):
        response = analyst.answer(ComparisonQuery(pair=("R4", "R5"), frequency=1))
        assert response.verdict is not Verdict.UNDECIDED


def test_flip_fraction_close_to_error_rate():
    analyst = SimulatedAnalyst(gold=GOLD, error_rate=0.2, seed=123)
    query = ComparisonQuery(pair=("R1", "R2"), frequency=1)
    truth = ("R2", "R1")
    flips = sum(1 for _ in range(10_000) if analyst.answer(query).preferred() != truth)
    assert flips / 10_000 == pytest.approx(0.2, abs=0.01)


def test_deterministic_stream():
    queries = [ComparisonQuery(pair=(f"R{i}", f"R{j}"), frequency=1) for i in range(1, 5) for j in range(i + 1, 6)]
    first = [SimulatedAnalyst(gold=GOLD, error_rate=0.3, seed=9).answer(q).verdict for q in queries]
    second = [SimulatedAnalyst(gold=GOLD, error_rate=0.3, seed=9).answer(q).verdict for q in queries]
    assert first == second


def test_error_free_answers_consistent_with_gold_suborder():
    analyst = SimulatedAnalyst(gold=GOLD, error_rate=0.0, seed=5)
    for i, a in enumerate(GOLD.order):
        for b in GOLD.order[i + 1 :]:
            preferred = analyst.answer(ComparisonQuery(pair=(a, b), frequency=1)).preferred()
            assert preferred == ((a, b) if GOLD.position(a) < GOLD.position(b) else (b, a))


def test_unknown_id_rejected():
    analyst = SimulatedAnalyst(gold=GOLD, error_rate=0.0, seed=1)
    with pytest.raises(ModelValidationError):
        analyst.answer(ComparisonQuery(pair=("R1", "R9"), frequency=1))


def test_error_rate_bounds_validated():
    with pytest.raises(ModelValidationError):
        SimulatedAnalyst(gold=GOLD, error_rate=1.5, seed=0)
