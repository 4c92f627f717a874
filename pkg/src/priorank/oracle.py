"""Simulated analyst for experiments.

Answers comparison queries from a gold-standard ranking, independently
reversing each answer with a configured error probability. It never answers
UNDECIDED: the error model has only agree/reverse outcomes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .elicitation import AnalystResponse, ComparisonQuery, Verdict
from .errors import ModelValidationError
from .model import Ranking


@dataclass
class SimulatedAnalyst:
    """Deterministic stand-in for a human analyst.

    The seeded stream (a Mersenne Twister, stable across platforms and Python
    releases) is consumed once per query, so (gold, error_rate, seed, query
    sequence) fully determines every answer.
    """

    gold: Ranking
    error_rate: float = 0.0
    seed: int = 0
    _rng: random.Random = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.error_rate <= 1.0:
            raise ModelValidationError(f"error_rate must be in [0, 1], got {self.error_rate}")
        self._rng = random.Random(self.seed)

    def answer(self, query: ComparisonQuery) -> AnalystResponse:
        first, second = query.pair
        truth = (
            Verdict.FIRST_PRECEDES
            if self.gold.position(first) < self.gold.position(second)
            else Verdict.SECOND_PRECEDES
        )
        if self._rng.random() < self.error_rate:
            truth = (
                Verdict.SECOND_PRECEDES
                if truth is Verdict.FIRST_PRECEDES
                else Verdict.FIRST_PRECEDES
            )
        return AnalystResponse(pair=query.pair, verdict=truth)
