"""Batch experiment harness.

Runs the elicitation engine against a simulated analyst over a grid of pair
budgets and analyst error rates, repeating each cell and recording
disagreement and average index distance against the gold standard. Results go
to a CSV whose content is byte-reproducible for an identical config.

Reproducibility note: the exported ``wall_time_ms`` column is a deterministic
effort estimate derived from the solver's search-node count at a fixed
reference rate, not a wall-clock reading, precisely so that re-running a
config reproduces the file byte for byte. Real elapsed time is kept on the
in-memory records for operator display only.
"""

from __future__ import annotations

import csv
import hashlib
import io
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .elicitation import ElicitationSession, SessionStatus
from .errors import ModelValidationError
from .metrics import average_distance, disagreement
from .model import ConstraintGraph, Dependency, Ranking, Requirement
from .oracle import SimulatedAnalyst
from .project_io import Project

CSV_HEADER = (
    "run_id,budget,error_rate,repetition,seed,elicited_pairs,"
    "final_cost,disagreement_gs,avg_distance_gs,status,wall_time_ms"
)

# Fixed conversion from solver search nodes to the deterministic time estimate.
_NODES_PER_MS = 1000

DEFAULT_BUDGETS = (0, 25, 50, 100)
DEFAULT_ERROR_RATES = (0.0, 0.05, 0.10, 0.20)
DEFAULT_REPETITIONS = 20


@dataclass(frozen=True)
class SyntheticDatasetSpec:
    """Parameters for a generated project.

    Priority levels track the gold order with some noise; dependencies are
    sampled forward along the gold order (the dataset's own topological
    order), so the generated constraints approximate the gold standard the
    way real domain knowledge approximates an architect's reference ranking.
    """

    n_requirements: int
    n_priority_levels: int = 5
    dependency_density: float = 0.08
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_requirements < 1:
            raise ModelValidationError("n_requirements must be >= 1")
        if not 1 <= self.n_priority_levels <= self.n_requirements:
            raise ModelValidationError("need 1 <= n_priority_levels <= n_requirements")
        if not 0.0 <= self.dependency_density <= 1.0:
            raise ModelValidationError("dependency_density must be in [0, 1]")


def generate_dataset(spec: SyntheticDatasetSpec) -> tuple[list[Requirement], list[Dependency], Ranking]:
    """Deterministically generate (requirements, dependencies, gold ranking)."""
    rng = random.Random(spec.seed)
    n = spec.n_requirements
    width = len(str(n))
    ids = [f"R{i:0{width}d}" for i in range(1, n + 1)]
    gold_order = list(ids)
    rng.shuffle(gold_order)
    gold = Ranking(gold_order)

    levels: dict[str, int] = {}
    for position, rid in enumerate(gold_order):
        base = 1 + position * spec.n_priority_levels // n
        if rng.random() < 0.3:
            base += rng.choice((-1, 1))
        levels[rid] = min(max(base, 1), spec.n_priority_levels)
    requirements = [Requirement(rid, title=f"Requirement {rid}", priority_level=levels[rid]) for rid in ids]

    dependencies: list[Dependency] = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < spec.dependency_density:
                dependencies.append(Dependency(requirement=gold_order[j], depends_on=gold_order[i]))
    return requirements, dependencies, gold


def synthetic_project(spec: SyntheticDatasetSpec) -> Project:
    requirements, dependencies, gold = generate_dataset(spec)
    return Project(
        requirements=tuple(requirements),
        dependencies=tuple(dependencies),
        gold_standard=gold,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    project: Project
    budgets: tuple[int, ...] = DEFAULT_BUDGETS
    error_rates: tuple[float, ...] = DEFAULT_ERROR_RATES
    repetitions: int = DEFAULT_REPETITIONS
    base_seed: int = 0
    solution_cap: int = 50
    time_budget: float | None = None

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ModelValidationError("repetitions must be >= 1")
        if any(b < 0 for b in self.budgets):
            raise ModelValidationError("budgets must be non-negative")
        if any(not 0.0 <= e <= 1.0 for e in self.error_rates):
            raise ModelValidationError("error rates must be in [0, 1]")
        if self.project.gold_standard is None:
            raise ModelValidationError("experiments need a project with a gold standard")


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    budget: int
    error_rate: float
    repetition: int
    seed: int
    elicited_pairs: int
    final_cost: int | Fraction
    disagreement_gs: int
    avg_distance_gs: float
    status: SessionStatus
    work_nodes: int
    elapsed_ms: float = field(compare=False)

    def csv_row(self) -> list[str]:
        return [
            self.run_id,
            str(self.budget),
            _format_rate(self.error_rate),
            str(self.repetition),
            str(self.seed),
            str(self.elicited_pairs),
            _format_number(self.final_cost),
            str(self.disagreement_gs),
            _format_number(self.avg_distance_gs),
            self.status.value,
            str(self.work_nodes // _NODES_PER_MS),
        ]


def _format_rate(rate: float) -> str:
    return f"{rate:g}"


def _format_number(value) -> str:
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        value = float(value)
    return f"{value:.6g}"


def derive_seed(base_seed: int, budget: int, error_rate: float, repetition: int) -> int:
    """Stable 63-bit per-run seed, independent across grid cells."""
    key = f"{budget}|{error_rate:g}|{repetition}".encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return (int.from_bytes(digest, "big") ^ (base_seed & (2**64 - 1))) % (2**63)


def drive_session(session: ElicitationSession, analyst: SimulatedAnalyst) -> ElicitationSession:
    """Run one session to a terminal state with the analyst answering every batch."""
    session.step()
    while session.status is SessionStatus.ACTIVE:
        responses = [analyst.answer(query) for query in session.pending_queries]
        session.submit_responses(responses)
        session.step()
    return session


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """Execute the full (budget x error_rate x repetition) grid.

    Records come back sorted by grid position, never by completion time, and
    the whole run is reproducible from the config alone.
    """
    project = config.project
    gold = project.gold_standard
    records: list[RunRecord] = []
    for budget in config.budgets:
        for rate in config.error_rates:
            for repetition in range(config.repetitions):
                seed = derive_seed(config.base_seed, budget, rate, repetition)
                analyst = SimulatedAnalyst(gold=gold, error_rate=rate, seed=seed)
                session = project.build_session(
                    max_eli_pair=budget,
                    solution_cap=config.solution_cap,
                    time_budget=config.time_budget,
                )
                started = time.perf_counter()
                drive_session(session, analyst)
                elapsed_ms = (time.perf_counter() - started) * 1000
                final = session.final_ranking()
                records.append(
                    RunRecord(
                        run_id=f"b{budget}-e{_format_rate(rate)}-r{repetition:02d}",
                        budget=budget,
                        error_rate=rate,
                        repetition=repetition,
                        seed=seed,
                        elicited_pairs=session.eli_pair,
                        final_cost=session.last_result.cost,
                        disagreement_gs=disagreement(final, gold),
                        avg_distance_gs=average_distance(final, gold),
                        status=session.status,
                        work_nodes=session.total_nodes,
                        elapsed_ms=elapsed_ms,
                    )
                )
    return records


def records_to_csv(records: Sequence[RunRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for record in records:
        writer.writerow(record.csv_row())
    return buffer.getvalue()


def write_csv(records: Sequence[RunRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_csv(records), encoding="utf-8")


def median(values: Sequence[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2


def median_by_budget(records: Sequence[RunRecord], metric: str, error_rate: float | None = None) -> dict[int, float]:
    out: dict[int, float] = {}
    budgets = sorted({r.budget for r in records})
    for budget in budgets:
        cell = [
            float(getattr(r, metric))
            for r in records
            if r.budget == budget and (error_rate is None or r.error_rate == error_rate)
        ]
        if cell:
            out[budget] = median(cell)
    return out


def median_by_error_rate(records: Sequence[RunRecord], metric: str, budget: int) -> dict[float, float]:
    out: dict[float, float] = {}
    rates = sorted({r.error_rate for r in records})
    for rate in rates:
        cell = [float(getattr(r, metric)) for r in records if r.budget == budget and r.error_rate == rate]
        if cell:
            out[rate] = median(cell)
    return out
