from __future__ import annotations

import pytest

from priorank.model import Dependency, Requirement, build_dep_graph, build_prio_graph
from priorank.solver import SolverInstance

# The five-requirement sample project used throughout: priority levels
# {R1: 2, R2: 1, R3: 2, R4: 3, R5: 4} and four dependencies.
SAMPLE_LEVELS = {"R1": 2, "R2": 1, "R3": 2, "R4": 3, "R5": 4}
SAMPLE_DEPENDENCIES = [
    ("R5", "R1"),
    ("R2", "R4"),
    ("R3", "R2"),
    ("R3", "R4"),
]
SAMPLE_GOLD = ("R2", "R1", "R3", "R4", "R5")


@pytest.fixture
def sample_requirements() -> list[Requirement]:
    return [
        Requirement(rid, title=f"Feature {rid}", priority_level=level)
        for rid, level in sorted(SAMPLE_LEVELS.items())
    ]


@pytest.fixture
def sample_dependencies() -> list[Dependency]:
    return [Dependency(requirement=r, depends_on=d) for r, d in SAMPLE_DEPENDENCIES]


@pytest.fixture
def sample_instance(sample_requirements, sample_dependencies) -> SolverInstance:
    ids = [r.id for r in sample_requirements]
    prio = build_prio_graph(sample_requirements)
    dep = build_dep_graph(sample_dependencies, ids)
    return SolverInstance.from_graphs(ids, [prio, dep])
