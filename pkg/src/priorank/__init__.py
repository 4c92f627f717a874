"""Interactive requirements prioritization with an exact precedence-constraint solver."""

from .elicitation import (
    AnalystResponse,
    ComparisonQuery,
    ElicitationSession,
    SessionStatus,
    Verdict,
    build_session,
    pairs_in_disagreement,
)
from .errors import (
    InfeasibleError,
    ModelValidationError,
    PriorankError,
    ProjectValidationError,
    SessionStateError,
    SnapshotError,
    ValidationIssue,
)
from .experiments import (
    ExperimentConfig,
    RunRecord,
    SyntheticDatasetSpec,
    generate_dataset,
    run_experiment,
    synthetic_project,
    write_csv,
)
from .metrics import average_distance, disagreement, multiset_disagreement, union_disagreement
from .model import (
    HARD,
    ConstraintGraph,
    Dependency,
    PrecedenceEdge,
    Ranking,
    Requirement,
    build_dep_graph,
    build_prio_graph,
    transitive_closure,
)
from .oracle import SimulatedAnalyst
from .project_io import (
    Project,
    load_project,
    load_project_file,
    load_session,
    load_session_file,
    save_project,
    save_session,
)
from .solver import SolverInstance, SolverResult, solve, violation_cost

__version__ = "0.1.0"

__all__ = [
    "AnalystResponse",
    "ComparisonQuery",
    "ConstraintGraph",
    "Dependency",
    "ElicitationSession",
    "ExperimentConfig",
    "HARD",
    "InfeasibleError",
    "ModelValidationError",
    "PrecedenceEdge",
    "PriorankError",
    "Project",
    "ProjectValidationError",
    "Ranking",
    "Requirement",
    "RunRecord",
    "SessionStateError",
    "SessionStatus",
    "SimulatedAnalyst",
    "SnapshotError",
    "SolverInstance",
    "SolverResult",
    "SyntheticDatasetSpec",
    "ValidationIssue",
    "Verdict",
    "average_distance",
    "build_dep_graph",
    "build_prio_graph",
    "build_session",
    "disagreement",
    "generate_dataset",
    "load_project",
    "load_project_file",
    "load_session",
    "load_session_file",
    "multiset_disagreement",
    "pairs_in_disagreement",
    "run_experiment",
    "save_project",
    "save_session",
    "solve",
    "synthetic_project",
    "transitive_closure",
    "union_disagreement",
    "violation_cost",
    "write_csv",
    "__version__",
]
