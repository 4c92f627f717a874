"""Project files, session snapshots, and their validation.

Both file kinds are JSON with a strict schema: unknown fields are rejected and
a ``schema_version`` gate protects against future formats. Writes are atomic
(temp file + rename) and field order is canonical so files diff cleanly.
Conventional extensions: ``.project`` and ``.session``.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .elicitation import (
    ComparisonQuery,
    ElicitationSession,
    HistoryEntry,
    SessionStatus,
    Verdict,
    build_session,
)
from .errors import (
    ModelValidationError,
    ProjectValidationError,
    SnapshotError,
    ValidationIssue,
)
from .model import (
    HARD,
    ConstraintGraph,
    Dependency,
    PrecedenceEdge,
    Ranking,
    Requirement,
    build_dep_graph,
    build_prio_graph,
)
from .solver import SolverResult

SCHEMA_VERSION = 1

_PROJECT_FIELDS = {"schema_version", "requirements", "dependencies", "gold_standard", "extra_graphs"}
_REQUIREMENT_FIELDS = {"id", "title", "priority"}
_DEPENDENCY_FIELDS = {"requirement", "depends_on"}
_GRAPH_FIELDS = {"name", "edges"}
_EDGE_FIELDS = {"before", "after", "weight", "hard"}


@dataclass(frozen=True)
class Project:
    """A validated prioritization project."""

    requirements: tuple[Requirement, ...]
    dependencies: tuple[Dependency, ...]
    gold_standard: Ranking | None = None
    extra_graphs: tuple[ConstraintGraph, ...] = ()

    @property
    def requirement_ids(self) -> tuple[str, ...]:
        return tuple(sorted(r.id for r in self.requirements))

    def source_graphs(self) -> tuple[ConstraintGraph, ...]:
        prio = build_prio_graph(self.requirements)
        dep = build_dep_graph(self.dependencies, self.requirement_ids)
        return (prio, dep, *self.extra_graphs)

    def build_session(
        self,
        *,
        max_eli_pair: int = 100,
        solution_cap: int = 50,
        time_budget: float | None = None,
        use_gold: bool = True,
    ) -> ElicitationSession:
        return build_session(
            self.requirements,
            self.source_graphs(),
            max_eli_pair=max_eli_pair,
            solution_cap=solution_cap,
            gold=self.gold_standard if use_gold else None,
            time_budget=time_budget,
        )


class _Issues:
    def __init__(self) -> None:
        self.items: list[ValidationIssue] = []

    def add(self, path: str, message: str) -> None:
        self.items.append(ValidationIssue(path, message))

    def raise_if_any(self) -> None:
        if self.items:
            raise ProjectValidationError(self.items)


def _parse_json(data: bytes | str, what: str) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProjectValidationError([ValidationIssue("$", f"not valid UTF-8: {exc}")]) from exc
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProjectValidationError([ValidationIssue("$", f"malformed {what}: {exc}")]) from exc


def _reject_unknown(obj: dict, allowed: set[str], path: str, issues: _Issues) -> None:
    for key in sorted(set(obj) - allowed):
        issues.add(f"{path}.{key}", "unknown field")


def _weight_from_json(raw: Any, path: str, issues: _Issues):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        issues.add(path, f"weight must be a number, got {raw!r}")
        return 1
    return raw


def load_project(data: bytes | str) -> Project:
    """Parse and validate a project document.

    Raises :class:`ProjectValidationError` carrying every problem found, each
    with a path into the document.
    """
    doc = _parse_json(data, "project file")
    issues = _Issues()
    if not isinstance(doc, dict):
        issues.add("$", "top level must be an object")
        issues.raise_if_any()

    _reject_unknown(doc, _PROJECT_FIELDS, "$", issues)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        issues.add("$.schema_version", f"unsupported version {version!r}, expected {SCHEMA_VERSION}")
        issues.raise_if_any()

    raw_reqs = doc.get("requirements")
    requirements: list[Requirement] = []
    ids: set[str] = set()
    if not isinstance(raw_reqs, list) or not raw_reqs:
        issues.add("$.requirements", "must be a non-empty list")
        raw_reqs = []
    for i, raw in enumerate(raw_reqs):
        path = f"$.requirements[{i}]"
        if not isinstance(raw, dict):
            issues.add(path, "must be an object")
            continue
        _reject_unknown(raw, _REQUIREMENT_FIELDS, path, issues)
        try:
            req = Requirement(
                id=raw.get("id", ""),
                title=str(raw.get("title", "")),
                priority_level=raw.get("priority", 1),
            )
        except ModelValidationError as exc:
            issues.add(path, str(exc))
            continue
        if req.id in ids:
            issues.add(f"{path}.id", f"duplicate requirement id {req.id!r}")
            continue
        ids.add(req.id)
        requirements.append(req)

    dependencies: list[Dependency] = []
    raw_deps = doc.get("dependencies", [])
    if not isinstance(raw_deps, list):
        issues.add("$.dependencies", "must be a list")
        raw_deps = []
    for i, raw in enumerate(raw_deps):
        path = f"$.dependencies[{i}]"
        if not isinstance(raw, dict):
            issues.add(path, "must be an object")
            continue
        _reject_unknown(raw, _DEPENDENCY_FIELDS, path, issues)
        try:
            dep = Dependency(
                requirement=raw.get("requirement", ""),
                depends_on=raw.get("depends_on", ""),
            )
        except ModelValidationError as exc:
            issues.add(path, str(exc))
            continue
        unknown = [k for k in ("requirement", "depends_on") if getattr(dep, k) not in ids]
        for k in unknown:
            issues.add(f"{path}.{k}", f"unknown requirement {getattr(dep, k)!r}")
        if not unknown:
            dependencies.append(dep)

    gold: Ranking | None = None
    raw_gold = doc.get("gold_standard")
    if raw_gold is not None:
        if not isinstance(raw_gold, list) or not all(isinstance(x, str) for x in raw_gold):
            issues.add("$.gold_standard", "must be a list of requirement ids")
        else:
            try:
                gold = Ranking(raw_gold).check_universe(ids)
            except ModelValidationError as exc:
                issues.add("$.gold_standard", str(exc))

    extra_graphs: list[ConstraintGraph] = []
    raw_graphs = doc.get("extra_graphs", [])
    if not isinstance(raw_graphs, list):
        issues.add("$.extra_graphs", "must be a list")
        raw_graphs = []
    for gi, raw_graph in enumerate(raw_graphs):
        gpath = f"$.extra_graphs[{gi}]"
        if not isinstance(raw_graph, dict):
            issues.add(gpath, "must be an object")
            continue
        _reject_unknown(raw_graph, _GRAPH_FIELDS, gpath, issues)
        name = raw_graph.get("name")
        if not isinstance(name, str) or not name:
            issues.add(f"{gpath}.name", "graph needs a non-empty name")
            continue
        edges: list[PrecedenceEdge] = []
        ok = True
        for ei, raw_edge in enumerate(raw_graph.get("edges", [])):
            epath = f"{gpath}.edges[{ei}]"
            if not isinstance(raw_edge, dict):
                issues.add(epath, "must be an object")
                ok = False
                continue
            _reject_unknown(raw_edge, _EDGE_FIELDS, epath, issues)
            weight = HARD if raw_edge.get("hard") else _weight_from_json(raw_edge.get("weight", 1), f"{epath}.weight", issues)
            try:
                edge = PrecedenceEdge(raw_edge.get("before", ""), raw_edge.get("after", ""), weight)
            except ModelValidationError as exc:
                issues.add(epath, str(exc))
                ok = False
                continue
            for endpoint in (edge.before, edge.after):
                if endpoint not in ids:
                    issues.add(epath, f"unknown requirement {endpoint!r}")
                    ok = False
            if ok:
                edges.append(edge)
        if ok:
            try:
                extra_graphs.append(ConstraintGraph.build(name, edges, ids))
            except ModelValidationError as exc:
                issues.add(gpath, str(exc))

    issues.raise_if_any()
    return Project(
        requirements=tuple(requirements),
        dependencies=tuple(dependencies),
        gold_standard=gold,
        extra_graphs=tuple(extra_graphs),
    )


def load_project_file(path: str | Path) -> Project:
    return load_project(Path(path).read_bytes())


def _edge_to_json(edge: PrecedenceEdge) -> dict:
    out: dict[str, Any] = {"before": edge.before, "after": edge.after}
    if edge.is_hard:
        out["hard"] = True
    else:
        out["weight"] = _number_to_json(edge.weight)
    return out


def project_to_json(project: Project) -> dict:
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "requirements": [
            {"id": r.id, "title": r.title, "priority": r.priority_level}
            for r in project.requirements
        ],
        "dependencies": [
            {"requirement": d.requirement, "depends_on": d.depends_on}
            for d in project.dependencies
        ],
    }
    if project.gold_standard is not None:
        doc["gold_standard"] = list(project.gold_standard.order)
    if project.extra_graphs:
        doc["extra_graphs"] = [
            {"name": g.name, "edges": [_edge_to_json(e) for e in g.edges]}
            for g in project.extra_graphs
        ]
    return doc


def save_project(project: Project, path: str | Path) -> None:
    _atomic_write(path, json.dumps(project_to_json(project), indent=2) + "\n")


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


# -- session snapshots -------------------------------------------------


def _number_to_json(value) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    return value


def _number_from_json(raw) -> int | Fraction:
    if isinstance(raw, str):
        return Fraction(raw)
    if isinstance(raw, float):
        return Fraction(str(raw))
    return raw


def session_to_snapshot(session: ElicitationSession, project: Project) -> dict:
    """Everything needed to resume the session exactly where it stopped."""
    result = session.last_result
    return {
        "schema_version": SCHEMA_VERSION,
        "project": project_to_json(project),
        "max_eli_pair": session.max_eli_pair,
        "solution_cap": session.solution_cap,
        "time_budget": session.time_budget,
        "eli_pair": session.eli_pair,
        "iteration": session.iteration,
        "total_nodes": session.total_nodes,
        "status": session.status.value,
        "asked_pairs": [list(p) for p in sorted(session.asked_pairs)],
        "pending_queries": [
            {"pair": list(q.pair), "frequency": q.frequency} for q in session.pending_queries
        ],
        "eli_edges": [list(direction) for _, direction in sorted(session.eli_edges.items())],
        "history": [
            {"pair": list(h.pair), "verdict": h.verdict.value, "iteration": h.iteration}
            for h in session.history
        ],
        "warnings": list(session.warnings),
        "last_result": None
        if result is None
        else {
            "cost": _number_to_json(result.cost),
            "solutions": [list(s.order) for s in result.solutions],
            "exhausted": result.exhausted,
            "nodes": result.nodes,
        },
    }


def save_session(session: ElicitationSession, project: Project, path: str | Path) -> None:
    _atomic_write(path, json.dumps(session_to_snapshot(session, project), indent=2) + "\n")


_SNAPSHOT_FIELDS = {
    "schema_version", "project", "max_eli_pair", "solution_cap", "time_budget",
    "eli_pair", "iteration", "total_nodes", "status", "asked_pairs",
    "pending_queries", "eli_edges", "history", "warnings", "last_result",
}


def session_from_snapshot(doc: dict) -> tuple[ElicitationSession, Project]:
    try:
        version = doc["schema_version"]
        if version != SCHEMA_VERSION:
            raise SnapshotError(f"unsupported snapshot version {version!r}, expected {SCHEMA_VERSION}")
        unknown = set(doc) - _SNAPSHOT_FIELDS
        if unknown:
            raise SnapshotError(f"snapshot has unknown fields: {sorted(unknown)}")
        project = load_project(json.dumps(doc["project"]))
        session = project.build_session(
            max_eli_pair=doc["max_eli_pair"],
            solution_cap=doc["solution_cap"],
            time_budget=doc.get("time_budget"),
        )
        session.eli_pair = doc["eli_pair"]
        session.iteration = doc["iteration"]
        session.total_nodes = doc["total_nodes"]
        session.status = SessionStatus(doc["status"])
        session.asked_pairs = {(a, b) for a, b in doc["asked_pairs"]}
        session.pending_queries = tuple(
            ComparisonQuery(pair=tuple(q["pair"]), frequency=q["frequency"])
            for q in doc["pending_queries"]
        )
        session.eli_edges = {
            (min(b, a), max(b, a)): (b, a) for b, a in doc["eli_edges"]
        }
        session.history = [
            HistoryEntry(pair=tuple(h["pair"]), verdict=Verdict(h["verdict"]), iteration=h["iteration"])
            for h in doc["history"]
        ]
        session.warnings = list(doc["warnings"])
        raw_result = doc["last_result"]
        if raw_result is not None:
            session.last_result = SolverResult(
                cost=_number_from_json(raw_result["cost"]),
                solutions=tuple(Ranking(s) for s in raw_result["solutions"]),
                exhausted=raw_result["exhausted"],
                nodes=raw_result["nodes"],
            )
    except SnapshotError:
        raise
    except ProjectValidationError as exc:
        raise SnapshotError(f"snapshot project payload invalid: {exc}") from exc
    except (KeyError, TypeError, ValueError, ModelValidationError) as exc:
        raise SnapshotError(f"snapshot is malformed: {exc}") from exc
    return session, project


def load_session(data: bytes | str) -> tuple[ElicitationSession, Project]:
    """Rebuild a session from snapshot bytes; see :func:`save_session`."""
    try:
        doc = _parse_json(data, "session snapshot")
    except ProjectValidationError as exc:
        raise SnapshotError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise SnapshotError("snapshot top level must be an object")
    return session_from_snapshot(doc)


def load_session_file(path: str | Path) -> tuple[ElicitationSession, Project]:
    return load_session(Path(path).read_bytes())
