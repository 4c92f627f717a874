"""Command-line front end.

Subcommands: ``check`` (validate a project), ``rank`` (non-interactive
prioritization), ``elicit`` (interactive terminal prompts), ``simulate``
(batch experiments with CSV + figures), ``serve`` (HTTP service).

Exit codes: 0 success, 1 validation problem, 2 infeasible constraints,
3 runtime failure.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .elicitation import AnalystResponse, ElicitationSession, SessionStatus, Verdict
from .errors import (
    InfeasibleError,
    ModelValidationError,
    PriorankError,
    ProjectValidationError,
    SnapshotError,
)
from .experiments import (
    DEFAULT_BUDGETS,
    DEFAULT_ERROR_RATES,
    DEFAULT_REPETITIONS,
    ExperimentConfig,
    SyntheticDatasetSpec,
    records_to_csv,
    run_experiment,
    synthetic_project,
    write_csv,
)
from .metrics import average_distance, disagreement
from .model import Ranking
from .project_io import (
    Project,
    load_project_file,
    load_session_file,
    save_session,
)

EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_RUNTIME = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_project(path: str) -> Project:
    try:
        return load_project_file(path)
    except FileNotFoundError:
        _fail(EXIT_VALIDATION, f"no such file: {path}")
    except ProjectValidationError as exc:
        for issue in exc.issues:
            click.echo(f"invalid: {issue}", err=True)
        sys.exit(EXIT_VALIDATION)


def _print_ranking(ranking: Ranking, project: Project, cost) -> None:
    click.echo(f"cost: {cost}")
    if project.gold_standard is not None:
        click.echo(f"disagreement vs gold: {disagreement(ranking, project.gold_standard)}")
        click.echo(f"average distance vs gold: {average_distance(ranking, project.gold_standard):.4g}")
    titles = {r.id: r.title for r in project.requirements}
    for position, rid in enumerate(ranking.order, start=1):
        title = f"  {titles[rid]}" if titles.get(rid) else ""
        click.echo(f"{position:3d}. {rid}{title}")


@click.group()
@click.version_option(package_name="priorank")
def main() -> None:
    """Requirements prioritization with precedence constraints and elicitation."""


@main.command()
@click.argument("project_path", type=click.Path())
def check(project_path: str) -> None:
    """Validate a project file."""
    project = _load_project(project_path)
    click.echo(
        f"ok: {len(project.requirements)} requirements, "
        f"{len(project.dependencies)} dependencies, "
        f"{len(project.extra_graphs)} extra graphs, "
        f"gold standard {'present' if project.gold_standard else 'absent'}"
    )


@main.command()
@click.argument("project_path", type=click.Path())
@click.option("--cap", default=50, show_default=True, help="Maximum tied optima to enumerate.")
def rank(project_path: str, cap: int) -> None:
    """Prioritize without interaction (zero pair budget)."""
    project = _load_project(project_path)
    try:
        session = project.build_session(max_eli_pair=0, solution_cap=cap)
        session.step()
    except InfeasibleError as exc:
        _fail(EXIT_INFEASIBLE, str(exc))
    except PriorankError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    _print_ranking(session.final_ranking(), project, session.last_result.cost)


def _prompt_verdict(query, session: ElicitationSession, titles: dict[str, str]) -> str:
    first, second = query.pair
    remaining = session.budget_remaining()
    tied = len(session.last_result.solutions)
    click.echo()
    click.echo(f"[{session.eli_pair + 1}/{session.max_eli_pair} budget, {tied} tied orderings]")
    click.echo(f"  1) {first}  {titles.get(first, '')}".rstrip())
    click.echo(f"  2) {second}  {titles.get(second, '')}".rstrip())
    click.echo(f"  (asked because {query.frequency} pairs of tied orderings differ here;"
               f" {remaining} questions left)")
    return click.prompt(
        "Which comes first? 1 / 2 / u(ndecided) / q(uit & save)",
        type=click.Choice(["1", "2", "u", "q"], case_sensitive=False),
        show_choices=False,
    ).lower()


@main.command()
@click.argument("project_path", type=click.Path(), required=False)
@click.option("--budget", default=100, show_default=True, help="Maximum pairs to elicit.")
@click.option("--cap", default=50, show_default=True, help="Maximum tied optima to enumerate.")
@click.option("--resume", "resume_path", type=click.Path(), help="Resume a saved .session file.")
@click.option("--save", "save_path", type=click.Path(), help="Where to store the session on quit.")
def elicit(project_path: str | None, budget: int, cap: int, resume_path: str | None, save_path: str | None) -> None:
    """Prioritize interactively, answering pairwise questions."""
    if resume_path:
        try:
            session, project = load_session_file(resume_path)
        except FileNotFoundError:
            _fail(EXIT_VALIDATION, f"no such file: {resume_path}")
        except SnapshotError as exc:
            _fail(EXIT_VALIDATION, str(exc))
    elif project_path:
        project = _load_project(project_path)
        session = project.build_session(max_eli_pair=budget, solution_cap=cap)
    else:
        _fail(EXIT_VALIDATION, "need a project file or --resume")

    titles = {r.id: r.title for r in project.requirements}
    default_save = Path(save_path) if save_path else Path(project_path or resume_path).with_suffix(".session")

    try:
        if session.last_result is None:
            session.step()
        while session.status is SessionStatus.ACTIVE:
            while session.pending_queries:
                query = session.pending_queries[0]
                choice = _prompt_verdict(query, session, titles)
                if choice == "q":
                    save_session(session, project, default_save)
                    click.echo(f"saved session to {default_save}")
                    return
                verdict = {
                    "1": Verdict.FIRST_PRECEDES,
                    "2": Verdict.SECOND_PRECEDES,
                    "u": Verdict.UNDECIDED,
                }[choice]
                session.submit_responses([AnalystResponse(pair=query.pair, verdict=verdict)])
            click.echo("solving...")
            session.step()
    except InfeasibleError as exc:
        _fail(EXIT_INFEASIBLE, str(exc))
    except click.exceptions.Abort:
        raise
    except PriorankError as exc:
        _fail(EXIT_RUNTIME, str(exc))

    click.echo()
    click.echo(f"finished: {session.status.value} after {session.eli_pair} answered pairs")
    _print_ranking(session.final_ranking(), project, session.last_result.cost)


def _parse_synthetic(text: str) -> SyntheticDatasetSpec:
    values: dict[str, str] = {}
    for chunk in text.split(","):
        if not chunk.strip():
            continue
        if "=" not in chunk:
            raise click.BadParameter(f"--synthetic entries look like key=value, got {chunk!r}")
        key, _, value = chunk.partition("=")
        values[key.strip()] = value.strip()
    try:
        return SyntheticDatasetSpec(
            n_requirements=int(values.pop("n")),
            n_priority_levels=int(values.pop("levels", 5)),
            dependency_density=float(values.pop("density", 0.08)),
            seed=int(values.pop("seed", 0)),
        )
    except KeyError as exc:
        raise click.BadParameter(f"--synthetic needs n=<count> (missing {exc})") from exc
    except ValueError as exc:
        raise click.BadParameter(f"bad --synthetic value: {exc}") from exc


def _parse_rates(text: str) -> tuple[float, ...]:
    rates = []
    for chunk in text.split(","):
        value = float(chunk)
        if value > 1:
            value /= 100  # accept percentages
        rates.append(value)
    return tuple(rates)


@main.command()
@click.argument("project_path", type=click.Path(), required=False)
@click.option("--synthetic", "synthetic_spec", help="Generate a dataset, e.g. 'n=25,levels=5,density=0.08,seed=0'.")
@click.option("--budgets", default=",".join(str(b) for b in DEFAULT_BUDGETS), show_default=True)
@click.option("--errors", default=",".join(f"{e:g}" for e in DEFAULT_ERROR_RATES), show_default=True,
              help="Analyst error rates, fractions or percentages.")
@click.option("--reps", default=DEFAULT_REPETITIONS, show_default=True)
@click.option("--seed", default=0, show_default=True, help="Base seed for per-run analyst streams.")
@click.option("--cap", default=50, show_default=True)
@click.option("--out", "out_path", type=click.Path(), help="CSV destination; stdout when omitted.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render report figures next to the CSV.")
def simulate(
    project_path: str | None,
    synthetic_spec: str | None,
    budgets: str,
    errors: str,
    reps: int,
    seed: int,
    cap: int,
    out_path: str | None,
    figures: bool,
) -> None:
    """Run the simulated-analyst experiment grid."""
    if (project_path is None) == (synthetic_spec is None):
        _fail(EXIT_VALIDATION, "pass exactly one of <project> or --synthetic")
    if synthetic_spec is not None:
        try:
            project = synthetic_project(_parse_synthetic(synthetic_spec))
        except ModelValidationError as exc:
            _fail(EXIT_VALIDATION, f"bad --synthetic spec: {exc}")
    else:
        project = _load_project(project_path)

    try:
        config = ExperimentConfig(
            project=project,
            budgets=tuple(int(b) for b in budgets.split(",")),
            error_rates=_parse_rates(errors),
            repetitions=reps,
            base_seed=seed,
            solution_cap=cap,
        )
    except (ValueError, ModelValidationError) as exc:
        _fail(EXIT_VALIDATION, str(exc))

    try:
        records = run_experiment(config)
    except InfeasibleError as exc:
        _fail(EXIT_INFEASIBLE, str(exc))
    except PriorankError as exc:
        _fail(EXIT_RUNTIME, str(exc))

    if out_path is None:
        click.echo(records_to_csv(records), nl=False)
        return
    write_csv(records, out_path)
    click.echo(f"wrote {len(records)} runs to {out_path}")
    if figures:
        from .figures import write_report_figures

        out = Path(out_path)
        written = write_report_figures(records, out.parent, stem=out.stem)
        for path in written:
            click.echo(f"wrote {path}")


@main.command()
@click.option("--addr", default=None, help="host:port to listen on (default env PRIORANK_ADDR or 127.0.0.1:8000).")
@click.option("--data", "data_dir", type=click.Path(), default="priorank_sessions", show_default=True,
              help="Directory for session snapshots.")
def serve(addr: str | None, data_dir: str) -> None:
    """Start the HTTP service."""
    addr = addr or os.environ.get("PRIORANK_ADDR", "127.0.0.1:8000")
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        _fail(EXIT_VALIDATION, f"bad --addr {addr!r}, expected host:port")
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir=data_dir), host=host, port=int(port_text))


if __name__ == "__main__":
    main()
