"""Command-line entry points.

Every subcommand wraps a library operation one-to-one, prints its result
as JSON (or aligned text where noted), and maps domain errors to the
documented exit-code families. Machine-readable error objects go to
stderr so stdout stays parseable.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .canonical import canonical_dumps
from .errors import CarbonsightError, exit_code_for
from .gateway import GatewayConfig, VlmBackend
from .matching import MaterialDescription, lexical_match, vlm_match
from .materials import collect_violations, load_dataset
from .pipeline import PipelineConfig, render_report, run_pipeline
from .study import (
    SessionStore,
    SurveyResponse,
    add_reflection,
    code_reflection,
    create_session,
    finalize_session,
    load_sessions,
    render_summary,
    session_to_dict,
    submit_iteration,
    summarize_study,
)


def _fail(exc: CarbonsightError) -> None:
    sys.stderr.write(canonical_dumps({"code": exc.code, "message": str(exc)}) + "\n")
    sys.exit(exit_code_for(exc))


def handles_domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CarbonsightError as e:
            _fail(e)

    return wrapper


@click.group()
def main():
    """Text-to-image generation with embodied-carbon material insights."""


# ---------------------------------------------------------------------------
# dataset


@main.group()
def dataset():
    """Materials dictionary tools."""


@dataset.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def dataset_validate(path: Path):
    """Check every record invariant; one line per violation, nonzero exit."""
    violations = collect_violations(path.read_bytes())
    for line in violations:
        click.echo(line)
    if violations:
        sys.exit(3)
    click.echo(f"ok: {path}")


# ---------------------------------------------------------------------------
# match


def _backend_from_flag(flag: str | None) -> VlmBackend | None:
    if flag is None:
        return None
    if flag.startswith("replay:"):
        config = GatewayConfig(mode="replay", fixture_dir=Path(flag.split(":", 1)[1]))
    elif flag in ("mock", "live"):
        config = GatewayConfig(mode=flag)
    else:
        raise click.UsageError(f"--backend must be replay:<dir>, mock or live, got {flag!r}")
    return VlmBackend(config)


@main.command("match")
@click.argument("description")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--top", default=5, show_default=True, help="candidates to list")
@click.option("--backend", "backend_flag", default=None, help="replay:<dir>, mock or live; lexical when omitted")
@handles_domain_errors
def match_cmd(description: str, dataset_path: Path, top: int, backend_flag: str | None):
    """Map a free-text material description to its best dictionary record."""
    ds = load_dataset(dataset_path.read_bytes(), source_label=str(dataset_path))
    desc = MaterialDescription(text=description)
    backend = _backend_from_flag(backend_flag)
    if backend is None:
        result = lexical_match(desc, ds, k=top)
    else:
        result = vlm_match(desc, ds, backend, k=top)
    chosen = ds.record(result.record_id)
    click.echo(
        canonical_dumps(
            {
                "record_id": result.record_id,
                "material_name": chosen.material_name,
                "score": result.score,
                "method": result.method,
            }
        )
    )
    for rid, score in result.candidates:
        click.echo(
            canonical_dumps(
                {
                    "candidate": rid,
                    "material_name": ds.record(rid).material_name,
                    "score": score,
                }
            )
        )


# ---------------------------------------------------------------------------
# gen


@main.command("gen")
@click.option("--prompt", required=True)
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--mode", default="mock", show_default=True, type=click.Choice(["mock", "replay", "live"]))
@click.option("--condition", default="t2i_insights", show_default=True, type=click.Choice(["t2i_only", "t2i_insights"]))
@click.option("--format", "fmt", default="json", show_default=True, type=click.Choice(["json", "text_table"]))
@click.option("--fixtures", type=click.Path(file_okay=False, path_type=Path), default=None, help="fixture directory for replay or live recording")
@click.option("--save-image", type=click.Path(dir_okay=False, path_type=Path), default=None, help="write the generated image to this file")
@handles_domain_errors
def gen_cmd(prompt, dataset_path, mode, condition, fmt, fixtures, save_image):
    """Run one pipeline call and print the rendered report."""
    config = PipelineConfig(
        dataset_path=dataset_path,
        gateway_mode=mode,
        fixture_dir=fixtures,
        condition=condition,
    )
    report = run_pipeline(prompt, config)
    if save_image is not None:
        save_image.write_bytes(report.image.data)
    out = render_report(report, fmt)
    click.echo(out, nl=not out.endswith("\n"))


# ---------------------------------------------------------------------------
# study


@main.group()
def study():
    """Run the three-condition study protocol."""


_store_option = click.option(
    "--store",
    "store_dir",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="session store directory",
)


@study.command("new")
@click.option("--participant", required=True)
@click.option("--condition", required=True, type=click.Choice(["T1", "T2", "T3"], case_sensitive=False))
@_store_option
@handles_domain_errors
def study_new(participant: str, condition: str, store_dir: Path):
    session = create_session(participant, condition, store=SessionStore(store_dir))
    click.echo(canonical_dumps(session_to_dict(session)))


@study.command("iterate")
@click.option("--session", "session_id", required=True)
@click.option("--prompt", required=True)
@_store_option
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--mode", default="mock", show_default=True, type=click.Choice(["mock", "replay", "live"]))
@click.option("--fixtures", type=click.Path(file_okay=False, path_type=Path), default=None)
@handles_domain_errors
def study_iterate(session_id, prompt, store_dir, dataset_path, mode, fixtures):
    store = SessionStore(store_dir)
    session = store.load(session_id)
    config = PipelineConfig(
        dataset_path=dataset_path, gateway_mode=mode, fixture_dir=fixtures
    )
    record = submit_iteration(session, prompt, config, store=store)
    click.echo(
        canonical_dumps(
            {
                "index": record.index,
                "prompt": record.prompt,
                "report": record.report,
                "submitted_at": record.submitted_at,
            }
        )
    )


@study.command("reflect")
@click.option("--session", "session_id", required=True)
@click.option("--iteration", required=True, type=int)
@click.option("--text", required=True)
@_store_option
@handles_domain_errors
def study_reflect(session_id, iteration, text, store_dir):
    store = SessionStore(store_dir)
    session = store.load(session_id)
    reflection = add_reflection(session, iteration, text, store=store)
    click.echo(
        canonical_dumps({"iteration": reflection.iteration, "text": reflection.text})
    )


@study.command("finalize")
@click.option("--session", "session_id", required=True)
@click.option("--satisfaction", required=True)
@click.option("--sustainability", required=True)
@click.option("--insights-useful", default=None)
@click.option("--free-text", default="")
@_store_option
@handles_domain_errors
def study_finalize(session_id, satisfaction, sustainability, insights_useful, free_text, store_dir):
    store = SessionStore(store_dir)
    session = store.load(session_id)
    survey = SurveyResponse(
        satisfaction=code_reflection(satisfaction),
        sustainability_considered=code_reflection(sustainability),
        insights_useful=None if insights_useful is None else code_reflection(insights_useful),
        free_text=free_text,
    )
    finalize_session(session, survey, store=store)
    click.echo(canonical_dumps(session_to_dict(session)))


@study.command("summarize")
@click.argument("path", type=click.Path(exists=True, path_type=Path))
@click.option("--format", "fmt", default="text", show_default=True, type=click.Choice(["json", "text"]))
@handles_domain_errors
def study_summarize(path: Path, fmt: str):
    """Aggregate complete sessions from a store directory or export file."""
    sessions = load_sessions(path)
    if not sessions:
        click.echo("no sessions")
        return
    summary = summarize_study(sessions)
    out = render_summary(summary, fmt)
    click.echo(out, nl=not out.endswith("\n"))


# ---------------------------------------------------------------------------
# serve


@main.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--check", is_flag=True, help="validate config and exit without binding")
@handles_domain_errors
def serve_cmd(config_path: Path, check: bool):
    """Run the HTTP service for the designer UI."""
    from .service import load_service_config, serve, validate_config

    config = load_service_config(config_path)
    if check:
        validate_config(config)
        click.echo(f"ok: {config_path}")
        return
    serve(config)


if __name__ == "__main__":
    main()
