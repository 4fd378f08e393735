#!/usr/bin/env python3
"""
wfsem command line.

    wfsem <stage> --config <path> --input <dir> --workspace <dir>
                  [--jobs N] [--metric seco|zhou|sanchez] [--zhou-k F]
                  [--set dotted.key=value ...] [-v | -q]

Stages: filter, prune, harvest, annotate, score, emit, stats, pipeline.
`wfsem terms` regenerates the base term list from an EDAM release.

Exit codes: 0 success, 1 configuration error, 2 missing upstream stage,
3 some items failed (see the manifest).
"""

import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
from rich import box
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import load_config
from .errors import ConfigError, MissingUpstream, WfsemError
from .log import get_logger, setup_logging
from .ontology.loaders import OntologyFormat, load_ontology_file
from .relevance import format_term_list, load_term_list, regenerate_term_list
from .stages import StageResult, run_stage
from .workspace import Workspace

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING_UPSTREAM = 2
EXIT_PARTIAL = 3

console = Console()
log = get_logger(__name__)


def stage_options(fn):
    """Options shared by every stage command."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
                     help="Pipeline config file (default: $WFSEM_CONFIG)"),
        click.option("--input", "input_dir", type=click.Path(file_okay=False, path_type=Path),
                     help="Directory of workflow documents"),
        click.option("--workspace", type=click.Path(file_okay=False, path_type=Path),
                     default=Path("workspace"), show_default=True, help="Workspace directory"),
        click.option("--jobs", type=click.IntRange(min=1), help="Parallel workers (default: CPUs)"),
        click.option("--metric", type=click.Choice(["seco", "zhou", "sanchez"]), help="IC metric"),
        click.option("--zhou-k", type=click.FloatRange(0.0, 1.0), help="Zhou depth weight k"),
        click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                     help="Override a config key (repeatable)"),
        click.option("--progress/--no-progress", default=False, help="Show progress bars"),
        click.option("-v", "--verbose", is_flag=True, help="Debug logging"),
        click.option("-q", "--quiet", is_flag=True, help="Warnings and errors only"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def print_summary(results: Sequence[StageResult]) -> None:
    """Print one row per stage run."""
    table = Table(title="Stage Summary", box=box.ROUNDED)
    table.add_column("Stage", style="cyan")
    table.add_column("Status", style="green")
    table.add_column("Counts")
    table.add_column("Failures", justify="right")
    for result in results:
        record = result.record
        counts = ", ".join(f"{k}={_fmt(v)}" for k, v in record.counts.items())
        status = "unchanged" if result.skipped else "done"
        failures = str(len(record.failures))
        if record.failures:
            failures = f"[red]{failures}[/red]"
        table.add_row(record.stage, status, counts, failures)
    console.print(table)


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def run_command(ctx: click.Context, stage: str, config_path: Optional[Path],
                input_dir: Optional[Path], workspace: Path, jobs: Optional[int],
                metric: Optional[str], zhou_k: Optional[float], overrides: Sequence[str],
                progress: bool, verbose: bool, quiet: bool) -> None:
    setup_logging(verbose=verbose, quiet=quiet)
    flags: Dict[str, Any] = {"ic.metric": metric, "ic.zhou_k": zhou_k, "jobs": jobs}
    try:
        config = load_config(config_path, overrides, flags)
        ws = Workspace(workspace)
        with ws.lock():
            results = run_stage(stage, config, ws, input_dir, show_progress=progress)
    except ConfigError as e:
        console.print(f"[red]Configuration error:[/red] {e}")
        ctx.exit(EXIT_CONFIG)
    except MissingUpstream as e:
        console.print(f"[red]Missing upstream:[/red] {e}")
        ctx.exit(EXIT_MISSING_UPSTREAM)
    except WfsemError as e:
        console.print(f"[red]Error:[/red] {e}")
        ctx.exit(EXIT_CONFIG)

    if not quiet:
        print_summary(results)
    if any(r.record.failures for r in results):
        ctx.exit(EXIT_PARTIAL)
    ctx.exit(EXIT_OK)


@click.group()
@click.version_option(__version__, prog_name="wfsem")
def cli():
    """Semantic annotation pipeline for Taverna workflows."""


def _stage_command(name: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @stage_options
    @click.pass_context
    def command(ctx, **options):
        run_command(ctx, name, **options)
    return command


for _name, _help in (
    ("filter", "Parse workflows and keep the bioinformatics-relevant ones."),
    ("prune", "Remove shim processors and reconnect the data flow."),
    ("harvest", "Assemble service descriptions from the source chain."),
    ("annotate", "Annotate descriptions with ontology classes."),
    ("score", "Compute the IC report and histograms."),
    ("emit", "Write OPMW Turtle per workflow."),
    ("stats", "Write shim/non-shim composition statistics."),
    ("pipeline", "Run filter, prune, harvest, annotate, score and emit."),
):
    _stage_command(_name, _help)


@cli.command()
@click.option("--ontology", "ontology_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path), help="EDAM release")
@click.option("--format", "fmt", type=click.Choice(["obo", "table"]), default="obo", show_default=True)
@click.option("--namespace", default="topic", show_default=True, help="Branch to search")
@click.option("--query", default="bioinformatics", show_default=True, help="Definition search term")
@click.option("--terms", "terms_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Term list whose curated sections are carried over (default: packaged list)")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def terms(ctx, ontology_path, fmt, namespace, query, terms_path, out_path, verbose):
    """Regenerate the base term list by definition search."""
    setup_logging(verbose=verbose)
    try:
        store = load_ontology_file(ontology_path, OntologyFormat(fmt), "EDAM").freeze()
        term_list = regenerate_term_list(store, load_term_list(terms_path), namespace, query)
    except WfsemError as e:
        console.print(f"[red]Error:[/red] {e}")
        ctx.exit(EXIT_CONFIG)
    out_path.write_text(format_term_list(term_list), encoding="utf-8")
    console.print(f"Wrote {len(term_list.base_terms)} base terms "
                  f"({len(term_list.effective)} effective) to {out_path}")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the exit code."""
    try:
        code = cli.main(args=argv, prog_name="wfsem", standalone_mode=False)
    except click.exceptions.Abort:
        return EXIT_CONFIG
    except click.ClickException as e:
        e.show()
        return e.exit_code
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
