"""CLI entry point for comclip."""

import asyncio
import json
import logging
import sys
from collections.abc import Coroutine, Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import Progress, SpinnerColumn, TextColumn

import comclip
from comclip.clients.trace import TraceCollector
from comclip.composition.models import CompositionConfig
from comclip.core.config import RunConfig, load_run_config
from comclip.core.runner import ComCLIP, image_store_for
from comclip.errors import ComclipError, DataError, UsageError
from comclip.evaluation.models import DatasetKind, EvalReport

app = typer.Typer(no_args_is_help=True, pretty_exceptions_enable=False)
cache_app = typer.Typer(no_args_is_help=True, help="Inspect or clear the embedding cache.")
app.add_typer(cache_app, name="cache")

logger = logging.getLogger(__name__)

_OUTPUTS = ("console", "json", "csv", "html")


@dataclass
class _State:
    """Global options shared by every command."""

    config_path: Path | None = None
    overrides: dict[str, Any] = field(default_factory=dict)
    lenient: bool = False
    json_errors: bool = False
    verbose: bool = False
    trace: bool = False


_state = _State()
err_console = Console(stderr=True)


def version_callback(value: bool) -> None:
    """Display version and exit."""
    if value:
        typer.echo(f"comclip version {comclip.__version__}")
        raise typer.Exit()


def _configure_logging(verbose: bool) -> None:
    root = logging.getLogger("comclip")
    root.handlers.clear()
    root.addHandler(RichHandler(console=err_console, show_path=False, rich_tracebacks=verbose))
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)


@app.callback()
def main(
    config: Path | None = typer.Option(
        None, "--config", "-c", help="YAML run config; keys mirror RunConfig."
    ),
    backend: str | None = typer.Option(None, "--backend", "-b", help="Encoder backend name."),
    seed: int | None = typer.Option(None, "--seed", help="Seed recorded in reports."),
    parallelism: int | None = typer.Option(
        None, "--parallelism", "-p", help="Concurrently scored instances."
    ),
    cache_dir: Path | None = typer.Option(None, "--cache-dir", help="Embedding cache directory."),
    parser: str | None = typer.Option(None, "--parser", help="rule_based or llm."),
    aligner: str | None = typer.Option(None, "--aligner", help="lexical or llm."),
    llm: str | None = typer.Option(None, "--llm", help="none, http, claude or replay."),
    captioner: str | None = typer.Option(None, "--captioner", help="none, http or replay."),
    lenient: bool = typer.Option(False, "--lenient", help="Skip and log bad rows and instances."),
    json_errors: bool = typer.Option(
        False, "--json-errors", help="Print errors as JSON on stderr."
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging."),
    trace: bool = typer.Option(False, "--trace", help="Print a service-call summary."),
    version: bool = typer.Option(
        None,
        "--version",
        "-V",
        help="Show version and exit.",
        callback=version_callback,
        is_eager=True,
    ),
) -> None:
    """comclip - compositional image-text matching and benchmark evaluation."""
    global _state
    _state = _State(
        config_path=config,
        overrides={
            "backend": backend,
            "seed": seed,
            "parallelism": parallelism,
            "cache_dir": cache_dir,
            "parser": parser,
            "aligner": aligner,
            "llm": llm,
            "captioner": captioner,
        },
        lenient=lenient,
        json_errors=json_errors,
        verbose=verbose,
        trace=trace,
    )
    _configure_logging(verbose)


@contextmanager
def _errors() -> Iterator[None]:
    """Translate comclip errors into their exit codes."""
    try:
        yield
    except ComclipError as exc:
        if _state.json_errors:
            typer.echo(json.dumps(exc.to_json()), err=True)
        else:
            typer.echo(f"Error: {exc}", err=True)
        if _state.verbose:
            logger.debug("Traceback", exc_info=exc)
        raise typer.Exit(code=exc.exit_code) from None


def _run_config() -> RunConfig:
    return load_run_config(_state.config_path, _state.overrides)


def _composition(
    base: CompositionConfig,
    subimages: str | None,
    fill: str | None,
    weighting: str | None,
    logit_scale: float | None,
) -> CompositionConfig:
    updates: dict[str, Any] = {
        "subimage_config": subimages,
        "fill": fill,
        "weighting_mode": weighting,
        "logit_scale": logit_scale,
    }
    data = {**base.model_dump(), **{k: v for k, v in updates.items() if v is not None}}
    try:
        return CompositionConfig.model_validate(data)
    except ValueError as e:
        raise UsageError(f"Invalid composition options: {e}") from e


def _runner(config: RunConfig) -> ComCLIP:
    return ComCLIP(config, trace=TraceCollector() if _state.trace else None, lenient=_state.lenient)


def _finish(runner: ComCLIP) -> None:
    if runner.trace is not None:
        from comclip.reports.console import ConsoleReporter

        ConsoleReporter(console=err_console).report_trace(runner.trace)


def _with_progress[T](description: str, work: Coroutine[Any, Any, T]) -> T:
    """Run a coroutine under a transient spinner on stderr."""
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=err_console,
        transient=True,
    ) as progress:
        progress.add_task(description, total=None)
        result = asyncio.run(work)
    return result


def _dataset_kind(kind: str) -> DatasetKind:
    try:
        return DatasetKind(kind)
    except ValueError:
        valid = ", ".join(k.value for k in DatasetKind)
        raise UsageError(f"Unknown dataset kind {kind!r}. Valid: {valid}") from None


def _check_output(output: str) -> None:
    if output not in _OUTPUTS:
        raise UsageError(f"Unknown output format {output!r}. Supported: {', '.join(_OUTPUTS)}")


def _emit(text: str, output_file: Path | None) -> None:
    if output_file is None:
        sys.stdout.write(text)
        return
    try:
        output_file.parent.mkdir(parents=True, exist_ok=True)
        output_file.write_text(text, encoding="utf-8")
    except OSError as e:
        raise DataError(f"Cannot write {output_file}: {e.strerror or e}") from e
    typer.echo(f"Report written to {output_file}", err=True)


def _write_report(report: EvalReport, output: str, output_file: Path | None) -> None:
    match output:
        case "console":
            from comclip.reports.console import ConsoleReporter

            ConsoleReporter(verbose=_state.verbose).report(report)
        case "json":
            from comclip.reports.json_export import JSONReporter

            _emit(JSONReporter().export(report), output_file)
        case "csv":
            from comclip.reports.csv_export import CSVReporter

            _emit(CSVReporter().export(report), output_file)
        case "html":
            from comclip.reports.html import HTMLReporter

            _emit(HTMLReporter().export(report), output_file or Path("report.html"))


SubimagesOption = typer.Option(
    None, "--subimages", "-s", help="Subimage config, e.g. full, all_black, omit_subject."
)
FillOption = typer.Option(None, "--fill", help="Background fill: black or blur.")
WeightingOption = typer.Option(None, "--weighting", help="softmax or raw_similarity.")
LogitScaleOption = typer.Option(None, "--logit-scale", help="Softmax logit scale (> 0).")
OutputOption = typer.Option("console", "--output", "-o", help="console, json, csv or html.")
OutputFileOption = typer.Option(
    None, "--output-file", "-f", help="Write json/csv/html here instead of stdout."
)


@app.command("parse")
def parse_cmd(
    sentence: str | None = typer.Argument(None, help="Sentence to parse."),
    data: Path | None = typer.Option(
        None, "--data", help="ComVG/SVO-Probes JSONL: report parser agreement instead."
    ),
    kind: str = typer.Option("comvg", "--dataset", "-d", help="comvg or svo_probes."),
) -> None:
    """Print the triplets of a sentence, or the parser's agreement over a dataset."""
    with _errors():
        runner = _runner(_run_config())
        if data is None:
            if not sentence:
                raise UsageError("Give a sentence or --data")
            parsed = runner.parse(sentence)
            typer.echo(
                json.dumps(
                    {
                        "sentence": parsed.raw_text,
                        "source": str(parsed.source),
                        "triplets": [t.model_dump() for t in parsed.triplets],
                        "entities": [{"word": e.word, "role": str(e.role)} for e in parsed.entities],
                    },
                    indent=2,
                )
            )
        else:
            from comclip.datasets.loader import load_dataset

            dataset_kind = _dataset_kind(kind)
            if not dataset_kind.is_matching:
                raise UsageError("Parser agreement needs a comvg or svo_probes file")
            instances, manifest = load_dataset(
                dataset_kind, data, lenient=_state.lenient, check_images=False
            )
            agreement = asyncio.run(runner.agreement_async(instances))
            typer.echo(
                json.dumps(
                    {"dataset": str(dataset_kind), "n_instances": manifest.count, "agreement": agreement},
                    indent=2,
                )
            )
        _finish(runner)


@app.command("ground")
def ground_cmd(
    image: Path = typer.Option(..., "--image", "-i", help="Image file."),
    text: str = typer.Option(..., "--text", "-t", help="Sentence."),
    out: Path | None = typer.Option(None, "--out", help="Directory for subimage PNGs."),
    subimages: str | None = SubimagesOption,
    fill: str | None = FillOption,
) -> None:
    """Ground a sentence's entities in an image and write the subimages."""
    from comclip.grounding.images import load_image, save_image

    with _errors():
        config = _run_config()
        composition = _composition(config.composition, subimages, fill, None, None)
        runner = _runner(config)
        pixels = load_image(image)
        grounded = runner.ground(pixels, text, composition)

        files = []
        if out is not None:
            try:
                out.mkdir(parents=True, exist_ok=True)
                for index, (entity, subimage) in enumerate(grounded.subimages):
                    slug = "_".join(entity.word.split())
                    path = out / f"{index:02d}_{entity.role}_{slug}.png"
                    save_image(subimage.pixels, path)
                    files.append(str(path))
            except OSError as e:
                raise DataError(f"Cannot write subimages to {out}: {e.strerror or e}") from e

        typer.echo(
            json.dumps(
                {
                    "sentence": text,
                    "grounding": grounded.grounding.to_json_dict(),
                    "subimages": [
                        {"word": e.word, "role": str(e.role), "kind": str(s.kind)}
                        for e, s in grounded.subimages
                    ],
                    "files": files,
                },
                indent=2,
            )
        )
        _finish(runner)


@app.command("score")
def score_cmd(
    image: Path = typer.Option(..., "--image", "-i", help="Image file."),
    text: str = typer.Option(..., "--text", "-t", help="Sentence."),
    explain: bool = typer.Option(
        False, "--explain", help="Also print per-entity similarities and weights."
    ),
    timing: bool = typer.Option(
        False, "--timing", help="Time baseline against compositional scoring."
    ),
    repeats: int = typer.Option(3, "--repeats", help="Timed repetitions for --timing."),
    subimages: str | None = SubimagesOption,
    fill: str | None = FillOption,
    weighting: str | None = WeightingOption,
    logit_scale: float | None = LogitScaleOption,
) -> None:
    """Score one image against one sentence and print the result as JSON."""
    from comclip.grounding.images import load_image
    from comclip.reports.console import ConsoleReporter
    from comclip.reports.json_export import JSONReporter

    with _errors():
        config = _run_config()
        composition = _composition(config.composition, subimages, fill, weighting, logit_scale)
        runner = _runner(config)
        pixels = load_image(image)
        result = runner.score(pixels, text, composition)
        sys.stdout.write(JSONReporter().export_result(result))
        if explain:
            ConsoleReporter(console=err_console).report_result(result)
        if timing:
            overhead = asyncio.run(runner.overhead_async([(pixels, text)], composition, repeats))
            ConsoleReporter(console=err_console).report_overhead(overhead)
        _finish(runner)


@app.command("eval")
def eval_cmd(
    kind: str = typer.Option(
        ..., "--dataset", "-d", help="comvg, svo_probes, winoground or vl_checklist."
    ),
    data: Path = typer.Option(..., "--data", help="Dataset JSONL file."),
    root: Path | None = typer.Option(None, "--root", help="Image root (default: file's dir)."),
    baseline: bool = typer.Option(False, "--baseline", help="Score with the uncomposed baseline."),
    split_seeds: str | None = typer.Option(
        None,
        "--split-seeds",
        help="Comma-separated seeds; evaluate one random third per seed and average.",
    ),
    subimages: str | None = SubimagesOption,
    fill: str | None = FillOption,
    weighting: str | None = WeightingOption,
    logit_scale: float | None = LogitScaleOption,
    output: str = OutputOption,
    output_file: Path | None = OutputFileOption,
) -> None:
    """Evaluate a pairwise benchmark and print its report."""
    from comclip.datasets.loader import load_dataset

    with _errors():
        _check_output(output)
        config = _run_config()
        composition = _composition(config.composition, subimages, fill, weighting, logit_scale)
        dataset_kind = _dataset_kind(kind)
        if dataset_kind is DatasetKind.RETRIEVAL:
            raise UsageError("Retrieval datasets are evaluated with the rerank command")
        instances, manifest = load_dataset(
            dataset_kind, data, seed=config.seed, root=root, lenient=_state.lenient
        )
        images = image_store_for(data, manifest.root)
        runner = _runner(config)

        if split_seeds:
            from comclip.evaluation.splits import mean_accuracy, seeded_subsets

            seeds = _parse_seeds(split_seeds)
            reports = [
                runner.evaluate(
                    dataset_kind, subset, images, config=composition, baseline=baseline
                )
                for subset in seeded_subsets(instances, seeds)
            ]
            doc = {
                "dataset": str(dataset_kind),
                "split_seeds": list(seeds),
                "mean_accuracy": mean_accuracy(reports),
                "splits": [r.to_json_dict() for r in reports],
            }
            from comclip.reports.json_export import JSONReporter

            _emit(JSONReporter().dumps(doc), output_file)
        else:
            report = _with_progress(
                f"Evaluating {manifest.count} instances...",
                runner.evaluate_async(
                    dataset_kind, instances, images, config=composition, baseline=baseline
                ),
            )
            _write_report(report, output, output_file)
        _finish(runner)


def _parse_seeds(spec: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(part) for part in spec.split(",") if part.strip())
    except ValueError as e:
        raise UsageError(f"--split-seeds must be comma-separated integers, got {spec!r}") from e
    if not seeds:
        raise UsageError("--split-seeds needs at least one seed")
    return seeds


@app.command("rerank")
def rerank_cmd(
    data: Path = typer.Option(..., "--data", help="Retrieval JSONL of {image, caption} rows."),
    root: Path | None = typer.Option(None, "--root", help="Image root (default: file's dir)."),
    k: int = typer.Option(10, "--k", help="Top-k re-scored compositionally."),
    subimages: str | None = SubimagesOption,
    fill: str | None = FillOption,
    weighting: str | None = WeightingOption,
    logit_scale: float | None = LogitScaleOption,
    output: str = OutputOption,
    output_file: Path | None = OutputFileOption,
) -> None:
    """Rank the gallery with the baseline, re-score the top-k, report recall@1/5/10."""
    from comclip.datasets.loader import load_retrieval

    with _errors():
        _check_output(output)
        config = _run_config()
        composition = _composition(config.composition, subimages, fill, weighting, logit_scale)
        queries, gallery = load_retrieval(
            data, seed=config.seed, root=root, lenient=_state.lenient
        )
        images = image_store_for(data, root)
        runner = _runner(config)
        report = _with_progress(
            f"Ranking {len(queries)} queries over {len(gallery)} images...",
            runner.rerank_async(queries, gallery, images, config=composition, k=k),
        )
        _write_report(report, output, output_file)
        _finish(runner)


@app.command("ablate")
def ablate_cmd(
    kind: str = typer.Option(
        ..., "--dataset", "-d", help="comvg, svo_probes, winoground or vl_checklist."
    ),
    data: Path = typer.Option(..., "--data", help="Dataset JSONL file."),
    root: Path | None = typer.Option(None, "--root", help="Image root (default: file's dir)."),
    configs: str | None = typer.Option(
        None, "--configs", help="Comma-separated subimage configs, e.g. full,all_black."
    ),
    preset: str | None = typer.Option(
        None, "--preset", help="subimage_roles, all_except_one or entity_only."
    ),
    subset: int | None = typer.Option(
        None, "--subset", help="Evaluate about N instances balanced across negative types."
    ),
    no_baseline: bool = typer.Option(False, "--no-baseline", help="Omit the baseline row."),
    fill: str | None = FillOption,
    weighting: str | None = WeightingOption,
    logit_scale: float | None = LogitScaleOption,
    output: str = OutputOption,
    output_file: Path | None = OutputFileOption,
) -> None:
    """Evaluate one dataset under a grid of subimage configs."""
    from comclip.datasets.loader import load_dataset
    from comclip.evaluation.ablation import parse_config_list, preset_configs

    with _errors():
        _check_output(output)
        if output == "csv":
            raise UsageError("Ablation tables export as console, json or html")
        if (configs is None) == (preset is None):
            raise UsageError("Give exactly one of --configs or --preset")
        config = _run_config()
        base = _composition(config.composition, None, fill, weighting, logit_scale)
        grid = preset_configs(preset, base) if preset else parse_config_list(configs or "", base)

        dataset_kind = _dataset_kind(kind)
        instances, manifest = load_dataset(
            dataset_kind, data, seed=config.seed, root=root, lenient=_state.lenient
        )
        if subset is not None:
            from comclip.evaluation.splits import balanced_subset

            instances = balanced_subset(
                instances, subset, config.seed, key=lambda inst: str(getattr(inst, "neg_type", ""))
            )
        images = image_store_for(data, manifest.root)
        runner = _runner(config)
        table = _with_progress(
            f"Ablating {len(grid)} configs over {len(instances)} instances...",
            runner.ablate_async(
                dataset_kind, instances, images, grid, include_baseline=not no_baseline
            ),
        )

        match output:
            case "console":
                from comclip.reports.console import ConsoleReporter

                ConsoleReporter(verbose=_state.verbose).report_table(table)
            case "json":
                from comclip.reports.json_export import JSONReporter

                _emit(JSONReporter().export_table(table), output_file)
            case "html":
                from comclip.reports.html import HTMLReporter

                _emit(HTMLReporter().export_table(table), output_file or Path("ablation.html"))
        _finish(runner)


def _cache_or_fail() -> Any:
    from comclip.encoders.cache import EmbeddingCache

    config = _run_config()
    if config.cache_dir is None:
        raise UsageError("No cache directory: pass --cache-dir or set COMCLIP_CACHE_DIR")
    return EmbeddingCache(config.cache_dir)


@cache_app.command("stats")
def cache_stats() -> None:
    """Show the number of cached embeddings and their size on disk."""
    from comclip.reports.console import ConsoleReporter

    with _errors():
        cache = _cache_or_fail()
        entries, size = cache.disk_usage()
        ConsoleReporter().report_cache(str(cache.directory), entries, size)


@cache_app.command("clear")
def cache_clear() -> None:
    """Delete every cached embedding."""
    with _errors():
        cache = _cache_or_fail()
        removed = cache.clear()
        typer.echo(f"Removed {removed} cached embedding(s) from {cache.directory}")


@app.command("backends")
def backends_cmd() -> None:
    """List the registered encoder backends."""
    from comclip.encoders.registry import list_backends

    for name in list_backends():
        typer.echo(name)


@app.command("version")
def version_cmd() -> None:
    """Show version information."""
    typer.echo(f"comclip version {comclip.__version__}")


def run(argv: list[str] | None = None) -> int:
    """
    Console-script entry point; returns the process exit code.

    0 on success, 1 on a usage error, 2 on a data error, 3 on a backend error.
    """
    try:
        result = app(args=argv, prog_name="comclip", standalone_mode=False)
    except click.exceptions.Abort:
        typer.echo("Aborted.", err=True)
        return 1
    except click.ClickException as exc:
        if _state.json_errors:
            typer.echo(
                json.dumps({"error": "UsageError", "message": exc.format_message(), "exit_code": 1}),
                err=True,
            )
        else:
            exc.show()
        return 1
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    raise SystemExit(run())
