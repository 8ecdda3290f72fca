"""Console reporter for comclip results."""

from typing import TYPE_CHECKING

from rich.console import Console
from rich.table import Table

from comclip.reports._utils import as_percent, collect_table_rows, headline_metrics

if TYPE_CHECKING:
    from comclip.clients.trace import TraceCollector
    from comclip.composition.models import CompositionResult
    from comclip.evaluation.ablation import AblationTable
    from comclip.evaluation.models import EvalReport
    from comclip.evaluation.timing import OverheadReport
    from comclip.parsing.models import ParsedSentence


class ConsoleReporter:
    """
    Rich-based console reporter.

    Metrics print as percentages with two decimals, the way benchmark tables
    are usually read.

    Example:
        >>> reporter = ConsoleReporter()
        >>> reporter.report(eval_report)

        # Capturing output in tests
        >>> console = Console(record=True, width=120)
        >>> ConsoleReporter(console=console).report(eval_report)
        >>> text = console.export_text()
    """

    def __init__(self, console: Console | None = None, verbose: bool = False) -> None:
        """
        Args:
            console: Rich Console instance. Creates a default Console if not provided.
            verbose: Also list skipped instance ids.
        """
        self._console = console or Console()
        self._verbose = verbose

    def report(self, report: EvalReport) -> None:
        """Headline metrics, per-group counts and the skip summary of one evaluation."""
        table = Table(title=f"{report.dataset} ({report.config}, seed {report.seed})")
        metrics = headline_metrics(report)
        for name in metrics:
            table.add_column(name, justify="right")
        table.add_row(*(as_percent(v) for v in metrics.values()))
        self._console.print(table)

        if report.counts:
            counts = Table(show_header=True, box=None, padding=(0, 1))
            counts.add_column("Group", style="bold cyan")
            counts.add_column("Correct", justify="right")
            counts.add_column("Total", justify="right")
            for name, count in sorted(report.counts.items()):
                counts.add_row(name, str(count.correct), str(count.total))
            self._console.print(counts)

        self._print_skipped(report.skipped, report.n_instances)

    def report_table(self, table: AblationTable) -> None:
        """One row per config; the baseline row, when present, comes first."""
        columns, rows = collect_table_rows(table)
        out = Table(title=f"Ablation: {table.dataset} (seed {table.seed})", show_lines=False)
        out.add_column("Config", style="bold")
        for name in columns:
            out.add_column(name, justify="right")
        out.add_column("N", justify="right")
        for row in rows:
            out.add_row(
                row["config"], *(as_percent(v) for v in row["metrics"]), str(row["n_instances"])
            )
        self._console.print(out)

    def report_parse(self, parsed: ParsedSentence) -> None:
        table = Table(title=parsed.raw_text, show_header=True)
        table.add_column("Subject")
        table.add_column("Predicate")
        table.add_column("Object")
        for triplet in parsed.triplets:
            table.add_row(triplet.subject, triplet.predicate, triplet.object)
        self._console.print(table)
        if not parsed.triplets:
            self._console.print("[yellow]No triplet found; scoring falls back to the sentence.[/yellow]")

    def report_result(self, result: CompositionResult) -> None:
        """Per-entity similarities and weights, then the global and final scores."""
        table = Table(title=result.sentence, show_lines=False)
        table.add_column("Entity", style="bold")
        table.add_column("Role")
        table.add_column("Subimage")
        table.add_column("Similarity", justify="right")
        table.add_column("Weight", justify="right")
        for record in result.entity_records:
            table.add_row(
                record.word,
                str(record.role),
                "—" if record.kind is None else str(record.kind),
                f"{record.similarity:.4f}",
                f"{record.weight:.6f}",
            )
        self._console.print(table)
        self._console.print(
            f"global {result.global_score:.4f}  [bold]final {result.final_score:.4f}[/bold]"
            f"  ({result.config.label})"
        )

    def report_overhead(self, overhead: OverheadReport) -> None:
        self._console.print(
            f"baseline {overhead.baseline_mean_s:.4f}±{overhead.baseline_std_s:.4f}s  "
            f"composed {overhead.composed_mean_s:.4f}±{overhead.composed_std_s:.4f}s  "
            f"ratio {overhead.ratio:.2f}x over {overhead.n_pairs} pair(s)"
        )

    def report_trace(self, trace: TraceCollector) -> None:
        summary = trace.summary()
        if not summary:
            self._console.print("[dim]No service calls.[/dim]")
            return
        table = Table(title="Service calls", box=None, padding=(0, 1))
        table.add_column("Service", style="bold cyan")
        table.add_column("Calls", justify="right")
        table.add_column("Failures", justify="right")
        table.add_column("Retries", justify="right")
        table.add_column("Latency (ms)", justify="right")
        table.add_column("Max (ms)", justify="right")
        for service, stats in summary.items():
            table.add_row(
                service,
                str(stats.calls),
                str(stats.failures),
                str(stats.retries),
                f"{stats.latency_ms:,}",
                f"{stats.max_latency_ms:,}",
            )
        self._console.print(table)

    def report_cache(self, directory: str, entries: int, size_bytes: int) -> None:
        self._console.print(f"{directory}: {entries:,} entries, {size_bytes:,} bytes")

    def _print_skipped(self, skipped: list[str], n_instances: int) -> None:
        if not skipped:
            return
        self._console.print(
            f"[yellow]Skipped {len(skipped)} instance(s); {n_instances} scored.[/yellow]"
        )
        if self._verbose:
            for instance_id in skipped:
                self._console.print(f"  [dim]{instance_id}[/dim]")
