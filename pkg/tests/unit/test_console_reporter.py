"""Unit tests for ConsoleReporter."""

from __future__ import annotations

from datetime import UTC, datetime

from rich.console import Console

from comclip.clients.trace import CallTrace, TraceCollector
from comclip.composition import ComposedScorer
from comclip.composition.models import CompositionConfig
from comclip.evaluation.ablation import AblationRow, AblationTable
from comclip.evaluation.models import (
    EvalReport,
    GroupCount,
    RecallScores,
    WinogroundScores,
)
from comclip.evaluation.timing import OverheadReport
from comclip.parsing import ParsedSentence, ParserSource
from comclip.reports.console import ConsoleReporter


def _matching_report(skipped: list[str] | None = None) -> EvalReport:
    """A ComVG report: 3 of 4 correct."""
    return EvalReport(
        dataset="comvg",
        config="full",
        seed=7,
        n_instances=4,
        overall=0.75,
        by_neg_type={"object": 1.0, "subject": 0.5},
        counts={
            "object": GroupCount(correct=2, total=2),
            "subject": GroupCount(correct=1, total=2),
        },
        skipped=skipped or [],
    )


def _capture(verbose: bool = False) -> tuple[ConsoleReporter, Console]:
    console = Console(record=True, width=120)
    return ConsoleReporter(console=console, verbose=verbose), console


class TestEvalReport:
    """Single-report rendering."""

    def test_headline_as_percentages(self) -> None:
        """Overall and per-type accuracy print as percentages."""
        reporter, console = _capture()
        reporter.report(_matching_report())
        output = console.export_text()

        assert "comvg (full, seed 7)" in output
        assert "75.00" in output
        assert "50.00" in output

    def test_group_counts(self) -> None:
        """Each group shows correct and total counts."""
        reporter, console = _capture()
        reporter.report(_matching_report())
        output = console.export_text()

        assert "Group" in output
        assert "subject" in output

    def test_winoground_columns(self) -> None:
        """Winoground reports show text, image and group."""
        report = EvalReport(
            dataset="winoground",
            config="full",
            n_instances=2,
            winoground=WinogroundScores(text=0.5, image=0.5, group=0.0),
        )
        reporter, console = _capture()
        reporter.report(report)
        output = console.export_text()

        for column in ("text", "image", "group"):
            assert column in output
        assert "0.00" in output

    def test_retrieval_columns(self) -> None:
        """Retrieval reports show R@1, R@5 and R@10."""
        report = EvalReport(
            dataset="retrieval",
            config="full",
            n_instances=10,
            recall=RecallScores(r1=0.1, r5=0.5, r10=0.9),
        )
        reporter, console = _capture()
        reporter.report(report)
        output = console.export_text()

        assert "R@1" in output
        assert "R@10" in output
        assert "90.00" in output

    def test_skipped_summary(self) -> None:
        """Skipped instances are summarized; ids only in verbose mode."""
        reporter, console = _capture()
        reporter.report(_matching_report(skipped=["c9"]))
        assert "Skipped 1 instance(s)" in console.export_text()
        assert "c9" not in console.export_text()

        reporter, console = _capture(verbose=True)
        reporter.report(_matching_report(skipped=["c9"]))
        assert "c9" in console.export_text()


class TestAblationTable:
    def test_baseline_row_first(self) -> None:
        """The baseline row precedes the config rows."""
        full = _matching_report()
        baseline = full.model_copy(update={"config": "baseline", "overall": 0.5})
        table = AblationTable(
            dataset="comvg",
            rows=[AblationRow(config=CompositionConfig(), report=full)],
            baseline=baseline,
        )
        reporter, console = _capture()
        reporter.report_table(table)
        output = console.export_text()

        assert "Ablation: comvg" in output
        assert output.index("baseline") < output.index("full")


class TestOtherOutputs:
    """Parse, result, overhead, trace and cache output."""

    def test_parse_without_triplets(self) -> None:
        """An empty parse notes the baseline fallback."""
        parsed = ParsedSentence(raw_text="sunset", triplets=[], source=ParserSource.RULE_BASED)
        reporter, console = _capture()
        reporter.report_parse(parsed)

        assert "No triplet found" in console.export_text()

    def test_parse_with_triplet(self) -> None:
        parsed = ParsedSentence(
            raw_text="a cat sits on a table",
            triplets=[{"subject": "cat", "predicate": "sits", "object": "table"}],
            source=ParserSource.RULE_BASED,
        )
        reporter, console = _capture()
        reporter.report_parse(parsed)
        output = console.export_text()

        assert "cat" in output
        assert "table" in output

    async def test_result(self, mock_backend, image) -> None:
        """Entity rows and the final score are printed."""
        result = await ComposedScorer(mock_backend).score(image, "A cat sits on a table")
        reporter, console = _capture()
        reporter.report_result(result)
        output = console.export_text()

        assert "cat" in output
        assert "fallback_original" in output
        assert f"final {result.final_score:.4f}" in output

    def test_overhead(self) -> None:
        overhead = OverheadReport(
            n_pairs=2,
            repeats=1,
            baseline_mean_s=0.01,
            baseline_std_s=0.0,
            composed_mean_s=0.05,
            composed_std_s=0.0,
        )
        reporter, console = _capture()
        reporter.report_overhead(overhead)

        assert "ratio 5.00x over 2 pair(s)" in console.export_text()

    def test_empty_trace(self) -> None:
        reporter, console = _capture()
        reporter.report_trace(TraceCollector())

        assert "No service calls." in console.export_text()

    def test_trace_table(self) -> None:
        """One row per service."""
        trace = TraceCollector()
        trace.add(
            CallTrace(
                timestamp=datetime.now(UTC),
                service="captioner",
                operation="dense_captions",
                latency_ms=1234,
                success=True,
            )
        )
        reporter, console = _capture()
        reporter.report_trace(trace)
        output = console.export_text()

        assert "captioner" in output
        assert "1,234" in output

    def test_cache(self) -> None:
        reporter, console = _capture()
        reporter.report_cache("/tmp/cache", 1200, 65536)

        assert "1,200 entries, 65,536 bytes" in console.export_text()
