"""Unit tests for HTMLReporter."""

from __future__ import annotations

from comclip.composition.models import CompositionConfig
from comclip.evaluation.ablation import AblationRow, AblationTable
from comclip.evaluation.models import EvalReport, GroupCount, WinogroundScores
from comclip.reports import HTMLReporter


def _report(**overrides) -> EvalReport:
    fields = {
        "dataset": "comvg",
        "config": "full",
        "seed": 1,
        "n_instances": 2,
        "overall": 0.5,
        "by_neg_type": {"subject": 0.5},
        "counts": {"subject": GroupCount(correct=1, total=2)},
    }
    return EvalReport(**(fields | overrides))


class TestExport:
    def test_self_contained_document(self) -> None:
        """Output is a complete HTML page with inline CSS and no scripts."""
        html = HTMLReporter().export(_report())

        assert html.startswith("<!DOCTYPE html>")
        assert "<style>" in html
        assert "<script" not in html

    def test_metrics_and_counts(self) -> None:
        html = HTMLReporter(title="nightly").export(_report())

        assert "<title>nightly · comvg</title>" in html
        assert "<td>50.00</td>" in html
        assert "<td>subject</td><td>1</td><td>2</td>" in html

    def test_skipped_listed(self) -> None:
        html = HTMLReporter().export(_report(skipped=["c<9>"]))

        assert "1 skipped instance(s)" in html
        assert "c&lt;9&gt;" in html

    def test_winoground(self) -> None:
        report = _report(
            dataset="winoground",
            overall=None,
            by_neg_type={},
            counts={},
            winoground=WinogroundScores(text=0.25, image=0.25, group=0.0),
        )

        html = HTMLReporter().export(report)

        assert "<th>group</th>" in html
        assert "<td>25.00</td>" in html


class TestExportTable:
    def test_baseline_row_marked(self) -> None:
        """The baseline row is styled separately and comes first."""
        table = AblationTable(
            dataset="comvg",
            rows=[
                AblationRow(
                    config=CompositionConfig(subimage_config="all_black"),
                    report=_report(config="all_black"),
                )
            ],
            baseline=_report(config="baseline"),
        )

        html = HTMLReporter().export_table(table)

        assert '<tr class="baseline">' in html
        assert html.index('<tr class="baseline">') < html.index("<td>all_black</td>")
