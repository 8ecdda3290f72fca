"""Unit tests for JSONReporter and CSVReporter."""

from __future__ import annotations

import csv
import io
import json

from comclip.composition import ComposedScorer
from comclip.composition.models import CompositionConfig
from comclip.evaluation.ablation import AblationRow, AblationTable
from comclip.evaluation.models import EvalReport, GroupCount, InstanceScore
from comclip.reports import CSVReporter, JSONReporter


def _report() -> EvalReport:
    return EvalReport(
        dataset="comvg",
        config="full",
        seed=3,
        n_instances=2,
        overall=0.5,
        by_neg_type={"subject": 1.0, "object": 0.0},
        counts={"subject": GroupCount(correct=1, total=1), "object": GroupCount(correct=0, total=1)},
        instance_scores=[
            InstanceScore(id="c1", group="subject", scores={"pos": 0.3, "neg": 0.1}, correct=True),
            InstanceScore(id="c2", group="object", scores={"pos": 0.1, "neg": 0.1}, correct=False),
        ],
    )


class TestJSONReporter:
    """Deterministic JSON documents."""

    def test_export_fields(self) -> None:
        """The eval document has sorted breakdowns and no instance rows."""
        doc = json.loads(JSONReporter().export(_report()))

        assert doc["overall"] == 0.5
        assert list(doc["by_neg_type"]) == ["object", "subject"]
        assert doc["winoground"] is None
        assert doc["recall"] is None
        assert doc["seed"] == 3
        assert "instance_scores" not in doc

    def test_export_is_deterministic(self) -> None:
        """Two exports of equal reports are byte-identical."""
        assert JSONReporter().export(_report()) == JSONReporter().export(_report())

    def test_trailing_newline_and_indent(self) -> None:
        text = JSONReporter(indent=4).export(_report())

        assert text.endswith("}\n")
        assert '\n    "dataset": "comvg"' in text

    def test_export_table(self) -> None:
        """Ablation documents list rows with their config label."""
        table = AblationTable(
            dataset="comvg",
            seed=3,
            rows=[AblationRow(config=CompositionConfig(fill="blur"), report=_report())],
        )

        doc = json.loads(JSONReporter().export_table(table))

        assert doc["baseline"] is None
        assert doc["rows"][0]["config"] == "full/blur"
        assert doc["rows"][0]["overall"] == 0.5

    async def test_export_result(self, mock_backend, image) -> None:
        """The explain document carries weights and scores."""
        result = await ComposedScorer(mock_backend).score(image, "A cat sits on a table")

        doc = json.loads(JSONReporter().export_result(result))

        assert len(doc["entities"]) == 3
        assert doc["weights"] == result.weights
        assert doc["final_score"] == result.final_score


class TestCSVReporter:
    """Per-instance CSV rows."""

    def test_header_and_rows(self) -> None:
        rows = list(csv.reader(io.StringIO(CSVReporter().export(_report()))))

        assert rows[0] == ["id", "group", "correct", "neg", "pos"]
        assert rows[1] == ["c1", "subject", "1", "0.1", "0.3"]
        assert rows[2] == ["c2", "object", "0", "0.1", "0.1"]

    def test_scores_round_trip_exactly(self) -> None:
        """Scores are written with repr, so parsing them gives the same float."""
        score = 0.1 + 0.2
        report = EvalReport(
            dataset="comvg",
            config="full",
            n_instances=1,
            instance_scores=[InstanceScore(id="x", scores={"pos": score}, correct=True)],
        )

        rows = list(csv.reader(io.StringIO(CSVReporter().export(report))))

        assert float(rows[1][3]) == score

    def test_missing_score_is_blank(self) -> None:
        report = EvalReport(
            dataset="winoground",
            config="full",
            n_instances=2,
            instance_scores=[
                InstanceScore(id="a", scores={"text": 1.0}, correct=True),
                InstanceScore(id="b", scores={"image": 0.0}, correct=False),
            ],
        )

        rows = list(csv.reader(io.StringIO(CSVReporter().export(report))))

        assert rows[0] == ["id", "group", "correct", "image", "text"]
        assert rows[1] == ["a", "", "1", "", "1.0"]

    def test_empty_report(self) -> None:
        report = EvalReport(dataset="comvg", config="full")

        assert CSVReporter().export(report) == "id,group,correct\n"
