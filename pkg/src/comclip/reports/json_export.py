"""JSON export for eval reports, ablation tables and composition results."""

import json
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from comclip.composition.models import CompositionResult
    from comclip.evaluation.ablation import AblationTable
    from comclip.evaluation.models import EvalReport


class JSONReporter:
    """
    Deterministic JSON export.

    Documents carry no timestamps and use fixed key sets, so two runs with the
    same seed, fixtures and config produce byte-identical files.

    Example:
        >>> reporter = JSONReporter()
        >>> Path("report.json").write_text(reporter.export(report))

    Output structure for an eval report::

        {
          "dataset": "winoground",
          "overall": null,
          "by_neg_type": {},
          "winoground": {"text": 0.31, "image": 0.11, "group": 0.09},
          "recall": null,
          "by_category": {},
          "counts": {},
          "config": "full",
          "seed": 7,
          "n_instances": 400,
          "skipped": []
        }
    """

    def __init__(self, indent: int = 2) -> None:
        self._indent = indent

    def dumps(self, doc: dict[str, Any]) -> str:
        return json.dumps(doc, indent=self._indent, ensure_ascii=False) + "\n"

    def export(self, report: EvalReport) -> str:
        return self.dumps(report.to_json_dict())

    def export_table(self, table: AblationTable) -> str:
        return self.dumps(table.to_json_dict())

    def export_result(self, result: CompositionResult) -> str:
        """The ``--explain`` document: entity records, weights and scores."""
        return self.dumps(result.to_explain_dict())
