"""Per-instance CSV export."""

import csv
import io
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from comclip.evaluation.models import EvalReport


class CSVReporter:
    """
    One row per scored instance: id, group, correct, then every score column.

    Score columns are the union of the instances' score names, sorted, so the
    header is stable for a given dataset kind.
    """

    def export(self, report: EvalReport) -> str:
        score_names = sorted({name for row in report.instance_scores for name in row.scores})
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["id", "group", "correct", *score_names])
        for row in report.instance_scores:
            writer.writerow(
                [
                    row.id,
                    row.group,
                    int(row.correct),
                    *(repr(row.scores[n]) if n in row.scores else "" for n in score_names),
                ]
            )
        return buffer.getvalue()
