"""HTML report exporter for eval reports and ablation tables."""

import datetime
from pathlib import Path
from typing import TYPE_CHECKING, Any

from comclip.reports._utils import as_percent, collect_table_rows, headline_metrics

if TYPE_CHECKING:
    from comclip.evaluation.ablation import AblationTable
    from comclip.evaluation.models import EvalReport


class HTMLReporter:
    """
    HTML report exporter.

    Renders a self-contained HTML file using a Jinja2 template with embedded
    CSS; no external assets and no JavaScript.

    Example:
        >>> html = HTMLReporter().export_table(table)
        >>> Path("ablation.html").write_text(html, encoding="utf-8")
    """

    _TEMPLATE_DIR = Path(__file__).parent / "templates"
    _TEMPLATE_NAME = "report.html.j2"

    def __init__(self, title: str = "comclip report") -> None:
        self._title = title

    def export(self, report: EvalReport) -> str:
        """Render a single evaluation report."""
        metrics = headline_metrics(report)
        return self._render(
            dataset=report.dataset,
            seed=report.seed,
            columns=list(metrics),
            rows=[
                {
                    "config": report.config,
                    "n_instances": report.n_instances,
                    "skipped": len(report.skipped),
                    "metrics": [as_percent(v) for v in metrics.values()],
                }
            ],
            counts=[
                {"group": name, "correct": c.correct, "total": c.total}
                for name, c in sorted(report.counts.items())
            ],
            skipped=list(report.skipped),
        )

    def export_table(self, table: AblationTable) -> str:
        """Render an ablation table, one row per config."""
        columns, rows = collect_table_rows(table)
        for row in rows:
            row["metrics"] = [as_percent(v) for v in row["metrics"]]
        return self._render(
            dataset=table.dataset, seed=table.seed, columns=columns, rows=rows, counts=[], skipped=[]
        )

    def _render(self, **context: Any) -> str:
        from jinja2 import Environment, FileSystemLoader

        env = Environment(
            loader=FileSystemLoader(str(self._TEMPLATE_DIR)),
            autoescape=True,
        )
        template = env.get_template(self._TEMPLATE_NAME)
        generated_at = datetime.datetime.now(datetime.UTC).strftime("%Y-%m-%d %H:%M UTC")
        return template.render(title=self._title, generated_at=generated_at, **context)
