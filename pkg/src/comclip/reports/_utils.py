"""Shared helpers for comclip reporters."""

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from comclip.evaluation.ablation import AblationTable
    from comclip.evaluation.models import EvalReport


def headline_metrics(report: EvalReport) -> dict[str, float | None]:
    """The metric columns that apply to ``report``, in display order.

    Winoground reports show text/image/group, VL-checklist reports their
    categories plus ``ave``, retrieval reports R@1/5/10 and matching reports
    ``overall`` followed by one column per negative type.
    """
    if report.winoground is not None:
        return report.winoground.model_dump()
    if report.recall is not None:
        return {f"R@{k[1:]}": v for k, v in report.recall.model_dump().items()}
    if report.by_category:
        ave = report.by_category.get("ave")
        columns: dict[str, float | None] = {
            k: v for k, v in sorted(report.by_category.items()) if k != "ave"
        }
        columns["ave"] = ave
        return columns
    return {"overall": report.overall, **dict(sorted(report.by_neg_type.items()))}


def collect_table_rows(table: AblationTable) -> tuple[list[str], list[dict[str, Any]]]:
    """Column names and one row per report (baseline first, if any).

    Returns:
        Tuple of (columns, rows) where each row has keys ``config``,
        ``n_instances``, ``skipped`` and ``metrics`` (aligned with ``columns``).
    """
    reports = ([table.baseline] if table.baseline is not None else []) + [
        r.report for r in table.rows
    ]
    columns: list[str] = []
    for report in reports:
        for name in headline_metrics(report):
            if name not in columns:
                columns.append(name)

    rows = []
    for report in reports:
        metrics = headline_metrics(report)
        rows.append(
            {
                "config": report.config,
                "n_instances": report.n_instances,
                "skipped": len(report.skipped),
                "metrics": [metrics.get(name) for name in columns],
            }
        )
    return columns, rows


def as_percent(value: float | None) -> str:
    return "—" if value is None else f"{100 * value:.2f}"
