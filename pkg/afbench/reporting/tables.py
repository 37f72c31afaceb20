"""Report serialization: CSV, JSON, Markdown and HTML tables."""

from __future__ import annotations

import csv
import html
import io
import json
import logging
from collections import defaultdict
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from afbench.errors import SchemaError
from afbench.models.evaluator import AVG, EvalReport, ReportRow, sort_key

__all__ = [
    "load_report",
    "merge_reports",
    "render_html",
    "render_markdown",
    "report_csv",
    "report_json",
    "write_report",
]

logger = logging.getLogger(__name__)

COLUMNS = ["row_type", *ReportRow.model_fields]

Section = tuple[str, list[str], list[list[str]]]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_csv(report: EvalReport) -> str:
    """Rows then averages, one column per field; floats written with ``repr``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row_type, rows in (("row", report.rows), ("average", report.averages)):
        for row in rows:
            data = row.model_dump()
            writer.writerow([row_type, *(_cell(data[name]) for name in ReportRow.model_fields)])
    return buffer.getvalue()


def report_json(report: EvalReport) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def load_report(path: str | Path) -> EvalReport:
    """Read a JSON report.

    :raises SchemaError: If the file is not a report, naming the file.
    """
    path = Path(path)
    try:
        return EvalReport.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise SchemaError(f"{path}: not an afbench report ({e.error_count()} schema errors)") from e


def merge_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """Union of the member rows, averages recomputed. Later reports win on duplicate keys."""
    merged: dict[tuple, ReportRow] = {}
    for report in reports:
        for row in report.rows:
            key = (row.detector, row.defended, row.dataset_id, row.attack, row.parameter)
            merged[key] = row
    return EvalReport.from_rows(merged.values())


def _param(row: ReportRow) -> str:
    return "" if row.parameter is None else f"{row.parameter:g}"


def _fmt(value: float | None, digits: int = 4) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def _grid_section(title: str, report: EvalReport, families: tuple[str, ...], defended: bool) -> Section | None:
    """Detector x setting rows, dataset columns, ``AUC / EER`` cells."""
    datasets = report.datasets()
    cells: dict[tuple, dict[str, str]] = defaultdict(dict)
    for row in sorted([*report.rows, *report.averages], key=sort_key):
        if row.family not in families or row.defended != defended:
            continue
        cells[(row.detector, row.attack, _param(row))][row.dataset_id] = row.cell()
    if not cells:
        return None
    headers = ["Detector", "Attack", "Parameter", *datasets, AVG]
    body = [[*key, *(values.get(d, "") for d in [*datasets, AVG])] for key, values in cells.items()]
    return title, headers, body


def _defense_section(report: EvalReport) -> Section | None:
    """Hardened detectors' AUC averaged over seen and unseen datasets."""
    groups: dict[tuple, dict[bool, list[float]]] = defaultdict(lambda: {True: [], False: []})
    for row in sorted(report.rows, key=sort_key):
        if row.defended:
            groups[(row.detector, row.attack, _param(row))][row.seen].append(row.auc)
    if not groups:
        return None
    body = []
    for key, by_seen in groups.items():
        seen, unseen = by_seen[True], by_seen[False]
        everything = seen + unseen
        body.append(
            [
                *key,
                _fmt(sum(seen) / len(seen), 2) if seen else "",
                _fmt(sum(unseen) / len(unseen), 2) if unseen else "",
                _fmt(sum(everything) / len(everything), 2),
            ]
        )
    return "Defense (AUC)", ["Detector", "Attack", "Parameter", "Seen", "Unseen", AVG], body


def _quality_section(report: EvalReport) -> Section | None:
    body = [
        [
            row.detector,
            row.attack,
            _param(row),
            _fmt(row.waveform_mse, 6),
            _fmt(row.spectrogram_mse, 6),
            _fmt(row.ssim),
        ]
        for row in report.averages
        if row.dataset_id == AVG and row.waveform_mse is not None and not row.attack.endswith(" avg")
    ]
    if not body:
        return None
    headers = ["Detector", "Attack", "Parameter", "Waveform MSE", "Spectrogram MSE", "SSIM"]
    return "Perceptibility", headers, body


def sections(report: EvalReport) -> list[Section]:
    candidates = [
        _grid_section("Baseline (AUC / EER)", report, ("baseline",), defended=False),
        _grid_section("Statistical attacks (AUC / EER)", report, ("statistical",), defended=False),
        _grid_section("Optimization attacks (AUC / EER)", report, ("optimization",), defended=False),
        _defense_section(report),
        _quality_section(report),
    ]
    return [section for section in candidates if section is not None]


def render_markdown(report: EvalReport, title: str = "Anti-forensic evaluation") -> str:
    lines = [f"# {title}", ""]
    for name, headers, body in sections(report):
        lines += [f"## {name}", "", "| " + " | ".join(headers) + " |"]
        lines.append("|" + "|".join("---" for _ in headers) + "|")
        lines += ["| " + " | ".join(row) + " |" for row in body]
        lines.append("")
    return "\n".join(lines)


def render_html(report: EvalReport, title: str = "Anti-forensic evaluation") -> str:
    parts = [
        "<!DOCTYPE html>",
        f"<html><head><meta charset=\"utf-8\"><title>{html.escape(title)}</title></head><body>",
        f"<h1>{html.escape(title)}</h1>",
    ]
    for name, headers, body in sections(report):
        parts.append(f"<h2>{html.escape(name)}</h2>")
        parts.append("<table border=\"1\">")
        parts.append("<tr>" + "".join(f"<th>{html.escape(h)}</th>" for h in headers) + "</tr>")
        for row in body:
            parts.append("<tr>" + "".join(f"<td>{html.escape(c)}</td>" for c in row) + "</tr>")
        parts.append("</table>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"


def write_report(report: EvalReport, out_dir: str | Path, stem: str = "report") -> dict[str, Path]:
    """Write ``<stem>.csv``, ``<stem>.json`` and ``<stem>.md`` under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out_dir / f"{stem}.csv",
        "json": out_dir / f"{stem}.json",
        "md": out_dir / f"{stem}.md",
    }
    paths["csv"].write_text(report_csv(report), encoding="utf-8")
    paths["json"].write_text(report_json(report), encoding="utf-8")
    paths["md"].write_text(render_markdown(report), encoding="utf-8")
    logger.info("Wrote report (%d rows) to %s", len(report.rows), paths["json"])
    return paths
