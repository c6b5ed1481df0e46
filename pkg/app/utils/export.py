import json
import logging
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from app.core.exceptions import ExportError
from app.schemas.trial import AggregateRow, TraceRow, TrialResult


logger = logging.getLogger(__name__)

TRACE_COLUMNS = list(TraceRow.model_fields)
SUMMARY_COLUMNS = ["box", "pivot", "noise", "method", "trials", "success_pct", "lift_pct", "slip_pct", "time_s", "work_j"]
JSON_KEYS = ["box", "pivot", "noise", "method", "success_pct", "lift_pct", "slip_pct", "time_s", "work_j"]


def trace_filename(result: TrialResult) -> str:
    """Stable per-trial file name."""
    noise_mm = int(round(result.noise * 1000))
    return f"{result.method}_{result.box}_{result.pivot}_n{noise_mm}mm_r{result.repeat:02d}_{result.seed:016x}.csv"


def trace_frame(result: TrialResult) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in result.trace], columns=TRACE_COLUMNS)


def summary_frame(rows: Sequence[AggregateRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=SUMMARY_COLUMNS)


def _mkdir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(path, str(exc)) from exc


def export_traces(results: Sequence[TrialResult], path: Path) -> List[Path]:
    """
    Write one trace CSV per trial under path/traces.

    Args:
        results: Finished trials.
        path: Output directory.

    Returns:
        List[Path]: Files written.
    """
    trace_dir = Path(path) / "traces"
    _mkdir(trace_dir)
    written = []
    for result in results:
        target = trace_dir / trace_filename(result)
        try:
            trace_frame(result).to_csv(target, index=False, float_format="%.9g")
        except OSError as exc:
            raise ExportError(target, str(exc)) from exc
        written.append(target)
    logger.info("wrote %d trace files to %s", len(written), trace_dir)
    return written


def export_summary(rows: Sequence[AggregateRow], path: Path, stem: str = "summary") -> List[Path]:
    """
    Write aggregate rows as CSV and JSON; empty means are left blank or null.

    Returns:
        List[Path]: The CSV and JSON files.
    """
    out = Path(path)
    _mkdir(out)
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    records = [{k: row.model_dump()[k] for k in JSON_KEYS} for row in rows]
    try:
        summary_frame(rows).to_csv(csv_path, index=False, float_format="%.6g")
        json_path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ExportError(csv_path, str(exc)) from exc
    return [csv_path, json_path]


def export_results(results: Sequence[TrialResult], path: Path) -> Path:
    """Per-trial outcome table without traces."""
    out = Path(path)
    _mkdir(out)
    target = out / "trials.csv"
    frame = pd.DataFrame([r.model_dump(exclude={"trace", "waypoint_errors"}) for r in results])
    try:
        frame.to_csv(target, index=False, float_format="%.9g")
    except OSError as exc:
        raise ExportError(target, str(exc)) from exc
    return target


def format_table(rows: Sequence[AggregateRow]) -> str:
    """Aligned text table, '-' where no trial succeeded."""
    header = f"{'box':<8}{'pivot':<15}{'noise':>7}  {'method':<14}{'succ%':>7}{'lift%':>7}{'slip%':>7}{'time s':>8}{'work J':>8}"
    lines = [header, "-" * len(header)]
    for row in rows:
        time_s = f"{row.time_s:.1f}" if row.time_s is not None else "-"
        work_j = f"{row.work_j:.2f}" if row.work_j is not None else "-"
        noise = f"{row.noise:.2f}" if row.noise is not None else ""
        lines.append(
            f"{row.box or 'all':<8}{row.pivot or '':<15}{noise:>7}  {row.method:<14}"
            f"{row.success_pct:>7.1f}{row.lift_pct:>7.1f}{row.slip_pct:>7.1f}{time_s:>8}{work_j:>8}"
        )
    return "\n".join(lines)
