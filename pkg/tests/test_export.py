import json

import pandas as pd
import pytest

from app.core.exceptions import ExportError
from app.schemas.trial import AggregateRow, TraceRow, TrialResult
from app.utils.export import (
    JSON_KEYS,
    TRACE_COLUMNS,
    export_results,
    export_summary,
    export_traces,
    trace_filename,
)


@pytest.fixture
def finished() -> TrialResult:
    rows = [
        TraceRow(t_s=0.02 * i, phi_rad=0.01 * i, fz_real_N=4.5, fz_ideal_N=4.4, x_m=0.001 * i, z_m=0.0, grip_width_m=0.039)
        for i in range(5)
    ]
    rows[2] = rows[2].model_copy(update={"event_flags": "slip_rot"})
    return TrialResult(
        box="small",
        pivot="long_to_short",
        noise=0.05,
        method="combined",
        seed=0xABCDEF,
        repeat=3,
        success=True,
        lifted=False,
        slipped_off=False,
        time=24.1,
        work=2.31,
        trace=rows,
    )


def test_trace_filename(finished):
    assert trace_filename(finished) == "combined_small_long_to_short_n50mm_r03_0000000000abcdef.csv"


def test_trace_csv_columns(finished, tmp_path):
    (path,) = export_traces([finished], tmp_path)
    assert path.parent == tmp_path / "traces"
    frame = pd.read_csv(path, keep_default_na=False)
    assert list(frame.columns) == TRACE_COLUMNS
    assert list(frame.columns)[:8] == [
        "t_s", "phi_rad", "fz_real_N", "fz_ideal_N", "x_m", "z_m", "grip_width_m", "event_flags",
    ]
    assert len(frame) == 5
    assert frame.loc[2, "event_flags"] == "slip_rot"


def test_summary_json_keys(tmp_path):
    rows = [
        AggregateRow(box="small", pivot="long_to_short", noise=0.0, method="combined", trials=5,
                     success_pct=100.0, lift_pct=0.0, slip_pct=0.0, time_s=24.0, work_j=2.3),
        AggregateRow(box="small", pivot="long_to_short", noise=0.05, method="open_loop", trials=5,
                     success_pct=0.0, lift_pct=100.0, slip_pct=0.0),
    ]
    csv_path, json_path = export_summary(rows, tmp_path)
    records = json.loads(json_path.read_text())
    assert [list(r) for r in records] == [JSON_KEYS, JSON_KEYS]
    assert records[1]["time_s"] is None
    frame = pd.read_csv(csv_path)
    assert frame["trials"].tolist() == [5, 5]


def test_summary_is_byte_stable(tmp_path):
    row = AggregateRow(method="combined", trials=1, success_pct=100.0, lift_pct=0.0, slip_pct=0.0, time_s=1.0 / 3)
    first = [p.read_bytes() for p in export_summary([row], tmp_path / "a")]
    second = [p.read_bytes() for p in export_summary([row], tmp_path / "b")]
    assert first == second


def test_results_table_drops_traces(finished, tmp_path):
    path = export_results([finished], tmp_path)
    frame = pd.read_csv(path)
    assert "trace" not in frame.columns
    assert frame.loc[0, "method"] == "combined"


def test_unwritable_directory(finished, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ExportError):
        export_traces([finished], blocker)
