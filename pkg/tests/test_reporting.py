from pathlib import Path

import pytest

from app._enums import EstimatorVariants
from app._exceptions import OutputWriteError
from app.core.bounds import cr_limit_normalized
from app.core.reporting import emit_csv, emit_plot, emit_summary, read_csv, summary_path
from app.models.response_models import CSV_COLUMNS, ExperimentRow

HEADER = "b,d,k,replicate,estimator,normalized_mse,cr_limit,lambda2,lambda_n,iterations,converged"


def make_row(**overrides):
    row = {
        "b": 2.0,
        "d": 16,
        "k": 4,
        "replicate": 0,
        "estimator": EstimatorVariants.ML,
        "normalized_mse": 2.3456789012345678,
        "cr_limit": cr_limit_normalized(4),
        "lambda2": 11.125,
        "lambda_n": 31.0 / 3.0,
        "iterations": 17,
        "converged": True,
    }
    row.update(overrides)
    return ExperimentRow(**row)


def test_header_matches_columns():
    assert ",".join(CSV_COLUMNS) == HEADER


def test_single_row_csv(tmp_path):
    path = emit_csv([make_row()], tmp_path / "experiment.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert lines[0] == HEADER
    assert lines[1].startswith("2.0,16,4,0,ml,")


def test_csv_parses_back(tmp_path):
    rows = [
        make_row(),
        make_row(replicate=1, normalized_mse=0.1 + 0.2),
        make_row(replicate=1, estimator=EstimatorVariants.FB, iterations=3),
        make_row(k=2, cr_limit=4.0, normalized_mse=None, lambda2=0.0, iterations=0, converged=False),
    ]
    path = emit_csv(rows, tmp_path / "nested" / "experiment.csv")
    assert read_csv(path) == rows


def test_duplicate_cells_are_kept(tmp_path):
    rows = [make_row(), make_row()]
    path = emit_csv(rows, tmp_path / "experiment.csv")
    assert len(read_csv(path)) == 2


def test_empty_rows_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "experiment.csv")
    with pytest.raises(ValueError):
        emit_plot([], tmp_path / "experiment.svg")


def test_unwritable_csv(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(OutputWriteError):
        emit_csv([make_row()], blocker / "experiment.csv")


def test_summary_path():
    assert summary_path(Path("results/experiment.csv")) == Path("results/experiment.summary.csv")


def test_emit_summary(tmp_path):
    rows = [make_row(normalized_mse=1.0), make_row(replicate=1, normalized_mse=3.0)]
    path = emit_summary(rows, tmp_path / "experiment.summary.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("b,d,k,estimator,mean,std,sem,band_low,band_high,count")
    assert lines[1].startswith("2.0,16,4,ml,2.0,")


def test_emit_plot(tmp_path):
    rows = [
        make_row(b=b, k=k, replicate=replicate, cr_limit=cr_limit_normalized(k))
        for b in (0.0, 2.0)
        for k in (2, 4, 8)
        for replicate in range(2)
    ]
    path = emit_plot(rows, tmp_path / "plots" / "experiment.svg")
    text = path.read_text(encoding="utf-8")
    assert text.lstrip().startswith("<?xml")
    assert "<svg" in text
