from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from app._exceptions import OutputWriteError
from app.core.bounds import cr_limit_normalized
from app.core.experiment import summarize
from app.models.response_models import CSV_COLUMNS, ExperimentRow
from app.utils.logger import logger

__all__ = ["emit_csv", "emit_plot", "emit_summary", "read_csv", "summary_path"]

ORACLE_FLOOR = 1.0


def _rows_frame(rows: list[ExperimentRow]) -> pd.DataFrame:
    if not rows:
        raise ValueError("there are no experiment rows to write")
    return pd.DataFrame([row.model_dump(mode="json") for row in rows], columns=CSV_COLUMNS)


def _prepare(path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputWriteError(str(path), exc) from exc
    return path


def emit_csv(rows: list[ExperimentRow], path: Path) -> Path:
    """
    Write one CSV line per row under the fixed experiment header.

    Disconnected rows leave `normalized_mse` empty.
    """
    path = _prepare(path)
    try:
        _rows_frame(rows).to_csv(path, index=False)
    except OSError as exc:
        raise OutputWriteError(str(path), exc) from exc

    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def read_csv(path: Path) -> list[ExperimentRow]:
    """Parse an experiment CSV back into rows."""
    frame = pd.read_csv(path, float_precision="round_trip")
    frame = frame.astype(object).where(frame.notna(), None)
    return [
        ExperimentRow.model_validate(
            {
                key: value.item() if isinstance(value, np.generic) else value
                for key, value in record.items()
            }
        )
        for record in frame.to_dict(orient="records")
    ]


def summary_path(path: Path) -> Path:
    """`results/experiment.csv` -> `results/experiment.summary.csv`."""
    path = Path(path)
    return path.with_name(f"{path.stem}.summary.csv")


def emit_summary(rows: list[ExperimentRow], path: Path) -> Path:
    """
    Write the per-cell statistics of `summarize` as CSV.

    Raises:
        OutputWriteError: If the file cannot be written.
    """
    path = _prepare(path)
    try:
        summarize(rows).to_csv(path, index=False)
    except OSError as exc:
        raise OutputWriteError(str(path), exc) from exc
    return path


def emit_plot(rows: list[ExperimentRow], path: Path) -> Path:
    """
    Render normalized MSE against `k` as a static SVG, one panel per `b`.

    Each panel draws one line per `(d, estimator)` with its 95% band, the Cramer-Rao limit as a
    dashed curve over `k` and the oracle floor as a horizontal line.
    """
    if not rows:
        raise ValueError("there are no experiment rows to plot")
    path = _prepare(path)
    summary = summarize(rows)
    b_values = sorted(summary["b"].unique())
    k_values = np.asarray(sorted(summary["k"].unique()), dtype=float)

    figure = Figure(figsize=(5.5 * len(b_values), 4.5), layout="constrained")
    axes = figure.subplots(1, len(b_values), squeeze=False)[0]
    for ax, b in zip(axes, b_values, strict=True):
        panel = summary[summary["b"] == b]
        for (d, estimator), line in panel.groupby(["d", "estimator"], sort=True):
            line = line.sort_values("k")
            ax.plot(line["k"], line["mean"], marker="o", label=f"d={d} {estimator}")
            ax.fill_between(line["k"], line["band_low"], line["band_high"], alpha=0.2)

        ax.plot(
            k_values,
            [cr_limit_normalized(int(k)) for k in k_values],
            linestyle="--",
            color="black",
            label="Cramer-Rao limit",
        )
        ax.axhline(ORACLE_FLOOR, linestyle=":", color="grey", label="oracle floor")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("k")
        ax.set_ylabel("normalized MSE")
        ax.set_title(f"b = {b:g}")
        ax.legend(fontsize="small")

    try:
        figure.savefig(path, format="svg")
    except OSError as exc:
        raise OutputWriteError(str(path), exc) from exc

    logger.info(f"Wrote plot to {path}")
    return path
