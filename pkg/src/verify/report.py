"""JSON and CSV emission of suite results."""

import csv
import io
import json
import re
from datetime import datetime, timezone
from pathlib import Path

from loguru import logger

from src.analysis.models import DecayReport
from src.config import RunConfig
from src.solver.persistence import atomic_write_text
from src.verify.models import VerificationSuiteResult


def report_header(config: RunConfig, seed: int) -> dict:
    grid = config.grid
    return {
        "config_hash": config.config_hash(),
        "seed": seed,
        "grid": {"dimension": grid.dimension, "half_width": grid.half_width, "points": grid.points},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }


def render_json(body: dict, config: RunConfig, seed: int) -> str:
    """Header plus body; everything but ``created_at`` is a function of config and seed."""
    document = {"header": report_header(config, seed), "body": body}
    return json.dumps(document, indent=2, sort_keys=True)


def write_json_report(
    directory: str | Path,
    run_name: str,
    result: VerificationSuiteResult,
    config: RunConfig,
    seed: int,
) -> Path:
    path = Path(directory) / f"{run_name}.json"
    atomic_write_text(path, render_json(result.model_dump(mode="json"), config, seed))
    logger.info(f"Wrote {path}")
    return path


def leaf_series(reports: list[DecayReport]) -> list[DecayReport]:
    """Reports with samples, parts flattened in order."""
    leaves = []
    for report in reports:
        if report.parts:
            leaves += leaf_series(report.parts)
        elif report.samples:
            leaves.append(report)
    return leaves


def series_filename(run_name: str, series: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9_.=-]+", "_", series).strip("_")
    return f"{run_name}.{slug}.csv"


def render_csv(report: DecayReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["series", "t_or_r", "value"])
    for abscissa, value in report.samples:
        writer.writerow([report.name, repr(abscissa), repr(value)])
    return buffer.getvalue()


def write_csv_reports(directory: str | Path, run_name: str, reports: list[DecayReport]) -> list[Path]:
    paths = []
    for report in leaf_series(reports):
        path = Path(directory) / series_filename(run_name, report.name)
        atomic_write_text(path, render_csv(report))
        paths.append(path)
    logger.info(f"Wrote {len(paths)} CSV series to {directory}")
    return paths
