"""Flat-file storage of solver runs: slices in ``.npz``, diagnostics in JSON.

Every file is written to a temporary sibling and renamed into place, so a
reader never sees a half-written run.
"""

import json
import os
import tempfile
from collections.abc import Callable
from pathlib import Path
from typing import IO

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError

from src.analysis.models import SpaceTimeField
from src.errors import PersistenceError
from src.fields.grid import make_grid
from src.fields.models import VectorField
from src.solver.models import PicardDiagnostics


class StoredRun(BaseModel):
    solution: SpaceTimeField
    initial_data: VectorField
    diagnostics: PicardDiagnostics
    metadata: dict


def atomic_write(path: Path, write: Callable[[IO[bytes]], None]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "wb") as stream:
            write(stream)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write(path, lambda stream: stream.write(text.encode("utf-8")))


def run_paths(directory: str | Path, run_name: str) -> tuple[Path, Path]:
    base = Path(directory)
    return base / f"{run_name}.npz", base / f"{run_name}.json"


def save_run(
    directory: str | Path,
    run_name: str,
    solution: SpaceTimeField,
    initial_data: VectorField,
    diagnostics: PicardDiagnostics,
    metadata: dict | None = None,
) -> tuple[Path, Path]:
    slices_path, diagnostics_path = run_paths(directory, run_name)
    grid = solution.grid

    def write_slices(stream: IO[bytes]) -> None:
        np.savez(
            stream,
            times=solution.times,
            values=solution.values,
            initial_data=initial_data.values,
            grid=np.array([grid.dimension, grid.half_width, grid.points_per_axis], dtype=float),
        )

    atomic_write(slices_path, write_slices)
    document = {"diagnostics": diagnostics.model_dump(mode="json"), "metadata": metadata or {}}
    atomic_write_text(diagnostics_path, json.dumps(document, indent=2, sort_keys=True))
    logger.info(f"Saved run {run_name} to {slices_path.parent}")
    return slices_path, diagnostics_path


def load_run(directory: str | Path, run_name: str) -> StoredRun:
    slices_path, diagnostics_path = run_paths(directory, run_name)
    for path in (slices_path, diagnostics_path):
        if not path.is_file():
            raise PersistenceError(f"{path}: stored run not found")
    try:
        with np.load(slices_path) as archive:
            d, half_width, points = archive["grid"]
            grid = make_grid(int(d), float(half_width), int(points))
            solution = SpaceTimeField(grid=grid, times=archive["times"], values=archive["values"])
            initial_data = VectorField(grid=grid, values=archive["initial_data"])
        document = json.loads(diagnostics_path.read_text(encoding="utf-8"))
        diagnostics = PicardDiagnostics.model_validate(document["diagnostics"])
    except (OSError, KeyError, ValueError, ValidationError) as exc:
        raise PersistenceError(f"{slices_path}: unreadable stored run ({exc})") from exc
    return StoredRun(
        solution=solution,
        initial_data=initial_data,
        diagnostics=diagnostics,
        metadata=document.get("metadata", {}),
    )
