"""CSV/JSON serialization with a ``#``-prefixed JSON metadata header."""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .lsd import CdfTable, DensityGrid
from .measure import ModelSpec, measure_from_dict, measure_to_dict
from .simulator import SpectralSample

__all__ = [
    "fmt",
    "write_csv",
    "read_csv",
    "model_to_dict",
    "model_from_dict",
    "load_model",
    "write_density",
    "write_cdf",
    "write_sample",
    "read_sample",
]


def fmt(v) -> str:
    """Round-trip decimal rendering of a float."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(stream: IO[str], columns: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> None:
    if meta is not None:
        stream.write("# " + json.dumps(meta, sort_keys=True, default=_jsonable) + "\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def read_csv(path: str | Path) -> tuple[dict, list[str], np.ndarray]:
    meta: dict = {}
    with open(path) as f:
        lines = f.read().splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        meta.update(json.loads(lines[i][1:]))
        i += 1
    cols = lines[i].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[i + 1:] if ln], dtype=float)
    return meta, cols, data.reshape(-1, len(cols))


def model_to_dict(spec: ModelSpec) -> dict:
    return {"c": float(spec.c), "H": measure_to_dict(spec.H), "G": measure_to_dict(spec.G)}


def model_from_dict(d: dict) -> ModelSpec:
    for key in ("c", "H", "G"):
        if key not in d:
            raise KeyError(f"model is missing '{key}'")
    return ModelSpec(float(d["c"]), measure_from_dict(d["H"]), measure_from_dict(d["G"]))


def load_model(path: str | Path) -> ModelSpec:
    with open(path) as f:
        return model_from_dict(json.load(f))


def write_density(stream: IO[str], grid: DensityGrid, meta: dict | None = None) -> None:
    head = {
        "point_mass_zero": grid.point_mass_zero,
        "eps_schedule": list(grid.epsilons),
        "total_mass": grid.total_mass,
        "clipped_fraction": grid.clipped_fraction,
    }
    head.update(meta or {})
    write_csv(stream, ["x", "density", "converged"],
              zip(grid.xs, grid.densities, grid.converged), head)


def write_cdf(stream: IO[str], table: CdfTable, meta: dict | None = None) -> None:
    head = {"kind": table.kind, "point_mass_zero": table.point_mass_zero}
    head.update(meta or {})
    write_csv(stream, ["x", "F"], zip(table.xs, table.F), head)


def write_sample(stream: IO[str], sample: SpectralSample, meta: dict | None = None) -> None:
    head = dict(sample.meta)
    head.update(meta or {})
    write_csv(stream, ["eigenvalue"], ((v,) for v in sample.eigenvalues), head)


def read_sample(path: str | Path) -> SpectralSample:
    meta, _, data = read_csv(path)
    return SpectralSample(data[:, 0].copy(), meta)
