"""CSV and JSON artifacts of a continuation run.

Points files have the columns ``branch_id, step, x_1..x_n, f, l1, alpha1,
kkt_residual, n_active``; front files hold the non-dominated subset with
the same columns.  Floats are written with 17 significant digits so a
round trip through text is exact.
"""

from __future__ import annotations

import csv
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InconsistentData

FLOAT_FMT = "{:.17g}"


def _fmt(v) -> str:
    return FLOAT_FMT.format(float(v))


def point_header(n: int) -> list[str]:
    return ["branch_id", "step"] + [f"x_{i + 1}" for i in range(n)] + ["f", "l1", "alpha1", "kkt_residual",
                                                                      "n_active"]


def _rows(archive_points):
    for ap in archive_points:
        p = ap.point
        yield ([str(ap.branch_id), str(ap.step)] + [_fmt(v) for v in p.x]
               + [_fmt(p.f_value), _fmt(p.l1_value), _fmt(p.alpha1), _fmt(p.kkt_residual),
                  str(p.active.n_active)])


def write_points_csv(path, archive_points, n: int) -> Path:
    """Write archive points (``ArchivePoint`` records) as CSV."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(point_header(n))
        w.writerows(_rows(archive_points))
    return path


@dataclass
class PointTable:
    """Parsed points or front CSV."""

    branch_id: np.ndarray
    step: np.ndarray
    x: np.ndarray
    f: np.ndarray
    l1: np.ndarray
    alpha1: np.ndarray
    kkt_residual: np.ndarray
    n_active: np.ndarray

    @property
    def objectives(self) -> np.ndarray:
        return np.column_stack([self.f, self.l1])


def read_points_csv(path) -> PointTable:
    """Read a file written by :func:`write_points_csv`.

    Raises
    ------
    InconsistentData
        On a missing or wrong header, ragged rows or unparsable numbers.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InconsistentData(f"{path}: empty file")
    header = rows[0]
    if len(header) < 7 or header[:2] != ["branch_id", "step"]:
        raise InconsistentData(f"{path}: unexpected header {header[:3]}")
    n = len(header) - 7
    if header != point_header(n):
        raise InconsistentData(f"{path}: unexpected header")
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise InconsistentData(f"{path}: ragged rows")
    try:
        M = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise InconsistentData(f"{path}: {exc}") from exc
    return PointTable(M[:, 0].astype(int), M[:, 1].astype(int), M[:, 2:2 + n], M[:, 2 + n], M[:, 3 + n],
                      M[:, 4 + n], M[:, 5 + n], M[:, 6 + n].astype(int))


def write_front_csv(path, objectives) -> Path:
    """Plain two-column ``f, l1`` file (used for oracle fronts)."""
    path = Path(path)
    F = np.asarray(objectives, dtype=float).reshape(-1, 2)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f", "l1"])
        w.writerows([[_fmt(a), _fmt(b)] for a, b in F])
    return path


def read_front(path) -> np.ndarray:
    """Objective pairs from either a points/front file or an ``f, l1`` file."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise InconsistentData(f"{path}: empty file")
    if header == ["f", "l1"]:
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as exc:
            raise InconsistentData(f"{path}: {exc}") from exc
        if data.size and data.shape[1] != 2:
            raise InconsistentData(f"{path}: expected two columns")
        return data.reshape(-1, 2)
    return read_points_csv(path).objectives


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------
@dataclass
class RunManifest:
    """Everything needed to repeat a run.

    ``problem_params`` are the keyword arguments of the problem factory
    used by the command line; ``config`` is ``ContinuationConfig.to_dict()``.
    """

    problem: str
    problem_params: dict
    config: dict
    seed: int
    version: str
    elapsed: float = 0.0
    terminations: dict = field(default_factory=dict)
    n_points: int = 0
    n_front: int = 0
    python: str = field(default_factory=platform.python_version)
    numpy: str = field(default_factory=lambda: np.__version__)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        # JSON object keys are strings; branch ids are ints
        data["terminations"] = {int(k): v for k, v in data.get("terminations", {}).items()}
        return cls(**data)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))
