"""
Protocol sweeps over the (i_d, i_q) plane, CSV export, and heatmaps.

The grid is polar: current angle theta and magnitude i, mapped as i_d = i*sin(theta), i_q = i*cos(theta), so
theta = -90..90 deg and i = 0..60 A cover i_d in [-60, 60] and i_q in [0, 60]. Every grid point is an
independent experiment on a fresh assembly.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import math
from logging import getLogger
from pathlib import Path

import numpy as np

from .config import Config
from .protocol import run_protocol

_logger = getLogger(__name__)

METRIC_COLUMNS = ("ms_b_m2", "ms_b_m3", "ms_j_m2", "ms_j_m3", "ms_flux", "ms_emf", "rem_m2_T", "rem_m3_T")
CSV_HEADER = ("id_A", "iq_A", *METRIC_COLUMNS, "error")


@dataclasses.dataclass(frozen=True)
class SweepGrid:
    theta_range: tuple[float, float] = (-90.0, 90.0)
    """Degrees."""
    theta_steps: int = 19
    current_range: tuple[float, float] = (0.0, 60.0)
    """Amperes."""
    current_steps: int = 13

    def __post_init__(self) -> None:
        for r in (self.theta_range, self.current_range):
            if len(r) != 2 or not all(math.isfinite(v) for v in r):
                raise ValueError(f"ranges must be two finite numbers, got {r}")

    @staticmethod
    def from_config(config: Config) -> SweepGrid:
        s = config.sweep
        return SweepGrid(tuple(s.theta_range_deg), s.theta_steps, tuple(s.current_range_A), s.current_steps)  # type: ignore[arg-type]

    @property
    def thetas(self) -> np.ndarray:
        return _axis(self.theta_range, self.theta_steps)

    @property
    def currents(self) -> np.ndarray:
        return _axis(self.current_range, self.current_steps)

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta_steps, self.current_steps

    def points(self) -> list[tuple[float, float, float, float]]:
        """(theta_deg, i, i_d, i_q) with theta as the outer loop."""
        out = []
        for th in self.thetas:
            for i in self.currents:
                out.append((float(th), float(i), *dq_currents(float(th), float(i))))
        return out


def _axis(r: tuple[float, float], steps: int) -> np.ndarray:
    if steps == 1:
        if r[0] != r[1]:
            raise ValueError(f"a single step needs a degenerate range, got {r}")
        return np.array([r[0]])
    if steps < 2:
        raise ValueError(f"need at least 2 steps per axis, got {steps}")
    return np.linspace(r[0], r[1], steps)


def dq_currents(theta_deg: float, i: float) -> tuple[float, float]:
    th = math.radians(theta_deg)
    i_d = i * math.sin(th)
    i_q = i * math.cos(th)
    # cos(90 deg) is not exactly zero in floating point
    if abs(i_d) < 1e-12 * abs(i):
        i_d = 0.0
    if abs(i_q) < 1e-12 * abs(i):
        i_q = 0.0
    return i_d, i_q


@dataclasses.dataclass(frozen=True)
class SweepRow:
    theta_deg: float
    current: float
    id_A: float
    iq_A: float
    values: dict[str, float] | None
    """Metric columns; None when the run failed."""
    error: str = ""

    def value(self, column: str) -> float:
        if self.values is None:
            return math.nan
        return self.values[column]


@dataclasses.dataclass(frozen=True)
class SweepTable:
    grid: SweepGrid
    rows: tuple[SweepRow, ...]

    @property
    def errors(self) -> list[SweepRow]:
        return [r for r in self.rows if r.error]

    def column(self, name: str) -> np.ndarray:
        if name not in METRIC_COLUMNS:
            raise KeyError(f"unknown column {name!r}; valid: {', '.join(METRIC_COLUMNS)}")
        return np.array([r.value(name) for r in self.rows])


def _run_point(args: tuple[Config, float, float, float, float]) -> SweepRow:
    config, theta, i, i_d, i_q = args
    try:
        res = run_protocol(config, i_d, i_q)
        rec = res.to_record()
        values = {c: float(rec[c]) for c in METRIC_COLUMNS}
        bad = [c for c, v in values.items() if not math.isfinite(v)]
        if bad:
            return SweepRow(theta, i, i_d, i_q, None, f"non-finite result in {', '.join(bad)}")
        return SweepRow(theta, i, i_d, i_q, values)
    except Exception as ex:  # a failing corner of the plane must not take the map down
        _logger.warning("sweep point i_d=%g i_q=%g failed: %s", i_d, i_q, ex)
        return SweepRow(theta, i, i_d, i_q, None, f"{type(ex).__name__}: {ex}")


def run_sweep(grid: SweepGrid, config: Config, parallelism: int = 1) -> SweepTable:
    """Runs the protocol at every grid point. Rows come back in grid order whatever the parallelism."""
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    jobs = [(config, *p) for p in grid.points()]
    if parallelism == 1:
        rows = [_run_point(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(_run_point, jobs, chunksize=max(1, len(jobs) // (4 * parallelism))))
    return SweepTable(grid, tuple(rows))


def _fmt(v: float) -> str:
    if v == 0:
        v = 0.0  # no "-0"
    return f"{v:.9g}"


def _cell_edges(centers: np.ndarray, half_width: float) -> np.ndarray:
    """Cell boundaries halfway between centers; the outer cells end at the first/last center."""
    if centers.size == 1:
        return np.array([centers[0] - half_width, centers[0] + half_width])
    mid = 0.5 * (centers[1:] + centers[:-1])
    return np.concatenate([centers[:1], mid, centers[-1:]])


def emit_csv(table: SweepTable, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in table.rows:
            if r.values is None:
                w.writerow([_fmt(r.id_A), _fmt(r.iq_A), *([""] * len(METRIC_COLUMNS)), r.error or "error"])
            else:
                w.writerow([_fmt(r.id_A), _fmt(r.iq_A), *(_fmt(r.values[c]) for c in METRIC_COLUMNS), ""])
    return path


def read_csv(path: str | Path) -> list[dict[str, float | str | None]]:
    """Reads a CSV written by emit_csv. Metric cells of error rows come back as None."""
    out: list[dict[str, float | str | None]] = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for raw in reader:
            row: dict[str, float | str | None] = {"id_A": float(raw["id_A"]), "iq_A": float(raw["iq_A"])}
            for c in METRIC_COLUMNS:
                row[c] = float(raw[c]) if raw[c] != "" else None
            row["error"] = raw["error"]
            out.append(row)
    return out


def emit_heatmap(table: SweepTable, metric: str, path: str | Path) -> Path:
    """
    Writes an SVG map of one metric over the (i_d, i_q) plane, diverging colors centered at zero.
    Failed points are left blank.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import TwoSlopeNorm

    values = table.column(metric).reshape(table.grid.shape)
    finite = values[np.isfinite(values)]
    span = float(np.max(np.abs(finite))) if finite.size else 1.0
    span = span or 1.0
    norm = TwoSlopeNorm(vcenter=0.0, vmin=-span, vmax=span)
    # One flat quadrilateral per grid point, bounded by the midpoints to its neighbours in (theta, i).
    th_edges = _cell_edges(table.grid.thetas, 5.0)
    i_edges = _cell_edges(table.grid.currents, 2.5)
    TH, I = np.meshgrid(np.radians(th_edges), i_edges, indexing="ij")
    X = I * np.sin(TH)
    Y = I * np.cos(TH)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context({"svg.fonttype": "path", "svg.hashsalt": "memflux"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        mesh = ax.pcolormesh(X, Y, np.ma.masked_invalid(values), cmap="RdBu", norm=norm, shading="flat")
        cbar = fig.colorbar(mesh, ax=ax, label=metric)
        cbar.solids.set_rasterized(False)
        ax.set_xlabel("$i_d$ (A)")
        ax.set_ylabel("$i_q$ (A)")
        ax.set_title(metric)
        ax.set_aspect("equal", adjustable="box")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
