"""Sweeps over the anisotropy, scaling fits and figure data emission."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import ed
from .bethe import NonConvergence, SolverOptions, sweep_continuation
from .observables import (
    CSV_HEADER,
    ObservablePoint,
    concurrence_xxz,
    correlation_length,
    gzz,
    point_csv_fields,
    point_from_csv_fields,
)
from .thermo import QuadratureError, thermo_energy

log = logging.getLogger(__name__)

FIG1_GRID = (0.0, 3.0, 0.02)
FIG2_NU_GRID = (0.02, 1.2, 0.02)
FIG3_SIZES = (8, 12, 16, 20, 40, 80, 160, 320, 640, 1280)
FIG3_GRID = (1.05, 3.0, 0.05)
XI_WINDOW = 0.25


class Provenance(str, Enum):
    BETHE = "BetheFiniteN"
    THERMO = "ThermoLimit"
    ED = "ExactDiag"


METHODS = {"bethe": Provenance.BETHE, "thermo": Provenance.THERMO, "ed": Provenance.ED}


@dataclass
class SweepTable:
    rows: list[ObservablePoint]
    provenance: Provenance

    def __post_init__(self):
        key = lambda p: (p.delta, math.inf if p.n_sites is None else p.n_sites)
        self.rows = sorted(self.rows, key=key)
        keys = [key(p) for p in self.rows]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (delta, n_sites) rows in sweep table")

    @property
    def failures(self) -> list[ObservablePoint]:
        return [p for p in self.rows if not p.ok]

    def ok_rows(self) -> list[ObservablePoint]:
        return [p for p in self.rows if p.ok]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in self.rows:
            w.writerow(point_csv_fields(p))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, provenance: Provenance = Provenance.BETHE) -> "SweepTable":
        rows = [point_from_csv_fields(r) for r in csv.DictReader(io.StringIO(text))]
        return cls(rows, provenance)


@dataclass(frozen=True)
class FitResult:
    model: str  # "Quadratic" or "InverseXi"
    coefficients: tuple[float, float]
    rms_residual: float
    window: tuple[float, float]
    point_count: int

    def to_json(self) -> str:
        return json.dumps({
            "model": self.model,
            "coefficients": list(self.coefficients),
            "rms_residual": self.rms_residual,
            "window": list(self.window),
            "point_count": self.point_count,
        }, indent=2) + "\n"


def delta_grid(lo: float, hi: float, step: float | None) -> list[float]:
    if hi < lo:
        return []
    if not step:
        if hi != lo:
            raise ValueError("a step is required when lo != hi")
        return [float(lo)]
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def parse_range(text: str) -> tuple[float, float, float | None]:
    parts = text.split(":")
    if len(parts) == 2:
        return float(parts[0]), float(parts[1]), None
    if len(parts) != 3:
        raise ValueError(f"expected lo:hi:step, got {text!r}")
    return float(parts[0]), float(parts[1]), float(parts[2])


# ---------------------------------------------------------------------------
# per-point evaluation

def _xi(delta: float) -> float | None:
    return correlation_length(delta) if delta > 1.0 and abs(delta - 1.0) > 1e-9 else None


def _failed(delta: float, n_sites: int | None, exc: Exception) -> ObservablePoint:
    reason = str(exc).replace(",", ";").replace("\n", " ")
    return ObservablePoint(delta, n_sites, math.nan, math.nan, math.nan, None,
                           status=f"failed: {type(exc).__name__}: {reason}")


def _point(delta: float, n_sites: int | None, e: float, g: float) -> ObservablePoint:
    return ObservablePoint(delta, n_sites, e, g, concurrence_xxz(e, g, delta), _xi(delta))


def _bethe_point(args) -> ObservablePoint:
    n_sites, delta, sol, options = args
    if isinstance(sol, NonConvergence):
        return _failed(delta, n_sites, sol)
    try:
        g = gzz(n_sites, delta, options=options, seed=sol)
    except NonConvergence as exc:
        return _failed(delta, n_sites, exc)
    return _point(delta, n_sites, sol.energy_per_site, g)


def _thermo_point(delta: float) -> ObservablePoint:
    try:
        return _point(delta, None, thermo_energy(delta), gzz(None, delta))
    except QuadratureError as exc:
        return _failed(delta, None, exc)


def _ed_point(args) -> ObservablePoint:
    n_sites, delta = args
    g = ed.ground_state_ed(n_sites, delta)
    return _point(delta, n_sites, g.energy / n_sites, ed.gzz_direct(g))


def _sweep_points(n_sites: int | None, grid: Sequence[float], method: str,
                  options: SolverOptions | None, pool: ThreadPoolExecutor | None) -> list[ObservablePoint]:
    mapper = pool.map if pool is not None else map
    if method == "bethe":
        if n_sites is None or n_sites % 2 or n_sites < 2:
            raise ValueError(f"bethe sweeps need an even chain length, got {n_sites}")
        # continuation is ordered; the gzz stencils around each point are not
        chain = sweep_continuation(n_sites, grid, options)
        return list(mapper(_bethe_point, [(n_sites, d, s, options) for d, s in zip(grid, chain)]))
    if method == "thermo":
        return list(mapper(_thermo_point, grid))
    if method == "ed":
        if n_sites is None or not 2 <= n_sites <= ed.MAX_SITES:
            raise ValueError(f"ed sweeps need 2 <= N <= {ed.MAX_SITES}, got {n_sites}")
        return list(mapper(_ed_point, [(n_sites, d) for d in grid]))
    raise ValueError(f"unknown method {method!r}; expected one of {sorted(METHODS)}")


def _pool(threads: int):
    return ThreadPoolExecutor(max_workers=threads) if threads and threads > 1 else None


def run_sweep(n_sites: int | None, delta_lo: float, delta_hi: float, step: float | None,
              method: str = "bethe", options: SolverOptions | None = None,
              threads: int = 1) -> SweepTable:
    grid = delta_grid(delta_lo, delta_hi, step)
    return sweep_grid(n_sites, grid, method, options, threads)


def sweep_grid(n_sites: int | None, grid: Sequence[float], method: str = "bethe",
               options: SolverOptions | None = None, threads: int = 1) -> SweepTable:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(METHODS)}")
    if method == "thermo":
        n_sites = None
    pool = _pool(threads)
    try:
        rows = _sweep_points(n_sites, list(grid), method, options, pool)
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepTable(rows, METHODS[method])


# ---------------------------------------------------------------------------
# fits

def _least_squares(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return coef, float(np.sqrt(np.mean(resid**2)))


def fit_quadratic_scaling(table: SweepTable | Iterable[ObservablePoint],
                          window: tuple[float, float] = (0.0, 1.3)) -> FitResult:
    """Least squares of ``C = c0 - c1 (delta - 1)^2`` over ``window``."""
    rows = table.ok_rows() if isinstance(table, SweepTable) else [p for p in table if p.ok]
    lo, hi = window
    if not lo <= hi:
        raise ValueError(f"empty window {window}")
    pts = [p for p in rows if lo <= p.delta <= hi]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points in window {window}, got {len(pts)}")
    x = np.array([(p.delta - 1.0) ** 2 for p in pts])
    y = np.array([p.concurrence for p in pts])
    coef, rms = _least_squares(x, y)
    return FitResult("Quadratic", (float(coef[0]), float(-coef[1])), rms, (lo, hi), len(pts))


def fit_xi_scaling(table: SweepTable | Iterable[ObservablePoint],
                   max_inv_xi: float | None = XI_WINDOW) -> FitResult:
    """Least squares of ``C = c0 + slope / xi`` over rows with ``1/xi < max_inv_xi``.

    ``max_inv_xi=None`` fits every massive row.
    """
    rows = table.ok_rows() if isinstance(table, SweepTable) else [p for p in table if p.ok]
    pts = [p for p in rows if p.xi is not None]
    if max_inv_xi is not None:
        pts = [p for p in pts if p.inv_xi < max_inv_xi]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 massive points with 1/xi < {max_inv_xi}, got {len(pts)}")
    x = np.array([p.inv_xi for p in pts])
    y = np.array([p.concurrence for p in pts])
    coef, rms = _least_squares(x, y)
    window = (0.0, max_inv_xi) if max_inv_xi is not None else (float(x.min()), float(x.max()))
    return FitResult("InverseXi", (float(coef[0]), float(coef[1])), rms, window, len(pts))


# ---------------------------------------------------------------------------
# size studies

def finite_size_study(sizes: Sequence[int], grid: Sequence[float],
                      options: SolverOptions | None = None, threads: int = 1) -> SweepTable:
    for n in sizes:
        if n % 2 or n < 4:
            raise ValueError(f"sizes must be even and >= 4, got {n}")
    grid = list(grid)
    run = lambda n: _sweep_points(n, grid, "bethe", options, None)
    pool = _pool(threads)
    try:
        per_size = list(pool.map(run, sizes)) if pool is not None else [run(n) for n in sizes]
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepTable([p for rows in per_size for p in rows], Provenance.BETHE)


@dataclass(frozen=True)
class EvenOddRow:
    n_sites: int
    concurrence: float
    energy: float
    degenerate: bool


def even_odd_study(n_max: int, delta: float, n_min: int = 2) -> list[EvenOddRow]:
    """Nearest-neighbour concurrence from ED for every ring size up to ``n_max``.

    Degenerate ground levels use the equal mixture over the level.
    """
    if n_max > 15:
        raise ValueError(f"even/odd study is limited to N <= 15, got {n_max}")
    out = []
    for n in range(n_min, n_max + 1):
        g = ed.ground_state_ed(n, delta)
        c = ed.wootters_concurrence(ed.two_site_rdm(g))
        out.append(EvenOddRow(n, c, g.energy, g.degeneracy_flag))
    return out


def even_odd_csv(rows: Sequence[EvenOddRow]) -> str:
    lines = ["n_sites,concurrence,energy,degenerate"]
    for r in rows:
        lines.append(f"{r.n_sites},{r.concurrence:.12g},{r.energy:.12g},{str(r.degenerate).lower()}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# figure data

def fig2_grid(nu_lo: float = FIG2_NU_GRID[0], nu_hi: float = FIG2_NU_GRID[1],
              nu_step: float = FIG2_NU_GRID[2]) -> list[float]:
    """Anisotropies uniform in nu (delta = cosh 2 nu), dense near criticality."""
    return [round(math.cosh(2.0 * nu), 12) for nu in delta_grid(nu_lo, nu_hi, nu_step)]


def _csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def figure_table(figure_id: int, n_sites: int = 1280, sizes: Sequence[int] = FIG3_SIZES,
                 grid: Sequence[float] | None = None, options: SolverOptions | None = None,
                 threads: int = 1) -> SweepTable:
    if figure_id == 1:
        grid = delta_grid(*FIG1_GRID) if grid is None else grid
        return sweep_grid(n_sites, grid, "bethe", options, threads)
    if figure_id == 2:
        grid = fig2_grid() if grid is None else grid
        return sweep_grid(n_sites, grid, "bethe", options, threads)
    if figure_id == 3:
        grid = delta_grid(*FIG3_GRID) if grid is None else grid
        return finite_size_study(sizes, grid, options, threads)
    raise ValueError(f"figure id must be 1, 2 or 3, got {figure_id}")


def figure_csv(figure_id: int, table: SweepTable) -> str:
    if figure_id == 1:
        rows = []
        for p in table.rows:
            f = dict(zip(CSV_HEADER, point_csv_fields(p)))
            rows.append([f["delta"], f["concurrence"], f["energy_per_site"], f["gzz"], f["status"]])
        return _csv(("delta", "concurrence", "energy_per_site", "gzz", "status"), rows)
    if figure_id == 2:
        rows = []
        for p in table.rows:
            if p.delta <= 1.0:
                continue
            f = dict(zip(CSV_HEADER, point_csv_fields(p)))
            inv = format(p.inv_xi, ".12g") if p.xi is not None else ""
            rows.append([f["delta"], inv, f["concurrence"], f["status"]])
        return _csv(("delta", "inv_xi", "concurrence", "status"), rows)
    if figure_id == 3:
        rows = sorted(table.rows, key=lambda p: (p.n_sites, p.delta))
        out = []
        for p in rows:
            f = dict(zip(CSV_HEADER, point_csv_fields(p)))
            out.append([f["n_sites"], f["delta"], f["xi"], f["concurrence"], f["status"]])
        return _csv(("n_sites", "delta", "xi", "concurrence", "status"), out)
    raise ValueError(f"figure id must be 1, 2 or 3, got {figure_id}")


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def figure_data(figure_id: int, out: str | Path | None = None, **params) -> tuple[str, SweepTable]:
    """Build the CSV behind figure 1, 2 or 3; write it to ``out`` when given."""
    table = figure_table(figure_id, **params)
    text = figure_csv(figure_id, table)
    if out is not None:
        write_text(out, text)
    return text, table
