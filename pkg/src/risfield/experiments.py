"""Parameter sweeps over the field computations, emitting tabular rows.

Each row carries one method's complex surface term (the Gamma-weighted
re-radiation the study figures plot) for one grid cell, together with the
regime flags recomputed for that cell's geometry. Rows are ordered by grid
index regardless of worker scheduling, so a rerun with a different thread
count emits byte-identical CSV.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ContractError
from .geometry import LinkGeometry, Point3, Side, SurfaceSpec, angles, place_point
from .fields import QuadratureSpec, discretized_field, reflected_field, transmitted_field
from .asymptotics import Regime, classify_regime, closed_form_scattered, focusing_bound
from .profiles import Mode


class ScanMode(Enum):
    ANGULAR = "angular"
    DISTANCE = "distance"
    SIZE = "size"
    DISCRETIZATION = "discretization"


@dataclass(frozen=True)
class AxisSpec:
    """Sweep axis; `cell_centers` samples count midpoints of [start, stop)
    (used for angular colormaps), otherwise the endpoints are included."""

    start: float
    stop: float
    count: int
    log: bool = False
    cell_centers: bool = False

    def __post_init__(self):
        if self.count < 2:
            raise ContractError("axis count must be >= 2")
        if not self.start < self.stop:
            raise ContractError("axis start must be < stop")
        if self.log and self.start <= 0:
            raise ContractError("log axis requires positive start")

    def values(self):
        if self.cell_centers:
            step = (self.stop - self.start) / self.count
            return self.start + (np.arange(self.count) + 0.5) * step
        if self.log:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ScanGrid:
    mode: ScanMode
    axis0: AxisSpec
    axis1: Optional[AxisSpec] = None
    methods: tuple = ("quadrature",)


@dataclass(frozen=True)
class ScanRow:
    mode: str
    idx0: int
    idx1: Optional[int]
    axis0: float
    axis1: Optional[float]
    method: str
    value: complex
    elec_small: bool
    elec_large: bool
    el_cond: Optional[float]
    r_es: float
    r_el: float

    @property
    def magnitude(self):
        return abs(self.value)

    @property
    def magnitude_db(self):
        m = abs(self.value)
        return 20.0 * math.log10(m) if m > 0 else -math.inf


def parse_method(spec):
    """Split a method string into (name, step); step only for 'discretized:<m>'."""
    if spec.startswith("discretized:"):
        try:
            step = float(spec.split(":", 1)[1])
        except ValueError:
            raise ContractError(f"bad discretized step in method {spec!r}")
        if step <= 0:
            raise ContractError("discretized step must be positive")
        return "discretized", step
    if spec in ("quadrature", "discretized", "closed-small", "closed-large", "bound"):
        return spec, None
    raise ContractError(f"unknown method {spec!r}")


def evaluate_method(geom, profile, source, rec_pol, carrier, method, quad=None, step=None):
    """Complex surface-term value for one method at one geometry."""
    name, mstep = parse_method(method) if isinstance(method, str) else method
    step = mstep if mstep is not None else step
    if name == "quadrature":
        fn = reflected_field if geom.side is Side.REFLECTION else transmitted_field
        return fn(geom, profile, source, rec_pol, carrier, quad).reradiated
    if name == "discretized":
        if step is None:
            raise ContractError("discretized method needs an element step")
        return discretized_field(geom, profile, source, rec_pol, carrier, step, quad).reradiated
    if name == "closed-small":
        return closed_form_scattered(geom, profile, source, rec_pol, carrier, Regime.SMALL)
    if name == "closed-large":
        return closed_form_scattered(geom, profile, source, rec_pol, carrier, Regime.LARGE)
    if name == "bound":
        return complex(focusing_bound(geom, profile, source, carrier))
    raise ContractError(f"unknown method {name!r}")


def _rows_for_cell(mode, idx0, idx1, ax0, ax1, geom, profile, source, rec_pol, carrier,
                   methods, quad, step=None):
    report = classify_regime(geom, profile, carrier)
    rows = []
    for m in methods:
        value = evaluate_method(geom, profile, source, rec_pol, carrier, m, quad, step)
        rows.append(
            ScanRow(
                mode=mode.value,
                idx0=idx0,
                idx1=idx1,
                axis0=float(ax0),
                axis1=None if ax1 is None else float(ax1),
                method=m,
                value=complex(value),
                elec_small=report.electrically_small,
                elec_large=report.electrically_large,
                el_cond=report.el_condition_value,
                r_es=report.r_es,
                r_el=report.r_el,
            )
        )
    return rows


def _run_cells(cells, threads):
    if threads <= 1:
        results = [cell() for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda fn: fn(), cells))
    return [row for group in results for row in group]


def angular_scan(geom, profile, source, rec_pol, carrier, grid, quad=None, threads=1):
    """Sweep the receiver direction over the hemisphere at its template distance."""
    if grid.mode is not ScanMode.ANGULAR or grid.axis1 is None:
        raise ContractError("angular scan needs mode=angular with two axes (theta, phi)")
    d_rx0 = geom.d_rx0
    thetas = grid.axis0.values()
    phis = grid.axis1.values()
    cells = []
    for i, th in enumerate(thetas):
        for j, ph in enumerate(phis):
            rx = place_point(th, ph, d_rx0, geom.side)
            g = replace_rx(geom, rx)
            cells.append(
                lambda g=g, i=i, j=j, th=th, ph=ph: _rows_for_cell(
                    ScanMode.ANGULAR, i, j, th, ph, g, profile, source, rec_pol, carrier,
                    grid.methods, quad,
                )
            )
    return _run_cells(cells, threads)


def replace_rx(geom, rx):
    return LinkGeometry(tx=geom.tx, rx=rx, surface=geom.surface, side=geom.side)


def distance_sweep(geom, profile, source, rec_pol, carrier, grid, quad=None, threads=1):
    """Sweep d_tx0 = d_rx0 = d0 while holding the center angles fixed."""
    if grid.mode is not ScanMode.DISTANCE:
        raise ContractError("distance sweep needs mode=distance")
    a = angles(geom, 0.0, 0.0)
    cells = []
    for i, d0 in enumerate(grid.axis0.values()):
        tx = place_point(a.theta_inc, a.phi_inc_az, d0, Side.REFLECTION)
        rx = place_point(a.theta_rec, a.phi_rec_az, d0, geom.side)
        g = LinkGeometry(tx=tx, rx=rx, surface=geom.surface, side=geom.side)
        cells.append(
            lambda g=g, i=i, d0=d0: _rows_for_cell(
                ScanMode.DISTANCE, i, None, d0, None, g, profile, source, rec_pol, carrier,
                grid.methods, quad,
            )
        )
    return _run_cells(cells, threads)


def size_sweep(geom, profile, source, rec_pol, carrier, grid, quad=None, threads=1):
    """Sweep the surface diagonal (square surface) at fixed endpoints."""
    if grid.mode is not ScanMode.SIZE:
        raise ContractError("size sweep needs mode=size")
    cells = []
    for i, diag in enumerate(grid.axis0.values()):
        half = diag / (2.0 * math.sqrt(2.0))
        g = LinkGeometry(
            tx=geom.tx, rx=geom.rx, surface=SurfaceSpec(half, half), side=geom.side
        )
        cells.append(
            lambda g=g, i=i, diag=diag: _rows_for_cell(
                ScanMode.SIZE, i, None, diag, None, g, profile, source, rec_pol, carrier,
                grid.methods, quad,
            )
        )
    return _run_cells(cells, threads)


def discretization_sweep(geom, profile, source, rec_pol, carrier, grid, quad=None, threads=1):
    """Sweep the element step; the bare 'discretized' method takes the axis value."""
    if grid.mode is not ScanMode.DISCRETIZATION:
        raise ContractError("discretization sweep needs mode=discretization")
    cells = []
    for i, step in enumerate(grid.axis0.values()):
        cells.append(
            lambda i=i, step=step: _rows_for_cell(
                ScanMode.DISCRETIZATION, i, None, step, None, geom, profile, source, rec_pol,
                carrier, grid.methods, quad, step=step,
            )
        )
    return _run_cells(cells, threads)


def run_scan(geom, profile, source, rec_pol, carrier, grid, quad=None, threads=1):
    runner = {
        ScanMode.ANGULAR: angular_scan,
        ScanMode.DISTANCE: distance_sweep,
        ScanMode.SIZE: size_sweep,
        ScanMode.DISCRETIZATION: discretization_sweep,
    }[grid.mode]
    return runner(geom, profile, source, rec_pol, carrier, grid, quad=quad, threads=threads)


def peak_row(rows, method=None):
    """Row with the largest |value| (optionally restricted to one method)."""
    pool = [r for r in rows if method is None or r.method == method]
    if not pool:
        raise ContractError("no rows to search for a peak")
    return max(pool, key=lambda r: abs(r.value))


CSV_HEADER = "mode,idx0,idx1,axis0,axis1,method,re,im,abs,abs_db,elec_small,elec_large,el_cond,r_es,r_el"


def _fmt(v):
    return format(float(v), ".17g")


def emit_csv(rows, path):
    """Write rows in a fixed column schema; floats keep 17 significant digits
    so a re-read reproduces them bit-exactly."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.mode,
                    str(r.idx0),
                    "" if r.idx1 is None else str(r.idx1),
                    _fmt(r.axis0),
                    "" if r.axis1 is None else _fmt(r.axis1),
                    r.method,
                    _fmt(r.value.real),
                    _fmt(r.value.imag),
                    _fmt(abs(r.value)),
                    _fmt(r.magnitude_db),
                    "1" if r.elec_small else "0",
                    "1" if r.elec_large else "0",
                    "" if r.el_cond is None else _fmt(r.el_cond),
                    _fmt(r.r_es),
                    _fmt(r.r_el),
                ]
            )
        )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path):
    """Parse a CSV written by emit_csv back into ScanRow objects."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ContractError(f"unexpected CSV header in {path}")
        for line in fh:
            f = line.rstrip("\n").split(",")
            rows.append(
                ScanRow(
                    mode=f[0],
                    idx0=int(f[1]),
                    idx1=None if f[2] == "" else int(f[2]),
                    axis0=float(f[3]),
                    axis1=None if f[4] == "" else float(f[4]),
                    method=f[5],
                    value=complex(float(f[6]), float(f[7])),
                    elec_small=f[10] == "1",
                    elec_large=f[11] == "1",
                    el_cond=None if f[12] == "" else float(f[12]),
                    r_es=float(f[13]),
                    r_el=float(f[14]),
                )
            )
    return rows


def write_pgm(rows, path, method=None, floor_db=60.0):
    """Binary grayscale (P5) raster of |value| in dB for a 2-D scan.

    Rows are theta-major; values map linearly from [peak - floor_db, peak]
    onto 0..255.
    """
    pool = [r for r in rows if (method is None or r.method == method) and r.idx1 is not None]
    if not pool:
        raise ContractError("PGM output needs a 2-D scan")
    n0 = max(r.idx0 for r in pool) + 1
    n1 = max(r.idx1 for r in pool) + 1
    img = np.zeros((n0, n1))
    for r in pool:
        img[r.idx0, r.idx1] = r.magnitude_db
    finite = img[np.isfinite(img)]
    peak = float(finite.max()) if finite.size else 0.0
    lo = peak - floor_db
    scaled = np.clip((img - lo) / floor_db, 0.0, 1.0)
    data = (scaled * 255).astype(np.uint8)
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{n1} {n0}\n255\n".encode("ascii"))
            fh.write(data.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write PGM to {path}: {exc}") from exc
