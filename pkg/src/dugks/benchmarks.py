"""Interface-capturing test cases and their diagnostics.

Three cases are provided: diagonal translation of a circle, rotation of a
slotted disk, and the time-reversed single vortex.  All lengths are in
lattice units with ``h = 1`` unless a grid says otherwise.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fields import Grid2D, ScalarField, write_snapshot
from .reconstruction import FaceScheme
from .solver import Solver, SolverConfig, SolverDivergence, initialize


class CaseKind(enum.Enum):
    TRANSLATION = "translation"
    ZALESAK = "zalesak"
    VORTEX = "vortex"

    @classmethod
    def parse(cls, name) -> "CaseKind":
        if isinstance(name, CaseKind):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(f"unknown benchmark {name!r}") from None


@dataclass(frozen=True)
class BenchmarkCase:
    """Geometry, velocity scale and period of one test case.

    ``vortex_period`` picks how the vortex period is read: ``"formula"``
    takes T = n L0 / U0 (used inside the cosine), ``"steps"`` takes
    T = 2 L0 / U0.
    """

    kind: CaseKind
    L0: float
    U0: float = 0.02
    R: float | None = None
    n_vortex: int = 8
    slot_width: float | None = None
    slot_top: float | None = None
    vortex_period: str = "formula"

    def __post_init__(self):
        object.__setattr__(self, "kind", CaseKind.parse(self.kind))
        defaults = {CaseKind.TRANSLATION: 0.25, CaseKind.ZALESAK: 0.4, CaseKind.VORTEX: 0.15}
        if self.R is None:
            object.__setattr__(self, "R", defaults[self.kind] * self.L0)
        if self.slot_width is None:
            object.__setattr__(self, "slot_width", 0.1875 * self.R)
        if self.slot_top is None:
            object.__setattr__(self, "slot_top", 0.75 * self.R)
        if not (self.L0 > 0 and self.U0 > 0 and self.R > 0):
            raise ValueError("L0, U0 and R must be positive")
        if self.vortex_period not in ("formula", "steps"):
            raise ValueError("vortex_period must be 'formula' or 'steps'")
        cx, cy = self.center
        if cx - self.R < 0 or cx + self.R > self.L0 or cy - self.R < 0 or cy + self.R > self.L0:
            raise ValueError("feature does not fit inside the domain")

    @classmethod
    def translation(cls, L0: float = 100.0, U0: float = 0.02, **kw) -> "BenchmarkCase":
        return cls(CaseKind.TRANSLATION, L0, U0, **kw)

    @classmethod
    def zalesak(cls, L0: float = 200.0, U0: float = 0.02, **kw) -> "BenchmarkCase":
        return cls(CaseKind.ZALESAK, L0, U0, **kw)

    @classmethod
    def vortex(cls, L0: float = 200.0, U0: float = 0.02, n: int = 8, **kw) -> "BenchmarkCase":
        return cls(CaseKind.VORTEX, L0, U0, n_vortex=n, **kw)

    @property
    def center(self) -> tuple[float, float]:
        if self.kind == CaseKind.VORTEX:
            return (0.5 * self.L0, 0.75 * self.L0)
        return (0.5 * self.L0, 0.5 * self.L0)

    @property
    def period_time(self) -> float:
        """Physical time of one period."""
        if self.kind == CaseKind.TRANSLATION:
            return self.L0 / self.U0
        if self.kind == CaseKind.ZALESAK:
            return 2.0 * self.L0 / self.U0
        if self.vortex_period == "formula":
            return self.n_vortex * self.L0 / self.U0
        return 2.0 * self.L0 / self.U0

    def period_steps(self, dt: float) -> int:
        """Steps per period, rounded to the nearest integer."""
        return max(1, int(round(self.period_time / dt)))

    def grid(self, h: float = 1.0) -> Grid2D:
        n = int(round(self.L0 / h))
        return Grid2D(n, n, h)

    def initial_field(self, grid: Grid2D, W: float) -> ScalarField:
        if self.kind == CaseKind.ZALESAK:
            return init_zalesak(grid, self.center, self.R, self.slot_width, self.R + self.slot_top, W)
        return init_circle(grid, self.center, self.R, W)

    def velocity_field(self):
        if self.kind == CaseKind.TRANSLATION:
            return TranslationVelocity(self.U0)
        if self.kind == CaseKind.ZALESAK:
            return RotationVelocity(self.U0, self.L0)
        return VortexVelocity(self.U0, self.L0, self.period_time)


def init_circle(grid: Grid2D, center, R: float, W: float) -> ScalarField:
    """phi = -tanh(2 (d - R) / W); +1 inside."""
    x, y = grid.cell_centers()
    d = np.hypot(x - center[0], y - center[1])
    return ScalarField(grid, -np.tanh(2.0 * (d - R) / W))


def _segment_distance(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
    return np.hypot(px - ax - t * dx, py - ay - t * dy)


def slotted_disk_sdf(x, y, center, R: float, slot_width: float, slot_length: float):
    """Exact signed distance to a disk with a vertical slot cut from below.

    The slot is centred on the vertical axis of the disk, starts at the
    bottom rim and is ``slot_length`` long.  Positive inside the body.
    """
    cx, cy = center
    hw = 0.5 * slot_width
    if not 0 < hw < R:
        raise ValueError("slot must be narrower than the disk")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    top = cy - R + slot_length
    rim = cy - math.sqrt(R * R - hw * hw)  # where the slot walls meet the rim
    rx, ry = x - cx, y - cy
    d = np.hypot(rx, ry)
    in_slot = (np.abs(rx) < hw) & (y < top)
    inside = (d < R) & ~in_slot

    # nearest point on the full circle; falls in the cut-out arc -> use the corners
    safe = np.where(d > 0, d, 1.0)
    qx = np.where(d > 0, R * rx / safe, 0.0)
    qy = np.where(d > 0, R * ry / safe, R)
    in_gap = (np.abs(qx) < hw) & (qy < 0)
    corner = np.minimum(np.hypot(rx + hw, y - rim), np.hypot(rx - hw, y - rim))
    dist = np.where(in_gap, corner, np.abs(d - R))
    if top > rim:
        dist = np.minimum(dist, _segment_distance(x, y, cx - hw, rim, cx - hw, top))
        dist = np.minimum(dist, _segment_distance(x, y, cx + hw, rim, cx + hw, top))
        dist = np.minimum(dist, _segment_distance(x, y, cx - hw, top, cx + hw, top))
    return np.where(inside, dist, -dist)


def init_zalesak(grid: Grid2D, center, R: float, slot_width: float, slot_length: float,
                 W: float) -> ScalarField:
    x, y = grid.cell_centers()
    sdf = slotted_disk_sdf(x, y, center, R, slot_width, slot_length)
    return ScalarField(grid, np.tanh(2.0 * sdf / W))


class TranslationVelocity:
    steady = True

    def __init__(self, U0: float):
        self.U0 = U0

    def __call__(self, x, y, t):
        return np.full(np.shape(x), self.U0), np.full(np.shape(y), self.U0)


class RotationVelocity:
    steady = True

    def __init__(self, U0: float, L0: float):
        self.U0 = U0
        self.L0 = L0

    def __call__(self, x, y, t):
        return (-self.U0 * np.pi * (np.asarray(y) / self.L0 - 0.5),
                self.U0 * np.pi * (np.asarray(x) / self.L0 - 0.5))


class VortexVelocity:
    """Single vortex, reversed smoothly by cos(pi t / T)."""

    def __init__(self, U0: float, L0: float, T: float):
        self.U0 = U0
        self.L0 = L0
        self.T = T

    def spatial(self, x, y):
        kx = np.pi * np.asarray(x) / self.L0
        ky = np.pi * np.asarray(y) / self.L0
        return (self.U0 * np.sin(kx) ** 2 * np.sin(2.0 * ky),
                -self.U0 * np.sin(ky) ** 2 * np.sin(2.0 * kx))

    def time_factor(self, t: float) -> float:
        return math.cos(math.pi * t / self.T)

    def __call__(self, x, y, t):
        ux, uy = self.spatial(x, y)
        g = self.time_factor(t)
        return g * ux, g * uy


def velocity(case: BenchmarkCase, x, y, t: float = 0.0):
    return case.velocity_field()(x, y, t)


def l2_error(phi_final: ScalarField, phi_init: ScalarField) -> float:
    if phi_final.grid != phi_init.grid:
        raise ValueError("fields live on different grids")
    den = float(np.sum(phi_init.values**2))
    if den == 0.0:
        raise ValueError("reference field is identically zero")
    return math.sqrt(float(np.sum((phi_final.values - phi_init.values) ** 2)) / den)


def positive_mass(phi: ScalarField) -> float:
    v = phi.values
    return phi.grid.h**2 * float(v[v > 0].sum())


def phi_extrema(phi: ScalarField) -> tuple[float, float]:
    return float(phi.values.min()), float(phi.values.max())


# ---------------------------------------------------------------- contours

# marching-squares edge table: corners ordered (0,0), (1,0), (1,1), (0,1);
# edges 0: bottom, 1: right, 2: top, 3: left
_CASES = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 6: [(0, 2)], 7: [(3, 2)],
    8: [(2, 3)], 9: [(0, 2)], 11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(3, 0)],
}


def _edge_point(edge, i, j, v, x, y, level):
    a, b = {0: ((i, j), (i + 1, j)), 1: ((i + 1, j), (i + 1, j + 1)),
            2: ((i, j + 1), (i + 1, j + 1)), 3: ((i, j), (i, j + 1))}[edge]
    va, vb = v[a], v[b]
    t = 0.5 if vb == va else (level - va) / (vb - va)
    return (x[a] + t * (x[b] - x[a]), y[a] + t * (y[b] - y[a]))


def contour_segments(phi: ScalarField, level: float = 0.0):
    """Line segments of the ``level`` iso-line through cell centres.

    The periodic seam is not crossed.  Saddle cells are split by the cell
    mean.
    """
    v = phi.values
    x, y = phi.grid.cell_centers()
    above = v > level
    segs = []
    nx, ny = v.shape
    for i in range(nx - 1):
        for j in range(ny - 1):
            code = (int(above[i, j]) | int(above[i + 1, j]) << 1
                    | int(above[i + 1, j + 1]) << 2 | int(above[i, j + 1]) << 3)
            if code in (0, 15):
                continue
            if code in (5, 10):
                centre_above = (v[i, j] + v[i + 1, j] + v[i + 1, j + 1] + v[i, j + 1]) / 4 > level
                if (code == 5) == centre_above:
                    pairs = [(3, 2), (0, 1)] if code == 5 else [(0, 3), (1, 2)]
                else:
                    pairs = [(3, 0), (1, 2)] if code == 5 else [(0, 1), (2, 3)]
            else:
                pairs = _CASES[code]
            for e0, e1 in pairs:
                segs.append((_edge_point(e0, i, j, v, x, y, level),
                             _edge_point(e1, i, j, v, x, y, level)))
    return segs


def contour_polylines(phi: ScalarField, level: float = 0.0):
    """Join segments sharing end points into polylines (lists of points)."""
    segs = contour_segments(phi, level)
    key = lambda p: (round(p[0], 9), round(p[1], 9))
    ends: dict = {}
    for n, (a, b) in enumerate(segs):
        ends.setdefault(key(a), []).append(n)
        ends.setdefault(key(b), []).append(n)
    used = [False] * len(segs)
    lines = []
    for start in range(len(segs)):
        if used[start]:
            continue
        used[start] = True
        line = list(segs[start])
        for forward in (True, False):
            while True:
                tip = line[-1] if forward else line[0]
                nxt = next((m for m in ends.get(key(tip), []) if not used[m]), None)
                if nxt is None:
                    break
                used[nxt] = True
                a, b = segs[nxt]
                p = b if key(a) == key(tip) else a
                if forward:
                    line.append(p)
                else:
                    line.insert(0, p)
        lines.append(line)
    return lines


def write_contour(phi: ScalarField, path, level: float = 0.0) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line", "x", "y"])
        for n, line in enumerate(contour_polylines(phi, level)):
            for px, py in line:
                w.writerow([n, f"{px:.17g}", f"{py:.17g}"])
    return path


# ---------------------------------------------------------------- runs

@dataclass
class RunResult:
    config: SolverConfig
    case: BenchmarkCase
    phi0: ScalarField
    phi: ScalarField
    errors: list = field(default_factory=list)  # (period, L2)
    mass: list = field(default_factory=list)  # (step, m)
    extrema: list = field(default_factory=list)  # (step, min, max)
    phi_min: float = math.inf
    phi_max: float = -math.inf
    steps: int = 0
    diverged: SolverDivergence | None = None

    @property
    def final_l2(self) -> float:
        return self.errors[-1][1] if self.errors else math.nan

    @property
    def mass_loss(self) -> float:
        m0 = self.mass[0][1]
        return (m0 - self.mass[-1][1]) / m0


def run_case(config: SolverConfig, case: BenchmarkCase, periods: float = 1.0,
             diag_every: int | None = None, checkpoints=None, on_checkpoint=None,
             progress=None) -> RunResult:
    """Run ``case`` for ``periods`` periods and collect diagnostics.

    The L2 error is recorded at every whole period, at the end of the run and
    at every entry of ``checkpoints`` (in periods, e.g. 0.5 for the vortex reversal instant).
    Extrema are tracked every step; mass and extrema histories are stored
    every ``diag_every`` steps.  Divergence is caught and stored in the
    result rather than raised.
    """
    dt = config.dt
    per = case.period_steps(dt)
    total = int(round(periods * per))
    marks = {per * k: float(k) for k in range(1, int(math.floor(periods + 1e-9)) + 1)}
    for c in checkpoints or ():
        marks[int(round(c * per))] = float(c)
    marks.setdefault(total, total / per)  # always report the final state
    if diag_every is None:
        diag_every = max(1, per // 100)
    phi0 = case.initial_field(config.grid, config.W)
    u = case.velocity_field()
    solver = Solver(config, initialize(config, phi0, u), u)
    res = RunResult(config, case, phi0, solver.state.phi)
    res.mass.append((0, positive_mass(phi0)))
    lo, hi = phi_extrema(phi0)
    res.extrema.append((0, lo, hi))
    res.phi_min, res.phi_max = lo, hi
    for n in range(1, total + 1):
        try:
            st = solver.step()
        except SolverDivergence as exc:
            res.diverged = exc
            break
        v = st.phi.values
        lo, hi = float(v.min()), float(v.max())
        res.phi_min = min(res.phi_min, lo)
        res.phi_max = max(res.phi_max, hi)
        if n % diag_every == 0 or n == total:
            res.mass.append((n, positive_mass(st.phi)))
            res.extrema.append((n, lo, hi))
        if n in marks:
            res.errors.append((marks[n], l2_error(st.phi, phi0)))
            if on_checkpoint is not None:
                on_checkpoint(marks[n], st)
        if progress is not None:
            progress(n, total)
        res.steps = n
    res.phi = ScalarField(config.grid, solver.state.phi.values.copy())
    return res


def write_run_artifacts(res: RunResult, outdir, snapshots=(), binary: bool = False) -> Path:
    """errors.csv, mass.csv, extrema.csv, final contour/snapshot and summary.txt."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "errors.csv", ["period", "L2"], res.errors)
    _write_rows(out / "mass.csv", ["step", "mass"], res.mass)
    _write_rows(out / "extrema.csv", ["step", "min", "max"], res.extrema)
    for t, phi in snapshots:
        write_snapshot(phi, t, out / f"phi_{t:.17g}.csv", binary=binary)
        write_contour(phi, out / f"contour_{t:.17g}.csv")
    t_end = res.steps * res.config.dt
    write_contour(res.phi0, out / "contour_0.csv")
    write_contour(res.phi, out / f"contour_{t_end:.17g}.csv")
    write_snapshot(res.phi, t_end, out / "phi_final.csv", binary=binary)
    cfg = res.config
    lines = [
        f"benchmark = {res.case.kind.value}",
        f"L0 = {res.case.L0!r}",
        f"U0 = {res.case.U0!r}",
        f"R = {res.case.R!r}",
        f"grid = {cfg.grid.nx}x{cfg.grid.ny}",
        f"variant = {cfg.variant.name}",
        f"flux_mode = {cfg.flux_mode.name}",
        f"face_scheme = {cfg.face_scheme.kind.name}",
        f"chi = {cfg.chi!r}",
        f"Pe = {cfg.Pe!r}",
        f"W = {cfg.W!r}",
        f"tau_f = {cfg.model.tau_f!r}",
        f"steps = {res.steps}",
        f"final_L2 = {res.final_l2:.17g}",
        f"mass_loss = {res.mass_loss:.17g}",
        f"phi_min = {res.phi_min:.17g}",
        f"phi_max = {res.phi_max:.17g}",
    ]
    if res.diverged is not None:
        lines.append(f"diverged_at_step = {res.diverged.step}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    return out


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, int) else f"{v:.17g}" for v in row])


def convergence_study(preset: str, grids=(50, 100, 200, 400), Cn: float = 0.015,
                      face_scheme: FaceScheme | None = None, chi: float = 0.5,
                      Pe: float = 60.0, U0: float = 0.02, progress=None):
    """Translation to t = T on each grid with W = Cn L0; returns (N, L2, order) rows.

    The first row's order is NaN.
    """
    rows = []
    prev = None
    for n in grids:
        case = BenchmarkCase.translation(L0=float(n), U0=U0)
        cfg = SolverConfig.preset(preset, case.grid(), face_scheme=face_scheme or FaceScheme(),
                                  chi=chi, W=Cn * n, Pe=Pe, U0=U0)
        res = run_case(cfg, case, periods=1.0)
        err = res.final_l2
        order = math.log2(prev / err) if prev is not None else math.nan
        rows.append((n, err, order))
        if progress is not None:
            progress(n, err, order)
        prev = err
    return rows
