"""Command line: single runs from a config file and table sweeps.

Config files are flat ``key = value`` lines; ``#`` starts a comment.  Any key
can be overridden from the environment as ``DUGKS_<KEY>`` (upper case).

    dugks run --config case.cfg
    dugks table --which table1 --out results/
    dugks convergence --preset DUGKS-I --out results/
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .benchmarks import BenchmarkCase, CaseKind, run_case, write_run_artifacts
from .fields import ScalarField
from .kinetic import Variant
from .reconstruction import FaceScheme, SchemeKind
from .solver import PRESETS, FluxMode, SolverConfig

ENV_PREFIX = "DUGKS_"
EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class RunSpec:
    benchmark: BenchmarkCase
    preset: str | None = "DUGKS-I"
    variant: Variant = Variant.A
    flux_mode: FluxMode = FluxMode.PARABOLIC
    face_scheme: FaceScheme = field(default_factory=FaceScheme)
    chi: float = 0.5
    Pe: float = 60.0
    W: float = 4.0
    periods: float = 1.0
    output: Path = Path("dugks_out")
    snapshot_every: float = 0.0  # in periods; 0 keeps only the final field
    diag_every: int | None = None
    binary: bool = False

    def solver_config(self) -> SolverConfig:
        return SolverConfig(grid=self.benchmark.grid(), variant=self.variant,
                            flux_mode=self.flux_mode, face_scheme=self.face_scheme,
                            chi=self.chi, W=self.W, Pe=self.Pe, U0=self.benchmark.U0)


def _positive(v):
    if not v > 0:
        raise ValueError("must be positive")
    return v


def _chi(v):
    if not 0 < v <= 1:
        raise ValueError("must lie in (0, 1]")
    return v


def _bool(s):
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _nonneg(v):
    if v < 0:
        raise ValueError("must be non-negative")
    return v


# key -> converter (raising ValueError with a short reason)
_KEYS = {
    "benchmark": lambda s: CaseKind.parse(s),
    "preset": lambda s: s.strip().upper(),
    "variant": lambda s: Variant.parse(s),
    "flux_mode": lambda s: FluxMode.parse(s),
    "face_scheme": lambda s: SchemeKind.parse(s),
    "weno_eps": lambda s: _positive(float(s)),
    "weno_p": lambda s: _positive(int(s)),
    "chi": lambda s: _chi(float(s)),
    "pe": lambda s: _positive(float(s)),
    "w": lambda s: _positive(float(s)),
    "u0": lambda s: _positive(float(s)),
    "l0": lambda s: _positive(float(s)),
    "r": lambda s: _positive(float(s)),
    "n_vortex": lambda s: _positive(int(s)),
    "vortex_period": lambda s: s.strip().lower(),
    "slot_width": lambda s: _positive(float(s)),
    "slot_top": lambda s: float(s),
    "periods": lambda s: _positive(float(s)),
    "output": lambda s: Path(s.strip()),
    "snapshot_every": lambda s: _nonneg(float(s)),
    "diag_every": lambda s: _positive(int(s)),
    "binary": _bool,
}


def _tokens(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        k, v = (p.strip() for p in line.split("=", 1))
        key = k.lower()
        if key not in _KEYS:
            raise ConfigError(f"unknown key {k!r}", lineno)
        if key in out:
            raise ConfigError(f"duplicate key {k!r}", lineno)
        out[key] = (v, lineno)
    return out


def parse_config(text: str, env=None, overrides=()) -> RunSpec:
    """Parse config text into a validated :class:`RunSpec`.

    ``env`` (default ``os.environ``) supplies ``DUGKS_<KEY>`` overrides;
    ``overrides`` are ``key=value`` strings applied last.
    """
    raw = _tokens(text)
    env = os.environ if env is None else env
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = (p.strip() for p in item.split("=", 1))
        if k.lower() not in _KEYS:
            raise ConfigError(f"unknown key {k!r} in override")
        raw[k.lower()] = (v, f"override {k}")
    for key in _KEYS:
        name = ENV_PREFIX + key.upper()
        if name in env and key not in {o.split("=", 1)[0].strip().lower() for o in overrides}:
            raw[key] = (env[name], f"env {name}")
    vals = {}
    for key, (v, where) in raw.items():
        try:
            vals[key] = _KEYS[key](v)
        except ValueError as exc:
            line = where if isinstance(where, int) else None
            label = key if line is not None else where
            raise ConfigError(f"bad value {v!r} for {label}: {exc}", line) from None
    if "benchmark" not in vals:
        raise ConfigError("benchmark required")

    def where(key):
        w = raw[key][1] if key in raw else None
        return w if isinstance(w, int) else None

    preset = vals.get("preset", "DUGKS-I")
    if preset == "CUSTOM":
        preset = None
        variant = vals.get("variant", Variant.A)
        mode = vals.get("flux_mode", FluxMode.PARABOLIC)
    else:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}", where("preset"))
        if "variant" in vals or "flux_mode" in vals:
            raise ConfigError("variant/flux_mode need preset = custom",
                              where("variant") or where("flux_mode"))
        variant, mode = PRESETS[preset]

    kind = vals["benchmark"]
    case_kw = {}
    for key, attr in (("l0", "L0"), ("u0", "U0"), ("r", "R"), ("slot_width", "slot_width"),
                      ("slot_top", "slot_top"), ("vortex_period", "vortex_period")):
        if key in vals:
            case_kw[attr] = vals[key]
    if "n_vortex" in vals:
        case_kw["n_vortex"] = vals["n_vortex"]
    case_kw.setdefault("L0", 100.0 if kind == CaseKind.TRANSLATION else 200.0)
    try:
        case = BenchmarkCase(kind, **case_kw)
    except ValueError as exc:
        raise ConfigError(f"benchmark geometry: {exc}") from None
    scheme = FaceScheme(vals.get("face_scheme", SchemeKind.WENO_Z5),
                        vals.get("weno_eps", 1e-6), vals.get("weno_p", 1))
    spec = RunSpec(
        benchmark=case, preset=preset, variant=variant, flux_mode=mode, face_scheme=scheme,
        chi=vals.get("chi", 0.5), Pe=vals.get("pe", 60.0), W=vals.get("w", 4.0),
        periods=vals.get("periods", 1.0), output=vals.get("output", Path("dugks_out")),
        snapshot_every=vals.get("snapshot_every", 0.0), diag_every=vals.get("diag_every"),
        binary=vals.get("binary", False),
    )
    try:
        spec.solver_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return spec


def run(spec: RunSpec, log=None) -> int:
    """Execute ``spec`` and write its artifacts; returns the exit status."""
    log = log or (lambda msg: print(msg, file=sys.stderr))
    out = Path(spec.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        log(f"output directory not writable: {exc}")
        return EXIT_CONFIG
    cfg = spec.solver_config()
    snaps = []
    checkpoints = []
    if spec.snapshot_every > 0:
        k = 1
        while k * spec.snapshot_every < spec.periods - 1e-12:
            checkpoints.append(k * spec.snapshot_every)
            k += 1
    if spec.benchmark.kind == CaseKind.VORTEX:
        checkpoints.append(0.5)

    def keep(period, state):
        snaps.append((state.time, ScalarField(cfg.grid, state.phi.values.copy())))

    res = run_case(cfg, spec.benchmark, spec.periods, diag_every=spec.diag_every,
                   checkpoints=checkpoints, on_checkpoint=keep)
    write_run_artifacts(res, out, snapshots=snaps, binary=spec.binary)
    if res.diverged is not None:
        last = res.errors[-1] if res.errors else None
        log(f"diverged at step {res.diverged.step}; last sum(phi) = "
            f"{res.diverged.last_phi_sum!r}; last L2 = {last}; "
            f"last extrema = {res.extrema[-1][1:]}")
        return EXIT_DIVERGED
    log(f"done: {res.steps} steps, final L2 = {res.final_l2:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------- tables

PUBLISHED = {
    "table1": {
        ("DUGKS-AC", "CDI2"): 0.3528, ("DUGKS-AC", "CDI4"): 0.1244,
        ("DUGKS-AC", "WENO_Z3"): 0.0278, ("DUGKS-AC", "WENO_Z5"): 0.0111,
        ("DUGKS-I", "CDI2"): 0.3747, ("DUGKS-I", "CDI4"): 0.0999,
        ("DUGKS-I", "WENO_Z3"): 0.0160, ("DUGKS-I", "WENO_Z5"): 0.0064,
        ("DUGKS-II", "CDI2"): 0.3747, ("DUGKS-II", "CDI4"): 0.0999,
        ("DUGKS-II", "WENO_Z3"): 0.0160, ("DUGKS-II", "WENO_Z5"): 0.0064,
    },
    "table2": {
        ("DUGKS-AC", 50): 0.0108, ("DUGKS-AC", 250): 0.0416, ("DUGKS-AC", 500): 0.0577,
        ("DUGKS-AC", 1000): 0.0829, ("DUGKS-AC", 2000): 0.0901,
        ("DUGKS-I", 50): 0.0077, ("DUGKS-I", 250): 0.0032, ("DUGKS-I", 500): 0.0059,
        ("DUGKS-I", 1000): 0.1147, ("DUGKS-I", 2000): 0.1907,
        ("DUGKS-II", 50): 0.0077, ("DUGKS-II", 250): 0.0032, ("DUGKS-II", 500): 0.0059,
        ("DUGKS-II", 1000): 0.0948, ("DUGKS-II", 2000): 0.1906,
    },
    "table3": {
        ("DUGKS-AC", 0.1): 0.0196, ("DUGKS-AC", 0.2): 0.0117, ("DUGKS-AC", 0.4): 0.0091,
        ("DUGKS-AC", 0.5): 0.0111, ("DUGKS-AC", 0.8): 0.025, ("DUGKS-AC", 1.0): 0.041,
        ("DUGKS-I", 0.1): 0.0196, ("DUGKS-I", 0.2): 0.0118, ("DUGKS-I", 0.4): 0.0073,
        ("DUGKS-I", 0.5): 0.0064, ("DUGKS-I", 0.8): 0.0052, ("DUGKS-I", 1.0): 0.0052,
        ("DUGKS-II", 0.1): 0.0196, ("DUGKS-II", 0.2): 0.0118, ("DUGKS-II", 0.4): 0.0073,
        ("DUGKS-II", 0.5): 0.0064, ("DUGKS-II", 0.8): 0.0051, ("DUGKS-II", 1.0): 0.0051,
    },
    "table4": {
        ("DUGKS-AC", 50): 0.2860, ("DUGKS-AC", 100): 0.1912, ("DUGKS-AC", 200): 0.1090,
        ("DUGKS-AC", 400): 0.0360,
        ("DUGKS-I", 50): 6.998e-2, ("DUGKS-I", 100): 2.793e-2, ("DUGKS-I", 200): 4.294e-3,
        ("DUGKS-I", 400): 4.220e-4,
        ("DUGKS-II", 50): 6.997e-2, ("DUGKS-II", 100): 2.792e-2, ("DUGKS-II", 200): 4.291e-3,
        ("DUGKS-II", 400): 4.210e-4,
    },
    # (L2 at T, relative positive-mass loss at T)
    "vortex_metrics": {
        "DUGKS-AC": (0.0779, 5.65e-2),
        "DUGKS-I": (0.0579, 6.34e-2),
        "DUGKS-II": (0.0579, 6.34e-2),
    },
}

TABLES = ("table1", "table2", "table3", "table4", "vortex_metrics")
_PRESET_ORDER = ("DUGKS-AC", "DUGKS-I", "DUGKS-II")


@dataclass(frozen=True)
class Cell:
    """One run of a table sweep."""

    table: str
    preset: str
    column: object
    case: BenchmarkCase
    scheme: SchemeKind = SchemeKind.WENO_Z5
    chi: float = 0.5
    Pe: float = 60.0
    W: float = 4.0
    periods: float = 10.0

    def config(self) -> SolverConfig:
        return SolverConfig.preset(self.preset, self.case.grid(), face_scheme=FaceScheme(self.scheme),
                                   chi=self.chi, W=self.W, Pe=self.Pe, U0=self.case.U0)


def table_cells(which: str, periods: float | None = None) -> list[Cell]:
    """Parameter matrix of a table.  ``periods`` overrides the run length."""
    if which not in TABLES:
        raise ValueError(f"unknown table {which!r}; expected one of {TABLES}")
    tr = BenchmarkCase.translation()
    p10 = 10.0 if periods is None else periods
    p1 = 1.0 if periods is None else periods
    cells = []
    for preset in _PRESET_ORDER:
        if which == "table1":
            cells += [Cell(which, preset, k.name, tr, scheme=k, periods=p10) for k in SchemeKind]
        elif which == "table2":
            cells += [Cell(which, preset, pe, tr, Pe=float(pe), periods=p10)
                      for pe in (50, 250, 500, 1000, 2000)]
        elif which == "table3":
            cells += [Cell(which, preset, chi, tr, chi=chi, periods=p10)
                      for chi in (0.1, 0.2, 0.4, 0.5, 0.8, 1.0)]
        elif which == "table4":
            cells += [Cell(which, preset, n, BenchmarkCase.translation(L0=float(n)),
                           W=0.015 * n, periods=p1) for n in (50, 100, 200, 400)]
        else:
            cells.append(Cell(which, preset, "T", BenchmarkCase.vortex(), periods=p1))
    return cells


def run_cell(cell: Cell) -> dict:
    """Run one cell; failures are reported in the row, never raised."""
    row = {"table": cell.table, "preset": cell.preset, "column": cell.column}
    try:
        res = run_case(cell.config(), cell.case, cell.periods)
    except Exception as exc:  # keep the sweep going
        row.update(L2=math.nan, status=f"error: {exc}")
        return row
    row["L2"] = res.final_l2
    row["status"] = "diverged" if res.diverged is not None else "ok"
    if cell.table == "vortex_metrics":
        row.update(mass_loss=res.mass_loss, phi_min=res.phi_min, phi_max=res.phi_max)
    return row


def _published(cell: Cell):
    ref = PUBLISHED[cell.table]
    if cell.table == "vortex_metrics":
        return ref.get(cell.preset, (math.nan, math.nan))
    return ref.get((cell.preset, cell.column), math.nan)


def table_driver(which: str, out=None, periods: float | None = None, jobs: int = 1,
                 progress=None) -> list[dict]:
    """Run every cell of ``which`` and return rows with a published-value column.

    With ``out`` set, the rows are also written to ``<out>/<which>.csv``.
    """
    cells = table_cells(which, periods)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = []
        for cell in cells:
            rows.append(run_cell(cell))
            if progress is not None:
                progress(rows[-1])
    for cell, row in zip(cells, rows):
        pub = _published(cell)
        if which == "vortex_metrics":
            row["published_L2"], row["published_mass_loss"] = pub
        else:
            row["published"] = pub
    if which == "table4":
        for preset in _PRESET_ORDER:
            prev = None
            for row in rows:
                if row["preset"] != preset:
                    continue
                e = row["L2"]
                row["order"] = math.log2(prev / e) if prev and e and e > 0 else math.nan
                prev = e
    if out is not None:
        write_table(rows, Path(out) / f"{which}.csv")
    return rows


def write_table(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = []
    for row in rows:
        cols += [k for k in row if k not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in cols])
    return path


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- entry point

def _parser():
    p = argparse.ArgumentParser(prog="dugks", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run one benchmark from a config file")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    t = sub.add_parser("table", help="reproduce a table sweep as CSV")
    t.add_argument("--which", required=True, choices=TABLES)
    t.add_argument("--out", required=True, type=Path)
    t.add_argument("--periods", type=float, default=None, help="override the run length")
    t.add_argument("--jobs", type=int, default=1, help="independent worker processes")
    c = sub.add_parser("convergence", help="grid-refinement study of the translation case")
    c.add_argument("--preset", required=True, choices=sorted(PRESETS))
    c.add_argument("--out", required=True, type=Path)
    c.add_argument("--grids", default="50,100,200,400")
    c.add_argument("--scheme", default="WENO_Z5")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "run":
        try:
            text = args.config.read_text()
        except OSError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            spec = parse_config(text, overrides=args.set)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return run(spec)
    if args.cmd == "table":
        def show(row):
            print(f"{row['preset']:>9} {row['column']!s:>8} L2={row['L2']:.6g} {row['status']}",
                  file=sys.stderr)
        rows = table_driver(args.which, args.out, args.periods, args.jobs, progress=show)
        print(f"wrote {Path(args.out) / (args.which + '.csv')} ({len(rows)} rows)", file=sys.stderr)
        return EXIT_OK
    from .benchmarks import convergence_study
    try:
        grids = [int(g) for g in args.grids.split(",")]
        scheme = FaceScheme(SchemeKind.parse(args.scheme))
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = convergence_study(args.preset, grids, face_scheme=scheme)
    write_table([{"grid": n, "L2": e, "order": o} for n, e, o in rows],
                Path(args.out) / f"convergence_{args.preset}.csv")
    for n, e, o in rows:
        print(f"{n:5d} L2={e:.6g} order={o:.3f}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
