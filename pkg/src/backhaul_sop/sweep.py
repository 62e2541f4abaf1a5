"""Configuration loading, parameter sweeps and CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache, partial
from importlib import resources

import jsonschema

from . import __version__
from .analytic import sop_closed_form, sop_quadrature
from .model import (
    ChannelMeans,
    PrimaryParams,
    SecondaryParams,
    SystemParams,
    ValidationError,
    db_to_linear,
    validate,
    with_overrides,
)
from .montecarlo import McConfig, estimate_sop
from .power import compute_power_allocation

AXES = ("P_T_dB", "K", "reliability", "phi")
METHODS = ("analytic", "quadrature", "montecarlo")
CSV_HEADER = ("axis", "axis_value", "sop_analytic", "sop_quadrature", "sop_mc", "ci_low", "ci_high",
              "gamma_s", "feasible")

# model field paths -> config key paths, for error messages
_CONFIG_PATHS = {
    "primary.gamma_T": "primary.pt_db",
    "secondary.K": "secondary.k",
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{path or '<root>'}: {msg}" for path, msg in self.errors))


@dataclass(frozen=True)
class SweepSpec:
    base: SystemParams
    axis: str | None = None
    grid: tuple[float, ...] = ()
    methods: tuple[str, ...] = METHODS
    mc: McConfig | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass
class SweepRow:
    axis_value: float
    gamma_s: float
    feasible: bool
    sop_analytic: float | None = None
    sop_quadrature: float | None = None
    sop_mc: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    errors: dict[str, str] = field(default_factory=dict)


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow]
    metadata: dict


@lru_cache(maxsize=1)
def config_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("config.schema.json").read_text("utf-8"))


def _expand_grid(grid) -> list[float]:
    if isinstance(grid, dict):
        start, stop, step = grid["start"], grid["stop"], grid["step"]
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    return [float(v) for v in grid]


def _substitute(base: SystemParams, axis: str, value: float) -> SystemParams:
    if axis == "P_T_dB":
        return with_overrides(base, gamma_T=db_to_linear(value))
    if axis == "K":
        return with_overrides(base, K=int(value))
    if axis == "reliability":
        return with_overrides(base, reliability=value)
    return with_overrides(base, phi=value)


def parse_config(text: str) -> SweepSpec:
    """Parse and validate a JSON scenario/sweep document.

    Schema violations (unknown keys included) and invariant violations are
    collected into one :class:`ConfigError` whose ``errors`` name the
    offending paths, e.g. ``primary.phi``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"invalid JSON: {exc}")]) from exc
    validator = jsonschema.Draft202012Validator(config_schema())
    schema_errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if schema_errors:
        raise ConfigError([(".".join(map(str, e.absolute_path)), e.message) for e in schema_errors])

    sweep = doc.get("sweep")
    axis = sweep["axis"] if sweep else None
    grid = _expand_grid(sweep["grid"]) if sweep else []
    errors = []
    if sweep:
        if not grid:
            errors.append(("sweep.grid", "grid expands to no points"))
        if any(b <= a for a, b in zip(grid, grid[1:])):
            errors.append(("sweep.grid", "grid values must be strictly increasing"))
        if axis == "K" and any(v != int(v) for v in grid):
            errors.append(("sweep.grid", "K grid values must be integers"))

    primary = doc["primary"]
    pt_db = primary.get("pt_db", primary.get("gamma_t_db"))
    if pt_db is None:
        if axis == "P_T_dB" and grid:
            pt_db = grid[0]
        else:
            errors.append(("primary", "one of 'pt_db' or 'gamma_t_db' is required unless sweeping P_T_dB"))
    methods = tuple(sweep.get("methods", METHODS)) if sweep else METHODS
    mc = None
    if "mc" in doc:
        try:
            mc = McConfig(**doc["mc"])
        except ValueError as exc:
            errors.append(("mc", str(exc)))
    elif "montecarlo" in methods and sweep is not None:
        errors.append(("mc", "an 'mc' section is required when the montecarlo method is selected"))
    if errors:
        raise ConfigError(errors)

    sec = doc["secondary"]
    base = SystemParams(
        primary=PrimaryParams(gamma_T=db_to_linear(pt_db), beta=primary["beta"], phi=primary["phi"]),
        secondary=SecondaryParams(K=sec["k"], reliability=sec["reliability"], r_th=sec["r_th"]),
        channels=ChannelMeans.from_db(**doc["channels"]),
    )
    try:
        validate(base)
        for value in grid:
            validate(_substitute(base, axis, value))
    except ValidationError as exc:
        raise ConfigError([(_CONFIG_PATHS.get(p, p), m) for p, m in exc.errors]) from exc
    return SweepSpec(base=base, axis=axis, grid=tuple(grid), methods=methods, mc=mc, raw=doc)


def load_config(path) -> SweepSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def evaluate_point(spec: SweepSpec, value: float) -> SweepRow:
    """Solve the power allocation at one grid point and run every requested method."""
    params = _substitute(spec.base, spec.axis, value) if spec.axis else spec.base
    alloc = compute_power_allocation(params)
    row = SweepRow(axis_value=value, gamma_s=alloc.gamma_S, feasible=alloc.feasible)
    if "analytic" in spec.methods:
        try:
            row.sop_analytic = sop_closed_form(params, alloc).sop
        except ArithmeticError as exc:
            row.errors["analytic"] = str(exc)
    if "quadrature" in spec.methods:
        try:
            row.sop_quadrature = sop_quadrature(params, alloc)
        except ArithmeticError as exc:
            row.errors["quadrature"] = str(exc)
    if "montecarlo" in spec.methods:
        est = estimate_sop(params, alloc, spec.mc or McConfig())
        row.sop_mc = est.sop_hat
        row.ci_low, row.ci_high = est.ci95
    return row


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every grid point, in grid order.

    ``workers > 1`` spreads points over processes; the rows are identical to a
    sequential run because each point seeds its own simulation.
    """
    if spec.axis is None:
        raise ConfigError([("sweep", "configuration has no sweep section")])
    job = partial(evaluate_point, spec)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, spec.grid))
    else:
        rows = [job(v) for v in spec.grid]
    metadata = {
        "config": spec.raw,
        "seed": spec.mc.seed if spec.mc else None,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return SweepResult(axis=spec.axis, rows=rows, metadata=metadata)


def _fmt(value) -> str:
    if value is None:
        return ""
    return format(value, ".12g")


def emit_csv(result: SweepResult, destination=None) -> bytes:
    """Serialise ``result`` as CSV and return the bytes written.

    ``destination`` may be a path, a binary file object, or ``None``.
    Unrequested methods leave empty cells; a method that failed at a point is
    written as ``nan``.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        cells = {}
        for name, attr in (("analytic", "sop_analytic"), ("quadrature", "sop_quadrature")):
            value = getattr(row, attr)
            cells[attr] = "nan" if name in row.errors else _fmt(value)
        writer.writerow([
            result.axis,
            _fmt(row.axis_value),
            cells["sop_analytic"],
            cells["sop_quadrature"],
            _fmt(row.sop_mc),
            _fmt(row.ci_low),
            _fmt(row.ci_high),
            _fmt(row.gamma_s),
            "true" if row.feasible else "false",
        ])
    data = buf.getvalue().encode("utf-8")
    if destination is None:
        return data
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    else:
        destination.write(data)
    return data


def read_csv(data) -> SweepResult:
    """Inverse of :func:`emit_csv` (metadata is not stored in the CSV)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.DictReader(io.StringIO(data))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")

    def num(text):
        return None if text == "" else float(text)

    rows = []
    axis = None
    for rec in reader:
        axis = rec["axis"]
        rows.append(SweepRow(
            axis_value=float(rec["axis_value"]),
            gamma_s=float(rec["gamma_s"]),
            feasible=rec["feasible"] == "true",
            sop_analytic=num(rec["sop_analytic"]),
            sop_quadrature=num(rec["sop_quadrature"]),
            sop_mc=num(rec["sop_mc"]),
            ci_low=num(rec["ci_low"]),
            ci_high=num(rec["ci_high"]),
        ))
    return SweepResult(axis=axis, rows=rows, metadata={})


# --------------------------------------------------------------------------
# figure presets
# --------------------------------------------------------------------------

def preset_names() -> list[str]:
    folder = resources.files(__package__).joinpath("presets")
    return sorted(p.name[: -len(".json")] for p in folder.iterdir() if p.name.endswith(".json"))


def preset_text(name: str) -> str:
    path = resources.files(__package__).joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path.read_text("utf-8")


def load_preset(name: str) -> SweepSpec:
    return parse_config(preset_text(name))
