"""Declarative parameter sweeps and the datasets they produce.

A scenario is a YAML document::

    name: fig2_joint
    quantity: joint            # joint | no_interference | hom | marginal | windowed
    geometry:                  # every t_* and delta_* not swept below
      t_a: 2.0
      ...
      splitter: {r: 0.6, t: 0.8}   # optional, balanced by default
    query:                     # fixed detection times the quantity needs
      tau_d: 5.5
    window:                    # windowed only; t_w may be swept instead
      center: 5.5
      t_w: 10.0
    axes:                      # at most two, first axis outermost
      - {var: tau_c, start: 2.0, stop: 8.0, steps: 141}
      - {var: [delta_c, delta_d], start: 0.2, stop: 3.0, steps: 15}
    output: {path: out.csv, format: csv}

An axis with a list of variables sets all of them to the same value.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import yaml

from . import __version__
from .coincidence import QUANTITIES, CoincidenceQuery, evaluate
from .errors import ConfigError, DomainError, HomError
from .pulse_algebra import BeamSplitter, ExperimentGeometry

GEOMETRY_FIELDS = ("t_a", "t_b", "t_c", "t_d", "delta_a", "delta_b", "delta_c", "delta_d")
WIDTH_FIELDS = GEOMETRY_FIELDS[4:]
SWEEPABLE = GEOMETRY_FIELDS + ("tau_c", "tau_d", "t_w")
MAX_AXES = 2
FORMATS = ("csv", "json")

# detection-side variables each quantity reads
QUERY_NEEDS = {
    "joint": ("tau_c", "tau_d"),
    "no_interference": ("tau_c", "tau_d"),
    "hom": (),
    "marginal": ("tau_c",),
    "windowed": ("tau_c", "t_w"),
}

SCALE_NOTE = "raw probability densities; no figure scale factor applied"

_TOP_KEYS = ("name", "description", "quantity", "geometry", "query", "window", "axes", "output")


@dataclass(frozen=True)
class Axis:
    vars: tuple
    start: float
    stop: float
    steps: int

    @property
    def label(self) -> str:
        return "=".join(self.vars)

    def values(self) -> list[float]:
        step = (self.stop - self.start) / (self.steps - 1)
        return [self.start + k * step for k in range(self.steps)]


@dataclass(frozen=True)
class Window:
    center: float
    t_w: Optional[float] = None


@dataclass(frozen=True)
class Output:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class ScenarioConfig:
    quantity: str
    geometry: dict
    axes: tuple = ()
    query: dict = field(default_factory=dict)
    window: Optional[Window] = None
    splitter: Optional[tuple] = None
    output: Optional[Output] = None
    name: str = "scenario"
    description: str = ""

    @property
    def grid_size(self) -> int:
        return math.prod(axis.steps for axis in self.axes)

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {"name": self.name}
        if self.description:
            doc["description"] = self.description
        doc["quantity"] = self.quantity
        geometry: dict[str, Any] = dict(self.geometry)
        if self.splitter is not None:
            geometry["splitter"] = {"r": self.splitter[0], "t": self.splitter[1]}
        doc["geometry"] = geometry
        if self.query:
            doc["query"] = dict(self.query)
        if self.window is not None:
            window: dict[str, Any] = {"center": self.window.center}
            if self.window.t_w is not None:
                window["t_w"] = self.window.t_w
            doc["window"] = window
        if self.axes:
            doc["axes"] = [
                {
                    "var": a.vars[0] if len(a.vars) == 1 else list(a.vars),
                    "start": a.start,
                    "stop": a.stop,
                    "steps": a.steps,
                }
                for a in self.axes
            ]
        if self.output is not None:
            out: dict[str, Any] = {}
            if self.output.path is not None:
                out["path"] = self.output.path
            out["format"] = self.output.format
            doc["output"] = out
        return doc


def serialize(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=False)


# --- parsing -----------------------------------------------------------------


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", where)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", where)
    return value


def _mapping(value, where, allowed):
    if not isinstance(value, dict):
        raise ConfigError(f"expected a mapping, got {type(value).__name__}", where)
    for key in value:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}; allowed: {', '.join(allowed)}", f"{where}.{key}" if where else str(key))
    return value


def parse_config(text: bytes | str) -> ScenarioConfig:
    """Parse and validate a scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", where) from None
    if doc is None:
        raise ConfigError("empty config")
    _mapping(doc, "", _TOP_KEYS)

    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        raise ConfigError("expected a string", "name")
    description = doc.get("description", "")
    if not isinstance(description, str):
        raise ConfigError("expected a string", "description")

    quantity = doc.get("quantity")
    if quantity not in QUANTITIES:
        raise ConfigError(f"expected one of {', '.join(QUANTITIES)}, got {quantity!r}", "quantity")

    axes = _parse_axes(doc.get("axes") or [])
    swept = {v: k for k, axis in enumerate(axes) for v in axis.vars}
    needs = QUERY_NEEDS[quantity]
    for var, k in swept.items():
        if var in ("tau_c", "tau_d", "t_w") and var not in needs:
            raise ConfigError(f"{var} is not used by quantity {quantity}", f"axes[{k}].var")

    geometry, splitter = _parse_geometry(doc.get("geometry"), swept)
    query = _parse_query(doc.get("query") or {}, quantity, swept)
    window = _parse_window(doc.get("window"), quantity, swept)
    output = _parse_output(doc.get("output"))
    return ScenarioConfig(
        quantity=quantity,
        geometry=geometry,
        axes=axes,
        query=query,
        window=window,
        splitter=splitter,
        output=output,
        name=name,
        description=description,
    )


def _parse_axes(raw):
    if not isinstance(raw, list):
        raise ConfigError("expected a list of axes", "axes")
    if len(raw) > MAX_AXES:
        raise ConfigError(f"at most {MAX_AXES} axes are allowed, got {len(raw)}", "axes")
    axes = []
    seen = set()
    for k, item in enumerate(raw):
        where = f"axes[{k}]"
        _mapping(item, where, ("var", "start", "stop", "steps"))
        for key in ("var", "start", "stop", "steps"):
            if key not in item:
                raise ConfigError(f"missing key {key!r}", where)
        names = item["var"]
        names = [names] if isinstance(names, str) else names
        if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
            raise ConfigError("expected a variable name or a list of names", f"{where}.var")
        for n in names:
            if n not in SWEEPABLE:
                raise ConfigError(f"unknown variable {n!r}; sweepable: {', '.join(SWEEPABLE)}", f"{where}.var")
            if n in seen:
                raise ConfigError(f"variable {n!r} is swept twice", f"{where}.var")
            seen.add(n)
        steps = item["steps"]
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
            raise ConfigError(f"steps must be an integer >= 2, got {steps!r}", f"{where}.steps")
        start = _number(item["start"], f"{where}.start")
        stop = _number(item["stop"], f"{where}.stop")
        for n in names:
            if n in WIDTH_FIELDS and min(start, stop) <= 0:
                raise ConfigError(f"width {n} must stay positive over the sweep", where)
            if n == "t_w" and min(start, stop) < 0:
                raise ConfigError("t_w must stay nonnegative over the sweep", where)
        axes.append(Axis(tuple(names), start, stop, steps))
    return tuple(axes)


def _parse_geometry(raw, swept):
    if raw is None:
        raise ConfigError("missing geometry block", "geometry")
    _mapping(raw, "geometry", GEOMETRY_FIELDS + ("splitter",))
    geometry = {}
    for name in GEOMETRY_FIELDS:
        where = f"geometry.{name}"
        if name in swept:
            if name in raw:
                raise ConfigError(f"also swept by axes[{swept[name]}]", where)
            continue
        if name not in raw:
            raise ConfigError("missing value (give it here or sweep it)", where)
        value = _number(raw[name], where)
        if name in WIDTH_FIELDS and value <= 0:
            raise ConfigError(f"width must be positive, got {value!r}", where)
        geometry[name] = value
    splitter = None
    if "splitter" in raw:
        _mapping(raw["splitter"], "geometry.splitter", ("r", "t"))
        try:
            s = BeamSplitter(
                _number(raw["splitter"].get("r"), "geometry.splitter.r"),
                _number(raw["splitter"].get("t"), "geometry.splitter.t"),
            )
        except DomainError as exc:
            raise ConfigError(str(exc), "geometry.splitter") from None
        splitter = (s.reflectance, s.transmittance)
    return geometry, splitter


def _parse_query(raw, quantity, swept):
    _mapping(raw, "query", ("tau_c", "tau_d"))
    needs = QUERY_NEEDS[quantity]
    query = {}
    for name in ("tau_c", "tau_d"):
        where = f"query.{name}"
        if name in raw:
            if name not in needs:
                raise ConfigError(f"not used by quantity {quantity}", where)
            if name in swept:
                raise ConfigError(f"also swept by axes[{swept[name]}]", where)
            query[name] = _number(raw[name], where)
        elif name in needs and name not in swept:
            raise ConfigError(f"quantity {quantity} needs {name} (give it here or sweep it)", "query")
    return query


def _parse_window(raw, quantity, swept):
    if quantity != "windowed":
        if raw is not None:
            raise ConfigError("only the windowed quantity takes a window", "window")
        return None
    if raw is None:
        raise ConfigError("quantity windowed requires a window block", "window")
    _mapping(raw, "window", ("center", "t_w"))
    if "center" not in raw:
        raise ConfigError("missing key 'center'", "window")
    center = _number(raw["center"], "window.center")
    t_w = None
    if "t_w" in raw:
        if "t_w" in swept:
            raise ConfigError(f"also swept by axes[{swept['t_w']}]", "window.t_w")
        t_w = _number(raw["t_w"], "window.t_w")
        if t_w < 0:
            raise ConfigError(f"must be >= 0, got {t_w!r}", "window.t_w")
    elif "t_w" not in swept:
        raise ConfigError("window needs t_w (give it here or sweep it)", "window")
    return Window(center, t_w)


def _parse_output(raw):
    if raw is None:
        return None
    _mapping(raw, "output", ("path", "format"))
    path = raw.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("expected a string", "output.path")
    fmt = raw.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"expected one of {', '.join(FORMATS)}, got {fmt!r}", "output.format")
    return Output(path, fmt)


# --- running -----------------------------------------------------------------


@dataclass
class Dataset:
    header: dict
    columns: list
    rows: list

    def to_csv(self) -> str:
        lines = [f"# hompulse {self.header['version']}"]
        lines.append(f"# quantity: {self.header['quantity']}")
        lines.append(f"# scale: {self.header['scale']}")
        lines.append(f"# rows: {len(self.rows)}")
        lines.append("# config:")
        lines.extend(f"#   {line}" for line in self.header["config"].splitlines())
        lines.append(",".join(self.columns))
        lines.extend(",".join(repr(float(v)) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "header": {**self.header, "config": yaml.safe_load(self.header["config"])},
            "columns": self.columns,
            "rows": [[float(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=1) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ConfigError(f"unknown output format {fmt!r}; expected one of {', '.join(FORMATS)}", "format")


def grid_points(config: ScenarioConfig) -> list[tuple]:
    """Axis value tuples in row-major order (first axis outermost)."""
    return list(itertools.product(*(axis.values() for axis in config.axes)))


def evaluate_point(config: ScenarioConfig, point: tuple) -> float:
    values: dict[str, float] = dict(config.geometry)
    values.update(config.query)
    if config.window is not None:
        values["window_center"] = config.window.center
        if config.window.t_w is not None:
            values["t_w"] = config.window.t_w
    for axis, v in zip(config.axes, point):
        for name in axis.vars:
            values[name] = v
    try:
        splitter = BeamSplitter(*config.splitter) if config.splitter else BeamSplitter()
        geom = ExperimentGeometry(**{k: values[k] for k in GEOMETRY_FIELDS}, splitter=splitter)
        query = CoincidenceQuery(
            tau_c=values.get("tau_c"),
            tau_d=values.get("tau_d"),
            window_center=values.get("window_center"),
            window_halfwidth=values.get("t_w"),
        )
        result = evaluate(config.quantity, geom, query)
        if not (math.isfinite(result) and result >= 0):
            raise DomainError(f"{config.quantity} evaluated to {result!r}")
    except HomError as exc:
        exc.grid_point = {axis.label: v for axis, v in zip(config.axes, point)}
        raise
    return result


def _evaluate_chunk(config, points):
    return [evaluate_point(config, p) for p in points]


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def run_scenario(config: ScenarioConfig, jobs: int = 1) -> Dataset:
    """Evaluate ``config.quantity`` over the whole grid.

    Points are independent; with ``jobs > 1`` they are farmed out to worker
    processes in contiguous chunks and reassembled in grid order, so the
    output does not depend on the worker count.
    """
    points = grid_points(config)
    if jobs <= 1 or len(points) < 2:
        values = _evaluate_chunk(config, points)
    else:
        size = max(1, -(-len(points) // (4 * jobs)))
        chunks = [points[i : i + size] for i in range(0, len(points), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = [v for part in pool.map(_evaluate_chunk, [config] * len(chunks), chunks) for v in part]
    header = {
        "version": __version__,
        "name": config.name,
        "quantity": config.quantity,
        "scale": SCALE_NOTE,
        "config": serialize(config),
    }
    columns = [axis.label for axis in config.axes] + [config.quantity]
    rows = [tuple(p) + (v,) for p, v in zip(points, values)]
    return Dataset(header, columns, rows)


# --- bundled figure configs --------------------------------------------------


def figure_names() -> list[str]:
    folder = resources.files("hompulse").joinpath("figures")
    names = [p.name[: -len(".yaml")] for p in folder.iterdir() if p.name.endswith(".yaml")]
    return sorted(names, key=lambda n: (int(n[3:].split("_")[0]), n))


def figure_text(name: str) -> str:
    path = resources.files("hompulse").joinpath("figures", f"{name}.yaml")
    if not path.is_file():
        raise ConfigError(f"no bundled figure {name!r}; available: {', '.join(figure_names())}")
    return path.read_text(encoding="utf-8")


def load_config(source: str) -> ScenarioConfig:
    """Parse a config file, or a bundled figure config by name."""
    if os.path.exists(source):
        with open(source, "rb") as fh:
            return parse_config(fh.read())
    if source in figure_names():
        return parse_config(figure_text(source))
    raise ConfigError(f"no such file or bundled figure: {source!r}")
