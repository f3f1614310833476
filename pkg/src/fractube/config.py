"""Run configuration: strict TOML parsing, canonical serialization,
and construction of the described self-similar system.

Unknown keys are rejected with their path; a parse -> serialize ->
parse round trip reproduces the configuration exactly.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

try:
    import tomllib as _toml
except ModuleNotFoundError:  # python < 3.11
    import tomli as _toml

from .errors import ConfigError
from .geom2d import SelfSimilarSystem, Similitude

_MAP_KEYS = {"ratio", "rotation_deg", "reflect", "translation"}
_WINDOW_KEYS = {"sigma_min", "t_max"}
_EVAL_KEYS = {"n_max", "eps_min", "eps_max", "grid_points", "raster_cells"}
_TOP_KEYS = {"label", "dimension", "maps", "window", "evaluation"}


@dataclass(frozen=True)
class MapSpec:
    ratio: float
    rotation_deg: float = 0.0
    reflect: bool = False
    translation: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class WindowSpec:
    sigma_min: float = -1.0
    t_max: Optional[float] = None


@dataclass(frozen=True)
class EvaluationSpec:
    n_max: int = 2000
    eps_min: Optional[float] = None
    eps_max: Optional[float] = None
    grid_points: int = 50
    raster_cells: int = 2000


@dataclass(frozen=True)
class SystemConfig:
    label: str
    dimension: int
    maps: tuple
    window: WindowSpec = WindowSpec()
    evaluation: EvaluationSpec = EvaluationSpec()

    def to_system(self) -> SelfSimilarSystem:
        sims = []
        for m in self.maps:
            sims.append(
                Similitude(
                    ratio=m.ratio,
                    rotation=math.radians(m.rotation_deg),
                    reflect=m.reflect,
                    translation=m.translation,
                    dim=self.dimension,
                )
            )
        return SelfSimilarSystem(maps=tuple(sims), dim=self.dimension)


def _reject_unknown(table: dict, allowed: set, path: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}{key}'")


def parse_config(text: str) -> SystemConfig:
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    _reject_unknown(data, _TOP_KEYS, "")
    try:
        label = data["label"]
        dimension = data["dimension"]
        raw_maps = data["maps"]
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc}") from exc
    if not isinstance(label, str):
        raise ConfigError("label must be a string")
    if dimension not in (1, 2):
        raise ConfigError("dimension must be 1 or 2")
    if not isinstance(raw_maps, list) or len(raw_maps) < 2:
        raise ConfigError("at least two [[maps]] tables are required")
    maps = []
    for i, m in enumerate(raw_maps):
        _reject_unknown(m, _MAP_KEYS, f"maps[{i}].")
        if "ratio" not in m or "translation" not in m:
            raise ConfigError(f"maps[{i}] needs 'ratio' and 'translation'")
        ratio = float(m["ratio"])
        if not 0.0 < ratio < 1.0:
            raise ConfigError(f"maps[{i}].ratio must lie in (0, 1)")
        t = m["translation"]
        if isinstance(t, (int, float)):
            t = (float(t),)
        else:
            t = tuple(float(v) for v in t)
        if len(t) != dimension:
            raise ConfigError(f"maps[{i}].translation needs {dimension} component(s)")
        rot = float(m.get("rotation_deg", 0.0))
        if dimension == 1 and rot != 0.0:
            raise ConfigError(f"maps[{i}].rotation_deg must be 0 in dimension 1")
        maps.append(
            MapSpec(ratio=ratio, rotation_deg=rot, reflect=bool(m.get("reflect", False)), translation=t)
        )
    if sum(m.ratio ** dimension for m in maps) >= 1.0:
        raise ConfigError(
            "sum of ratio^dimension must stay below 1; the attractor would fill its hull"
        )
    window = WindowSpec()
    if "window" in data:
        w = data["window"]
        _reject_unknown(w, _WINDOW_KEYS, "window.")
        window = WindowSpec(
            sigma_min=float(w.get("sigma_min", -1.0)),
            t_max=float(w["t_max"]) if "t_max" in w else None,
        )
    evaluation = EvaluationSpec()
    if "evaluation" in data:
        e = data["evaluation"]
        _reject_unknown(e, _EVAL_KEYS, "evaluation.")
        evaluation = EvaluationSpec(
            n_max=int(e.get("n_max", 2000)),
            eps_min=float(e["eps_min"]) if "eps_min" in e else None,
            eps_max=float(e["eps_max"]) if "eps_max" in e else None,
            grid_points=int(e.get("grid_points", 50)),
            raster_cells=int(e.get("raster_cells", 2000)),
        )
    if evaluation.n_max < 1 or evaluation.grid_points < 1 or evaluation.raster_cells < 16:
        raise ConfigError("evaluation overrides out of range")
    return SystemConfig(
        label=label, dimension=dimension, maps=tuple(maps), window=window, evaluation=evaluation
    )


def load_config(path) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def serialize_config(cfg: SystemConfig) -> str:
    """Canonical TOML emission; parse(serialize(cfg)) == cfg."""
    lines = [f"label = {_fmt(cfg.label)}", f"dimension = {_fmt(cfg.dimension)}", ""]
    w = cfg.window
    if w != WindowSpec():
        lines.append("[window]")
        lines.append(f"sigma_min = {_fmt(w.sigma_min)}")
        if w.t_max is not None:
            lines.append(f"t_max = {_fmt(w.t_max)}")
        lines.append("")
    e = cfg.evaluation
    if e != EvaluationSpec():
        lines.append("[evaluation]")
        lines.append(f"n_max = {_fmt(e.n_max)}")
        if e.eps_min is not None:
            lines.append(f"eps_min = {_fmt(e.eps_min)}")
        if e.eps_max is not None:
            lines.append(f"eps_max = {_fmt(e.eps_max)}")
        lines.append(f"grid_points = {_fmt(e.grid_points)}")
        lines.append(f"raster_cells = {_fmt(e.raster_cells)}")
        lines.append("")
    for m in cfg.maps:
        lines.append("[[maps]]")
        lines.append(f"ratio = {_fmt(m.ratio)}")
        if m.rotation_deg != 0.0:
            lines.append(f"rotation_deg = {_fmt(m.rotation_deg)}")
        if m.reflect:
            lines.append(f"reflect = {_fmt(m.reflect)}")
        t = m.translation
        lines.append(f"translation = {_fmt(t[0] if len(t) == 1 else t)}")
        lines.append("")
    return "\n".join(lines)
