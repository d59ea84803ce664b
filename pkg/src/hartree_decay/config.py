"""Scenario configuration: TOML files, per-scenario presets and strict validation.

A config is a TOML document.  Only ``scenario`` is required; every other
value falls back to the scenario's preset.  Unknown keys, wrong types and
invalid values are rejected before any computation, with the line number of
the offending key when it came from a file.

Grammar (all tables optional)::

    scenario = "free_decay"          # one of SCENARIOS
    seed = 0

    [grid]        dimension, points, half_length
    [potential]   family, depth, width, wavevector
    [interaction] family ("none", "gaussian", "mollifier_of_gaussian", "cubic"),
                  total_mass, width, mollifier_index, sign
    [initial]     family ("gaussian"), amplitude, width, chirp, center
    [time]        dt, t_end, stride
    [output]      directory, csv, snapshots
    [tolerances]  boundary_mass_max, fit_start, fit_end
    [ledger]      points, half_length, kp_points, kp_pairs, times, dt, corpus_size
    [bootstrap]   epsilon, c_coeff, samples
    [cubic_limit] indices
    [gronwall]    t0
"""

from __future__ import annotations

import copy
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "SCENARIOS",
    "ConfigError",
    "ScenarioConfig",
    "preset",
    "load_config",
    "parse_config",
    "apply_override",
]

SCENARIOS = (
    "free_decay",
    "linear_dispersive",
    "small_data_hartree",
    "small_data_cubic",
    "derivative_decay",
    "cubic_limit",
    "bootstrap_sweep",
    "inequality_suite",
    "large_data_gronwall",
)


class ConfigError(ValueError):
    pass


_NUM = (int, float)
_LIST = (list,)

SCHEMA: dict[str, dict[str, tuple]] = {
    "grid": {"dimension": (int,), "points": (int,), "half_length": _NUM},
    "potential": {"family": (str,), "depth": _NUM, "width": _NUM, "wavevector": _NUM},
    "interaction": {"family": (str,), "total_mass": _NUM, "width": _NUM,
                    "mollifier_index": (int,), "sign": (int,)},
    "initial": {"family": (str,), "amplitude": _NUM, "width": _NUM, "chirp": _NUM, "center": _LIST},
    "time": {"dt": _NUM, "t_end": _NUM, "stride": (int,)},
    "output": {"directory": (str,), "csv": (bool,), "snapshots": (bool,)},
    "tolerances": {"boundary_mass_max": _NUM, "fit_start": _NUM, "fit_end": _NUM},
    "ledger": {"points": (int,), "half_length": _NUM, "kp_points": (int,), "kp_pairs": (int,),
               "times": _LIST, "dt": _NUM, "corpus_size": (int,)},
    "bootstrap": {"epsilon": _NUM, "c_coeff": _NUM, "samples": (int,)},
    "cubic_limit": {"indices": _LIST},
    "gronwall": {"t0": _NUM},
}
TOP_LEVEL = {"scenario": (str,), "seed": (int,)}


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

_COMMON: dict[str, Any] = {
    "seed": 0,
    "potential": {"family": "zero", "depth": 0.0, "width": 2.0, "wavevector": 0.0},
    "interaction": {"family": "none", "total_mass": 0.0, "width": 1.0, "mollifier_index": 1, "sign": 1},
    "initial": {"family": "gaussian", "amplitude": 1.0, "width": 2.0, "chirp": 0.0},
    "output": {"directory": "out", "csv": True, "snapshots": False},
    "tolerances": {"boundary_mass_max": 1e-6, "fit_start": 2.0, "fit_end": 16.0},
}

# box sizes for which the boundary guard trips near t = 20 for a width-2 gaussian
_FREE_GRID = {1: (512, 77.0), 2: (256, 80.0), 3: (128, 72.0)}

_LEDGER = {
    1: {"points": 256, "half_length": 32.0, "kp_points": 256},
    2: {"points": 128, "half_length": 24.0, "kp_points": 64},
    3: {"points": 64, "half_length": 16.0, "kp_points": 32},
}


def _deep_update(base: dict, extra: Mapping) -> dict:
    for k, v in extra.items():
        if isinstance(v, Mapping) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = copy.deepcopy(v)
    return base


def _ledger_block(d: int) -> dict:
    return {**_LEDGER[d], "kp_pairs": 100 if d == 1 else 20, "times": [1.0, 1.25, 1.5],
            "dt": 0.02, "corpus_size": 6}


def preset(scenario: str, dimension: int | None = None, fast: bool = False) -> dict:
    """Default configuration for a scenario (optionally in another dimension)."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")
    if dimension is not None and dimension not in (1, 2, 3):
        raise ConfigError(f"grid.dimension must be 1, 2 or 3, got {dimension}")
    cfg = copy.deepcopy(_COMMON)
    cfg["scenario"] = scenario
    if scenario == "free_decay":
        d = dimension or 1
        n, L = _FREE_GRID[d]
        if fast and d == 3:
            n, L = 64, 36.0
        cfg["grid"] = {"dimension": d, "points": n, "half_length": L}
        cfg["time"] = {"dt": 0.25, "t_end": 20.0, "stride": 1}
        cfg["tolerances"]["fit_end"] = 16.0
    elif scenario == "linear_dispersive":
        d = dimension or 1
        cfg["grid"] = {"dimension": d, "points": _LEDGER[d]["points"], "half_length": _LEDGER[d]["half_length"]}
        cfg["potential"] = {"family": "gaussian_well", "depth": -0.5, "width": 2.0, "wavevector": 0.0}
        cfg["time"] = {"dt": 0.02, "t_end": 1.5, "stride": 1}
        cfg["ledger"] = _ledger_block(d)
    elif scenario in ("small_data_hartree", "derivative_decay", "small_data_cubic"):
        d = dimension or 3
        if d == 3:
            n, L = (64, 32.0) if fast else (212, 106.0)
        else:
            n, L = _FREE_GRID[d]
        cfg["grid"] = {"dimension": d, "points": n, "half_length": L}
        cfg["potential"] = {"family": "gaussian_well", "depth": -0.05, "width": 1.0, "wavevector": 0.0}
        if scenario == "small_data_cubic":
            cfg["interaction"] = {"family": "cubic", "total_mass": 1.0, "width": 1.0, "mollifier_index": 1, "sign": 1}
        else:
            cfg["interaction"] = {"family": "gaussian", "total_mass": 0.1, "width": 4.0, "mollifier_index": 1, "sign": 1}
        cfg["initial"] = {"family": "gaussian", "amplitude": 1e-4, "width": 1.6, "chirp": 1.0}
        cfg["time"] = {"dt": 0.1, "t_end": 8.0 if fast else 16.0, "stride": 2}
        cfg["ledger"] = _ledger_block(d)
    elif scenario == "cubic_limit":
        cfg["grid"] = {"dimension": 1, "points": 768, "half_length": 24.0}
        cfg["interaction"] = {"family": "cubic", "total_mass": 1.0, "width": 2.0, "mollifier_index": 1, "sign": 1}
        cfg["initial"] = {"family": "gaussian", "amplitude": 1.0, "width": 1.0, "chirp": 0.0}
        cfg["time"] = {"dt": 0.005, "t_end": 2.0, "stride": 10}
        cfg["tolerances"]["boundary_mass_max"] = 1e-6
        cfg["cubic_limit"] = {"indices": [1, 2, 4, 8]}
    elif scenario == "bootstrap_sweep":
        cfg["grid"] = {"dimension": 1, "points": 8, "half_length": 1.0}
        cfg["bootstrap"] = {"epsilon": 0.1, "c_coeff": 7.0, "samples": 1000}
    elif scenario == "inequality_suite":
        d = dimension or 1
        cfg["grid"] = {"dimension": d, "points": _LEDGER[d]["kp_points"], "half_length": _LEDGER[d]["half_length"]}
        cfg["potential"] = {"family": "gaussian_well", "depth": -0.5, "width": 2.0, "wavevector": 0.0}
        cfg["ledger"] = _ledger_block(d)
        cfg["ledger"]["kp_pairs"] = 100
    elif scenario == "large_data_gronwall":
        d = 3
        cfg["grid"] = {"dimension": d, "points": 96, "half_length": 34.0}
        cfg["interaction"] = {"family": "gaussian", "total_mass": 1.0, "width": 3.0, "mollifier_index": 1, "sign": 1}
        cfg["initial"] = {"family": "gaussian", "amplitude": 1.0, "width": 2.0, "chirp": 0.0}
        cfg["time"] = {"dt": 0.1, "t_end": 8.0, "stride": 2}
        cfg["ledger"] = _ledger_block(d)
        cfg["gronwall"] = {"t0": 2.0}
    return cfg


# ---------------------------------------------------------------------------
# parsing and validation
# ---------------------------------------------------------------------------


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Map (table, key) to the 1-based line where the key is assigned."""
    out: dict[tuple[str, str], int] = {}
    table = ""
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.\-]+)\s*\]", s)
        if m:
            table = m.group(1)
            out.setdefault((table, ""), i)
            continue
        m = re.match(r"^([A-Za-z0-9_\-]+)\s*=", s)
        if m:
            out.setdefault((table, m.group(1)), i)
    return out


def _where(lines: Mapping[tuple[str, str], int] | None, table: str, key: str) -> str:
    if not lines:
        return ""
    n = lines.get((table, key))
    return f" (line {n})" if n else ""


def _check_type(value: Any, types: tuple, name: str, where: str) -> None:
    if isinstance(value, bool) and bool not in types:
        raise ConfigError(f"{name}{where}: expected {'/'.join(t.__name__ for t in types)}, got bool")
    if not isinstance(value, types):
        raise ConfigError(f"{name}{where}: expected {'/'.join(t.__name__ for t in types)}, "
                          f"got {type(value).__name__}")


def validate_raw(raw: Mapping[str, Any], lines: Mapping[tuple[str, str], int] | None = None) -> None:
    """Reject unknown tables/keys and wrongly typed values."""
    for key, value in raw.items():
        if key in TOP_LEVEL:
            _check_type(value, TOP_LEVEL[key], key, _where(lines, "", key))
        elif key in SCHEMA:
            if not isinstance(value, Mapping):
                raise ConfigError(f"{key}{_where(lines, '', key)}: expected a table")
            allowed = SCHEMA[key]
            for sub, v in value.items():
                if sub not in allowed:
                    raise ConfigError(f"unknown key {key}.{sub}{_where(lines, key, sub)}; "
                                      f"allowed: {', '.join(sorted(allowed))}")
                _check_type(v, allowed[sub], f"{key}.{sub}", _where(lines, key, sub))
        else:
            raise ConfigError(f"unknown key {key!r}{_where(lines, key, '') or _where(lines, '', key)}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved (preset + file + overrides) and validated configuration."""

    data: Mapping[str, Any]
    source: str = "<preset>"

    @property
    def scenario(self) -> str:
        return self.data["scenario"]

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    def section(self, name: str) -> dict:
        return dict(self.data.get(name, {}))

    def get(self, dotted: str, default: Any = None) -> Any:
        cur: Any = self.data
        for part in dotted.split("."):
            if not isinstance(cur, Mapping) or part not in cur:
                return default
            cur = cur[part]
        return cur

    def to_dict(self) -> dict:
        return copy.deepcopy(dict(self.data))


def _semantic_checks(cfg: Mapping[str, Any]) -> None:
    g = cfg.get("grid", {})
    d, n, L = g.get("dimension"), g.get("points"), g.get("half_length")
    if d not in (1, 2, 3):
        raise ConfigError(f"grid.dimension must be 1, 2 or 3, got {d}")
    if not isinstance(n, int) or n < 8 or n % 2:
        raise ConfigError(f"grid.points must be an even integer >= 8, got {n}")
    if not L > 0:
        raise ConfigError(f"grid.half_length must be positive, got {L}")
    fam = cfg["potential"]["family"]
    if fam not in ("zero", "gaussian_well", "smooth_lattice"):
        raise ConfigError(f"potential.family {fam!r} is not one of zero, gaussian_well, smooth_lattice")
    inter = cfg["interaction"]
    if inter["family"] not in ("none", "gaussian", "mollifier_of_gaussian", "cubic"):
        raise ConfigError(f"interaction.family {inter['family']!r} is not recognised")
    if inter["sign"] not in (1, -1):
        raise ConfigError("interaction.sign must be +1 or -1")
    if cfg["initial"]["family"] != "gaussian":
        raise ConfigError("initial.family must be 'gaussian'")
    if not cfg["initial"]["width"] > 0:
        raise ConfigError("initial.width must be positive")
    t = cfg.get("time")
    if t is not None:
        if not t["dt"] > 0 or not t["t_end"] > 0:
            raise ConfigError("time.dt and time.t_end must be positive")
        ratio = t["t_end"] / t["dt"]
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError("time.t_end must be an integer multiple of time.dt")
        if t["stride"] < 1:
            raise ConfigError("time.stride must be >= 1")
    tol = cfg["tolerances"]
    if not tol["boundary_mass_max"] > 0:
        raise ConfigError("tolerances.boundary_mass_max must be positive")
    if not tol["fit_end"] > tol["fit_start"]:
        raise ConfigError("tolerances.fit_end must exceed fit_start")
    cl = cfg.get("cubic_limit")
    if cl is not None:
        idx = cl["indices"]
        if not idx or any(not isinstance(i, int) or isinstance(i, bool) or i < 1 for i in idx):
            raise ConfigError("cubic_limit.indices must be a non-empty list of positive integers")
    b = cfg.get("bootstrap")
    if b is not None and not (b["epsilon"] > 0 and b["c_coeff"] > 0):
        raise ConfigError("bootstrap.epsilon and bootstrap.c_coeff must be positive")


def parse_value(text: str) -> Any:
    """A TOML scalar/array literal, or the bare text as a string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply ``table.key=value`` (or ``key=value`` at top level) in place."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    value = parse_value(text.strip())
    if len(parts) == 1:
        validate_raw({parts[0]: value})
        cfg[parts[0]] = value
    elif len(parts) == 2:
        validate_raw({parts[0]: {parts[1]: value}})
        cfg.setdefault(parts[0], {})[parts[1]] = value
    else:
        raise ConfigError(f"override key {key!r} is nested too deeply")


def parse_config(text: str, overrides: list[str] | None = None, source: str = "<string>",
                 scenario: str | None = None, dimension: int | None = None,
                 fast: bool = False) -> ScenarioConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _key_lines(text)
    validate_raw(raw, lines)
    name = scenario or raw.get("scenario")
    if name is None:
        raise ConfigError(f"{source}: missing required key 'scenario'")
    if name not in SCENARIOS:
        raise ConfigError(f"{source}{_where(lines, '', 'scenario')}: unknown scenario {name!r}")
    cfg = _deep_update(preset(name, dimension or raw.get("grid", {}).get("dimension"), fast), raw)
    cfg["scenario"] = name
    for ov in overrides or []:
        apply_override(cfg, ov)
    _semantic_checks(cfg)
    return ScenarioConfig(cfg, source)


def load_config(path: str | Path, overrides: list[str] | None = None, **kw: Any) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, overrides, source=str(p), **kw)


def from_preset(scenario: str, overrides: list[str] | None = None, dimension: int | None = None,
                fast: bool = False) -> ScenarioConfig:
    cfg = preset(scenario, dimension, fast)
    for ov in overrides or []:
        apply_override(cfg, ov)
    _semantic_checks(cfg)
    return ScenarioConfig(cfg)
