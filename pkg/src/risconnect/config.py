"""Flat ``key = value`` configuration documents (TOML syntax).

dB/dBm quantities are converted to linear units here; nothing downstream sees
a dB power.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Any

import tomli

from .scenario import RadioParams, Scenario, dbm_to_watts, generate_random

METHODS = ("original", "random", "relax", "greedy", "exhaustive", "bounds")
SWEEPS = {
    "U": "ue_count",
    "A": "uav_count",
    "R": "ris_count",
    "thr_ris_db": "thr_ris_db",
}

_FLOAT_KEYS = {
    "area_w_m", "area_h_m", "uav_alt_m", "ris_alt_m", "carrier_hz", "alpha",
    "ue_power_w", "uav_power_w", "noise_dbm", "beta0", "d_b_m", "d_c_m",
    "thr_ue_uav_db", "thr_uav_uav_db", "thr_ris_db", "ris_reach_m", "epsilon",
}
_INT_KEYS = {
    "ue_count", "uav_count", "ris_count", "seed", "iterations", "m_rows", "m_cols",
    "exhaustive_guard", "relax_iters",
}
_BOOL_KEYS = {"weighted_base", "strict_coverage", "allow_redundant", "timing"}
_OTHER_KEYS = {"methods", "sweep", "sweep_values", "ris_xy"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _BOOL_KEYS | _OTHER_KEYS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    ue_count: int = 15
    uav_count: int = 10
    ris_count: int = 3
    area_m: tuple[float, float] = (150.0, 150.0)
    altitudes: tuple[float, float] = (50.0, 20.0)
    params: RadioParams = field(default_factory=RadioParams)
    seed: int = 0
    ris_xy: tuple[tuple[float, float], ...] | None = None
    weighted_base: bool = False
    strict_coverage: bool = False
    allow_redundant: bool = False

    def build(self, seed: int | None = None) -> Scenario:
        return generate_random(
            self.seed if seed is None else seed,
            (self.ue_count, self.uav_count, self.ris_count),
            self.area_m,
            self.altitudes,
            self.params,
            self.ris_xy,
        )


@dataclass(frozen=True)
class ExperimentPlan:
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    sweep: str | None = None
    values: tuple[float, ...] = ()
    iterations: int = 50
    methods: tuple[str, ...] = ("original", "random", "relax", "greedy", "bounds")
    exhaustive_guard: int = 200_000
    relax_iters: int = 300
    timing: bool = False

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.sweep is not None and self.sweep not in SWEEPS:
            raise ConfigError(f"unknown sweep variable {self.sweep!r}; choose from {sorted(SWEEPS)}")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")

    def points(self) -> list[tuple[float | None, ScenarioConfig]]:
        if self.sweep is None:
            return [(None, self.base)]
        return [(v, self.config_at(v)) for v in self.values]

    def config_at(self, value: float) -> ScenarioConfig:
        key = SWEEPS[self.sweep]
        if key == "thr_ris_db":
            return replace(self.base, params=replace(self.base.params, thr_ris_db=float(value)))
        if int(value) != value:
            raise ConfigError(f"sweep over {self.sweep} needs integer values, got {value}")
        return replace(self.base, **{key: int(value)})


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return i
    return None


def _bad(text: str, key: str, msg: str) -> ConfigError:
    line = _line_of(text, key)
    where = f"line {line}, " if line is not None else ""
    return ConfigError(f"{where}field {key!r}: {msg}")


def _number(text: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _bad(text, key, f"expected a number, got {value!r}")
    return float(value)


def _integer(text: str, key: str, value: Any) -> int:
    x = _number(text, key, value)
    if x != int(x):
        raise _bad(text, key, f"expected an integer, got {value!r}")
    return int(x)


def load_config(text: str) -> tuple[ScenarioConfig, ExperimentPlan]:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None

    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")

    vals: dict[str, Any] = {}
    for key, value in doc.items():
        if key in _FLOAT_KEYS:
            vals[key] = _number(text, key, value)
        elif key in _INT_KEYS:
            vals[key] = _integer(text, key, value)
        elif key in _BOOL_KEYS:
            if not isinstance(value, bool):
                raise _bad(text, key, f"expected true/false, got {value!r}")
            vals[key] = value
        else:
            vals[key] = value

    for key in ("ue_count", "uav_count"):
        if key in vals and vals[key] < 1:
            raise _bad(text, key, "must be >= 1")
    for key in ("ris_count", "seed"):
        if key in vals and vals[key] < 0:
            raise _bad(text, key, "must be >= 0")

    area = (vals.get("area_w_m", 150.0), vals.get("area_h_m", 150.0))
    if not (area[0] > 0 and area[1] > 0):
        raise ConfigError("area_w_m and area_h_m must be positive")

    param_map = {
        "carrier_hz": "carrier_freq_hz", "alpha": "pathloss_exponent",
        "ue_power_w": "ue_power_w", "uav_power_w": "uav_power_w", "beta0": "ref_pathloss",
        "m_rows": "ris_rows", "m_cols": "ris_cols", "d_b_m": "row_spacing_m",
        "d_c_m": "col_spacing_m", "thr_ue_uav_db": "thr_ue_uav_db",
        "thr_uav_uav_db": "thr_uav_uav_db", "thr_ris_db": "thr_ris_db",
        "ris_reach_m": "ris_reach_m", "epsilon": "epsilon",
    }
    pkw: dict[str, Any] = {param_map[k]: v for k, v in vals.items() if k in param_map}
    if "noise_dbm" in vals:
        pkw["noise_w"] = dbm_to_watts(vals["noise_dbm"])
    # D_0 is not given numerically; the area diagonal makes it non-binding.
    pkw.setdefault("ris_reach_m", math.hypot(*area))
    try:
        params = RadioParams(**pkw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    ris_xy = None
    if "ris_xy" in vals:
        try:
            ris_xy = tuple((float(x), float(y)) for x, y in vals["ris_xy"])
        except (TypeError, ValueError):
            raise _bad(text, "ris_xy", "expected a list of [x, y] pairs") from None

    scen = ScenarioConfig(
        ue_count=vals.get("ue_count", 15),
        uav_count=vals.get("uav_count", 10),
        ris_count=vals.get("ris_count", 3),
        area_m=area,
        altitudes=(vals.get("uav_alt_m", 50.0), vals.get("ris_alt_m", 20.0)),
        params=params,
        seed=vals.get("seed", 0),
        ris_xy=ris_xy,
        weighted_base=vals.get("weighted_base", False),
        strict_coverage=vals.get("strict_coverage", False),
        allow_redundant=vals.get("allow_redundant", False),
    )

    plan_kw: dict[str, Any] = {}
    if "methods" in vals:
        m = vals["methods"]
        if isinstance(m, str):
            m = [s.strip() for s in m.split(",") if s.strip()]
        if not isinstance(m, list) or not all(isinstance(s, str) for s in m):
            raise _bad(text, "methods", "expected a comma list of method names")
        plan_kw["methods"] = tuple(m)
    if "sweep" in vals:
        if not isinstance(vals["sweep"], str):
            raise _bad(text, "sweep", "expected a string")
        plan_kw["sweep"] = vals["sweep"]
        sv = vals.get("sweep_values")
        if not isinstance(sv, list) or not sv:
            raise _bad(text, "sweep_values", "a sweep needs a non-empty list of values")
        plan_kw["values"] = tuple(_number(text, "sweep_values", v) for v in sv)
    elif "sweep_values" in vals:
        raise _bad(text, "sweep_values", "given without 'sweep'")
    for key in ("iterations", "exhaustive_guard", "relax_iters", "timing"):
        if key in vals:
            plan_kw[key] = vals[key]
    plan = ExperimentPlan(base=scen, **plan_kw)
    if plan.sweep == "R" and ris_xy is not None and max(plan.values) > len(ris_xy):
        raise ConfigError("ris_xy has fewer positions than the largest swept R")
    return scen, plan
