"""Node placements, radio parameters and random scenario generation.

Graph indexing is fixed here: UEs take indices ``0..U-1`` and UAVs take
``U..U+A-1``.  RISs are not graph nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0


@dataclass(frozen=True)
class RadioParams:
    """Propagation and threshold parameters. Powers in watts, lengths in metres.

    ``ris_reach_m`` is the UE-to-RIS distance limit; ``inf`` disables it.
    """

    carrier_freq_hz: float = 3e9
    lightspeed_m_s: float = 3e8
    pathloss_exponent: float = 4.0
    ue_power_w: float = 1.0
    uav_power_w: float = 5.0
    noise_w: float = 1e-16
    ref_pathloss: float = 1e-6
    ris_rows: int = 10
    ris_cols: int = 10
    row_spacing_m: float = 0.05
    col_spacing_m: float = 0.05
    thr_ue_uav_db: float = 85.0
    thr_uav_uav_db: float = 80.0
    thr_ris_db: float = 30.0
    ris_reach_m: float = math.inf
    epsilon: float = 1e-5

    def __post_init__(self) -> None:
        positive = (
            "carrier_freq_hz", "lightspeed_m_s", "pathloss_exponent", "ue_power_w",
            "uav_power_w", "noise_w", "ref_pathloss", "row_spacing_m",
            "col_spacing_m", "ris_reach_m", "epsilon",
        )
        for name in positive:
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        for name in ("ris_rows", "ris_cols"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        for name in ("thr_ue_uav_db", "thr_uav_uav_db", "thr_ris_db"):
            if math.isnan(getattr(self, name)):
                raise ValueError(f"{name} is NaN")

    @property
    def n_elements(self) -> int:
        return int(self.ris_rows) * int(self.ris_cols)

    @property
    def wavelength_m(self) -> float:
        return self.lightspeed_m_s / self.carrier_freq_hz


def _frozen(a, width: int) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1, width)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Scenario:
    ues: np.ndarray  # (U, 2)
    uavs: np.ndarray  # (A, 3)
    riss: np.ndarray  # (R, 3)
    params: RadioParams = field(default_factory=RadioParams)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "ues", _frozen(self.ues, 2))
        object.__setattr__(self, "uavs", _frozen(self.uavs, 3))
        object.__setattr__(self, "riss", _frozen(self.riss, 3))
        if len(self.ues) < 1 or len(self.uavs) < 1:
            raise ValueError("a scenario needs at least one UE and one UAV")
        for name in ("ues", "uavs", "riss"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite coordinate in {name}")

    @property
    def n_ues(self) -> int:
        return len(self.ues)

    @property
    def n_uavs(self) -> int:
        return len(self.uavs)

    @property
    def n_riss(self) -> int:
        return len(self.riss)

    @property
    def n_nodes(self) -> int:
        return self.n_ues + self.n_uavs

    def ue_point(self, u: int) -> np.ndarray:
        x, y = self.ues[u]
        return np.array([x, y, 0.0])

    def uav_point(self, a: int) -> np.ndarray:
        return np.array(self.uavs[a])

    def ris_point(self, r: int) -> np.ndarray:
        return np.array(self.riss[r])

    def uav_node(self, a: int) -> int:
        return self.n_ues + a

    def node_point(self, n: int) -> np.ndarray:
        if n < self.n_ues:
            return self.ue_point(n)
        return self.uav_point(n - self.n_ues)


def distance(p: Sequence[float], q: Sequence[float]) -> float:
    return float(math.dist(p, q))


def grid_ris_positions(count: int, area_m: tuple[float, float], altitude: float) -> np.ndarray:
    """Cell centres of a near-square grid covering the area, row-major, first ``count``."""
    if count == 0:
        return np.zeros((0, 3))
    nx = math.ceil(math.sqrt(count))
    ny = math.ceil(count / nx)
    w, h = area_m
    pts = [
        ((i + 0.5) * w / nx, (j + 0.5) * h / ny, altitude)
        for j in range(ny)
        for i in range(nx)
    ]
    return np.array(pts[:count])


def generate_random(
    seed: int,
    counts: tuple[int, int, int],
    area_m: tuple[float, float] = (150.0, 150.0),
    altitudes: tuple[float, float] = (50.0, 20.0),
    params: RadioParams | None = None,
    ris_xy: Sequence[Sequence[float]] | None = None,
) -> Scenario:
    """Draw UE and UAV positions uniformly over the area.

    UEs and UAVs use independent child streams of ``seed``, so a sweep over U
    keeps UAV placements fixed (and vice versa). RISs go on a grid unless
    ``ris_xy`` gives their horizontal positions.
    """
    n_ue, n_uav, n_ris = counts
    if n_ue < 1 or n_uav < 1 or n_ris < 0:
        raise ValueError(f"counts must be >= (1, 1, 0), got {counts}")
    w, h = area_m
    if not (w > 0 and h > 0):
        raise ValueError(f"area must have positive width and height, got {area_m}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    z_uav, z_ris = altitudes
    params = params or RadioParams()

    ue_ss, uav_ss = np.random.SeedSequence(seed).spawn(2)
    ue_rng = np.random.Generator(np.random.PCG64(ue_ss))
    uav_rng = np.random.Generator(np.random.PCG64(uav_ss))
    ues = ue_rng.uniform(0.0, 1.0, size=(n_ue, 2)) * (w, h)
    uav_xy = uav_rng.uniform(0.0, 1.0, size=(n_uav, 2)) * (w, h)
    uavs = np.column_stack([uav_xy, np.full(n_uav, float(z_uav))])

    if ris_xy is not None:
        xy = np.asarray(ris_xy, dtype=float).reshape(-1, 2)
        if len(xy) < n_ris:
            raise ValueError(f"{n_ris} RISs requested but only {len(xy)} positions given")
        riss = np.column_stack([xy[:n_ris], np.full(n_ris, float(z_ris))])
    else:
        riss = grid_ris_positions(n_ris, (w, h), float(z_ris))
    return Scenario(ues=ues, uavs=uavs, riss=riss, params=params, seed=seed)


def load_config(text: str):
    """Parse a configuration document; see :func:`risconnect.config.load_config`."""
    from .config import load_config as _load

    return _load(text)
