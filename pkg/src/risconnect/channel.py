"""Large-scale propagation, RIS array responses and coherent phase alignment."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import RadioParams

TWO_PI = 2.0 * math.pi


class DegenerateGeometryError(ValueError):
    """Raised when two endpoints share a horizontal position."""


def snr_ue_uav(d_ua: float, params: RadioParams) -> float:
    """Linear UE-to-UAV SNR, ``d**-alpha * p / N0``."""
    if not d_ua > 0:
        raise ValueError(f"UE-UAV distance must be positive, got {d_ua}")
    return d_ua ** (-params.pathloss_exponent) * params.ue_power_w / params.noise_w


def uav_pathloss_db(d_aa: float, params: RadioParams) -> float:
    return 20.0 * math.log10(4.0 * math.pi * params.carrier_freq_hz * d_aa / params.lightspeed_m_s)


def snr_uav_uav(d_aa: float, params: RadioParams) -> float:
    """UAV-to-UAV SNR in dB under free-space path loss."""
    if not d_aa > 0:
        raise ValueError(f"UAV-UAV distance must be positive, got {d_aa}")
    return (
        10.0 * math.log10(params.uav_power_w)
        - uav_pathloss_db(d_aa, params)
        - 10.0 * math.log10(params.noise_w)
    )


@dataclass(frozen=True)
class ArrayResponse:
    entries: np.ndarray  # length M, row-major over (m_b, m_c)
    angles: tuple[float, float, float]  # (phi, varphi, psi)


@dataclass(frozen=True)
class PhaseConfig:
    thetas: np.ndarray
    ris_index: int = -1
    ue_index: int = -1
    uav_index: int = -1


def _angles(dy: float, dx: float, dz: float, dist: float) -> tuple[float, float, float]:
    rho = math.hypot(dx, dy)
    if rho == 0.0:
        raise DegenerateGeometryError("zero horizontal separation; arrival angles undefined")
    return dy / rho, dx / rho, dz / dist


def angles_ue_ris(ue, ris) -> tuple[float, float, float]:
    d = math.dist(ue, ris)
    return _angles(ue[1] - ris[1], ris[0] - ue[0], ue[2] - ris[2], d)


def angles_ris_uav(ris, uav) -> tuple[float, float, float]:
    d = math.dist(ris, uav)
    return _angles(ris[1] - uav[1], ris[0] - uav[0], ris[2] - uav[2], d)


def _phase_slopes(angles, params: RadioParams) -> tuple[float, float]:
    """Per-index phase increments (radians) along rows and columns."""
    phi, varphi, psi = angles
    k = TWO_PI / params.wavelength_m
    return k * params.row_spacing_m * phi * psi, k * params.col_spacing_m * varphi * psi


def _response(angles, params: RadioParams) -> ArrayResponse:
    row_step, col_step = _phase_slopes(angles, params)
    row = np.exp(-1j * row_step * np.arange(params.ris_rows))
    col = np.exp(-1j * col_step * np.arange(params.ris_cols))
    return ArrayResponse(entries=np.kron(row, col), angles=angles)


def array_response_ue_ris(ue, ris, params: RadioParams) -> ArrayResponse:
    return _response(angles_ue_ris(ue, ris), params)


def array_response_ris_uav(ris, uav, params: RadioParams) -> ArrayResponse:
    return _response(angles_ris_uav(ris, uav), params)


def channel_ue_ris(ue, ris, params: RadioParams) -> np.ndarray:
    d = math.dist(ue, ris)
    if not d > 0:
        raise ValueError("UE and RIS coincide")
    return math.sqrt(params.ref_pathloss / d**2) * array_response_ue_ris(ue, ris, params).entries


def channel_ris_uav(ris, uav, params: RadioParams) -> np.ndarray:
    d = math.dist(ris, uav)
    if not d > 0:
        raise ValueError("RIS and UAV coincide")
    return math.sqrt(params.ref_pathloss / d**2) * array_response_ris_uav(ris, uav, params).entries


def cascaded_channel(h_ra: np.ndarray, theta, h_ur: np.ndarray) -> complex:
    """``h_ra^H diag(exp(j theta)) h_ur``; ``theta`` may be a PhaseConfig or an array."""
    thetas = theta.thetas if isinstance(theta, PhaseConfig) else np.asarray(theta, dtype=float)
    h_ra = np.asarray(h_ra)
    h_ur = np.asarray(h_ur)
    if not (h_ra.shape == h_ur.shape == thetas.shape) or h_ra.ndim != 1:
        raise ValueError(
            f"length mismatch: h_ra {h_ra.shape}, theta {thetas.shape}, h_ur {h_ur.shape}"
        )
    return complex(np.vdot(h_ra, np.exp(1j * thetas) * h_ur))


def snr_reflected(h_cascaded: complex, params: RadioParams) -> float:
    """Linear SNR of a reflected link; ``|h|^2`` for the scalar cascade."""
    return params.ue_power_w * abs(h_cascaded) ** 2 / params.noise_w


def wrap_phase(theta: np.ndarray) -> np.ndarray:
    out = np.mod(theta, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    out[out >= TWO_PI] = 0.0
    return out


def optimal_phases(ue, ris, uav, params: RadioParams, *, ue_index: int = -1,
                   ris_index: int = -1, uav_index: int = -1) -> PhaseConfig:
    """Phase shifts that co-phase every element of the cascaded sum.

    Element (m_b, m_c) gets the incoming-hop phase progression minus the
    outgoing-hop one, both at wavenumber 2*pi/lambda.
    """
    ur_row, ur_col = _phase_slopes(angles_ue_ris(ue, ris), params)
    ra_row, ra_col = _phase_slopes(angles_ris_uav(ris, uav), params)
    mb = np.arange(params.ris_rows)[:, None]
    mc = np.arange(params.ris_cols)[None, :]
    theta = (ur_row - ra_row) * mb + (ur_col - ra_col) * mc
    return PhaseConfig(
        thetas=wrap_phase(theta.ravel()),
        ris_index=ris_index,
        ue_index=ue_index,
        uav_index=uav_index,
    )


def coherent_gain(d_ur: float, d_ra: float, params: RadioParams) -> float:
    """``|h|`` of a perfectly aligned reflection: ``M * beta0 / (d_ur * d_ra)``."""
    return params.n_elements * params.ref_pathloss / (d_ur * d_ra)
