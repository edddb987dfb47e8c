"""Steady-state thermal relations, heat-sink volume and a synthetic oracle.

The synthetic oracle stands in for a CFD model of the air-cooled heat
sink. It is a smooth closed-form fin-array model and makes no claim to
match any particular simulation tool; it only has to be deterministic,
physically plausible and monotone in the obvious directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import DEFAULT_SPECS, check_bounds

ORACLE_VERSION = 1

# Oracle constants (version 1)
H_COEFF = 80.0        # W/(m^2 K) at 1 m/s; h = H_COEFF * v**0.8
H_EXPONENT = 0.8
K_ALUMINIUM = 200.0   # W/(m K)
R_CONTACT = 5e-5      # K m^2 / W, interface resistance per unit footprint


@dataclass(frozen=True)
class ThermalConstants:
    r_th_jc: float = 0.74     # K/W, junction-to-case
    t_j_limit: float = 175.0  # degC

    def __post_init__(self):
        if not self.r_th_jc >= 0:
            raise ValueError("r_th_jc must be non-negative")
        if not self.t_j_limit > 0:
            raise ValueError("t_j_limit must be positive")


def _check_power(P):
    if np.any(np.asarray(P) <= 0):
        raise ValueError("power loss P must be positive")


def thermal_resistance_sa(T_s, T_a, P):
    """Heat-sink-to-ambient thermal resistance (K/W)."""
    _check_power(P)
    return (np.asarray(T_s) - np.asarray(T_a)) / np.asarray(P)


def junction_temperature(T_s, T_a, P, constants: ThermalConstants = ThermalConstants()):
    """Worst-case junction temperature ``T_a + (R_jc + R_sa) P``."""
    r_sa = thermal_resistance_sa(T_s, T_a, P)
    out = np.asarray(T_a) + (constants.r_th_jc + r_sa) * np.asarray(P)
    return float(out) if np.ndim(out) == 0 else out


def six_sigma_junction_temperature(mu_ts, sigma_ts, T_a, P, constants: ThermalConstants = ThermalConstants()):
    return junction_temperature(mu_ts + 6.0 * sigma_ts, T_a, P, constants)


def base_width(points):
    """Overall fin-array width ``N_f w_f + (N_f - 1) g_f`` (mm)."""
    y = np.asarray(points, dtype=float)
    g, w, n = y[..., 1], y[..., 2], y[..., 5]
    return n * w + (n - 1.0) * g


def heatsink_volume(points):
    """Material volume (mm^3): full-width base slab plus the fins."""
    y = check_bounds(points, DEFAULT_SPECS)
    l, w, hf, hb, n = y[..., 0], y[..., 2], y[..., 3], y[..., 4], y[..., 5]
    out = l * (base_width(y) * hb + n * w * hf)
    return float(out) if np.ndim(out) == 0 else out


def synthetic_oracle(points):
    """Heat-sink temperature T_s (degC) of the analytic fin-array model."""
    y = check_bounds(points, DEFAULT_SPECS)
    l, g, w, hf, hb = (y[..., i] * 1e-3 for i in range(5))
    n, v, t_a, p = y[..., 5], y[..., 6], y[..., 7], y[..., 8]
    width = base_width(y) * 1e-3
    h = H_COEFF * v ** H_EXPONENT
    m = np.sqrt(2.0 * h / (K_ALUMINIUM * w))
    eta = np.tanh(m * hf) / (m * hf)
    area = l * (n * (w + 2.0 * eta * hf) + (n - 1.0) * g)
    r_base = hb / (K_ALUMINIUM * l * width) + R_CONTACT / (l * width)
    r_sink = 1.0 / (h * area) + r_base
    out = t_a + p * r_sink
    return float(out) if np.ndim(out) == 0 else out
