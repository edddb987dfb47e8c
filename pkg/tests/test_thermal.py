from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddpce.features import BoundsError, bounds_arrays, sample_uniform
from ddpce.thermal import (
    ThermalConstants,
    heatsink_volume,
    junction_temperature,
    six_sigma_junction_temperature,
    synthetic_oracle,
    thermal_resistance_sa,
)

from oracles import coordinate_sweep, is_monotone, six_sigma_exact

LOWER, UPPER = bounds_arrays()


def test_constants_defaults_and_validation():
    c = ThermalConstants()
    assert (c.r_th_jc, c.t_j_limit) == (0.74, 175.0)
    with pytest.raises(ValueError):
        ThermalConstants(t_j_limit=0)


def test_resistance_examples():
    assert thermal_resistance_sa(45.0, 45.0, 140.0) == 0.0
    assert thermal_resistance_sa(64.7, 45, 140) == pytest.approx(0.14071428571428, abs=1e-12)
    assert thermal_resistance_sa(59.1, 45, 140) == pytest.approx(0.10071428571428, abs=1e-12)
    with pytest.raises(ValueError):
        thermal_resistance_sa(60, 45, 0)


def test_junction_examples():
    assert junction_temperature(64.7, 45, 140, ThermalConstants(r_th_jc=0.0)) == pytest.approx(64.7, abs=1e-12)
    assert junction_temperature(64.7, 45, 140) == pytest.approx(168.3, abs=0.05)
    assert junction_temperature(84.3, 45, 140) == pytest.approx(187.9, abs=0.05)


@pytest.mark.parametrize("mu,sigma,expected", [(60.5, 0.7, 168.3), (59.1, 1.2, 169.9), (51.9, 5.4, 187.9)])
def test_six_sigma_against_exact_arithmetic(mu, sigma, expected):
    exact = six_sigma_exact(mu, sigma, 45, 140, 0.74)
    assert round(exact, 1) == Fraction(str(expected))
    assert six_sigma_junction_temperature(mu, sigma, 45, 140) == pytest.approx(float(exact), abs=1e-12)


@given(st.floats(25, 200), st.floats(25, 45), st.floats(115, 140), st.floats(0.01, 2.0))
def test_junction_identity(ts, ta, p, rjc):
    c = ThermalConstants(r_th_jc=rjc)
    assert junction_temperature(ts, ta, p, c) - ts == pytest.approx(rjc * p, abs=1e-12 * max(1.0, ts + rjc * p))


def test_volume_examples():
    y = np.array([100.0, 4.0, 2.0, 30.0, 10.0, 10.0, 3.0, 35.0, 120.0])
    assert heatsink_volume(y) == pytest.approx(116000.0, rel=1e-15)
    y2 = y.copy()
    y2[0] = 200.0
    assert heatsink_volume(y2) == pytest.approx(2 * heatsink_volume(y), rel=1e-15)
    with pytest.raises(BoundsError):
        heatsink_volume(np.where(np.arange(9) == 0, 20.0, y))


def test_volume_minimum_at_lower_corner():
    sweep = heatsink_volume(sample_uniform(100_000, seed=21))
    corner = heatsink_volume(LOWER)
    assert corner > 0 and corner <= sweep.min()


@pytest.mark.parametrize("index", [0, 1, 2, 3, 4, 5])
def test_volume_monotone_sweeps(index):
    grid = np.linspace(LOWER[index], UPPER[index], 25)
    for base in sample_uniform(50, seed=index):
        v = coordinate_sweep(heatsink_volume, base, index, grid)
        assert np.all(v > 0) and is_monotone(v, increasing=True, strict=False)


@pytest.mark.parametrize("name,index", [("l", 0), ("h_f", 3), ("N_f", 5), ("v", 6)])
def test_oracle_decreasing_sweeps(name, index):
    grid = np.linspace(LOWER[index], UPPER[index], 30)
    for base in sample_uniform(200, seed=100 + index):
        t = coordinate_sweep(synthetic_oracle, base, index, grid)
        assert is_monotone(t, increasing=False, strict=True, tol=1e-9), name


def test_oracle_affine_in_power():
    grid = np.linspace(115, 140, 11)
    for base in sample_uniform(100, seed=3):
        t = coordinate_sweep(synthetic_oracle, base, 8, grid)
        assert is_monotone(t, increasing=True, strict=True)
        np.testing.assert_allclose(np.diff(t, 2), 0.0, atol=1e-10)


def test_oracle_range():
    y = sample_uniform(100_000, seed=13)
    t = synthetic_oracle(y)
    assert np.all(np.isfinite(t))
    assert np.all(t > y[:, 7]) and np.all(t < 200.0)


def test_oracle_deterministic_and_scalar():
    y = sample_uniform(5, seed=1)
    assert np.array_equal(synthetic_oracle(y), synthetic_oracle(y.copy()))
    assert isinstance(synthetic_oracle(y[0]), float)
