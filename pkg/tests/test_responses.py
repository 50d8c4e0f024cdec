"""Frequency-domain step synthesis and Bode tabulation."""

import numpy as np
import pytest

from frddc.responses import (
    SynthesisGrid,
    bode_grid,
    dc_gain,
    grid_for_band,
    step_response,
)


def first_order(s):
    return 1.0 / (s + 1.0)


def crit_damped(s):
    return 1.0 / (s**2 + 2.0 * s + 1.0)


def delay(s):
    return np.exp(-s)


def test_grid_for_band_defaults():
    grid = grid_for_band(1e2)
    assert grid.omega_max == 1e4
    assert grid.n_points == 2**14
    nodes = grid.nodes()
    assert nodes.size == 2**14
    assert nodes[-1] == pytest.approx(1e4)


def test_synthesis_grid_validation():
    with pytest.raises(ValueError):
        SynthesisGrid(omega_max=-1.0)
    with pytest.raises(ValueError):
        SynthesisGrid(omega_max=1.0, n_points=4)


def test_dc_gain_plain_and_singular():
    assert dc_gain(first_order) == pytest.approx(1.0)
    # integrator-like loop: singular at s = 0, limit 1 from the right
    assert dc_gain(lambda s: 1.0 / (s + 1e-30) / (1.0 / (s + 1e-30) + 1.0)) \
        == pytest.approx(1.0, abs=1e-6)


def test_step_first_order_matches_analytic():
    t = np.linspace(0.0, 20.0, 401)
    y = step_response(first_order, t, grid_for_band(1e2))
    np.testing.assert_allclose(y, 1.0 - np.exp(-t), atol=2e-4)


def test_step_critically_damped_matches_analytic():
    t = np.linspace(0.0, 20.0, 401)
    y = step_response(crit_damped, t, grid_for_band(1e2))
    np.testing.assert_allclose(y, 1.0 - np.exp(-t) * (1.0 + t), atol=2e-4)


def test_step_is_causal_at_zero():
    y = step_response(first_order, 0.0, grid_for_band(1e2))
    assert abs(y[0]) < 1e-3


def test_step_rejects_negative_time():
    with pytest.raises(ValueError):
        step_response(first_order, [-1.0], grid_for_band(1e2))


def test_pure_delay_step_sanity():
    # unit transport lag: nothing before t = 1, everything after
    t = np.array([0.5, 1.5])
    y = step_response(delay, t, grid_for_band(1e2))
    assert abs(y[0]) < 0.05
    assert y[1] > 0.95


def test_pure_delay_bode():
    omega = np.logspace(-1, 1, 21)
    bode = bode_grid(delay, omega)
    np.testing.assert_allclose(bode.gain_db, 0.0, atol=1e-12)
    np.testing.assert_allclose(bode.phase_deg, -np.degrees(omega), atol=1e-9)


def test_bode_grid_values_and_unwrap():
    omega = np.logspace(-2, 2, 50)
    bode = bode_grid(crit_damped, omega)
    np.testing.assert_allclose(bode.values, crit_damped(1j * omega), rtol=1e-13)
    # second order: phase falls monotonically from 0 to -180 degrees
    assert bode.phase_deg[0] > -5.0
    assert bode.phase_deg[-1] < -175.0
    assert np.all(np.diff(bode.phase_deg) < 0)


def test_bode_grid_rejects_bad_grid():
    with pytest.raises(ValueError):
        bode_grid(first_order, [1.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        bode_grid(first_order, [-1.0, 1.0])
