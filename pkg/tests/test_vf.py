"""Pole relocation fitting: sweeps, movement metric, convergence."""

import numpy as np
import pytest

from frddc.data import FrequencyDataset
from frddc.models import PoleResidueModel
from frddc.vecfit import (
    pole_movement,
    relocate_poles,
    vf_fit,
    vf_init_poles,
    vf_iteration,
)

TWO_POLE = PoleResidueModel(poles=[-1.0 + 2.0j, -1.0 - 2.0j],
                            residues=[0.5 - 0.25j, 0.5 + 0.25j])


def samples(model, omega):
    omega = np.asarray(omega, dtype=float)
    return FrequencyDataset(omega=omega, values=np.asarray(model(1j * omega)))


def test_init_poles_layout():
    poles = vf_init_poles(0.1, 10.0, 4)
    assert poles.size == 4
    np.testing.assert_allclose(poles[::2], np.conj(poles[1::2]))
    imag = poles[::2].imag
    np.testing.assert_allclose(imag, [0.1, 10.0])
    np.testing.assert_allclose(poles.real, -np.abs(poles.imag) / 100.0)


def test_init_poles_odd_order_appends_real_pole():
    poles = vf_init_poles(0.1, 10.0, 5)
    assert poles[-1] == pytest.approx(-1.0)  # geometric band center
    assert poles[-1].imag == 0


def test_init_poles_validation():
    with pytest.raises(ValueError):
        vf_init_poles(1.0, 0.1, 2)
    with pytest.raises(ValueError):
        vf_init_poles(0.1, 1.0, 0)


def test_iteration_at_exact_poles_is_a_fixed_point():
    omega = np.logspace(-1, 1, 12)
    data = samples(TWO_POLE, omega)
    z = np.concatenate([1j * omega, -1j * omega])
    f = np.concatenate([data.values, np.conj(data.values)])
    c, d0, d, info = vf_iteration(z, f, TWO_POLE.poles)
    assert np.linalg.norm(d) <= 1e-10
    np.testing.assert_allclose(c, TWO_POLE.residues, atol=1e-9)
    assert d0 == 0.0


def test_iteration_rejects_pole_on_sample():
    z = np.array([1j, -1j])
    f = np.array([1.0, 1.0])
    with pytest.raises(ValueError):
        vf_iteration(z, f, np.array([1j, -1j]))


def test_relocation_single_real_pole():
    # zeros of 1 + 0.5/(s+1) sit at -1.5
    new = relocate_poles(np.array([-1.0]), np.array([0.5]))
    np.testing.assert_allclose(new, [-1.5])


def test_relocation_flip_unstable():
    # d = -2 pushes the zero to +1; the flip reflects it back
    new = relocate_poles(np.array([-1.0]), np.array([-2.0]))
    np.testing.assert_allclose(new, [1.0])
    flipped = relocate_poles(np.array([-1.0]), np.array([-2.0]),
                             flip_unstable=True)
    np.testing.assert_allclose(flipped, [-1.0])


def test_relocation_keeps_conjugate_pairs():
    poles = np.array([-0.5 + 3.0j, -0.5 - 3.0j])
    d = np.array([0.1 + 0.2j, 0.1 - 0.2j])
    new = relocate_poles(poles, d)
    assert new[0] == np.conj(new[1])


def test_pole_movement_greedy_matching():
    old = np.array([0.0, 1.0])
    new = np.array([1.1, 0.05])
    assert pole_movement(old, new) == pytest.approx(0.1)
    assert pole_movement(old, old) == 0.0


def test_fit_recovers_two_pole_model():
    omega = np.logspace(-1, 1, 20)
    result = vf_fit(samples(TWO_POLE, omega), order=2)
    assert result.converged
    assert result.residual_max <= 1e-8
    got = sorted(result.model.poles, key=lambda p: p.imag)
    np.testing.assert_allclose(got, sorted(TWO_POLE.poles, key=lambda p: p.imag),
                               atol=1e-7)


def test_fit_from_exact_poles_converges_immediately():
    omega = np.logspace(-1, 1, 20)
    result = vf_fit(samples(TWO_POLE, omega), order=2,
                    init_poles=TWO_POLE.poles)
    assert result.converged
    assert result.n_iters == 1
    assert result.history[0][1] <= 1e-10  # first-sweep movement


def test_fit_direct_term_recovers_feedthrough():
    omega = np.logspace(-1, 1, 20)
    model = PoleResidueModel(poles=[-1.0], residues=[2.0], direct=1.0)
    proper = vf_fit(samples(model, omega), order=1, direct=True)
    assert proper.model.direct == pytest.approx(1.0, abs=1e-8)
    assert proper.residual_max <= 1e-8
    strictly = vf_fit(samples(model, omega), order=1, direct=False)
    assert strictly.residual_max > 1e-3


def test_fit_flip_keeps_left_half_plane():
    rng = np.random.default_rng(12)
    omega = np.logspace(-1, 1, 25)
    values = rng.normal(size=25) + 1j * rng.normal(size=25)
    data = FrequencyDataset(omega=omega, values=values)
    result = vf_fit(data, order=4, flip_unstable=True, max_iters=30)
    assert np.all(result.model.poles.real <= 0)


def test_fit_reports_non_convergence():
    rng = np.random.default_rng(8)
    omega = np.logspace(-1, 1, 25)
    values = rng.normal(size=25) + 1j * rng.normal(size=25)
    data = FrequencyDataset(omega=omega, values=values)
    result = vf_fit(data, order=4, max_iters=1)
    assert not result.converged
    assert result.n_iters == 1
    assert len(result.history) == 1


def test_fit_history_rows_are_one_based_iterations():
    omega = np.logspace(-1, 1, 20)
    result = vf_fit(samples(TWO_POLE, omega), order=2)
    rows = result.history_rows()
    assert [r[0] for r in rows] == list(range(1, len(rows) + 1))
    assert all(r[2] >= 0 for r in rows)


def test_fit_validation():
    omega = np.logspace(-1, 1, 10)
    data = samples(TWO_POLE, omega)
    with pytest.raises(ValueError):
        vf_fit(data, order=0)
    with pytest.raises(ValueError):
        vf_fit(data, order=2, max_iters=0)
    with pytest.raises(ValueError):
        vf_fit(data, order=3, init_poles=TWO_POLE.poles)
