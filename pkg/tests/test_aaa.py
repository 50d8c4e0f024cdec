"""Greedy barycentric fitting: selection, weight solves, exit contracts."""

import numpy as np
import pytest

from frddc.aaa import (
    aaa_fit,
    aaa_init,
    barycentric_to_realization,
    greedy_select,
    solve_weights,
)
from frddc.data import FrequencyDataset
from frddc.models import BarycentricModel


def dataset(omega, values):
    return FrequencyDataset(omega=np.asarray(omega, dtype=float),
                            values=np.asarray(values, dtype=complex))


def test_constant_data_exits_at_order_zero():
    data = dataset([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])
    result = aaa_fit(data)
    assert result.exit_reason == "tolerance"
    assert result.model.order == 0
    assert result.model(1.7j) == pytest.approx(4.0)
    assert result.history == ()


def test_init_is_mean_of_closed_samples():
    data = dataset([1.0, 2.0], [1.0, 3.0])
    state = aaa_init(data, tol=1e-10, max_order=10)
    assert state.constant == pytest.approx(2.0)
    assert state.ell == 0
    errors = np.abs(state.f - state.model()(state.z))
    assert errors.max() == pytest.approx(1.0)


def test_single_sample_init():
    data = dataset([1.0], [2.0 + 1.0j])
    state = aaa_init(data, tol=1e-10, max_order=10)
    # closure adds the conjugate; the mean keeps the real part
    assert state.constant == pytest.approx(2.0)


def test_greedy_promotes_conjugate_pair():
    data = dataset([1.0, 2.0, 3.0], [1.0, 5.0, 1.0])
    state = aaa_init(data, tol=1e-12, max_order=10)
    k = greedy_select(state)
    # worst point is omega = 2; both +2i and -2i become support
    assert state.z[k] == 2.0j
    assert state.ell == 2
    nodes = state.z[np.asarray(state.support)]
    assert nodes[0] == np.conj(nodes[1])
    assert nodes[0].imag > 0


def test_greedy_tie_takes_lowest_index():
    data = dataset([1.0, 2.0], [0.0, 2.0])  # both errors equal 1 after mean
    state = aaa_init(data, tol=1e-12, max_order=10)
    k = greedy_select(state)
    assert k == 0
    assert state.support == [0, 1]


def test_greedy_on_empty_active_set_raises():
    data = dataset([1.0], [1.0 + 1.0j])
    state = aaa_init(data, tol=1e-12, max_order=10)
    greedy_select(state)
    with pytest.raises(ValueError):
        greedy_select(state)


def test_solve_weights_zero_active_rhs_gives_zero_weights():
    # active values all zero -> minimum-norm solution is exactly zero
    data = dataset([1.0, 2.0, 3.0], [5.0, 0.0, 0.0])
    state = aaa_init(data, tol=1e-12, max_order=10)
    greedy_select(state)  # promotes the omega = 1 pair
    weights = solve_weights(state)
    np.testing.assert_array_equal(weights, np.zeros(2, dtype=complex))


def test_first_round_reproduces_degree_one_target():
    omega = np.logspace(-1, 1, 20)
    data = dataset(omega, 1.0 / (1j * omega + 1.0))
    state = aaa_init(data, tol=1e-10, max_order=10)
    greedy_select(state)
    solve_weights(state)
    model = state.model()
    np.testing.assert_allclose(model(state.z), state.f, atol=1e-12)
    assert state.certificates[-1] <= 1e-8


def test_fit_degree_one_exits_quickly_with_tolerance_contract():
    omega = np.logspace(-1, 1, 20)
    data = dataset(omega, 1.0 / (1j * omega + 1.0))
    result = aaa_fit(data, tol=1e-10)
    assert result.exit_reason == "tolerance"
    assert result.model.order <= 4  # at most two conjugate-pair rounds
    # exit-by-tolerance bounds the error over every closed point
    z = np.concatenate([1j * omega, -1j * omega])
    f = np.concatenate([data.values, np.conj(data.values)])
    assert np.max(np.abs(f - result.model(z))) <= 1e-10
    assert result.final_max_error <= 1e-10


def test_interpolation_at_support_is_exact():
    rng = np.random.default_rng(3)
    omega = np.logspace(-1, 1, 15)
    values = rng.normal(size=15) + 1j * rng.normal(size=15)
    result = aaa_fit(dataset(omega, values), tol=1e-3)
    model = result.model
    np.testing.assert_array_equal(model(model.nodes), model.values)


def test_certificates_hold_every_iteration():
    rng = np.random.default_rng(9)
    omega = np.logspace(-1, 1, 25)
    values = rng.normal(size=25) + 1j * rng.normal(size=25)
    result = aaa_fit(dataset(omega, values), tol=1e-6, max_order=12)
    assert result.certificate_max <= 1e-8


def test_order_cap_exit_and_overshoot_by_at_most_one():
    rng = np.random.default_rng(4)
    omega = np.logspace(-1, 1, 30)
    values = rng.normal(size=30) + 1j * rng.normal(size=30)
    result = aaa_fit(dataset(omega, values), tol=1e-14, max_order=5)
    assert result.exit_reason == "order_cap"
    assert result.model.order in (5, 6)  # pair promotion may pass an odd cap


def test_history_records_greedy_trace():
    omega = np.logspace(-1, 1, 20)
    data = dataset(omega, 1.0 / (1j * omega + 1.0) + 0.3 / (1j * omega + 2.0))
    result = aaa_fit(data, tol=1e-12)
    rows = result.history_rows()
    assert len(rows) >= 1
    ells = [r[0] for r in rows]
    assert ells == sorted(ells)
    assert all(r[2] >= 0 for r in rows)  # selected omega recorded as |Im z|


def test_realization_of_unit_example():
    model = BarycentricModel(nodes=[0.0], values=[1.0], weights=[1.0])
    real = barycentric_to_realization(model)
    np.testing.assert_allclose(real.A, [[-1.0]])
    np.testing.assert_allclose(real.B, [[1.0]])
    np.testing.assert_allclose(real.C, [[1.0]])
    s = 1j * np.logspace(-1, 1, 9)
    np.testing.assert_allclose(real(s), 1.0 / (s + 1.0), rtol=1e-12)


def test_realization_matches_barycentric_at_random_points():
    omega = np.logspace(-1, 1, 20)
    data = dataset(omega, 1.0 / (1j * omega + 1.0) + 0.3 / (1j * omega + 2.0))
    model = aaa_fit(data, tol=1e-11).model
    real = barycentric_to_realization(model)
    assert np.isrealobj(real.A) and real.order == model.order
    rng = np.random.default_rng(31)
    s = rng.normal(size=100) + 1j * rng.normal(size=100)
    np.testing.assert_allclose(real(s), model(s), rtol=1e-8)


def test_fit_rejects_bad_tolerance():
    data = dataset([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        aaa_fit(data, tol=-1.0)
    with pytest.raises(ValueError):
        aaa_fit(data, max_order=0)
