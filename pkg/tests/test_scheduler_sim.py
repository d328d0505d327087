import numpy as np
import pytest

from rbflab.core_random import RngStream
from rbflab.network_model import NetworkConfig
from rbflab.receivers import ReceiverKind, SinrTable
from rbflab.scheduler_sim import (
    UserScaling,
    dpc_upper_bound,
    estimate_sum_rate,
    schedule,
    scheduled_sinr_samples,
    simulate_rates,
    sweep_beams,
    users_for_snr,
)
from rbflab.scheduler_sim import _estimate_from_trials


def single_cell_config(users=6, beams=2, num_tx=4, num_rx=2, power=16.0, noise=1.0):
    return NetworkConfig(
        num_tx_antennas=num_tx,
        num_rx_antennas=num_rx,
        users=(users,),
        beams=(beams,),
        cross_gain=np.array([[1.0]]),
        total_power=power,
        noise_power=noise,
    )


def two_cell_config(users=(8, 6), beams=(2, 2)):
    return NetworkConfig(
        num_tx_antennas=4,
        num_rx_antennas=2,
        users=users,
        beams=beams,
        cross_gain=np.array([[1.0, 0.4], [0.7, 1.0]]),
        total_power=12.0,
        noise_power=1.0,
    )


def test_schedule_picks_columnwise_argmax():
    g = RngStream(5).generator()
    values = g.exponential(size=(50, 4))
    table = SinrTable(cell=3, kind=ReceiverKind.MMSE, values=values)
    result = schedule([table])
    assert result.cells == (3,)
    picks = np.argmax(values, axis=0)
    for m, (user, sinr) in enumerate(result.selections[0]):
        assert user == picks[m]
        assert sinr == values[picks[m], m]
    expected_rate = float(np.sum(np.log2(1.0 + values[picks, np.arange(4)])))
    assert result.rates[0] == pytest.approx(expected_rate, rel=0, abs=0)
    assert result.total_rate == result.rates[0]


def test_schedule_breaks_ties_toward_lowest_index():
    values = np.array([[2.0, 1.0], [2.0, 3.0], [0.5, 3.0]])
    result = schedule([SinrTable(cell=0, kind=ReceiverKind.MF, values=values)])
    assert result.selections[0][0][0] == 0
    assert result.selections[0][1][0] == 1


def test_schedule_rejects_empty_input_and_empty_tables():
    with pytest.raises(ValueError):
        schedule([])
    empty = SinrTable(cell=0, kind=ReceiverKind.MF, values=np.empty((0, 2)))
    with pytest.raises(ValueError, match="empty"):
        schedule([empty])


def test_schedule_rate_is_monotone_in_user_pool():
    g = RngStream(12).generator()
    values = g.exponential(size=(40, 3))
    rates = []
    for k in range(1, 41):
        table = SinrTable(cell=0, kind=ReceiverKind.AS, values=values[:k])
        rates.append(schedule([table]).rates[0])
    assert all(b >= a for a, b in zip(rates, rates[1:]))


def test_users_for_snr_values_and_floor():
    scaling = UserScaling(alpha=(1.2, 0.0, 1.0), prefactor=(1.0, 7.0, 1.0))
    assert users_for_snr(scaling, 10.0, 0) == 15
    assert users_for_snr(scaling, 10.0, 1) == 7
    assert users_for_snr(scaling, 100.0, 2) == 100
    tiny = UserScaling(alpha=(1.0,), prefactor=(1e-3,))
    assert users_for_snr(tiny, 1.0, 0) == 1
    with pytest.raises(ValueError):
        users_for_snr(scaling, 0.5, 0)


def test_user_scaling_validation():
    with pytest.raises(ValueError):
        UserScaling(alpha=(1.0,), prefactor=(1.0, 2.0))
    with pytest.raises(ValueError):
        UserScaling(alpha=(-0.1,), prefactor=(1.0,))
    with pytest.raises(ValueError):
        UserScaling(alpha=(1.0,), prefactor=(0.0,))


def test_simulate_rates_reproducible_and_paired_across_kinds():
    cfg = two_cell_config()
    kinds = (ReceiverKind.MMSE, ReceiverKind.MF, ReceiverKind.AS)
    a = simulate_rates(cfg, kinds, 200, RngStream(77))
    b = simulate_rates(cfg, kinds, 200, RngStream(77))
    for kind in kinds:
        assert a[kind].shape == (200, 2)
        np.testing.assert_array_equal(a[kind], b[kind])
    # shared draws make the per-realization receiver ordering visible
    slack = 1e-9
    assert np.all(a[ReceiverKind.MF] <= a[ReceiverKind.MMSE] + slack)
    assert np.all(a[ReceiverKind.AS] <= a[ReceiverKind.MMSE] + slack)


def test_simulate_rates_validation():
    cfg = two_cell_config()
    with pytest.raises(ValueError):
        simulate_rates(cfg, (ReceiverKind.MF,), 0, RngStream(1))
    silent = NetworkConfig(
        num_tx_antennas=4,
        num_rx_antennas=2,
        users=(5, 5),
        beams=(0, 0),
        cross_gain=np.array([[1.0, 0.4], [0.7, 1.0]]),
        total_power=12.0,
        noise_power=1.0,
    )
    with pytest.raises(ValueError):
        simulate_rates(silent, (ReceiverKind.MF,), 10, RngStream(1))


def test_scalar_cell_rate_matches_direct_average():
    # K=1, M=1, N_R=1: the slot rate is log2(1 + eta |h|^2) with |h|^2 ~ Exp(1)
    eta = 4.0
    cfg = single_cell_config(users=1, beams=1, num_tx=1, num_rx=1, power=eta)
    est = estimate_sum_rate(cfg, ReceiverKind.MMSE, 20_000, RngStream(41))
    z = RngStream(42).generator().exponential(size=2_000_000)
    direct = np.log2(1.0 + eta * z)
    budget = 3.0 * np.hypot(est.total_stderr, direct.std() / np.sqrt(direct.size))
    assert abs(est.total_rate - direct.mean()) < budget


def test_estimate_from_trials_statistics():
    est = _estimate_from_trials(np.array([[1.0, 2.0], [3.0, 4.0]]))
    np.testing.assert_allclose(est.rates, [2.0, 3.0])
    np.testing.assert_allclose(est.stderrs, [1.0, 1.0])
    assert est.total_rate == pytest.approx(5.0)
    assert est.total_stderr == pytest.approx(2.0)
    assert est.trials == 2
    single = _estimate_from_trials(np.array([[1.5, 0.5]]))
    assert single.total_stderr == 0.0
    np.testing.assert_array_equal(single.stderrs, [0.0, 0.0])


def test_estimate_sum_rate_matches_simulate_rates_mean():
    cfg = two_cell_config()
    est = estimate_sum_rate(cfg, "mf", 300, RngStream(9))
    per_trial = simulate_rates(cfg, (ReceiverKind.MF,), 300, RngStream(9))[
        ReceiverKind.MF
    ]
    np.testing.assert_allclose(est.rates, per_trial.mean(axis=0), rtol=1e-12)
    assert est.total_rate == pytest.approx(per_trial.mean(axis=0).sum(), rel=1e-12)


def test_sweep_beams_shape_pairing_and_silent_cells():
    cfg = two_cell_config(users=(8, 6))
    options = [(1, 1), (2, 2), (2, 0)]
    out = sweep_beams(cfg, options, ReceiverKind.MMSE, 50, RngStream(13))
    assert out.shape == (3, 50, 2)
    assert np.all(out >= 0)
    # a silent cell earns no rate
    np.testing.assert_array_equal(out[2, :, 1], np.zeros(50))
    again = sweep_beams(cfg, options, ReceiverKind.MMSE, 50, RngStream(13))
    np.testing.assert_array_equal(out, again)


def test_sweep_beams_validation():
    cfg = two_cell_config(users=(8, 6))
    rng = RngStream(1)
    with pytest.raises(ValueError, match="one beam count per cell"):
        sweep_beams(cfg, [(1,)], "mmse", 5, rng)
    with pytest.raises(ValueError, match=r"\[0, N_T\]"):
        sweep_beams(cfg, [(5, 1)], "mmse", 5, rng)
    with pytest.raises(ValueError, match="at least one active"):
        sweep_beams(cfg, [(0, 0)], "mmse", 5, rng)
    with pytest.raises(ValueError, match="cannot carry"):
        sweep_beams(two_cell_config(users=(1, 6)), [(2, 2)], "mmse", 5, rng)
    with pytest.raises(ValueError):
        sweep_beams(cfg, [(1, 1)], "mmse", 0, rng)


def test_dpc_bound_dominates_scheduled_rate():
    cfg = single_cell_config(users=12, beams=4, num_tx=4, num_rx=2, power=40.0)
    est = estimate_sum_rate(cfg, ReceiverKind.MMSE, 2000, RngStream(55))
    bound = dpc_upper_bound(cfg, 2000, RngStream(56))
    budget = 3.0 * np.hypot(est.total_stderr, bound.total_stderr)
    assert bound.total_rate > est.total_rate - budget


def test_dpc_bound_scalar_case_matches_rate_law():
    # N_T = N_R = K = 1: the bound and the scheduled rate share one law
    eta = 5.0
    cfg = single_cell_config(users=1, beams=1, num_tx=1, num_rx=1, power=eta)
    bound = dpc_upper_bound(cfg, 50_000, RngStream(31))
    est = estimate_sum_rate(cfg, ReceiverKind.MMSE, 50_000, RngStream(32))
    budget = 3.0 * np.hypot(est.total_stderr, bound.total_stderr)
    assert abs(bound.total_rate - est.total_rate) < budget


def test_dpc_bound_validation():
    with pytest.raises(ValueError, match="single-cell"):
        dpc_upper_bound(two_cell_config(), 10, RngStream(1))
    silent = NetworkConfig(
        num_tx_antennas=2,
        num_rx_antennas=1,
        users=(3,),
        beams=(0,),
        cross_gain=np.array([[1.0]]),
        total_power=1.0,
        noise_power=1.0,
    )
    with pytest.raises(ValueError):
        dpc_upper_bound(silent, 10, RngStream(1))
    with pytest.raises(ValueError):
        dpc_upper_bound(single_cell_config(), 0, RngStream(1))


def test_scheduled_sinr_samples_shape_and_law():
    # C=1, M=1, N_R=1, K=4: the scheduled SINR is the max of four iid
    # Exp(eta) variates, with CDF (1 - e^{-s/eta})^4
    cfg = single_cell_config(users=4, beams=1, num_tx=1, num_rx=1, power=1.0)
    out = scheduled_sinr_samples(cfg, "mmse", 10_000, RngStream(61))
    assert out.shape == (10_000, 1)
    draws = np.sort(out[:, 0])
    f = (-np.expm1(-draws)) ** 4
    n = draws.size
    i = np.arange(n)
    ks = max(np.max((i + 1) / n - f), np.max(f - i / n))
    assert ks < 0.0136
    again = scheduled_sinr_samples(cfg, "mmse", 10_000, RngStream(61))
    np.testing.assert_array_equal(out, again)


def test_scheduled_sinr_samples_validation():
    cfg = single_cell_config()
    with pytest.raises(ValueError):
        scheduled_sinr_samples(cfg, "mmse", 0, RngStream(1))
