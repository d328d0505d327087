import json

import numpy as np
import pytest

from rbflab.core_random import RngStream
from rbflab.network_model import (
    NetworkConfig,
    config_from_dict,
    config_to_dict,
    db_to_linear,
    derive_gains,
    draw_realization,
    load_config,
)


def make_config(**overrides):
    base = dict(
        num_tx_antennas=4,
        num_rx_antennas=2,
        users=(10, 8),
        beams=(3, 2),
        cross_gain=np.array([[1.0, 0.5], [0.25, 1.0]]),
        total_power=20.0,
        noise_power=2.0,
    )
    base.update(overrides)
    return NetworkConfig(**base)


def test_db_to_linear():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(-3.0) == pytest.approx(10 ** -0.3)


def test_valid_config_accepted():
    cfg = make_config()
    assert cfg.num_cells == 2
    assert cfg.users == (10, 8)
    assert not cfg.cross_gain.flags.writeable


@pytest.mark.parametrize(
    "overrides",
    [
        dict(users=()),
        dict(beams=(3,)),
        dict(cross_gain=np.eye(3)),
        dict(num_tx_antennas=0),
        dict(num_rx_antennas=0),
        dict(total_power=0.0),
        dict(noise_power=-1.0),
        dict(beams=(5, 2)),  # M > N_T
        dict(beams=(-1, 2)),
        dict(users=(2, 8)),  # K < M in cell 0
        dict(users=(-1, 8)),
        dict(cross_gain=np.array([[0.9, 0.5], [0.25, 1.0]])),  # diagonal not 1
        dict(cross_gain=np.array([[1.0, 1.0], [0.25, 1.0]])),  # off-diag not < 1
        dict(cross_gain=np.array([[1.0, -0.1], [0.25, 1.0]])),
    ],
)
def test_invalid_configs_rejected(overrides):
    with pytest.raises(ValueError):
        make_config(**overrides)


def test_silent_cell_allowed_without_users():
    cfg = make_config(users=(10, 0), beams=(3, 0))
    assert cfg.beams[1] == 0


def test_derived_gains_formulas():
    cfg = make_config()
    gains = derive_gains(cfg)
    assert gains.rho == pytest.approx(10.0)
    # eta_c = P / (M_c sigma^2)
    np.testing.assert_allclose(gains.eta, [20.0 / 6.0, 20.0 / 4.0])
    # inr[l, c] = gamma[l, c] P / (M_l sigma^2)
    expected = np.array([[10 / 3, 0.5 * 10 / 3], [0.25 * 5.0, 5.0]])
    np.testing.assert_allclose(gains.inr, expected)
    assert gains.noise_power == 2.0


def test_derived_gains_nan_for_silent_cell():
    cfg = make_config(users=(10, 0), beams=(3, 0))
    gains = derive_gains(cfg)
    assert np.isnan(gains.eta[1])
    assert np.all(np.isnan(gains.inr[1, :]))
    assert np.all(np.isfinite(gains.inr[0, :]))


def test_draw_realization_shapes_and_unitarity():
    cfg = make_config()
    real = draw_realization(cfg, RngStream(1))
    assert set(real.channels) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert real.channels[(0, 1)].shape == (8, 2, 3)  # [K_c, N_R, M_l]
    assert real.channels[(1, 0)].shape == (10, 2, 2)
    for c, m in enumerate(cfg.beams):
        gram = real.beams[c].conj().T @ real.beams[c]
        np.testing.assert_allclose(gram, np.eye(m), atol=1e-12)


def test_draw_realization_skips_silent_cells():
    cfg = make_config(users=(10, 0), beams=(3, 0))
    real = draw_realization(cfg, RngStream(1))
    assert set(real.channels) == {(0, 0), (0, 1)}
    assert real.beams[1].shape == (0, 0)


def test_draw_realization_reproducible():
    cfg = make_config()
    a = draw_realization(cfg, RngStream(77))
    b = draw_realization(cfg, RngStream(77))
    for key in a.channels:
        np.testing.assert_array_equal(a.channels[key], b.channels[key])
    for ba, bb in zip(a.beams, b.beams):
        np.testing.assert_array_equal(ba, bb)


def test_config_dict_roundtrip():
    cfg = make_config()
    again = config_from_dict(config_to_dict(cfg))
    assert again.users == cfg.users
    assert again.beams == cfg.beams
    assert again.total_power == pytest.approx(cfg.total_power)
    assert again.noise_power == pytest.approx(cfg.noise_power)
    np.testing.assert_allclose(again.cross_gain, cfg.cross_gain)


def test_load_config_reads_json(tmp_path):
    payload = {
        "cells": [{"users": 5, "beams": 2}],
        "nt": 3,
        "nr": 2,
        "power_db": 13.0,
        "noise_db": 3.0,
        "cross_gain": [1.0],
    }
    path = tmp_path / "net.json"
    path.write_text(json.dumps(payload))
    cfg = load_config(path)
    assert cfg.users == (5,)
    assert cfg.total_power == pytest.approx(db_to_linear(13.0))


@pytest.mark.parametrize(
    "payload",
    [
        {},
        {"cells": [{"users": 5}], "nt": 3, "nr": 2, "power_db": 0, "noise_db": 0, "cross_gain": [1.0]},
        {"cells": [{"users": 5, "beams": 2}], "nt": "x", "nr": 2, "power_db": 0, "noise_db": 0, "cross_gain": [1.0]},
    ],
)
def test_malformed_config_dict_rejected(payload):
    with pytest.raises(ValueError, match="malformed config"):
        config_from_dict(payload)


def test_config_with_wrong_gain_count_rejected(tmp_path):
    payload = {
        "cells": [{"users": 5, "beams": 2}, {"users": 5, "beams": 2}],
        "nt": 3,
        "nr": 2,
        "power_db": 0.0,
        "noise_db": 0.0,
        "cross_gain": [1.0, 0.5],
    }
    path = tmp_path / "net.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ValueError, match="cross_gain"):
        load_config(path)
