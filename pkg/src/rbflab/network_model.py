"""Static system configuration and per-slot channel realization assembly.

A :class:`NetworkConfig` describes the C-cell downlink: antenna counts, beam
counts, user populations, powers, and the cross-cell gain matrix.  All
internal computation is in linear units; dB is accepted at the config
boundary and converted once.

Cell indices are 0-based throughout the code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rbflab.core_random import RngStream, _as_generator, _cscg, sample_orthonormal_beams

__all__ = [
    "NetworkConfig",
    "DerivedGains",
    "ChannelRealization",
    "db_to_linear",
    "derive_gains",
    "draw_realization",
    "load_config",
    "config_from_dict",
    "config_to_dict",
]


def db_to_linear(x_db: float) -> float:
    """Convert a dB value to linear scale, 10^(x/10)."""
    return float(10.0 ** (np.asarray(x_db, dtype=float) / 10.0))


@dataclass(frozen=True, eq=False)
class NetworkConfig:
    """Full static description of the C-cell system.

    Attributes
    ----------
    num_tx_antennas : int
        N_T, transmit antennas per base station.
    num_rx_antennas : int
        N_R, receive antennas per user.
    users : tuple of int
        K_c, users per cell.
    beams : tuple of int
        M_c, active beams per cell; 0 disables the cell (it neither
        transmits nor interferes).
    cross_gain : ndarray [C, C]
        gamma[l, c], linear power gain from base station l into cell c.
        Diagonal is 1; off-diagonal entries are < 1.
    total_power : float
        P_T, per-base-station sum power (linear), split equally over beams.
    noise_power : float
        sigma^2, per-antenna noise power (linear).
    """

    num_tx_antennas: int
    num_rx_antennas: int
    users: tuple[int, ...]
    beams: tuple[int, ...]
    cross_gain: np.ndarray
    total_power: float
    noise_power: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "users", tuple(int(k) for k in self.users))
        object.__setattr__(self, "beams", tuple(int(m) for m in self.beams))
        gamma = np.array(self.cross_gain, dtype=float)
        object.__setattr__(self, "cross_gain", gamma)
        c = len(self.users)
        if c < 1:
            raise ValueError("need at least one cell")
        if len(self.beams) != c:
            raise ValueError("users and beams lists must have the same length")
        if gamma.shape != (c, c):
            raise ValueError(f"cross_gain must be {c}x{c}, got {gamma.shape}")
        if self.num_tx_antennas < 1 or self.num_rx_antennas < 1:
            raise ValueError("antenna counts must be positive")
        if self.total_power <= 0 or self.noise_power <= 0:
            raise ValueError("powers must be positive")
        for cc, (k, m) in enumerate(zip(self.users, self.beams)):
            if m < 0 or m > self.num_tx_antennas:
                raise ValueError(f"cell {cc}: beams must lie in [0, N_T], got {m}")
            if k < 0:
                raise ValueError(f"cell {cc}: negative user count")
            if m > 0 and k < m:
                raise ValueError(f"cell {cc}: {k} users cannot carry {m} beams")
        if not np.allclose(np.diagonal(gamma), 1.0):
            raise ValueError("cross_gain diagonal must be 1")
        off = gamma[~np.eye(c, dtype=bool)]
        if np.any(off >= 1.0) or np.any(off < 0.0):
            raise ValueError("off-diagonal cross gains must lie in [0, 1)")
        gamma.flags.writeable = False

    @property
    def num_cells(self) -> int:
        return len(self.users)


@dataclass(frozen=True, eq=False)
class DerivedGains:
    """SNR/INR quantities derived from a NetworkConfig.

    rho = P_T / sigma^2 is the total SNR.  eta[c] = P_T / (M_c sigma^2) is
    the per-beam SNR of cell c, and inr[l, c] = gamma[l, c] P_T / (M_l
    sigma^2) is the per-beam interference-to-noise ratio from cell l into
    cell c.  Entries for silent cells (M = 0) are NaN.  noise_power is
    carried along so downstream covariance assembly can restore absolute
    units without re-reading the config.
    """

    rho: float
    eta: np.ndarray
    inr: np.ndarray
    noise_power: float

    def __post_init__(self) -> None:
        self.eta.flags.writeable = False
        self.inr.flags.writeable = False


def derive_gains(cfg: NetworkConfig) -> DerivedGains:
    """Compute rho, per-beam SNRs, and the per-beam INR matrix."""
    c = cfg.num_cells
    m = np.array(cfg.beams, dtype=float)
    rho = cfg.total_power / cfg.noise_power
    with np.errstate(divide="ignore"):
        eta = np.where(m > 0, cfg.total_power / (m * cfg.noise_power), np.nan)
        inr = np.where(
            m[:, None] > 0,
            cfg.cross_gain * cfg.total_power / (m[:, None] * cfg.noise_power),
            np.nan,
        )
    return DerivedGains(rho=float(rho), eta=eta, inr=inr, noise_power=float(cfg.noise_power))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One i.i.d. draw of all channels and beams for a single time slot.

    channels[(l, c)] has shape [K_c, N_R, M_l]: the effective channel from
    base station l to every user of cell c.  beams[c] has shape [M_c, M_c]
    with orthonormal columns.  Pairs where M_l = 0 are absent.
    """

    channels: dict[tuple[int, int], np.ndarray]
    beams: list[np.ndarray]


def draw_realization(cfg: NetworkConfig, rng: RngStream | np.random.Generator) -> ChannelRealization:
    """Draw fresh Haar beams per cell and CSCG channels for every user.

    Channels use the effective-channel convention: H for the (l, c) pair is
    drawn directly as N_R x M_l CSCG, which by unitary invariance matches
    drawing an N_R x N_T channel and projecting it onto M_l orthonormal
    transmit directions.  Draw order is fixed (beams by cell, then channel
    blocks by (l, c)), so a given stream always yields the same realization.
    """
    g = _as_generator(rng)
    c = cfg.num_cells
    beams = [
        sample_orthonormal_beams(g, m, m) if m > 0 else np.zeros((0, 0), dtype=complex)
        for m in cfg.beams
    ]
    channels: dict[tuple[int, int], np.ndarray] = {}
    for l in range(c):
        if cfg.beams[l] == 0:
            continue
        for cc in range(c):
            channels[(l, cc)] = _cscg(
                g, (cfg.users[cc], cfg.num_rx_antennas, cfg.beams[l])
            )
    return ChannelRealization(channels=channels, beams=beams)


def load_config(path: str | Path) -> NetworkConfig:
    """Parse a JSON config file into a NetworkConfig.

    Expected keys: ``cells`` (list of {"users": int, "beams": int}), ``nt``,
    ``nr``, ``power_db``, ``noise_db``, and ``cross_gain`` (C*C row-major
    list, gamma[l][c] flattened by rows).
    """
    text = Path(path).read_text(encoding="utf-8")
    raw = json.loads(text)
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> NetworkConfig:
    try:
        cells = raw["cells"]
        nt = int(raw["nt"])
        nr = int(raw["nr"])
        power_db = float(raw["power_db"])
        noise_db = float(raw["noise_db"])
        flat = [float(x) for x in raw["cross_gain"]]
        users = tuple(int(cell["users"]) for cell in cells)
        beams = tuple(int(cell["beams"]) for cell in cells)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed config: {exc}") from exc
    c = len(cells)
    if len(flat) != c * c:
        raise ValueError(f"cross_gain must have {c * c} entries, got {len(flat)}")
    gamma = np.array(flat, dtype=float).reshape(c, c)
    return NetworkConfig(
        num_tx_antennas=nt,
        num_rx_antennas=nr,
        users=users,
        beams=beams,
        cross_gain=gamma,
        total_power=db_to_linear(power_db),
        noise_power=db_to_linear(noise_db),
    )


def config_to_dict(cfg: NetworkConfig) -> dict:
    """Canonical JSON-compatible echo of a parsed config (linear powers kept in dB)."""
    return {
        "cells": [{"users": k, "beams": m} for k, m in zip(cfg.users, cfg.beams)],
        "nt": cfg.num_tx_antennas,
        "nr": cfg.num_rx_antennas,
        "power_db": 10.0 * float(np.log10(cfg.total_power)),
        "noise_db": 10.0 * float(np.log10(cfg.noise_power)),
        "cross_gain": [float(x) for x in cfg.cross_gain.reshape(-1)],
    }
