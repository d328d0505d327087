r"""Per-user, per-beam SINR computation for the three spatial receivers.

Every user sees its own cell's M_c beams through the effective channel
H_eff = H Phi (N_R x M_c) plus cross-cell beams through the corresponding
effective channels.  For caught beam m the interference-plus-noise
covariance is

    W_m = (P_T/M_c) sum_{i != m} h_i h_i^H
          + sum_{l != c} (P_T gamma_{l,c}/M_l) H_x^{(l)} H_x^{(l)H}
          + sigma^2 I,

and the receivers score

* MMSE: SINR = (P_T/M_c) h_m^H W_m^{-1} h_m  (optimal linear filter),
* MF:   SINR = (P_T/M_c) ||h_m||^4 / (h_m^H W_m h_m),
* AS:   the best single antenna's scalar SINR.

Two implementations coexist: scalar per-entry operations that follow the
definitions literally (the reference path, used in tests and for spot
checks) and a batched kernel that assembles the full covariance
A = W_m + (P_T/M_c) h_m h_m^H once per user and recovers every beam's SINR
from it.  For MMSE this uses the rank-one update identity: with
q = (P_T/M_c) h^H A^{-1} h one has SINR = q/(1-q).  The two paths agree to
float precision and tests pin that equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core_random import RngStream, _cscg
from .network_model import (
    ChannelRealization,
    DerivedGains,
    NetworkConfig,
    derive_gains,
)

__all__ = [
    "ReceiverKind",
    "SinrTable",
    "interference_covariance",
    "sample_sinr",
    "sinr_as",
    "sinr_mf",
    "sinr_mmse",
    "sinr_table",
]

_SAMPLE_TAG = 0x5349
_SAMPLE_CHUNK = 1 << 18


class ReceiverKind(str, Enum):
    """Spatial receiver architecture applied per caught beam."""

    MMSE = "mmse"
    MF = "mf"
    AS = "as"


def _coerce_kind(kind) -> ReceiverKind:
    if isinstance(kind, ReceiverKind):
        return kind
    return ReceiverKind(str(kind).lower())


@dataclass(frozen=True, eq=False)
class SinrTable:
    """K_c x M_c matrix of linear-scale SINRs for one cell and receiver."""

    cell: int
    kind: ReceiverKind
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a K x M matrix")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("SINRs must be finite and nonnegative")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def num_users(self) -> int:
        return self.values.shape[0]

    @property
    def num_beams(self) -> int:
        return self.values.shape[1]


def _cell_coefficients(
    gains: DerivedGains, c: int
) -> tuple[float, float]:
    """(P_T/M_c, sigma^2) in absolute units for cell c."""
    coef_own = float(gains.eta[c]) * gains.noise_power
    return coef_own, gains.noise_power


def _effective_user_channels(
    real: ChannelRealization, gains: DerivedGains, c: int, k: int
) -> tuple[np.ndarray, list[tuple[float, np.ndarray]]]:
    """Own effective channel (N_R x M_c) and [(coef, cross effective)] for user k."""
    if (c, c) not in real.channels:
        raise ValueError(f"cell {c} transmits no beams")
    own = real.channels[(c, c)][k] @ real.beams[c]
    crosses = []
    for l in range(len(real.beams)):
        if l == c or (l, c) not in real.channels:
            continue
        coef = float(gains.inr[l, c]) * gains.noise_power
        if coef > 0:
            crosses.append((coef, real.channels[(l, c)][k] @ real.beams[l]))
    return own, crosses


def interference_covariance(
    real: ChannelRealization, gains: DerivedGains, c: int, k: int, m: int
) -> np.ndarray:
    """Hermitian positive-definite N_R x N_R covariance seen by beam m."""
    own, crosses = _effective_user_channels(real, gains, c, k)
    coef_own, noise = _cell_coefficients(gains, c)
    if not 0 <= m < own.shape[1]:
        raise ValueError(f"beam index {m} out of range")
    others = np.delete(own, m, axis=1)
    w = coef_own * (others @ others.conj().T)
    for coef, hx in crosses:
        w = w + coef * (hx @ hx.conj().T)
    return w + noise * np.eye(own.shape[0])


def _factored_solve(w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve W x = b through the Cholesky factor of the Hermitian p.d. W."""
    lower = np.linalg.cholesky(w)
    y = np.linalg.solve(lower, b)
    return np.linalg.solve(lower.conj().T, y)


def sinr_mmse(
    real: ChannelRealization, gains: DerivedGains, c: int, k: int, m: int
) -> float:
    """SINR of the MMSE filter for user k of cell c on beam m."""
    own, _ = _effective_user_channels(real, gains, c, k)
    coef_own, _ = _cell_coefficients(gains, c)
    w = interference_covariance(real, gains, c, k, m)
    h = own[:, m]
    return float(coef_own * np.real(h.conj() @ _factored_solve(w, h)))


def sinr_mf(
    real: ChannelRealization, gains: DerivedGains, c: int, k: int, m: int
) -> float:
    """SINR of the matched filter (MRC on the caught beam's channel)."""
    own, _ = _effective_user_channels(real, gains, c, k)
    coef_own, _ = _cell_coefficients(gains, c)
    w = interference_covariance(real, gains, c, k, m)
    h = own[:, m]
    norm2 = float(np.real(h.conj() @ h))
    quad = float(np.real(h.conj() @ (w @ h)))
    return coef_own * norm2**2 / quad


def sinr_as(
    real: ChannelRealization, gains: DerivedGains, c: int, k: int, m: int
) -> float:
    """Best per-antenna scalar SINR for user k of cell c on beam m."""
    own, _ = _effective_user_channels(real, gains, c, k)
    coef_own, _ = _cell_coefficients(gains, c)
    w = interference_covariance(real, gains, c, k, m)
    num = coef_own * np.abs(own[:, m]) ** 2
    den = np.real(np.diagonal(w))
    return float(np.max(num / den))


def _solve_hpd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched solve of A X = B for Hermitian positive-definite A.

    Closed forms cover the 1x1 and 2x2 cases that dominate typical receive
    array sizes; larger systems fall through to LAPACK.
    """
    n = a.shape[-1]
    if n == 1:
        return b / np.real(a[..., :1, :1])
    if n == 2:
        a00 = np.real(a[..., 0, 0])
        a11 = np.real(a[..., 1, 1])
        a01 = a[..., 0, 1]
        det = (a00 * a11 - np.abs(a01) ** 2)[..., None]
        b0, b1 = b[..., 0, :], b[..., 1, :]
        x0 = (a11[..., None] * b0 - a01[..., None] * b1) / det
        x1 = (a00[..., None] * b1 - np.conj(a01)[..., None] * b0) / det
        return np.stack([x0, x1], axis=-2)
    return np.linalg.solve(a, b)


def _sinr_from_effective(
    h_own: np.ndarray,
    crosses: list[tuple[float, np.ndarray]],
    coef_own: float,
    noise_power: float,
    kinds: tuple[ReceiverKind, ...],
) -> dict[ReceiverKind, np.ndarray]:
    """Batched SINR tables from effective channels.

    h_own has shape (..., N_R, M); each cross entry is (coef, (..., N_R, M_l)).
    Returns, per requested kind, an array of shape (..., M).  Sharing the
    full covariance A across kinds and beams is what makes common-random-
    number comparisons across receivers cheap.
    """
    nr = h_own.shape[-2]
    a = coef_own * (h_own @ np.conj(np.swapaxes(h_own, -1, -2)))
    for coef, hx in crosses:
        a = a + coef * (hx @ np.conj(np.swapaxes(hx, -1, -2)))
    a[..., np.arange(nr), np.arange(nr)] += noise_power

    out: dict[ReceiverKind, np.ndarray] = {}
    if ReceiverKind.MMSE in kinds:
        y = _solve_hpd(a, h_own)
        q = coef_own * np.real(np.sum(np.conj(h_own) * y, axis=-2))
        q = np.clip(q, 0.0, 1.0 - 1e-15)
        out[ReceiverKind.MMSE] = q / (1.0 - q)
    if ReceiverKind.MF in kinds:
        z = a @ h_own
        quad_full = np.real(np.sum(np.conj(h_own) * z, axis=-2))
        norm2 = np.sum(np.abs(h_own) ** 2, axis=-2)
        # quad_full = h^H W h + coef ||h||^4 and W >= sigma^2 I, so the
        # subtraction below is floored at its exact lower bound.
        den = np.maximum(quad_full - coef_own * norm2**2, noise_power * norm2)
        out[ReceiverKind.MF] = coef_own * norm2**2 / den
    if ReceiverKind.AS in kinds:
        per_antenna = coef_own * np.abs(h_own) ** 2
        diag = np.real(a[..., np.arange(nr), np.arange(nr)])
        den = np.maximum(diag[..., :, None] - per_antenna, noise_power)
        out[ReceiverKind.AS] = np.max(per_antenna / den, axis=-2)
    return out


def _effective_cell_channels(
    real: ChannelRealization, gains: DerivedGains, c: int
) -> tuple[np.ndarray, list[tuple[float, np.ndarray]]]:
    """All-user effective channels for cell c: (K, N_R, M_c) plus crosses."""
    if (c, c) not in real.channels:
        raise ValueError(f"cell {c} transmits no beams")
    own = real.channels[(c, c)] @ real.beams[c]
    crosses = []
    for l in range(len(real.beams)):
        if l == c or (l, c) not in real.channels:
            continue
        coef = float(gains.inr[l, c]) * gains.noise_power
        if coef > 0:
            crosses.append((coef, real.channels[(l, c)] @ real.beams[l]))
    return own, crosses


def sinr_table(
    real: ChannelRealization, gains: DerivedGains, c: int, kind
) -> SinrTable:
    """Assemble the K_c x M_c SINR table for one cell and receiver kind."""
    kind = _coerce_kind(kind)
    own, crosses = _effective_cell_channels(real, gains, c)
    coef_own, noise = _cell_coefficients(gains, c)
    values = _sinr_from_effective(own, crosses, coef_own, noise, (kind,))[kind]
    return SinrTable(cell=c, kind=kind, values=values)


def sample_sinr(
    cfg: NetworkConfig, kind, cell: int, num_samples: int, rng: RngStream
) -> np.ndarray:
    """Draw i.i.d. samples of one beam's SINR for a user of the given cell.

    Effective channels are sampled directly as CSCG matrices: a CSCG
    physical channel times an independent orthonormal beam matrix is again
    CSCG by unitary invariance, so the beams need not be materialized.  All
    beams share one law; the first beam's column is returned.  Draws are
    chunked with one child stream per chunk, so results depend only on
    (cfg, rng, num_samples).
    """
    kind = _coerce_kind(kind)
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    if not 0 <= cell < cfg.num_cells:
        raise ValueError(f"cell index {cell} out of range")
    if cfg.beams[cell] == 0:
        raise ValueError(f"cell {cell} transmits no beams")
    gains = derive_gains(cfg)
    coef_own, noise = _cell_coefficients(gains, cell)
    nr = cfg.num_rx_antennas
    cross_spec = [
        (float(gains.inr[l, cell]) * noise, cfg.beams[l])
        for l in range(cfg.num_cells)
        if l != cell and cfg.beams[l] > 0 and gains.inr[l, cell] > 0
    ]
    out = np.empty(num_samples)
    start = 0
    for idx in range(0, -(-num_samples // _SAMPLE_CHUNK)):
        g = rng.child(_SAMPLE_TAG, idx).generator()
        rows = min(_SAMPLE_CHUNK, num_samples - start)
        own = _cscg(g, (rows, nr, cfg.beams[cell]))
        crosses = [(coef, _cscg(g, (rows, nr, ml))) for coef, ml in cross_spec]
        values = _sinr_from_effective(own, crosses, coef_own, noise, (kind,))[kind]
        out[start : start + rows] = values[:, 0]
        start += rows
    return out
