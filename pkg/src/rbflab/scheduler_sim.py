r"""Opportunistic max-SINR scheduling and Monte Carlo sum-rate estimation.

Each scheduling slot draws fresh beams and channels, computes every user's
per-beam SINR table, and assigns each beam to the user with the highest
SINR on it (ties, a probability-zero event under continuous fading, go to
the lowest user index).  The per-cell rate of a slot is
sum_m log2(1 + SINR of the selected user), and rate estimates average over
independent slots.

Simulation helpers share channel draws across receiver kinds and across
beam-count sweeps (common random numbers): the expensive covariance
assembly is reused and paired per-trial differences have far lower variance
than independent runs.  Trials are processed in fixed-size chunks, each
chunk on its own child stream, so estimates are bit-reproducible for a
given (config, stream, trials) regardless of chunk scheduling.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core_random import RngStream, _batch_haar, _cscg
from .network_model import NetworkConfig, derive_gains
from .receivers import ReceiverKind, SinrTable, _coerce_kind, _sinr_from_effective

__all__ = [
    "ScheduleResult",
    "SumRateEstimate",
    "UserScaling",
    "dpc_upper_bound",
    "estimate_sum_rate",
    "schedule",
    "scheduled_sinr_samples",
    "simulate_rates",
    "sweep_beams",
    "users_for_snr",
]

_RATE_TAG = 0x52415445
_SWEEP_TAG = 0x53574550
_DPC_TAG = 0x44504342
_TARGET_USER_ROWS = 1 << 17


@dataclass(frozen=True)
class ScheduleResult:
    """Beam-to-user assignment and per-cell rates for one slot.

    selections[i][m] = (selected user, achieved SINR) for beam m of cell
    cells[i]; rates[i] is that cell's slot rate in bits/s/Hz.
    """

    cells: tuple[int, ...]
    selections: tuple[tuple[tuple[int, float], ...], ...]
    rates: tuple[float, ...]

    @property
    def total_rate(self) -> float:
        return float(sum(self.rates))


@dataclass(frozen=True, eq=False)
class SumRateEstimate:
    """Monte Carlo estimate of per-cell mean rates with standard errors."""

    rates: np.ndarray
    stderrs: np.ndarray
    total_rate: float
    total_stderr: float
    trials: int

    def __post_init__(self) -> None:
        for name in ("rates", "stderrs"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass(frozen=True)
class UserScaling:
    """Per-cell user population K_c = floor(a_c * rho^alpha_c)."""

    alpha: tuple[float, ...]
    prefactor: tuple[float, ...]

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in self.alpha)
        pref = tuple(float(a) for a in self.prefactor)
        if len(alpha) != len(pref):
            raise ValueError("alpha and prefactor must have equal length")
        if any(a < 0 for a in alpha):
            raise ValueError("alpha must be nonnegative")
        if any(a <= 0 for a in pref):
            raise ValueError("prefactors must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "prefactor", pref)


def users_for_snr(scaling: UserScaling, rho: float, c: int) -> int:
    """User count for cell c at linear SNR rho, floored at one user."""
    if rho < 1:
        raise ValueError("rho must be at least 1 (0 dB)")
    count = math.floor(scaling.prefactor[c] * rho ** scaling.alpha[c])
    return max(1, count)


def schedule(tables: Sequence[SinrTable]) -> ScheduleResult:
    """Assign each beam to its max-SINR user and compute per-cell rates."""
    if not tables:
        raise ValueError("need at least one SINR table to schedule")
    cells = []
    selections = []
    rates = []
    for table in tables:
        if table.num_users == 0 or table.num_beams == 0:
            raise ValueError(f"cell {table.cell}: empty SINR table")
        users = np.argmax(table.values, axis=0)
        sinrs = table.values[users, np.arange(table.num_beams)]
        cells.append(table.cell)
        selections.append(tuple(zip((int(u) for u in users), (float(s) for s in sinrs))))
        rates.append(float(np.sum(np.log2(1.0 + sinrs))))
    return ScheduleResult(
        cells=tuple(cells), selections=tuple(selections), rates=tuple(rates)
    )


def _active_cells(cfg: NetworkConfig) -> list[int]:
    return [c for c in range(cfg.num_cells) if cfg.beams[c] > 0]


def _trials_per_chunk(cfg: NetworkConfig) -> int:
    rows = sum(cfg.users[c] for c in _active_cells(cfg))
    return max(1, _TARGET_USER_ROWS // max(1, rows))


def _chunk_sizes(trials: int, per_chunk: int) -> Iterable[int]:
    done = 0
    while done < trials:
        size = min(per_chunk, trials - done)
        yield size
        done += size


def simulate_rates(
    cfg: NetworkConfig,
    kinds: Sequence,
    trials: int,
    rng: RngStream,
) -> dict[ReceiverKind, np.ndarray]:
    """Per-trial scheduled per-cell rates, one (trials, C) array per kind.

    All kinds share each trial's channel and beam draws (common random
    numbers), so cross-kind rate differences are paired.
    """
    kinds = tuple(_coerce_kind(k) for k in kinds)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    gains = derive_gains(cfg)
    active = _active_cells(cfg)
    if not active:
        raise ValueError("no cell transmits any beams")
    out = {kind: np.zeros((trials, cfg.num_cells)) for kind in kinds}
    start = 0
    for idx, size in enumerate(_chunk_sizes(trials, _trials_per_chunk(cfg))):
        g = rng.child(_RATE_TAG, idx).generator()
        beams = {c: _batch_haar(g, size, cfg.beams[c]) for c in active}
        channels = {
            (l, c): _cscg(g, (size, cfg.users[c], cfg.num_rx_antennas, cfg.beams[l]))
            for l in active
            for c in active
        }
        for c in active:
            own = channels[(c, c)] @ beams[c][:, None]
            crosses = []
            for l in active:
                if l == c:
                    continue
                coef = float(gains.inr[l, c]) * gains.noise_power
                if coef > 0:
                    crosses.append((coef, channels[(l, c)] @ beams[l][:, None]))
            coef_own = float(gains.eta[c]) * gains.noise_power
            tables = _sinr_from_effective(
                own, crosses, coef_own, gains.noise_power, kinds
            )
            for kind in kinds:
                best = np.max(tables[kind], axis=1)
                out[kind][start : start + size, c] = np.sum(np.log2(1.0 + best), axis=1)
        start += size
    return out


def scheduled_sinr_samples(
    cfg: NetworkConfig, kind, trials: int, rng: RngStream
) -> np.ndarray:
    """Per-trial SINR of the user scheduled on each cell's first beam.

    Returns a (trials, C) array; silent cells hold zero.  One slot's first
    beam is exchangeable with any other beam, so these samples follow the
    scheduled per-beam SINR law.
    """
    kind = _coerce_kind(kind)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    gains = derive_gains(cfg)
    active = _active_cells(cfg)
    if not active:
        raise ValueError("no cell transmits any beams")
    out = np.zeros((trials, cfg.num_cells))
    start = 0
    for idx, size in enumerate(_chunk_sizes(trials, _trials_per_chunk(cfg))):
        g = rng.child(_RATE_TAG, idx).generator()
        beams = {c: _batch_haar(g, size, cfg.beams[c]) for c in active}
        channels = {
            (l, c): _cscg(g, (size, cfg.users[c], cfg.num_rx_antennas, cfg.beams[l]))
            for l in active
            for c in active
        }
        for c in active:
            own = channels[(c, c)] @ beams[c][:, None]
            crosses = []
            for l in active:
                if l == c:
                    continue
                coef = float(gains.inr[l, c]) * gains.noise_power
                if coef > 0:
                    crosses.append((coef, channels[(l, c)] @ beams[l][:, None]))
            coef_own = float(gains.eta[c]) * gains.noise_power
            table = _sinr_from_effective(
                own, crosses, coef_own, gains.noise_power, (kind,)
            )[kind]
            out[start : start + size, c] = np.max(table[:, :, 0], axis=1)
        start += size
    return out


def _estimate_from_trials(per_trial: np.ndarray) -> SumRateEstimate:
    trials = per_trial.shape[0]
    rates = per_trial.mean(axis=0)
    scale = math.sqrt(trials)
    if trials > 1:
        stderrs = per_trial.std(axis=0, ddof=1) / scale
        total_stderr = float(per_trial.sum(axis=1).std(ddof=1) / scale)
    else:
        stderrs = np.zeros_like(rates)
        total_stderr = 0.0
    return SumRateEstimate(
        rates=rates,
        stderrs=stderrs,
        total_rate=float(rates.sum()),
        total_stderr=total_stderr,
        trials=trials,
    )


def estimate_sum_rate(
    cfg: NetworkConfig, kind, trials: int, rng: RngStream
) -> SumRateEstimate:
    """Mean scheduled per-cell rate over independent slots."""
    kind = _coerce_kind(kind)
    per_trial = simulate_rates(cfg, (kind,), trials, rng)[kind]
    return _estimate_from_trials(per_trial)


def sweep_beams(
    cfg: NetworkConfig,
    beam_options: Sequence[tuple[int, ...]],
    kind,
    trials: int,
    rng: RngStream,
) -> np.ndarray:
    """Per-trial per-cell rates for several beam-count choices, paired.

    Every option sees the same physical channels: each trial draws full
    N_T x N_T beam bases and N_R x N_T physical channels once, and option
    (m_1, ..., m_C) uses the first m_l basis columns of cell l.  Returns an
    array of shape (len(beam_options), trials, C); silent cells contribute
    zero rate.  Paired differences across options therefore isolate the
    beam-count effect (common random numbers).
    """
    kind = _coerce_kind(kind)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    options = [tuple(int(m) for m in opt) for opt in beam_options]
    for opt in options:
        if len(opt) != cfg.num_cells:
            raise ValueError("each option must give one beam count per cell")
        if any(m < 0 or m > cfg.num_tx_antennas for m in opt):
            raise ValueError("beam counts must lie in [0, N_T]")
        if not any(m > 0 for m in opt):
            raise ValueError("each option needs at least one active cell")
        cfg_m = dataclasses.replace(cfg, beams=opt)
        if any(cfg_m.users[c] < opt[c] for c in range(cfg.num_cells)):
            raise ValueError("user counts must cover every option's beam counts")
    cells = list(range(cfg.num_cells))
    nt = cfg.num_tx_antennas
    out = np.zeros((len(options), trials, cfg.num_cells))
    start = 0
    for idx, size in enumerate(_chunk_sizes(trials, _trials_per_chunk(cfg))):
        g = rng.child(_SWEEP_TAG, idx).generator()
        bases = {c: _batch_haar(g, size, nt) for c in cells}
        physical = {
            (l, c): _cscg(g, (size, cfg.users[c], cfg.num_rx_antennas, nt))
            for l in cells
            for c in cells
        }
        for oi, opt in enumerate(options):
            cfg_m = dataclasses.replace(cfg, beams=opt)
            gains = derive_gains(cfg_m)
            for c in cells:
                if opt[c] == 0:
                    continue
                own = physical[(c, c)] @ bases[c][:, None, :, : opt[c]]
                crosses = []
                for l in cells:
                    if l == c or opt[l] == 0:
                        continue
                    coef = float(gains.inr[l, c]) * gains.noise_power
                    if coef > 0:
                        crosses.append(
                            (coef, physical[(l, c)] @ bases[l][:, None, :, : opt[l]])
                        )
                coef_own = float(gains.eta[c]) * gains.noise_power
                table = _sinr_from_effective(
                    own, crosses, coef_own, gains.noise_power, (kind,)
                )[kind]
                best = np.max(table, axis=1)
                out[oi, start : start + size, c] = np.sum(
                    np.log2(1.0 + best), axis=1
                )
        start += size
    return out


def dpc_upper_bound(cfg: NetworkConfig, trials: int, rng: RngStream) -> SumRateEstimate:
    """Monte Carlo mean of the single-cell sum-capacity upper bound.

    The bound is N_T * log2(1 + eta * max_k Tr(H_k^H H_k)); each trace is a
    sum of N_T * N_R unit-mean exponential entry powers, drawn directly as
    a Gamma(N_T * N_R, 1) variate.
    """
    if cfg.num_cells != 1:
        raise ValueError("the sum-capacity bound is defined for single-cell configs")
    if cfg.beams[0] == 0:
        raise ValueError("cell transmits no beams")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    gains = derive_gains(cfg)
    eta = float(gains.eta[0])
    shape = cfg.num_tx_antennas * cfg.num_rx_antennas
    per_trial = np.empty((trials, 1))
    start = 0
    per_chunk = max(1, _TARGET_USER_ROWS // max(1, cfg.users[0]))
    for idx, size in enumerate(_chunk_sizes(trials, per_chunk)):
        g = rng.child(_DPC_TAG, idx).generator()
        traces = g.gamma(shape, 1.0, size=(size, cfg.users[0]))
        best = traces.max(axis=1)
        per_trial[start : start + size, 0] = cfg.num_tx_antennas * np.log2(
            1.0 + eta * best
        )
        start += size
    return _estimate_from_trials(per_trial)
