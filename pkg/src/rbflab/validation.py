"""Statistical machinery tying simulation to the closed-form results.

Three tools: Kolmogorov-Smirnov distances between empirical samples and
analytic CDFs (or between two sample sets), least-squares slope fits of
rate-vs-log2(SNR) curves against DoF scaling laws, and the distributional
equivalence check between antenna selection with (K, N_R) and a
single-antenna population of N_R*K users.

KS tests run at the fixed 0.05 level with the asymptotic critical constant
1.358; every consumer here uses n >= 10^4 samples, where the asymptotic
form is accurate.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core_random import RngStream
from .network_model import NetworkConfig
from .receivers import ReceiverKind
from .scheduler_sim import scheduled_sinr_samples

__all__ = [
    "EmpiricalCdf",
    "KsReport",
    "SlopeFit",
    "as_miso_equivalence",
    "fit_rate_slope",
    "ks_distance",
    "ks_two_sample",
    "top_half_points",
]

_KS_CONSTANT = 1.358
_AS_SIDE_TAG = 0x4153
_MISO_SIDE_TAG = 0x4D49534F


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Sorted nonnegative samples; the step function i/n between them."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("need a 1-D array with at least one sample")
        if np.any(np.diff(samples) < 0):
            raise ValueError("samples must be sorted ascending")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_samples(cls, raw) -> "EmpiricalCdf":
        return cls(np.sort(np.asarray(raw, dtype=float)))

    @property
    def size(self) -> int:
        return int(self.samples.size)

    def evaluate(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="right") / self.size


@dataclass(frozen=True)
class KsReport:
    """Two-sided KS statistic against the 0.05-level critical value.

    For two-sample comparisons sample_count holds the effective size
    n*m/(n+m), so critical_value has the same 1.358/sqrt(n) form in both
    cases.
    """

    statistic: float
    sample_count: float
    critical_value: float
    passed: bool

    def __post_init__(self) -> None:
        if not 0 <= self.statistic <= 1:
            raise ValueError("KS statistic must lie in [0, 1]")
        if self.passed != (self.statistic < self.critical_value):
            raise ValueError("pass flag must equal statistic < critical value")

    def to_record(self) -> dict:
        return dataclasses.asdict(self)


def _report(statistic: float, effective_n: float) -> KsReport:
    critical = _KS_CONSTANT / math.sqrt(effective_n)
    return KsReport(
        statistic=float(statistic),
        sample_count=float(effective_n),
        critical_value=float(critical),
        passed=bool(statistic < critical),
    )


def ks_distance(samples: EmpiricalCdf, analytic: Callable) -> KsReport:
    """One-sample two-sided KS distance between samples and a CDF."""
    n = samples.size
    if n < 10:
        raise ValueError("KS needs at least 10 samples")
    f = np.asarray(analytic(samples.samples), dtype=float)
    steps = np.arange(n, dtype=float)
    d_plus = np.max((steps + 1.0) / n - f)
    d_minus = np.max(f - steps / n)
    return _report(max(d_plus, d_minus), n)


def ks_two_sample(first, second) -> KsReport:
    """Two-sample two-sided KS distance between raw sample arrays."""
    a = np.sort(np.asarray(first, dtype=float))
    b = np.sort(np.asarray(second, dtype=float))
    if a.size < 10 or b.size < 10:
        raise ValueError("KS needs at least 10 samples per side")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    statistic = np.max(np.abs(fa - fb))
    effective = a.size * b.size / (a.size + b.size)
    return _report(statistic, effective)


@dataclass(frozen=True)
class SlopeFit:
    """Ordinary least-squares line fit with RMS residual."""

    slope: float
    intercept: float
    residual: float


def fit_rate_slope(points: Sequence[tuple[float, float]]) -> SlopeFit:
    """OLS fit of rate against log2(SNR) points."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit a slope")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.ptp(x) == 0:
        raise ValueError("abscissae are degenerate (all equal)")
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return SlopeFit(slope=float(slope), intercept=float(intercept), residual=residual)


def top_half_points(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """The ceil(n/2) points with the largest abscissae.

    Scaling-law slopes are large-SNR limits; fitting only the top half of
    the SNR range reduces pre-asymptotic bias.
    """
    ordered = sorted(((float(x), float(y)) for x, y in points), key=lambda p: p[0])
    return ordered[len(ordered) // 2 :]


def as_miso_equivalence(cfg: NetworkConfig, trials: int, rng: RngStream) -> KsReport:
    """Two-sample KS between antenna-selection and single-antenna scheduling.

    Side one schedules the best of K users with N_R antennas under antenna
    selection; side two schedules the best of N_R*K single-antenna users
    with identical gains.  Both maxima run over K*N_R i.i.d. scalar SINRs,
    so the laws agree.  The sides use independent child streams: sharing
    draws would make the samples identical by construction and the test
    vacuous.  Multi-cell configs are checked per cell and the worst cell is
    reported.
    """
    miso = dataclasses.replace(
        cfg,
        num_rx_antennas=1,
        users=tuple(k * cfg.num_rx_antennas for k in cfg.users),
    )
    side_as = scheduled_sinr_samples(
        cfg, ReceiverKind.AS, trials, rng.child(_AS_SIDE_TAG)
    )
    side_miso = scheduled_sinr_samples(
        miso, ReceiverKind.AS, trials, rng.child(_MISO_SIDE_TAG)
    )
    worst: KsReport | None = None
    for c in range(cfg.num_cells):
        if cfg.beams[c] == 0:
            continue
        report = ks_two_sample(side_as[:, c], side_miso[:, c])
        if worst is None or report.statistic > worst.statistic:
            worst = report
    if worst is None:
        raise ValueError("no cell transmits any beams")
    return worst
