"""Named validation suites tying every component to an independent check.

Each suite returns a list of CheckResult records; the CLI prints them as
one [PASS]/[FAIL] line each and exits nonzero if any check fails.  The
suites are also the substance of the acceptance test module, so they avoid
any state beyond the supplied seed.

Runtime budget: `beam-argmax`, `region`, and `derivative` are instant;
`oracle`, `cdf`, and `as-miso` take seconds; the scheduling suites
(`scaling`, `optimality`, `sweep-m`) each run a few minutes of Monte Carlo.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analytic_cdf import (
    ShiftedPowerProduct,
    as_cdf,
    general_quadratic_cdf,
    mf_cdf,
    mmse_cdf,
    t0_derivatives,
)
from .core_random import RngStream
from .dof_analysis import (
    dof_region,
    dof_single_cell,
    optimal_beams_single_cell,
    optimality_threshold,
    region_upper_bound,
)
from .network_model import NetworkConfig, derive_gains
from .receivers import ReceiverKind, sample_sinr
from .scheduler_sim import (
    UserScaling,
    dpc_upper_bound,
    simulate_rates,
    sweep_beams,
    users_for_snr,
)
from .validation import (
    EmpiricalCdf,
    as_miso_equivalence,
    fit_rate_slope,
    ks_distance,
    top_half_points,
)

__all__ = ["CheckResult", "SUITES", "reference_network", "run_suites"]

_KS_LIMIT = 0.0136
_ALL_KINDS = (ReceiverKind.MMSE, ReceiverKind.MF, ReceiverKind.AS)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def reference_network() -> NetworkConfig:
    """Four-cell network with unequal beam counts and mixed-strength ICI.

    Cell 0 has per-beam SNR 20 dB and sees per-beam INRs of 0, -3, and
    +3 dB from the three other cells; the cross-gain matrix extends that
    pattern circulantly so every column is valid.
    """
    beams = (3, 3, 2, 4)
    noise, power = 1.0, 300.0  # eta_0 = 300 / (3 * 1) = 100
    inr_into_0 = (1.0, 10 ** (-0.3), 10 ** 0.3)
    cells = len(beams)
    gamma = np.eye(cells)
    pattern = {
        l: inr_into_0[l - 1] * beams[l] * noise / power for l in range(1, cells)
    }
    for c in range(cells):
        for l in range(cells):
            if l != c:
                gamma[l, c] = pattern[(l - c) % cells]
    return NetworkConfig(
        num_tx_antennas=4,
        num_rx_antennas=3,
        users=beams,
        beams=beams,
        cross_gain=gamma,
        total_power=power,
        noise_power=noise,
    )


def _single_cell(num_beams: int, num_tx: int, num_rx: int, users: int, rho: float) -> NetworkConfig:
    return NetworkConfig(
        num_tx_antennas=num_tx,
        num_rx_antennas=num_rx,
        users=(users,),
        beams=(num_beams,),
        cross_gain=np.array([[1.0]]),
        total_power=float(rho),
        noise_power=1.0,
    )


def suite_cdf(seed: int) -> list[CheckResult]:
    """Closed-form SINR laws vs 1e5-sample simulation, per receiver kind."""
    cfg = reference_network()
    gains = derive_gains(cfg)
    rng = RngStream(seed, 0x434446)
    laws = {
        ReceiverKind.MMSE: mmse_cdf(gains, cfg, 0),
        ReceiverKind.MF: mf_cdf(gains, cfg, 0),
        ReceiverKind.AS: as_cdf(gains, cfg, 0),
    }
    results = []
    for i, kind in enumerate(_ALL_KINDS):
        samples = sample_sinr(cfg, kind, 0, 100_000, rng.child(i))
        report = ks_distance(EmpiricalCdf.from_samples(samples), laws[kind].evaluate)
        results.append(
            CheckResult(
                name=f"cdf law vs simulation ({kind.value})",
                passed=report.statistic < _KS_LIMIT,
                detail=f"KS={report.statistic:.5f} limit={_KS_LIMIT}",
            )
        )
    return results


def _quadratic_form_draws(
    psi: np.ndarray, p: int, count: int, rng: RngStream
) -> np.ndarray:
    """Monte Carlo draws of h^H (X diag(psi) X^H)^{-1} h."""
    g = rng.generator()
    n = psi.size
    x = (g.standard_normal((count, p, n)) + 1j * g.standard_normal((count, p, n)))
    x *= np.sqrt(psi / 2.0)
    h = (g.standard_normal((count, p)) + 1j * g.standard_normal((count, p))) / np.sqrt(2)
    a = x @ np.conj(np.swapaxes(x, -1, -2))
    y = np.linalg.solve(a, h[..., None])[..., 0]
    return np.real(np.sum(np.conj(h) * y, axis=-1))


def suite_oracle(seed: int) -> list[CheckResult]:
    """Quadratic-form law vs direct Monte Carlo on random weight products."""
    rng = RngStream(seed, 0x4F5241)
    g = rng.generator()
    passes = 0
    worst = 0.0
    for i in range(10):
        p = int(g.integers(1, 4))
        # mix distinct and repeated rates, keeping total degree in [p, 6]
        n = int(g.integers(p, 7))
        distinct = int(g.integers(1, n + 1))
        rates = np.exp(g.uniform(np.log(0.2), np.log(5.0), size=distinct))
        mults = np.ones(distinct, dtype=int)
        for _ in range(n - distinct):
            mults[int(g.integers(0, distinct))] += 1
        q = ShiftedPowerProduct(tuple(zip(rates, (int(m) for m in mults))))
        law = general_quadratic_cdf(q, p)
        psi = np.repeat(rates, mults)
        draws = _quadratic_form_draws(psi, p, 10_000, rng.child(i))
        report = ks_distance(EmpiricalCdf.from_samples(draws), law.evaluate)
        worst = max(worst, report.statistic)
        if report.statistic < _KS_LIMIT:
            passes += 1
    return [
        CheckResult(
            name="quadratic-form law vs Monte Carlo oracle",
            passed=passes >= 9,
            detail=f"{passes}/10 products under KS {_KS_LIMIT} (worst {worst:.4f})",
        )
    ]


def _rate_points(
    beams: int,
    num_tx: int,
    num_rx: int,
    rho_db: Sequence[float],
    trials: int,
    rng: RngStream,
) -> dict[ReceiverKind, list[tuple[float, float]]]:
    """Mean total rate vs log2(rho) with K = floor(rho) users."""
    scaling = UserScaling(alpha=(1.0,), prefactor=(1.0,))
    points: dict[ReceiverKind, list[tuple[float, float]]] = {
        kind: [] for kind in _ALL_KINDS
    }
    for i, rdb in enumerate(rho_db):
        rho = 10 ** (rdb / 10)
        users = users_for_snr(scaling, rho, 0)
        cfg = _single_cell(beams, num_tx, num_rx, users, rho)
        rates = simulate_rates(cfg, _ALL_KINDS, trials, rng.child(i))
        for kind in _ALL_KINDS:
            total = rates[kind].sum(axis=1)
            points[kind].append((math.log2(rho), float(total.mean())))
    return points


_SCALING_RHO_DB = (20.0, 24.0, 28.0, 32.0, 36.0, 40.0)


def suite_scaling(seed: int, trials: int = 2000) -> list[CheckResult]:
    """Rate-vs-SNR slopes for M=4, N_R=2, K=floor(rho) against the DoF laws."""
    rng = RngStream(seed, 0x534341)
    points = _rate_points(4, 4, 2, _SCALING_RHO_DB, trials, rng)
    results = []
    for kind, target in (
        (ReceiverKind.MMSE, 2.0),
        (ReceiverKind.MF, 4.0 / 3.0),
        (ReceiverKind.AS, 4.0 / 3.0),
    ):
        fit = fit_rate_slope(top_half_points(points[kind]))
        ok = abs(fit.slope - target) <= 0.15 * target
        results.append(
            CheckResult(
                name=f"sum-rate scaling slope ({kind.value})",
                passed=ok,
                detail=f"slope={fit.slope:.3f} target={target:.3f} tol=15%",
            )
        )
    return results


def suite_optimality(seed: int, trials: int = 2000) -> list[CheckResult]:
    """Full-beam single-cell slopes and the sum-capacity upper bound."""
    rng = RngStream(seed, 0x4F5054)
    points = _rate_points(3, 3, 2, _SCALING_RHO_DB, trials, rng)
    slopes = {
        kind: fit_rate_slope(top_half_points(points[kind])).slope
        for kind in _ALL_KINDS
    }
    results = [
        CheckResult(
            name="full-beam MMSE slope",
            passed=abs(slopes[ReceiverKind.MMSE] - 3.0) <= 0.45,
            detail=f"slope={slopes[ReceiverKind.MMSE]:.3f} target=3.0 tol=15%",
        )
    ]
    for kind in (ReceiverKind.MF, ReceiverKind.AS):
        ok = slopes[kind] <= 0.9 * slopes[ReceiverKind.MMSE]
        results.append(
            CheckResult(
                name=f"{kind.value} slope at least 10% below MMSE",
                passed=ok,
                detail=f"{slopes[kind]:.3f} vs 0.9*{slopes[ReceiverKind.MMSE]:.3f}",
            )
        )
    scaling = UserScaling(alpha=(1.0,), prefactor=(1.0,))
    gaps = []
    dominated = True
    for i, rdb in enumerate(_SCALING_RHO_DB):
        rho = 10 ** (rdb / 10)
        cfg = _single_cell(3, 3, 2, users_for_snr(scaling, rho, 0), rho)
        bound = dpc_upper_bound(cfg, trials, rng.child(1000 + i)).total_rate
        mmse_rate = points[ReceiverKind.MMSE][i][1]
        gaps.append(bound - mmse_rate)
        dominated = dominated and bound >= mmse_rate
    results.append(
        CheckResult(
            name="sum-capacity bound dominates MMSE rate",
            passed=dominated,
            detail=f"min gap {min(gaps):.2f} bits/s/Hz over {len(gaps)} SNRs",
        )
    )
    return results


_SWEEP_RHO_DB = (5.0, 10.0, 15.0, 20.0)
_SWEEP_EXPECTED = {5.0: 3, 10.0: 2, 15.0: 2, 20.0: 2}


def suite_sweep_m(seed: int, trials: int = 4000) -> list[CheckResult]:
    """Two-cell beam-count argmax across SNR, paired by common draws."""
    rng = RngStream(seed, 0x5357)
    results = []
    for i, rdb in enumerate(_SWEEP_RHO_DB):
        rho = 10 ** (rdb / 10)
        cfg = NetworkConfig(
            num_tx_antennas=4,
            num_rx_antennas=2,
            users=(200, 200),
            beams=(1, 1),
            cross_gain=np.array([[1.0, 0.8], [0.8, 1.0]]),
            total_power=rho,
            noise_power=1.0,
        )
        options = [(m, m) for m in (1, 2, 3, 4)]
        per_trial = sweep_beams(cfg, options, ReceiverKind.MMSE, trials, rng.child(i))
        totals = per_trial.sum(axis=2)
        means = totals.mean(axis=1)
        order = np.argsort(means)[::-1]
        best, runner_up = int(order[0]), int(order[1])
        diff = totals[best] - totals[runner_up]
        gap = float(diff.mean())
        stderr = float(diff.std(ddof=1) / math.sqrt(trials))
        expected = _SWEEP_EXPECTED[rdb]
        observed = options[best][0]
        ok = observed == expected and gap > 2 * stderr
        results.append(
            CheckResult(
                name=f"beam-count argmax at {rdb:g} dB",
                passed=ok,
                detail=(
                    f"expected M={expected}, observed M={observed} "
                    f"(gap {gap:.4f} se {stderr:.4f} over M={options[runner_up][0]})"
                ),
            )
        )
    return results


def suite_beam_argmax(seed: int) -> list[CheckResult]:
    """Closed-form optimal beam count vs brute-force scan, exact equality."""
    del seed  # deterministic
    mismatches = 0
    cases = 0
    alphas = [i * 0.05 for i in range(161)]
    for num_tx, num_rx, kind in itertools.product(
        range(1, 7), range(1, 5), (ReceiverKind.MMSE, ReceiverKind.MF)
    ):
        for alpha in alphas:
            best_d, best_m = -1.0, 0
            for m in range(1, num_tx + 1):
                d = dof_single_cell(alpha, m, num_rx, kind)
                if d > best_d:
                    best_d, best_m = d, m
            cases += 1
            if optimal_beams_single_cell(alpha, num_tx, num_rx, kind) != (
                best_d,
                best_m,
            ):
                mismatches += 1
    return [
        CheckResult(
            name="optimal beam count closed form vs brute force",
            passed=mismatches == 0,
            detail=f"{mismatches} mismatches over {cases} cases",
        )
    ]


def suite_region(seed: int) -> list[CheckResult]:
    """Region saturation at the alpha thresholds and MMSE dominance."""
    rng = RngStream(seed, 0x524547)
    g = rng.generator()
    weights = g.uniform(0.0, 1.0, size=(100, 2))
    weights[0] = (1.0, 0.0)
    weights[1] = (0.0, 1.0)
    box = region_upper_bound(2, 4)
    results = []

    threshold_mmse = optimality_threshold(2, 4, 2, ReceiverKind.MMSE)
    region = dof_region((threshold_mmse, threshold_mmse), 4, 2, ReceiverKind.MMSE)
    gap = max(
        abs(region.support(w) - box.support(w)) for w in weights
    )
    results.append(
        CheckResult(
            name="MMSE region saturates the box at its threshold",
            passed=gap <= 1e-12,
            detail=f"alpha={threshold_mmse:g}, max |support gap| = {gap:.2e}",
        )
    )

    threshold_mf = optimality_threshold(2, 4, 2, ReceiverKind.MF)
    for kind in (ReceiverKind.MF, ReceiverKind.AS):
        region = dof_region((threshold_mf, threshold_mf), 4, 2, kind)
        gap = max(abs(region.support(w) - box.support(w)) for w in weights)
        results.append(
            CheckResult(
                name=f"{kind.value} region saturates the box at its threshold",
                passed=gap <= 1e-12,
                detail=f"alpha={threshold_mf:g}, max |support gap| = {gap:.2e}",
            )
        )

    mmse_region = dof_region((1.0, 1.0), 4, 2, ReceiverKind.MMSE)
    mf_region = dof_region((1.0, 1.0), 4, 2, ReceiverKind.MF)
    margins = [mmse_region.support(w) - mf_region.support(w) for w in weights]
    results.append(
        CheckResult(
            name="MMSE region strictly contains MF/AS region at alpha=1",
            passed=min(margins) >= -1e-12 and max(margins) > 1e-9,
            detail=f"support margins in [{min(margins):.3f}, {max(margins):.3f}]",
        )
    )
    return results


def _richardson_t0_derivative(
    q: ShiftedPowerProduct, s: float, order: int
) -> float:
    """Finite-difference reference for d^order/ds^order of 1/Q(s).

    Central differences of spacing h, h/2, h/4 combined by two Richardson
    levels, eliminating the h^2 and h^4 error terms.  Evaluations run in
    extended precision because at order 4 the double-precision roundoff
    floor sits right at the 1e-6 tolerance this oracle has to certify.
    """
    rates, mults = q.rates_and_multiplicities()
    rates = rates.astype(np.longdouble)
    one = np.longdouble(1.0)

    def t0(x: np.ndarray) -> np.ndarray:
        return np.exp(-np.log1p(rates * x[..., None]) @ mults.astype(np.longdouble))

    # step sized against the local log-derivative so truncation and roundoff
    # both land near 1e-8; capped to keep every stencil point above -1/rate
    log_slope = float(np.sum(mults * rates / (one + rates * np.longdouble(s))))
    h = np.longdouble(min(0.02 / log_slope, (s + 1.0 / float(rates.max())) / 10.0))

    def central(step: np.longdouble) -> np.longdouble:
        j = np.arange(order + 1)
        signs = np.longdouble(-1.0) ** j
        coeffs = np.array([math.comb(order, int(i)) for i in j], dtype=np.longdouble)
        points = np.longdouble(s) + (np.longdouble(order) / 2 - j) * step
        return np.sum(signs * coeffs * t0(points)) / step**order

    d1, d2, d4 = central(h), central(h / 2), central(h / 4)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d4 - d2) / 3
    return float((16 * r2 - r1) / 15)


def suite_derivative(seed: int) -> list[CheckResult]:
    """Derivative recursion vs Richardson-extrapolated finite differences."""
    rng = RngStream(seed, 0x444552)
    g = rng.generator()
    worst = 0.0
    checked = 0
    for _ in range(20):
        terms = []
        for _ in range(int(g.integers(1, 4))):
            rate = float(np.exp(g.uniform(np.log(0.3), np.log(3.0))))
            terms.append((rate, int(g.integers(1, 4))))
        q = ShiftedPowerProduct(tuple(terms))
        s = float(g.uniform(0.1, 3.0))
        values = t0_derivatives(q, s, 4)
        for order in range(1, 5):
            reference = _richardson_t0_derivative(q, s, order)
            rel = abs(values[order] - reference) / abs(reference)
            worst = max(worst, rel)
            checked += 1
    return [
        CheckResult(
            name="derivative recursion vs finite-difference oracle",
            passed=worst <= 1e-6,
            detail=f"worst relative error {worst:.2e} over {checked} derivatives",
        )
    ]


def suite_as_miso(seed: int) -> list[CheckResult]:
    """Antenna selection vs enlarged single-antenna population, per N_R."""
    results = []
    for i, num_rx in enumerate((2, 3)):
        cfg = _single_cell(2, 2, num_rx, 10, rho=20.0)
        rng = RngStream(seed, 0x41534D + i)
        report = as_miso_equivalence(cfg, 10_000, rng)
        results.append(
            CheckResult(
                name=f"antenna selection matches MISO population (N_R={num_rx})",
                passed=report.passed,
                detail=(
                    f"two-sample KS={report.statistic:.5f} "
                    f"critical={report.critical_value:.5f}"
                ),
            )
        )
    return results


SUITES: dict[str, Callable[[int], list[CheckResult]]] = {
    "cdf": suite_cdf,
    "oracle": suite_oracle,
    "scaling": suite_scaling,
    "optimality": suite_optimality,
    "sweep-m": suite_sweep_m,
    "beam-argmax": suite_beam_argmax,
    "region": suite_region,
    "derivative": suite_derivative,
    "as-miso": suite_as_miso,
}


def run_suites(
    names: Sequence[str], seed: int, emit: Callable[[str], None] = print
) -> bool:
    """Run the named suites, emit one line per check, return overall pass."""
    all_passed = True
    for name in names:
        for check in SUITES[name](seed):
            marker = "PASS" if check.passed else "FAIL"
            emit(f"[{marker}] {check.name}: {check.detail}")
            all_passed = all_passed and check.passed
    return all_passed
