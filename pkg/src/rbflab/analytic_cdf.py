r"""Closed-form SINR distribution laws for the three spatial receivers.

The central object is the law of a Hermitian quadratic form
S = h^H (X Psi X^H)^{-1} h with h ~ CN(0, I_p), X a p x n complex Gaussian
matrix (n >= p), and Psi a positive diagonal matrix.  Its CDF is a rational
function of the threshold s whose denominator is Q(s) = prod_j (1 + a_j s)
over the diagonal weights and whose numerator coefficients are read off the
expansion of Q.  The three receiver laws are specializations:

* MMSE: the exact SINR is such a quadratic form once the noise identity is
  absorbed as the limit of many vanishing-weight dimensions, which turns the
  rational tail into an exponential-times-rational tail.
* MF: the CDF comes out as an exponential times a finite double sum over
  derivatives of the no-noise tail T0(s) = 1/Q0(s).
* AS: each receive antenna sees an independent scalar-channel SINR, so the
  max-over-antennas CDF is the single-antenna law raised to the N_R power.

All evaluators are immutable after construction and vectorized over s.
Thresholds are linear-scale SINR values, never dB.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .network_model import DerivedGains, NetworkConfig

__all__ = [
    "AntennaSelectionCdf",
    "CdfCurve",
    "CdfHypothesisError",
    "MatchedFilterCdf",
    "RationalExpCdf",
    "ShiftedPowerProduct",
    "as_cdf",
    "default_grid",
    "expand_coefficients",
    "general_quadratic_cdf",
    "mf_cdf",
    "mmse_cdf",
    "t0_derivatives",
]

_EXCURSION_TOL = 1e-9


class CdfHypothesisError(ValueError):
    """The closed-form law's validity hypothesis does not hold.

    Raised by :func:`mmse_cdf` when the receiver has at least as many
    antennas as there are beams in the whole network; the rational-times-
    exponential form is not valid there and callers should fall back to
    Monte Carlo sampling.
    """


def _clamp_unit(values: np.ndarray, label: str) -> np.ndarray:
    """Clamp CDF values to [0, 1], warning if the excursion is material."""
    lo = float(np.min(values, initial=0.0))
    hi = float(np.max(values, initial=1.0))
    excursion = max(-lo, hi - 1.0)
    if excursion > _EXCURSION_TOL:
        warnings.warn(
            f"{label}: CDF evaluation left [0, 1] by {excursion:.3e}",
            RuntimeWarning,
            stacklevel=3,
        )
    return np.clip(values, 0.0, 1.0)


def _check_thresholds(s) -> tuple[np.ndarray, bool]:
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise ValueError("SINR thresholds must be nonnegative")
    return arr, arr.ndim == 0


@dataclass(frozen=True, eq=False)
class ShiftedPowerProduct:
    r"""A product Q(s) = prod_j (1 + a_j s)^{m_j} with a_j > 0, m_j >= 1.

    The empty product (Q = 1, degree 0) is allowed.  Rates may repeat across
    terms; :meth:`merged` groups them.

    Examples
    --------
    >>> q = ShiftedPowerProduct(((1.0, 1), (2.0, 1)))
    >>> q.degree
    2
    >>> float(q.value(1.0))
    6.0
    """

    terms: tuple[tuple[float, int], ...]

    def __post_init__(self) -> None:
        clean = []
        for rate, mult in self.terms:
            rate = float(rate)
            mult = int(mult)
            if not rate > 0:
                raise ValueError(f"rates must be positive, got {rate}")
            if mult < 1:
                raise ValueError(f"multiplicities must be at least 1, got {mult}")
            clean.append((rate, mult))
        object.__setattr__(self, "terms", tuple(clean))

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.terms)

    def merged(self) -> "ShiftedPowerProduct":
        """Combine terms with identical rates, sorted by descending rate."""
        acc: dict[float, int] = {}
        for rate, mult in self.terms:
            acc[rate] = acc.get(rate, 0) + mult
        return ShiftedPowerProduct(
            tuple(sorted(acc.items(), key=lambda t: -t[0]))
        )

    def rates_and_multiplicities(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.terms:
            return np.empty(0), np.empty(0)
        rates, mults = zip(*self.terms)
        return np.asarray(rates, dtype=float), np.asarray(mults, dtype=float)

    def log_value(self, s) -> np.ndarray:
        """log Q(s), elementwise over s, computed via log1p for stability."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for rate, mult in self.terms:
            out = out + mult * np.log1p(rate * s)
        return out

    def value(self, s) -> np.ndarray:
        return np.exp(self.log_value(s))


def expand_coefficients(
    q: ShiftedPowerProduct, max_degree: int | None = None
) -> np.ndarray:
    """Coefficients of Q(s) in ascending powers of s.

    Each factor (1 + a s)^m contributes binomial coefficients generated by a
    stable multiplicative recurrence; factors are combined by convolution.
    With ``max_degree`` set, the result is truncated to that many powers,
    which keeps huge-degree products (used when approximating the noise
    identity by many vanishing-weight dimensions) cheap and overflow-free.

    Returns
    -------
    numpy.ndarray
        ``[beta_0, ..., beta_d]`` with ``beta_0 = 1`` and
        ``d = min(q.degree, max_degree)``.
    """
    cap = q.degree if max_degree is None else min(q.degree, int(max_degree))
    coeffs = np.ones(1)
    for rate, mult in q.merged().terms:
        k = np.arange(1, min(int(mult), cap) + 1, dtype=float)
        factor = np.concatenate(
            ([1.0], np.cumprod(rate * (mult - k + 1.0) / k))
        )
        coeffs = np.convolve(coeffs, factor)[: cap + 1]
    return coeffs


def _log_polyval_positive(coeffs: np.ndarray, powers: np.ndarray, s: np.ndarray) -> np.ndarray:
    """log of sum_i coeffs[i] * s**powers[i] for positive coeffs, via logsumexp.

    Entries with s = 0 return log(c_0) when power 0 is present, else -inf.
    """
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.log(s)
        logc = np.log(coeffs)
    # terms[i, ...] = log c_i + p_i * log s; 0 * log(0) must give 0
    with np.errstate(invalid="ignore"):
        prod = powers[:, None] * logs[None, :]
    prod = np.where(powers[:, None] == 0, 0.0, prod)
    terms = logc[:, None] + prod
    peak = np.max(terms, axis=0)
    safe_peak = np.where(np.isfinite(peak), peak, 0.0)
    total = np.sum(np.exp(terms - safe_peak[None, :]), axis=0)
    with np.errstate(divide="ignore"):
        return np.where(np.isfinite(peak), safe_peak + np.log(total), peak)


@dataclass(frozen=True, eq=False)
class RationalExpCdf:
    r"""CDF of the form F(s) = 1 - e^{-s/eta} N(s) / Q(s).

    ``numer`` holds the complement-form numerator coefficients
    ``[c_0, ..., c_{p-1}]`` (all positive, ``c_0 = 1``), ``denom`` the
    product Q, and ``eta`` the exponential scale.  ``eta = None`` drops the
    exponential factor and describes the pure-rational quadratic-form law;
    in that case ``tail_coeffs`` carries the remaining coefficients
    ``[beta_p, ..., beta_n]`` of Q so the equivalent direct tail form
    F(s) = (sum_{i>=p} beta_i s^i) / Q(s) can be evaluated as a cross-check.
    """

    eta: float | None
    numer: np.ndarray
    denom: ShiftedPowerProduct
    p: int
    tail_coeffs: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        numer = np.asarray(self.numer, dtype=float)
        if numer.ndim != 1 or numer.size != self.p:
            raise ValueError("numerator must hold exactly p coefficients")
        if np.any(numer <= 0):
            raise ValueError("complement-form numerator coefficients must be positive")
        numer.flags.writeable = False
        object.__setattr__(self, "numer", numer)
        if self.eta is not None and not self.eta > 0:
            raise ValueError("eta must be positive when present")
        if self.tail_coeffs is not None:
            tail = np.asarray(self.tail_coeffs, dtype=float)
            tail.flags.writeable = False
            object.__setattr__(self, "tail_coeffs", tail)

    def evaluate(self, s) -> np.ndarray:
        """F(s) via the complement form, stable for any product degree."""
        arr, scalar = _check_thresholds(s)
        log_num = _log_polyval_positive(
            self.numer, np.arange(self.p, dtype=float), arr.ravel()
        ).reshape(arr.shape)
        expo = -arr / self.eta if self.eta is not None else 0.0
        tail = np.exp(expo + log_num - self.denom.log_value(arr))
        out = _clamp_unit(1.0 - tail, type(self).__name__)
        return out[()] if scalar else out

    __call__ = evaluate

    def evaluate_tail_form(self, s) -> np.ndarray:
        """F(s) via the direct tail sum; pure-rational laws only."""
        if self.eta is not None or self.tail_coeffs is None:
            raise ValueError("direct tail form exists only for the pure-rational law")
        arr, scalar = _check_thresholds(s)
        n = self.p + self.tail_coeffs.size - 1
        log_num = _log_polyval_positive(
            self.tail_coeffs, np.arange(self.p, n + 1, dtype=float), arr.ravel()
        ).reshape(arr.shape)
        out = _clamp_unit(
            np.exp(log_num - self.denom.log_value(arr)), type(self).__name__
        )
        return out[()] if scalar else out

    def curve(self, grid: np.ndarray) -> "CdfCurve":
        return CdfCurve(grid=np.asarray(grid, dtype=float), values=self.evaluate(grid))


def general_quadratic_cdf(q: ShiftedPowerProduct, p: int) -> RationalExpCdf:
    r"""Law of S = h^H (X Psi X^H)^{-1} h for h ~ CN(0, I_p), X p x n Gaussian.

    The diagonal weights of Psi are the rates of ``q`` counted with
    multiplicity, n = deg(q).  Requires n >= p >= 1.  The returned object
    evaluates the complement form; construction cross-checks it against the
    direct tail form on an internal grid and refuses to return on
    disagreement.

    Examples
    --------
    >>> law = general_quadratic_cdf(ShiftedPowerProduct(((1.0, 1),)), p=1)
    >>> float(law.evaluate(1.0))
    0.5
    """
    p = int(p)
    n = q.degree
    if p < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    if p > n:
        raise ValueError(f"product degree {n} is below p={p}; law undefined")
    beta = expand_coefficients(q)
    law = RationalExpCdf(
        eta=None, numer=beta[:p], denom=q.merged(), p=p, tail_coeffs=beta[p:]
    )
    rates, _ = law.denom.rates_and_multiplicities()
    pivot = 1.0 / float(np.exp(np.mean(np.log(rates))))
    check = pivot * np.logspace(-2, 2, 17)
    direct = law.evaluate(check)
    tail = law.evaluate_tail_form(check)
    # Deep in the upper tail both forms saturate at 1 and the high-order
    # coefficients that the direct sum relies on may underflow at very
    # large degree, so the comparison is informative only below it.
    live = direct <= 1 - 1e-12
    if not np.allclose(direct[live], tail[live], rtol=1e-9, atol=1e-11):
        raise RuntimeError(
            "complement-form and tail-form evaluations disagree; "
            "coefficient expansion is numerically unhealthy at this degree"
        )
    return law


def _own_cell_denominator(
    gains: DerivedGains, cfg: NetworkConfig, c: int
) -> tuple[float, ShiftedPowerProduct]:
    """Per-beam SNR and interference product Q0 for cell c's receivers.

    Q0(s) = (1+s)^{M_c - 1} * prod_{l != c} (1 + (mu_{l,c}/eta_c) s)^{M_l},
    with silent cells and zero cross gains contributing nothing.
    """
    if not 0 <= c < cfg.num_cells:
        raise ValueError(f"cell index {c} out of range")
    if cfg.beams[c] == 0:
        raise ValueError(f"cell {c} transmits no beams; no SINR law exists")
    eta_c = float(gains.eta[c])
    terms: list[tuple[float, int]] = []
    if cfg.beams[c] > 1:
        terms.append((1.0, cfg.beams[c] - 1))
    for l in range(cfg.num_cells):
        if l == c or cfg.beams[l] == 0:
            continue
        rate = float(gains.inr[l, c]) / eta_c
        if rate > 0:
            terms.append((rate, cfg.beams[l]))
    return eta_c, ShiftedPowerProduct(tuple(terms)).merged()


def mmse_cdf(gains: DerivedGains, cfg: NetworkConfig, c: int) -> RationalExpCdf:
    r"""Exact SINR law for the MMSE receiver in cell c.

    F(s) = 1 - e^{-s/eta_c} (sum_{i<N_R} zeta_i s^i) / Q0(s), valid whenever
    N_R <= (total beams in the network) - 1.  The numerator arises from the
    quadratic-form law by absorbing the noise identity as N extra dimensions
    of weight 1/(N eta_c) and letting N grow: the surviving coefficients are
    the convolution of Q0's coefficients with the series of e^{s/eta_c},
    zeta_k = sum_{j<=k} q_j / (eta_c^{k-j} (k-j)!).

    Raises
    ------
    CdfHypothesisError
        If N_R >= total beams; the closed form is invalid there and the
        distribution should be sampled by Monte Carlo instead.
    """
    total_beams = sum(cfg.beams)
    if cfg.num_rx_antennas >= total_beams:
        raise CdfHypothesisError(
            f"receiver with {cfg.num_rx_antennas} antennas needs at most "
            f"{total_beams - 1} (total beams - 1); closed form invalid, "
            "sample the SINR by Monte Carlo instead"
        )
    eta_c, q0 = _own_cell_denominator(gains, cfg, c)
    p = cfg.num_rx_antennas
    qcoef = expand_coefficients(q0, max_degree=p - 1)
    inv = 1.0 / eta_c
    expseries = np.array([inv**i / math.factorial(i) for i in range(p)])
    zeta = np.convolve(qcoef, expseries)[:p]
    return RationalExpCdf(eta=eta_c, numer=zeta, denom=q0, p=p)


def t0_derivatives(q: ShiftedPowerProduct, s, max_order: int) -> np.ndarray:
    r"""Derivatives of T0(s) = 1/Q(s) up to ``max_order``, vectorized over s.

    Uses the logarithmic derivative g(s) = (log T0)'(s) =
    -sum_j m_j a_j / (1 + a_j s), whose own derivatives are closed-form
    g^{(k)}(s) = -sum_j m_j (-1)^k k! a_j^{k+1} / (1 + a_j s)^{k+1}, combined
    with the Leibniz recursion
    T0^{(m)} = sum_{k=0}^{m-1} C(m-1, k) g^{(k)} T0^{(m-1-k)}.

    Returns an array of shape ``(max_order + 1,) + shape(s)``.

    Examples
    --------
    >>> t = t0_derivatives(ShiftedPowerProduct(((1.0, 1),)), 0.0, 3)
    >>> [float(x) for x in t]
    [1.0, -1.0, 2.0, -6.0]
    """
    max_order = int(max_order)
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    arr, _ = _check_thresholds(s)
    merged = q.merged()
    rates, mults = merged.rates_and_multiplicities()
    out = np.empty((max_order + 1,) + arr.shape)
    out[0] = np.exp(-merged.log_value(arr))
    if max_order >= 1:
        if rates.size:
            u = rates.reshape(rates.shape + (1,) * arr.ndim) / (
                1.0 + np.multiply.outer(rates, arr)
            )
            g = np.stack(
                [
                    -math.factorial(k)
                    * (-1.0) ** k
                    * np.tensordot(mults, u ** (k + 1), axes=(0, 0))
                    for k in range(max_order)
                ]
            )
        else:
            g = np.zeros((max_order,) + arr.shape)
        for m in range(1, max_order + 1):
            acc = np.zeros_like(arr)
            for k in range(m):
                acc += math.comb(m - 1, k) * g[k] * out[m - 1 - k]
            out[m] = acc
    return out


@dataclass(frozen=True, eq=False)
class MatchedFilterCdf:
    r"""Exact SINR law for the matched-filter (MRC) receiver.

    F(s) = 1 - e^{-s/eta} sum_{k<N_R} sum_{m<=k}
    [(-1)^m s^k / ((k-m)! m! eta^{k-m})] T0^{(m)}(s) with T0 = 1/Q0.  Every
    summand is nonnegative because T0 is completely monotone, so the double
    sum involves no cancellation.
    """

    eta: float
    denom: ShiftedPowerProduct
    num_antennas: int

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.num_antennas < 1:
            raise ValueError("need at least one receive antenna")

    def evaluate(self, s) -> np.ndarray:
        arr, scalar = _check_thresholds(s)
        nr = self.num_antennas
        t0d = t0_derivatives(self.denom, arr, nr - 1)
        signs = (-1.0) ** np.arange(nr)
        alternating = np.clip(signs.reshape((nr,) + (1,) * arr.ndim) * t0d, 0.0, None)
        total = np.zeros_like(arr)
        for k in range(nr):
            inner = np.zeros_like(arr)
            for m in range(k + 1):
                coef = 1.0 / (
                    math.factorial(k - m) * math.factorial(m) * self.eta ** (k - m)
                )
                inner += coef * alternating[m]
            total += arr**k * inner
        with np.errstate(divide="ignore"):
            log_total = np.log(total)
        tail = np.exp(-arr / self.eta + log_total)
        out = _clamp_unit(1.0 - tail, type(self).__name__)
        return out[()] if scalar else out

    __call__ = evaluate

    def curve(self, grid: np.ndarray) -> "CdfCurve":
        return CdfCurve(grid=np.asarray(grid, dtype=float), values=self.evaluate(grid))


@dataclass(frozen=True, eq=False)
class AntennaSelectionCdf:
    r"""Exact SINR law for the antenna-selection receiver.

    Each antenna's SINR follows the single-antenna law
    F1(s) = 1 - e^{-s/eta}/Q0(s); the selected maximum over N_R independent
    antennas gives F(s) = F1(s)^{N_R}.
    """

    eta: float
    denom: ShiftedPowerProduct
    num_antennas: int

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.num_antennas < 1:
            raise ValueError("need at least one receive antenna")

    def evaluate(self, s) -> np.ndarray:
        arr, scalar = _check_thresholds(s)
        base = -np.expm1(-(arr / self.eta + self.denom.log_value(arr)))
        out = _clamp_unit(base**self.num_antennas, type(self).__name__)
        return out[()] if scalar else out

    __call__ = evaluate

    def curve(self, grid: np.ndarray) -> "CdfCurve":
        return CdfCurve(grid=np.asarray(grid, dtype=float), values=self.evaluate(grid))


def mf_cdf(gains: DerivedGains, cfg: NetworkConfig, c: int) -> MatchedFilterCdf:
    """SINR law of the matched-filter receiver for users of cell c."""
    eta_c, q0 = _own_cell_denominator(gains, cfg, c)
    return MatchedFilterCdf(eta=eta_c, denom=q0, num_antennas=cfg.num_rx_antennas)


def as_cdf(gains: DerivedGains, cfg: NetworkConfig, c: int) -> AntennaSelectionCdf:
    """SINR law of the antenna-selection receiver for users of cell c."""
    eta_c, q0 = _own_cell_denominator(gains, cfg, c)
    return AntennaSelectionCdf(eta=eta_c, denom=q0, num_antennas=cfg.num_rx_antennas)


@dataclass(frozen=True, eq=False)
class CdfCurve:
    """A CDF evaluated on a strictly increasing nonnegative grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if grid.size and grid[0] < 0:
            raise ValueError("grid must be nonnegative")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(values < -_EXCURSION_TOL) or np.any(values > 1 + _EXCURSION_TOL):
            raise ValueError("values must lie in [0, 1]")
        if np.any(np.diff(values) < -_EXCURSION_TOL):
            raise ValueError("CDF values must be nondecreasing")
        for name, arr in (("grid", grid), ("values", values)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def to_csv(self, path, header_lines: tuple[str, ...] = ()) -> None:
        """Write `s,F` rows at 12 significant digits, after `# `-prefixed
        passthrough header lines."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("s,F\n")
            for s, f in zip(self.grid, self.values):
                fh.write(f"{s:.12g},{f:.12g}\n")


def default_grid(eta: float, num_points: int = 400) -> np.ndarray:
    """Log-spaced threshold grid spanning 1e-3 to 1e3 times the per-beam SNR."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    return np.geomspace(1e-3 * eta, 1e3 * eta, int(num_points))
