r"""Degrees-of-freedom formulas and regions for opportunistic beamforming.

With the user population of cell c growing as K_c = Theta(rho^alpha_c),
multiuser diversity buys interference-free scaling up to a point: the
per-cell DoF (prelog of the sum rate) is

    d_c = alpha_c M_c / (sum_l M_l - nr)   if 0 <= alpha_c <= sum_l M_l - nr,
    d_c = M_c                              otherwise,

where nr = N_R for the MMSE receiver and nr = 1 for MF/AS (those receivers
cancel nothing, so only the scheduling gain remains).  When the receiver
has at least as many antennas as there are beams (nr >= sum_l M_l) it nulls
every interferer and d_c = M_c for all alpha.  Silent cells (M_c = 0)
neither serve nor interfere.

On top sit the single-cell beam-count optimization (closed-form argmax over
M), the achievable DoF region (convex hull over all beam allocations), the
interference-free box upper bound, and the alpha thresholds at which the
two coincide.

DoF values are real numbers throughout; nothing is rounded.  The closed-
form optimizer evaluates its branch test through the same float expressions
a direct maximization over M would compare, so the two agree bit-for-bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .receivers import ReceiverKind, _coerce_kind

__all__ = [
    "DofPoint",
    "DofQuery",
    "DofRegion",
    "dof_multi_cell",
    "dof_region",
    "dof_single_cell",
    "optimal_beams_single_cell",
    "optimality_threshold",
    "region_upper_bound",
]


def _effective_antennas(kind) -> int | None:
    """MMSE exploits all N_R antennas for cancellation; MF/AS none."""
    return None if _coerce_kind(kind) is ReceiverKind.MMSE else 1


@dataclass(frozen=True)
class DofQuery:
    """Inputs of the multi-cell DoF formula."""

    alpha: tuple[float, ...]
    beams: tuple[int, ...]
    num_tx_antennas: int
    num_rx_antennas: int
    kind: ReceiverKind

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in self.alpha)
        beams = tuple(int(m) for m in self.beams)
        if len(alpha) != len(beams):
            raise ValueError("alpha and beams must have one entry per cell")
        if any(a < 0 for a in alpha):
            raise ValueError("alpha must be nonnegative")
        if self.num_tx_antennas < 1 or self.num_rx_antennas < 1:
            raise ValueError("antenna counts must be at least 1")
        if any(m < 0 or m > self.num_tx_antennas for m in beams):
            raise ValueError("beam counts must lie in [0, N_T]")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beams", beams)
        object.__setattr__(self, "kind", _coerce_kind(self.kind))


@dataclass(frozen=True)
class DofPoint:
    """Per-cell DoF vector."""

    d: tuple[float, ...]

    def __post_init__(self) -> None:
        d = tuple(float(x) for x in self.d)
        if any(x < 0 for x in d):
            raise ValueError("DoF values must be nonnegative")
        object.__setattr__(self, "d", d)


def dof_single_cell(alpha: float, num_beams: int, num_rx_antennas: int, kind) -> float:
    """Single-cell DoF for a fixed beam count.

    alpha * M / (M - nr) on 0 <= alpha <= M - nr, else M; d = M for every
    alpha once nr >= M.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    m = int(num_beams)
    if m < 1:
        raise ValueError("need at least one beam")
    if num_rx_antennas < 1:
        raise ValueError("need at least one receive antenna")
    nr = _effective_antennas(kind) or num_rx_antennas
    if nr >= m:
        return float(m)
    if alpha <= m - nr:
        return alpha * m / (m - nr)
    return float(m)


def optimal_beams_single_cell(
    alpha: float, num_tx_antennas: int, num_rx_antennas: int, kind
) -> tuple[float, int]:
    """Max single-cell DoF over M in {1..N_T} and its smallest argmax.

    Closed form: with nr as in dof_single_cell and f = alpha - floor(alpha),

    * alpha > N_T - nr          -> d* = M* = N_T;
    * nr >= f*(floor(alpha)+nr+1) -> d* = M* = floor(alpha) + nr;
    * otherwise                 -> M* = floor(alpha) + nr + 1,
                                   d* = alpha M*/(M* - nr).

    The middle test is evaluated by comparing the two candidate DoF values
    through the exact expressions dof_single_cell uses, so results match a
    brute-force scan bit-for-bit even when float rounding nudges f.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    nt = int(num_tx_antennas)
    nr = _effective_antennas(kind) or num_rx_antennas
    if nt < 1 or num_rx_antennas < 1:
        raise ValueError("antenna counts must be at least 1")
    if nr >= nt:
        return float(nt), nt
    if alpha > nt - nr:
        return float(nt), nt
    saturated = math.floor(alpha) + nr
    interior = saturated + 1
    d_interior = alpha * interior / (interior - nr)
    if d_interior > saturated:
        return d_interior, interior
    return float(saturated), saturated


def dof_multi_cell(q: DofQuery) -> DofPoint:
    """Per-cell DoF for one beam allocation across all cells."""
    nr = _effective_antennas(q.kind) or q.num_rx_antennas
    total = sum(q.beams)
    d = []
    for alpha_c, m_c in zip(q.alpha, q.beams):
        if m_c == 0:
            d.append(0.0)
        elif nr >= total:
            d.append(float(m_c))
        elif alpha_c <= total - nr:
            d.append(alpha_c * m_c / (total - nr))
        else:
            d.append(float(m_c))
    return DofPoint(tuple(d))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_2d(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Counterclockwise extreme points by monotone chain; collinear dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class DofRegion:
    """Achievable DoF region: generating points and their convex hull.

    points pairs each beam allocation with its DoF vector (allocation None
    for bounds not tied to one).  hull_vertices lists the extreme points
    counterclockwise for C = 2 (for C = 1, the segment endpoints); higher
    dimensions expose the support function and Pareto frontier instead.
    """

    num_cells: int
    points: tuple[tuple[tuple[int, ...] | None, DofPoint], ...]

    def __post_init__(self) -> None:
        if self.num_cells < 1:
            raise ValueError("need at least one cell")
        if not self.points:
            raise ValueError("region needs at least one generating point")
        for _, point in self.points:
            if len(point.d) != self.num_cells:
                raise ValueError("DoF vectors must have one entry per cell")

    def support(self, weights) -> float:
        """max over generating points of sum_c weights_c * d_c."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.num_cells,):
            raise ValueError("need one weight per cell")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        return float(max(np.dot(w, point.d) for _, point in self.points))

    @property
    def hull_vertices(self) -> tuple[DofPoint, ...] | None:
        if self.num_cells == 1:
            values = [point.d[0] for _, point in self.points]
            lo, hi = min(values), max(values)
            if lo == hi:
                return (DofPoint((lo,)),)
            return (DofPoint((lo,)), DofPoint((hi,)))
        if self.num_cells == 2:
            hull = _hull_2d([(p.d[0], p.d[1]) for _, p in self.points])
            return tuple(DofPoint(v) for v in hull)
        return None

    def pareto_points(self) -> tuple[tuple[tuple[int, ...] | None, DofPoint], ...]:
        """Generating points not componentwise dominated by another."""
        kept = []
        vectors = [np.asarray(p.d) for _, p in self.points]
        for i, (m, point) in enumerate(self.points):
            vi = vectors[i]
            dominated = any(
                j != i and np.all(vectors[j] >= vi) and np.any(vectors[j] > vi)
                for j in range(len(vectors))
            )
            if not dominated:
                kept.append((m, point))
        return tuple(kept)


def dof_region(alpha, num_tx_antennas: int, num_rx_antennas: int, kind) -> DofRegion:
    """Achievable region: every allocation m in {0..N_T}^C, hulled."""
    alpha = tuple(float(a) for a in alpha)
    kind = _coerce_kind(kind)
    num_cells = len(alpha)
    if num_cells < 1:
        raise ValueError("need at least one cell")
    points = []
    for m in itertools.product(range(num_tx_antennas + 1), repeat=num_cells):
        q = DofQuery(
            alpha=alpha,
            beams=m,
            num_tx_antennas=num_tx_antennas,
            num_rx_antennas=num_rx_antennas,
            kind=kind,
        )
        points.append((m, dof_multi_cell(q)))
    return DofRegion(num_cells=num_cells, points=tuple(points))


def region_upper_bound(num_cells: int, num_tx_antennas: int) -> DofRegion:
    """Interference-free box {d : 0 <= d_c <= N_T}, as its corner points."""
    if num_cells < 1 or num_tx_antennas < 1:
        raise ValueError("cell and antenna counts must be at least 1")
    corners = itertools.product((0.0, float(num_tx_antennas)), repeat=num_cells)
    return DofRegion(
        num_cells=num_cells,
        points=tuple((None, DofPoint(c)) for c in corners),
    )


def optimality_threshold(
    num_cells: int, num_tx_antennas: int, num_rx_antennas: int, kind
) -> float:
    """Least alpha at which the achievable region fills the upper-bound box."""
    if num_cells < 1 or num_tx_antennas < 1 or num_rx_antennas < 1:
        raise ValueError("counts must be at least 1")
    nr = _effective_antennas(kind) or num_rx_antennas
    return float(num_cells * num_tx_antennas - nr)
