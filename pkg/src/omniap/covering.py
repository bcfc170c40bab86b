"""Covering and packing numbers: exact segment counts, brackets, analytic bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .construction import (
    BudgetExceeded,
    DiamondPiece,
    OmniSet,
    box_distance,
    diamond_grid,
    sample_budget,
)
from .geometry import Ball, SegmentPiece, clip_segment_to_ball

NET_FACTOR = 0.25


@dataclass(frozen=True)
class CoverBracket:
    lower: int
    upper: int
    r: float
    description: str = ""

    def __post_init__(self):
        if not 1 <= self.lower <= self.upper:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")


def cover_count_segment(length: float, r: float) -> int:
    """Fewest sets of diameter <= r covering a segment of the given length."""
    if not r > 0:
        raise ValueError("r must be positive")
    if length < 0:
        raise ValueError("length must be nonnegative")
    if length == 0:
        return 1
    return max(1, math.ceil(length / r))


def packing_subset(points, r: float) -> np.ndarray:
    """Indices of a maximal (> r)-separated subset, by farthest-point insertion from index 0."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    return _kernels.fps_packing(pts, r)


def packing_lower(points, r: float) -> int:
    return int(len(packing_subset(points, r)))


def n_of(R: float) -> int:
    """The integer n with 2^-(n+1) < R <= 2^-n, from the exact binary exponent."""
    if not R > 0:
        raise ValueError("R must be positive")
    mant, exp = math.frexp(R)  # R = mant * 2^exp, 0.5 <= mant < 1
    return 1 - exp if mant == 0.5 else -exp


def n_plus(R: float) -> int:
    return max(0, n_of(R))


def analytic_cover_bound(R: float, r: float) -> float:
    """Closed form of 1 + sum_{i >= n+(R)} 1 / (r 2^(i+1))."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    return 1.0 + 1.0 / math.ldexp(r, n_plus(R))


def ball_cover_count(radius: float, r: float, d: int) -> int:
    # axis-aligned cubes of side r / sqrt(d) have diameter r
    if 2.0 * radius <= r:
        return 1
    return math.ceil(2.0 * radius * math.sqrt(d) / r) ** d


def _may_meet(j: int, ball: Ball) -> bool:
    c = float(np.linalg.norm(ball.center))
    return 0.75 * math.ldexp(1.0, -j) <= c + ball.radius and 1.25 * math.ldexp(1.0, -j) >= c - ball.radius


def _clip_diamond(pc: DiamondPiece, ball: Ball):
    """Outer generator-coefficient box of the piece-ball intersection, or None."""
    A, hws = pc.generators()
    v = ball.center - pc.center
    if box_distance(v, A, hws) > ball.radius:
        return None
    lo, hi = -hws.copy(), hws.copy()
    gram = A @ A.T
    if np.linalg.matrix_rank(gram) == len(hws):
        t_star = np.linalg.solve(gram, A @ v)
        perp2 = float(np.sum((v - t_star @ A) ** 2))
        reach = math.sqrt(max(0.0, ball.radius ** 2 - perp2))
        width = reach * np.sqrt(np.diag(np.linalg.inv(gram)))
        lo, hi = np.maximum(lo, t_star - width), np.minimum(hi, t_star + width)
        lo = np.minimum(lo, hi)
    return lo, hi


def _diamond_cell_side(A: np.ndarray, r: float) -> float:
    n = A.shape[0]
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
    return r / float(np.linalg.norm(signs @ A, axis=1).max())


def _grid_cell_count(units, hws, center, ball: Ball, r: float, budget: int) -> int | None:
    """Grid cells of diameter r that can meet a full-dimensional piece inside the ball.

    A cell meeting the region has its centre within half a diagonal of both
    the ball and the piece; the piece test uses the coefficient box widened
    by that distance times the row norms of the inverse generator matrix.
    """
    d = units.shape[1]
    if units.shape[0] != d:
        return None
    h = r / math.sqrt(d)
    reach = 0.5 * r  # half the cell diagonal
    inv = np.linalg.inv(units.T)
    widen = reach * np.linalg.norm(inv, axis=1)
    corner = np.abs(units).T @ hws
    lo = np.maximum(ball.center - ball.radius, center - corner) - reach
    hi = np.minimum(ball.center + ball.radius, center + corner) + reach
    if np.any(hi < lo):
        return 0
    ilo, ihi = np.floor(lo / h).astype(np.int64), np.ceil(hi / h).astype(np.int64)
    if math.prod(int(b - a + 1) for a, b in zip(ilo, ihi)) > budget:
        return None
    axes = [(np.arange(a, b + 1) + 0.5) * h for a, b in zip(ilo, ihi)]
    cells = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    near_ball = np.linalg.norm(cells - ball.center, axis=1) <= ball.radius + reach
    t = (cells - center) @ inv.T
    near_piece = np.all(np.abs(t) <= hws + widen, axis=1)
    return int(np.count_nonzero(near_ball & near_piece))


def _piece_counts(K: OmniSet, ball: Ball, r: float, spacing: float, budget: int):
    counts, samples = {}, []
    used = 0
    for j in range(K.depth + 1):
        if not _may_meet(j, ball):
            continue
        pc = K.piece(j)
        if isinstance(pc, SegmentPiece):
            seg = clip_segment_to_ball(pc, ball)
            if seg is None:
                continue
            # a chord never exceeds the diameter; the cap removes rounding excess
            length = min(seg.length, 2.0 * ball.radius)
            n = cover_count_segment(length, r)
            counts[j] = n
            # n equally spaced points are (> r)-separated: an optimal packing of the segment
            t = np.linspace(0.0, 1.0, n)[:, None] if n > 1 else np.array([[0.5]])
            pts = seg.endpoint_a + t * (seg.endpoint_b - seg.endpoint_a)
        else:
            box = _clip_diamond(pc, ball)
            if box is None:
                continue
            lo, hi = box
            units, _ = pc.generators()
            if len(units) == 1:
                length = min(float(hi[0] - lo[0]), 2.0 * ball.radius)
                counts[j] = cover_count_segment(length, r)
            else:
                side = _diamond_cell_side(units, r)
                counts[j] = math.prod(max(1, math.ceil((b - a) / side)) for a, b in zip(lo, hi))
                grid = _grid_cell_count(units, pc.generators()[1], pc.center, ball, r, budget)
                if grid is not None:
                    counts[j] = min(counts[j], max(grid, 1))
            pts = diamond_grid(pc, lo, hi, spacing, budget - used)
            pts = pts[np.linalg.norm(pts - ball.center, axis=1) <= ball.radius]
        used += len(pts)
        if used > budget:
            raise BudgetExceeded("sampling budget exceeded; raise r")
        samples.append(pts)
    return counts, samples


def cover_bracket(K: OmniSet, ball: Ball, r: float, net_factor: float = NET_FACTOR,
                  budget: int | None = None) -> CoverBracket:
    """Rigorous bracket lower <= N(ball & K, r) <= upper for the truncated set."""
    if not r > 0:
        raise ValueError("r must be positive")
    budget = sample_budget() if budget is None else budget
    counts, samples = _piece_counts(K, ball, r, net_factor * r, budget)
    origin_in = K.includes_origin and ball.contains(np.zeros(K.dimension))
    if origin_in:
        samples.append(np.zeros((1, K.dimension)))

    # pieces >= L together with the origin sit in B(0, 1.25 * 2^-L); one
    # cover of that ball may beat covering them one by one
    levels = sorted(counts)
    upper = sum(counts.values()) + int(origin_in)
    head = 0
    for L in range(K.depth + 2):
        tail_levels = [j for j in levels if j >= L]
        if tail_levels or origin_in:
            group = ball_cover_count(1.25 * math.ldexp(1.0, -L), r, K.dimension)
            upper = min(upper, head + group)
        head += counts.get(L, 0)
        if head >= upper:
            break

    if samples:
        pts = np.vstack(samples)
        lower = int(len(_kernels.grid_packing(pts, r)))
    else:
        lower = 0
    if upper == 0:
        raise ValueError("ball does not meet the set")
    return CoverBracket(max(lower, 1), upper, r, "upper: per-piece covers + core ball; lower: greedy packing")
