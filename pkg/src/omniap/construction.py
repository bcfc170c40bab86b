"""Truncated omnidirectional set: shrinking pieces plus the origin.

Piece ``j`` sits at ``2^-j e1``. In segment mode it is the segment
``{t xi_j + 2^-j e1 : |t| <= 2^-(j+2)}`` with ``xi_j`` the ``j``-th enumerated
direction; in diamond mode it is the parallelotope spanned by the ``j``-th
direction tuple with every coefficient bounded by ``1 / (m 2^(j+2))``.

Geometry is computed in a per-level *local frame*, the real frame scaled by
``2^j``, where every piece has centre ``e1`` and coefficient bound ``1/(4m)``.
Scaling by a power of two is exact in binary floating point, so local-frame
computations agree bit-for-bit with real-frame ones wherever the latter do not
underflow, and stay usable at levels far beyond the double exponent range.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .directions import direction_at, orientation_tuple_at
from .geometry import SegmentPiece, point_segment_distance

SEGMENTS = "segments"
DIAMONDS = "diamonds"

# pieces list is materialised eagerly only up to this depth
MAX_MATERIALISED_DEPTH = 1 << 20
# relative slack on membership tests, absorbs rounding in projections
MEMBERSHIP_RTOL = 1e-15
ORIGIN = "origin"


class ConstructionError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def sample_budget() -> int:
    return int(float(os.environ.get("APK_BUDGET", "5e6")))


@dataclass(frozen=True)
class DiamondPiece:
    level: int
    directions: tuple
    center: np.ndarray
    half_width: float

    @property
    def m(self):
        return len(self.directions)

    @property
    def unit_matrix(self):
        return np.array([xi.unit for xi in self.directions])

    def generators(self):
        return reduced_generators(self.directions, self.half_width)

    def vertices(self):
        units, hws = self.generators()
        n = len(hws)
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
        return self.center + (signs * hws) @ units


def reduced_generators(directions, half_width: float):
    """Distinct generator directions of a parallelotope piece with their half-widths.

    Parallel directions (equal primitive vectors up to sign) span the same
    segment, so they are merged and their coefficient bounds add up.
    """
    units, hws, keys = [], [], []
    for xi in directions:
        z = xi.integer_vector
        neg = tuple(-v for v in z)
        if z in keys or neg in keys:
            i = keys.index(z) if z in keys else keys.index(neg)
            hws[i] += half_width
            continue
        keys.append(z)
        units.append(xi.unit)
        hws.append(half_width)
    return np.array(units), np.array(hws)


@lru_cache(maxsize=1 << 16)
def _level_directions(d: int, m: int, mode: str, j: int) -> tuple:
    if mode == SEGMENTS:
        return (direction_at(d, j),)
    return orientation_tuple_at(d, m, j).directions


def _check_envelope(units: np.ndarray, hws: np.ndarray, j: int) -> None:
    # x1-extent of the local piece must stay inside [3/4, 5/4]; envelopes of
    # different levels are disjoint, so this proves pairwise disjointness
    reach = float(hws @ np.abs(units[:, 0]))
    if not reach <= 0.25:
        raise ConstructionError(f"construction overlap at level {j}")


@dataclass(frozen=True)
class OmniSet:
    """Union of pieces ``0..depth`` plus the origin."""

    dimension: int
    m: int
    depth: int
    mode: str = SEGMENTS
    includes_origin: bool = True

    def __post_init__(self):
        if self.dimension < 2:
            raise ConstructionError("the construction needs d >= 2")
        if not 1 <= self.m <= self.dimension:
            raise ConstructionError(f"need 1 <= m <= d, got m={self.m}")
        if self.mode not in (SEGMENTS, DIAMONDS):
            raise ConstructionError(f"unknown mode {self.mode!r}")
        if self.mode == SEGMENTS and self.m != 1:
            raise ConstructionError("segment mode has m = 1")
        if self.depth < 0:
            raise ConstructionError("depth must be nonnegative")

    # -- local frame -------------------------------------------------------
    @property
    def local_half_width(self) -> float:
        return 1.0 / (4 * self.m)

    def local_generators(self, j: int):
        dirs = _level_directions(self.dimension, self.m, self.mode, int(j))
        units, hws = reduced_generators(dirs, self.local_half_width)
        _check_envelope(units, hws, j)
        return units, hws

    def directions_at(self, j: int) -> tuple:
        return _level_directions(self.dimension, self.m, self.mode, int(j))

    # -- real frame --------------------------------------------------------
    def piece(self, j: int):
        if not 0 <= j <= self.depth:
            raise ConstructionError(f"level {j} outside 0..{self.depth}")
        units, _ = self.local_generators(j)
        center = np.zeros(self.dimension)
        center[0] = math.ldexp(1.0, -j)
        if self.mode == SEGMENTS:
            h = math.ldexp(1.0, -(j + 2))
            return SegmentPiece(center - h * units[0], center + h * units[0])
        return DiamondPiece(j, self.directions_at(j), center,
                            math.ldexp(self.local_half_width, -j))

    @property
    def pieces(self) -> list:
        if self.depth > MAX_MATERIALISED_DEPTH:
            raise BudgetExceeded("sampling budget exceeded: too many pieces to materialise")
        return [self.piece(j) for j in range(self.depth + 1)]

    def bounding_radius(self) -> float:
        return 1.25

    # -- membership --------------------------------------------------------
    def local_distance(self, j: int, p_local) -> float:
        """Distance from ``p_local`` (frame of level ``j``) to piece ``j``."""
        units, hws = self.local_generators(j)
        c = np.zeros(self.dimension)
        c[0] = 1.0
        if units.shape[0] == 1:
            return point_segment_distance(p_local, c - hws[0] * units[0], c + hws[0] * units[0])
        return box_distance(np.asarray(p_local, dtype=np.float64) - c, units, hws)

    def contains(self, p, tol: float = 0.0, frame: int = 0):
        """Level of the first piece within ``tol`` of ``p``, ``ORIGIN``, or None.

        ``p`` and ``tol`` are expressed in the frame scaled by ``2^frame``.
        """
        if tol < 0:
            raise ConstructionError("tol must be nonnegative")
        p = np.asarray(p, dtype=np.float64).reshape(-1)
        if p.size != self.dimension:
            raise ConstructionError("point has the wrong dimension")
        norm = float(np.linalg.norm(p))
        for j in self._candidate_levels(p, tol, frame, norm):
            shift = j - frame
            q = np.ldexp(p, shift)
            slack = math.ldexp(tol, shift) + MEMBERSHIP_RTOL * (1.0 + float(np.linalg.norm(q)))
            if self.local_distance(j, q) <= slack:
                return j
        if self.includes_origin and norm <= tol:
            return ORIGIN
        return None

    def _candidate_levels(self, p, tol, frame, norm):
        # piece j lies in the shell 3/4 * 2^-j <= |x| <= 5/4 * 2^-j (real units)
        upper = norm + tol
        lower = norm - tol
        if upper <= 0.0:
            return
        j_lo = max(0, frame + math.floor(-math.log2(upper / 0.75)) - 1)
        if lower > 0:
            j_hi = min(self.depth, frame + math.ceil(-math.log2(lower / 1.25)) + 1)
        else:
            j_hi = self.depth
        # levels more than 1000 binary orders away from the frame are not
        # representable relative to p; pieces that small are covered by the origin test
        for j in range(max(j_lo, frame - 999), j_hi + 1):
            if j - frame >= 1000:
                return
            yield j

    # -- sampling ----------------------------------------------------------
    def sample_points(self, spacing: float, seed: int = 0, budget: int | None = None) -> np.ndarray:
        """Net of the set with parameter step at most ``spacing``.

        The grid phase is fixed (both ends of every parameter range are
        sampled), so ``seed`` does not change the output; it is accepted for
        interface stability.
        """
        del seed
        if not spacing > 0:
            raise ConstructionError("spacing must be positive")
        budget = sample_budget() if budget is None else budget
        chunks = [np.zeros((1, self.dimension))]
        total = 1
        for j in range(self.depth + 1):
            pc = self.piece(j)
            if isinstance(pc, SegmentPiece):
                n = max(2, math.ceil(pc.length / spacing) + 1)
                total += n
                if total > budget:
                    raise BudgetExceeded("sampling budget exceeded")
                t = np.linspace(0.0, 1.0, n)[:, None]
                chunks.append(pc.endpoint_a + t * (pc.endpoint_b - pc.endpoint_a))
            else:
                _, hws = pc.generators()
                pts = diamond_grid(pc, -hws, hws, spacing, budget - total)
                total += len(pts)
                chunks.append(pts)
        return np.vstack(chunks)


def diamond_grid(pc: DiamondPiece, lo, hi, step: float, budget: int) -> np.ndarray:
    """Grid over the generator-coefficient box [lo, hi] with step at most ``step``."""
    units, _ = pc.generators()
    counts = [max(2, math.ceil((b - a) / step) + 1) if b > a else 1 for a, b in zip(lo, hi)]
    if math.prod(counts) > budget:
        raise BudgetExceeded("sampling budget exceeded")
    axes = [np.linspace(a, b, n) if n > 1 else np.array([a]) for a, b, n in zip(lo, hi, counts)]
    params = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(counts))
    return pc.center + params @ units


def box_distance(v: np.ndarray, units: np.ndarray, hws) -> float:
    """Distance from ``v`` to ``{sum_i t_i units[i] : |t_i| <= hws[i]}``.

    Exact: take the least-squares coefficients when they land in the box,
    otherwise the minimum lies on a facet, handled recursively.
    """
    hws = np.broadcast_to(np.asarray(hws, dtype=np.float64), (units.shape[0],))
    m = units.shape[0]
    if m == 0:
        return float(np.linalg.norm(v))
    t, *_ = np.linalg.lstsq(units.T, v, rcond=None)
    if np.all(np.abs(t) <= hws):
        return float(np.linalg.norm(v - t @ units))
    best = math.inf
    for i in range(m):
        rest, rest_hw = np.delete(units, i, axis=0), np.delete(hws, i)
        for s in (-hws[i], hws[i]):
            best = min(best, box_distance(v - s * units[i], rest, rest_hw))
    return best


def build_segment(d: int, j: int) -> SegmentPiece:
    return OmniSet(d, 1, j).piece(j)


def build_omni_set(d: int, depth: int) -> OmniSet:
    return OmniSet(d, 1, depth, SEGMENTS)


def build_diamond_set(d: int, m: int, depth: int) -> OmniSet:
    return OmniSet(d, m, depth, DIAMONDS)
