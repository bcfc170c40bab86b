"""Euclidean primitives: balls, segments, orientations and the ell/L functionals."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

MAX_ORIENTATION_SIZE = 20
INDEPENDENCE_RTOL = 1e-10


class GeometryError(ValueError):
    pass


def as_point(coords) -> np.ndarray:
    p = np.asarray(coords, dtype=np.float64).reshape(-1)
    if p.size < 1:
        raise GeometryError("a point needs at least one coordinate")
    if not np.all(np.isfinite(p)):
        raise GeometryError("point coordinates must be finite")
    return p


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius >= 0:
            raise GeometryError("ball radius must be nonnegative")

    def contains(self, p) -> bool:
        return float(np.linalg.norm(as_point(p) - self.center)) <= self.radius


@dataclass(frozen=True)
class SegmentPiece:
    endpoint_a: np.ndarray
    endpoint_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "endpoint_a", as_point(self.endpoint_a))
        object.__setattr__(self, "endpoint_b", as_point(self.endpoint_b))
        if self.endpoint_a.shape != self.endpoint_b.shape:
            raise GeometryError("segment endpoints live in different dimensions")

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.endpoint_b - self.endpoint_a))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.endpoint_a + self.endpoint_b)

    def distance_to(self, p) -> float:
        return point_segment_distance(p, self.endpoint_a, self.endpoint_b)


def point_segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=np.float64) for v in (p, a, b))
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def _check_independent(vectors: np.ndarray) -> None:
    # pivoted Gaussian elimination on the m x d matrix of row vectors
    a = vectors.copy()
    m, d = a.shape
    scale = float(np.max(np.linalg.norm(vectors, axis=1)))
    if scale == 0.0:
        raise GeometryError("orientation vectors are linearly dependent")
    row = 0
    for _ in range(m):
        sub = np.abs(a[row:, :])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] < INDEPENDENCE_RTOL * scale:
            raise GeometryError("orientation vectors are linearly dependent")
        i += row
        a[[row, i]] = a[[i, row]]
        a[row + 1:] -= np.outer(a[row + 1:, j] / a[row, j], a[row])
        row += 1


def _binary_norms(vectors: np.ndarray) -> np.ndarray:
    m = vectors.shape[0]
    omegas = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.float64)
    return np.linalg.norm(omegas @ vectors, axis=1)


@dataclass(frozen=True)
class Orientation:
    """Linearly independent tuple of m vectors in R^d with cached ell and L."""

    vectors: np.ndarray
    ell: float = field(init=False)
    big_l: float = field(init=False)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=np.float64))
        m, d = v.shape
        if not 1 <= m <= d:
            raise GeometryError(f"need 1 <= m <= d, got m={m}, d={d}")
        if m > MAX_ORIENTATION_SIZE:
            raise GeometryError(f"m={m} exceeds the cap of {MAX_ORIENTATION_SIZE}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("orientation vectors must be finite")
        _check_independent(v)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        norms = _binary_norms(v)
        object.__setattr__(self, "ell", float(norms[1:].min()))
        object.__setattr__(self, "big_l", float(norms.max()))

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


def ell(E: Orientation) -> float:
    return E.ell


def big_l(E: Orientation) -> float:
    return E.big_l


def min_pairwise_gap(points) -> float:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[0] < 2:
        raise GeometryError("insufficient points")
    return _kernels.min_pairwise_gap(pts)


def clip_segment_to_ball(s: SegmentPiece, b: Ball) -> SegmentPiece | None:
    """Part of ``s`` inside the closed ball ``b``, or None when they are disjoint."""
    a, u = s.endpoint_a, s.endpoint_b - s.endpoint_a
    w = a - b.center
    qa = float(u @ u)
    if qa == 0.0:
        return s if float(np.linalg.norm(w)) <= b.radius else None
    qb = 2.0 * float(u @ w)
    qc = float(w @ w) - b.radius * b.radius
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    # numerically stable root pair
    q = -0.5 * (qb + math.copysign(sq, qb)) if qb != 0.0 else 0.5 * sq
    if q == 0.0:
        t0 = t1 = 0.0
    else:
        r1, r2 = q / qa, qc / q
        t0, t1 = min(r1, r2), max(r1, r2)
    lo, hi = max(0.0, t0), min(1.0, t1)
    if lo > hi:
        return None
    pa = a if lo == 0.0 else a + lo * u
    pb = s.endpoint_b if hi == 1.0 else a + hi * u
    return SegmentPiece(pa, pb)
