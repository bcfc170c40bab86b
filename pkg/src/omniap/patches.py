"""Arithmetic patches, the exact (k, eps, E)-AP verifier and certified finders.

Finder outputs carry a ``frame`` exponent: stored coordinates are the real
ones multiplied by ``2^frame``. Levels up to ``REAL_FRAME_MAX_LEVEL`` are
returned in the real frame (``frame == 0``); deeper levels stay in the local
frame of their piece because ``2^-j`` would underflow. The verifier is
homogeneous of degree one, so its verdict and ``worst_ratio`` are the same in
every frame.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .construction import DIAMONDS, OmniSet
from .directions import (
    RationalDirection,
    approximate_direction,
    index_of,
    orientation_tuple_at,
    tuple_to_index,
)
from .geometry import Orientation, as_point

REAL_FRAME_MAX_LEVEL = 400
SAFETY = 0.9
MEMBERSHIP_TOL = 1e-12
DEFAULT_INDEX_BUDGET = 1 << 63
# largest coordinate accepted when recognising an exact rational direction
EXACT_HEIGHT = 10 ** 6


class CertificationError(RuntimeError):
    pass


class TupleBudgetExceeded(RuntimeError):
    pass


class NoInitialPoint(ValueError):
    pass


@dataclass(frozen=True)
class ArithmeticPatch:
    initial_point: np.ndarray
    scale: float
    orientation: Orientation
    size: int

    def __post_init__(self):
        object.__setattr__(self, "initial_point", as_point(self.initial_point))
        if self.size < 2:
            raise ValueError("patch size k must be at least 2")
        if not self.scale > 0:
            raise ValueError("patch scale must be positive")
        if self.initial_point.size != self.orientation.d:
            raise ValueError("initial point and orientation disagree on dimension")

    @property
    def m(self):
        return self.orientation.m


@dataclass(frozen=True)
class Verdict:
    passed: bool
    worst_ratio: float

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class EpsAP:
    points: np.ndarray
    reference: ArithmeticPatch
    epsilon: float
    initial_point: np.ndarray
    level: int | None = None
    frame: int = 0
    worst_ratio: float | None = None

    @property
    def k(self):
        return self.reference.size

    @property
    def m(self):
        return self.reference.m

    @property
    def scale(self):
        return self.reference.scale


def multi_indices(k: int, m: int) -> np.ndarray:
    """Row-major multi-indices with x_1 varying fastest."""
    rows = itertools.product(range(k), repeat=m)
    return np.array([r[::-1] for r in rows], dtype=np.float64).reshape(-1, m)


def patch_points(P: ArithmeticPatch) -> np.ndarray:
    x = multi_indices(P.size, P.m)
    return P.initial_point + P.scale * (x @ P.orientation.vectors)


def distinct_count(points) -> int:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return len(np.unique(pts, axis=0))


def verify_eps_ap(Q, P: ArithmeticPatch, eps: float) -> Verdict:
    """Cardinality plus one-sided nearness, compared with ``<=`` and no slack."""
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    target = patch_points(P)
    worst = _kernels.max_nearest_distance(target, Q) / P.scale
    ok = distinct_count(Q) == P.size ** P.m and worst <= eps
    return Verdict(bool(ok), float(worst))


def initial_point_of(Q, P: ArithmeticPatch, eps: float) -> np.ndarray:
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    dist = np.linalg.norm(Q - P.initial_point, axis=1)
    i = int(np.argmin(dist))  # first minimum, i.e. lowest index on ties
    if not dist[i] <= eps * P.scale:
        raise NoInitialPoint("no initial point")
    return Q[i].copy()


def _to_real_frame(level: int, Q, t, delta):
    if level > REAL_FRAME_MAX_LEVEL:
        return Q, t, delta, level
    return np.ldexp(Q, -level), np.ldexp(t, -level), math.ldexp(delta, -level), 0


def _certify(K: OmniSet, Q, P, eps, level, frame) -> EpsAP:
    verdict = verify_eps_ap(Q, P, eps)
    if not verdict.passed:
        raise CertificationError(f"certification failed: worst_ratio={verdict.worst_ratio!r}")
    # membership tolerance is relative to the piece: test in its local frame
    for q in np.ldexp(Q, level - frame):
        if K.contains(q, MEMBERSHIP_TOL, frame=level) != level:
            raise CertificationError(f"certification failed: point {q} not on piece {level}")
    t_prime = initial_point_of(Q, P, eps)
    return EpsAP(Q, P, float(eps), t_prime, level, frame, verdict.worst_ratio)


def _check_eps(eps, allow_zero=False):
    lo_ok = eps >= 0 if allow_zero else eps > 0
    if not (lo_ok and eps < 1):
        raise ValueError("eps must lie in (0, 1)")


def _exact_direction(e) -> RationalDirection:
    """The primitive direction whose float unit vector is exactly ``e``."""
    big = int(np.argmax(np.abs(e)))
    ratios = [Fraction(float(v) / float(e[big])).limit_denominator(EXACT_HEIGHT) for v in e]
    den = math.lcm(*(r.denominator for r in ratios))
    z = [int(r * den) * (1 if e[big] > 0 else -1) for r in ratios]
    g = math.gcd(*z)
    z = [v // g for v in z]
    if max(abs(v) for v in z) <= EXACT_HEIGHT:
        xi = RationalDirection.from_vector(z)
        if np.array_equal(xi.unit, e):
            return RationalDirection.from_vector(z, index_of(z))
    raise CertificationError(
        f"eps = 0 needs e to be the unit vector of an integer direction of height <= {EXACT_HEIGHT}")


def _select_direction(e, eps, k):
    if eps == 0:
        # exact patches exist only along directions of the enumeration itself
        return _exact_direction(e)
    return approximate_direction(e, SAFETY * 2.0 * eps / (k - 1))


def find_ap_in_omni(d: int, e, k: int, eps: float) -> EpsAP:
    """Certified (k, eps, {e})-AP on the segment piece whose direction approximates ``e``.

    ``eps = 0`` is accepted when ``e`` is exactly the unit vector of some
    primitive integer direction.
    """
    e = np.asarray(e, dtype=np.float64).reshape(-1)
    if d < 2 or e.size != d:
        raise ValueError("need d >= 2 and e in R^d")
    if k < 3:
        raise ValueError("k must be at least 3")
    _check_eps(eps, allow_zero=True)
    xi = _select_direction(e, eps, k)
    j0 = xi.index
    e1 = np.zeros(d)
    e1[0] = 1.0
    # local frame of level j0: multiply every length by 2^j0
    # Q_i = (-1/4 + i delta) xi + e1, evaluated exactly like patch_points so
    # that xi == e reproduces the reference patch bit for bit
    delta = 1.0 / ((k - 1) * 2.0)
    steps = np.arange(k, dtype=np.float64)[:, None]
    Q = (e1 - 0.25 * xi.unit) + delta * (steps * xi.unit)
    t = e1 - 0.25 * e
    Q, t, delta, frame = _to_real_frame(j0, Q, t, delta)
    P = ArithmeticPatch(t, delta, Orientation(e[None, :]), k)
    K = OmniSet(d, 1, j0)
    return _certify(K, Q, P, eps, j0, frame)


def find_patch_in_diamond(d: int, m: int, E, k: int, eps: float,
                          index_budget: int = DEFAULT_INDEX_BUDGET,
                          strategy: str = "direct") -> EpsAP:
    """Certified (k, eps, E)-AP on a diamond piece.

    Each ``e_i / |e_i|`` is approximated by a rational direction to within
    ``0.9 * 2 eps / ((k-1) m max|e_i|)``, which bounds the displacement of every
    lattice point by ``0.9 eps Delta``. ``strategy="scan"`` walks tuple
    indices from 0 instead of jumping straight to the matching index.
    """
    E = E if isinstance(E, Orientation) else Orientation(E)
    if E.m != m or E.d != d or d < 2:
        raise ValueError("orientation shape disagrees with (d, m)")
    if k < 3:
        raise ValueError("k must be at least 3")
    _check_eps(eps)
    norms = np.linalg.norm(E.vectors, axis=1)
    hats = E.vectors / norms[:, None]
    target = SAFETY * 2.0 * eps / ((k - 1) * m * float(norms.max()))

    if strategy == "direct":
        xis = [approximate_direction(h, target) for h in hats]
        j0 = tuple_to_index([xi.index for xi in xis])
        if j0 > index_budget:
            raise TupleBudgetExceeded(f"tuple budget exceeded: index {j0} > {index_budget}")
        return _place_on_diamond(E, norms, np.array([xi.unit for xi in xis]), j0, k, eps)
    if strategy != "scan":
        raise ValueError(f"unknown strategy {strategy!r}")
    for n in range(index_budget + 1):
        tup = orientation_tuple_at(d, m, n)
        units = np.array([xi.unit for xi in tup.directions])
        if np.all(np.linalg.norm(units - hats, axis=1) < target):
            try:
                return _place_on_diamond(E, norms, units, n, k, eps)
            except CertificationError:
                continue  # e.g. a repeated direction collapses the lattice
    raise TupleBudgetExceeded(f"tuple budget exceeded: scanned {index_budget + 1} indices")


def _place_on_diamond(E, norms, units, j0, k, eps):
    d, m = E.d, E.m
    e1 = np.zeros(d)
    e1[0] = 1.0
    delta = 1.0 / ((k - 1) * m * 2.0 * float(norms.max()))
    x = multi_indices(k, m)
    half = (k - 1) * delta / 2.0
    Q = (e1 - half * norms @ units) + delta * ((x * norms) @ units)
    t = e1 - half * E.vectors.sum(axis=0)
    Q, t, delta, frame = _to_real_frame(j0, Q, t, delta)
    P = ArithmeticPatch(t, delta, E, k)
    K = OmniSet(d, m, j0, DIAMONDS)
    return _certify(K, Q, P, eps, j0, frame)
