"""Local-exponent scans and finite-k lower-bound certificates for Assouad dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .construction import DIAMONDS, SEGMENTS, OmniSet
from .covering import cover_bracket, packing_lower
from .geometry import Ball, Orientation, SegmentPiece, min_pairwise_gap
from .patches import EpsAP, find_ap_in_omni, find_patch_in_diamond

RHO_MIN = 16.0
SEPARATION_RTOL = 1e-12


class CertificateError(ValueError):
    pass


def local_exponent(count: int, R: float, r: float) -> float:
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    if count < 1:
        raise ValueError("count must be at least 1")
    return math.log(count) / math.log(R / r)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    x: tuple
    R: float
    r: float
    lower: int
    upper: int
    exponent_lower: float
    exponent_upper: float


@dataclass
class ScanPlan:
    """Centres with their radii; every radius is paired with every ratio in ``rhos``."""

    centers: list
    rhos: tuple
    rho_min: float = RHO_MIN
    labels: list = field(default_factory=list)

    def triples(self):
        for x, radii in self.centers:
            for R in radii:
                for rho in self.rhos:
                    yield x, R, R / rho


@dataclass
class DimEstimate:
    samples: list
    sup_exponent_lower: float
    sup_exponent_upper: float
    scan_config: ScanPlan


def _piece_centers(K: OmniSet, j: int):
    pc = K.piece(j)
    if isinstance(pc, SegmentPiece):
        return [pc.midpoint, pc.endpoint_a, pc.endpoint_b]
    return [pc.center, *pc.vertices()]


def proof_scan_plan(K: OmniSet, rhos=(16, 64, 256), rho_min: float = RHO_MIN,
                    inner_steps: int = 2, max_level: int | None = None) -> ScanPlan:
    """Scan concentrated where the upper-bound argument splits its cases.

    Origin: every dyadic R from 1 down to the truncation scale. A point on
    piece j: radii ``2^-n`` for ``n = 0..j+3`` (balls reaching the origin
    cluster, R >= 2^-(j+3)) and ``inner_steps`` radii below ``2^-(j+3)`` where the
    ball sees piece j alone.
    """
    rhos = tuple(float(p) for p in rhos)
    if any(p < rho_min for p in rhos):
        raise ValueError(f"every ratio must be at least rho_min={rho_min}")
    top = K.depth if max_level is None else min(max_level, K.depth)
    centers = [(np.zeros(K.dimension), [math.ldexp(1.0, -n) for n in range(K.depth + 2)])]
    labels = ["origin"]
    for j in range(top + 1):
        radii = [math.ldexp(1.0, -n) for n in range(j + 4 + inner_steps)]
        for i, x in enumerate(_piece_centers(K, j)):
            centers.append((np.asarray(x, dtype=np.float64), radii))
            labels.append(f"piece{j}:{i}")
    return ScanPlan(centers, rhos, rho_min, labels)


def estimate_assouad(K: OmniSet, plan: ScanPlan, budget: int | None = None) -> DimEstimate:
    """Empirical local exponents; lower exponents are certified, upper ones are evidence."""
    records = []
    for x, R, r in plan.triples():
        if R / r < plan.rho_min:
            raise ValueError("plan violates rho_min")
        b = cover_bracket(K, Ball(x, R), r, budget=budget)
        records.append(ScanRecord(tuple(float(v) for v in x), R, r, b.lower, b.upper,
                                  local_exponent(b.lower, R, r), local_exponent(b.upper, R, r)))
    return DimEstimate(records,
                       max(s.exponent_lower for s in records),
                       max(s.exponent_upper for s in records),
                       plan)


# ---------------------------------------------------------------------------
# finite-k certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundCertificate:
    k: int
    m: int
    eps: float
    delta_k: float
    t_k: tuple
    R_k: float
    r_k: float
    ratio: float
    big_c: float
    packing_count: int
    certified_exponent: float
    frame: int = 0
    level: int | None = None


def _patch_for(F, E: Orientation, eps: float, k: int) -> EpsAP:
    if isinstance(F, OmniSet):
        if F.mode == SEGMENTS:
            if E.m != 1 or abs(float(np.linalg.norm(E.vectors[0])) - 1.0) > 1e-12:
                raise CertificateError("segment sets need a single unit direction")
            return find_ap_in_omni(F.dimension, E.vectors[0], k, eps)
        if F.mode == DIAMONDS:
            return find_patch_in_diamond(F.dimension, E.m, E, k, eps)
    raise CertificateError(f"no patch supplied for k={k}")


def certify_lower_bound(F, E: Orientation, eps: float, k_list, patches=None) -> list:
    """Certificates that (k, eps, E)-APs in F force N(B(t_k, R_k) & F, r_k) >= C (R_k/r_k)^m.

    ``patches`` optionally maps k to an externally obtained EpsAP, which is
    required when F is a plain point list.
    """
    E = E if isinstance(E, Orientation) else Orientation(E)
    ell, big_l, m = E.ell, E.big_l, E.m
    if not 0 <= eps < ell / 2:
        raise CertificateError("epsilon violates the hypothesis 0 <= eps < ell(E)/2")
    patches = patches or {}
    big_c = ((ell - 2 * eps) / (2 * (1 + 2 * eps) * (big_l + 1))) ** m
    certs = []
    for k in k_list:
        if k < 3:
            raise CertificateError("k must be at least 3")
        ap = patches[k] if k in patches else _patch_for(F, E, eps, k)
        Q = np.asarray(ap.points)
        delta = ap.scale
        R_k = (1 + 2 * eps) * k * delta * (big_l + 1)
        r_k = (ell - 2 * eps) * delta / 2
        # the scale cancels; keep the ratio free of its rounding
        ratio = (1 + 2 * eps) * k * (big_l + 1) * 2 / (ell - 2 * eps)
        if not min_pairwise_gap(Q) >= (ell - 2 * eps) * delta * (1 - SEPARATION_RTOL):
            raise CertificateError("separation inequality violated: min gap < (ell - 2 eps) Delta")
        count = packing_lower(Q, r_k)
        if count != k ** m:
            raise CertificateError(f"packing inequality violated: {count} != k^m = {k ** m}")
        t_k = np.asarray(ap.initial_point)
        if not np.all(np.linalg.norm(Q - t_k, axis=1) <= R_k):
            raise CertificateError("ball containment violated: Q not inside B(t_k, R_k)")
        if not big_c * ratio ** m <= count:
            raise CertificateError("constant inequality violated: C (R_k/r_k)^m > packing count")
        certs.append(LowerBoundCertificate(
            k, m, float(eps), float(delta), tuple(float(v) for v in t_k), float(R_k), float(r_k),
            float(ratio), float(big_c), int(count), m * math.log(k) / math.log(ratio),
            ap.frame, ap.level))
    return certs
