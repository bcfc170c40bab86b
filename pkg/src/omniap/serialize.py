"""JSON/CSV readers and writers.

Floats are written with 17 significant digits so every value round-trips
bit for bit; keys keep insertion order, so equal inputs give equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .construction import DIAMONDS, SEGMENTS, OmniSet
from .geometry import Orientation, SegmentPiece
from .patches import ArithmeticPatch, EpsAP


class SchemaError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite float {x}")
    return format(x, ".17g")


def dumps(obj, indent: int = 0, _level: int = 0) -> str:
    pad = "\n" + " " * (indent * (_level + 1)) if indent else ""
    end = "\n" + " " * (indent * _level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + dumps(v, indent, _level + 1) for k, v in obj.items()]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        flat = all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in seq)
        if flat or not seq:
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[" + pad + sep.join(dumps(v, indent, _level + 1) for v in seq) + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if obj is None:
        return "null"
    return json.dumps(obj)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj, indent=1) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc}") from exc


def _field(doc, key, path, kind=None):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{path}.{key}", "missing field")
    value = doc[key]
    if kind is not None and not _is_kind(value, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind}")
    return value


def _is_kind(value, kind):
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "vector":
        return isinstance(value, list) and value and all(_is_kind(v, "number") for v in value)
    if kind == "matrix":
        return isinstance(value, list) and value and all(_is_kind(v, "vector") for v in value)
    if kind == "bool":
        return isinstance(value, bool)
    if kind == "list":
        return isinstance(value, list)
    return True


# ---------------------------------------------------------------------------
# sets
# ---------------------------------------------------------------------------

def piece_to_dict(K: OmniSet, j: int) -> dict:
    pc = K.piece(j)
    if isinstance(pc, SegmentPiece):
        return {"j": j, "type": "segment",
                "endpoints": [pc.endpoint_a.tolist(), pc.endpoint_b.tolist()],
                "z": list(K.directions_at(j)[0].integer_vector)}
    return {"j": j, "type": "diamond", "center": pc.center.tolist(),
            "dirs": [list(xi.integer_vector) for xi in pc.directions],
            "half_width": pc.half_width}


def set_to_dict(K: OmniSet) -> dict:
    return {"d": K.dimension, "m": K.m, "J": K.depth, "mode": K.mode,
            "pieces": [piece_to_dict(K, j) for j in range(K.depth + 1)],
            "origin": K.includes_origin}


def set_from_dict(doc) -> OmniSet:
    d = _field(doc, "d", "$", "int")
    m = _field(doc, "m", "$", "int")
    J = _field(doc, "J", "$", "int")
    mode = doc.get("mode", SEGMENTS if m == 1 and _first_type(doc) == "segment" else DIAMONDS)
    if mode not in (SEGMENTS, DIAMONDS):
        raise SchemaError("$.mode", "expected 'segments' or 'diamonds'")
    origin = _field(doc, "origin", "$", "bool")
    pieces = _field(doc, "pieces", "$", "list")
    try:
        K = OmniSet(d, m, J, mode, origin)
    except ValueError as exc:
        raise SchemaError("$", str(exc)) from exc
    if len(pieces) != J + 1:
        raise SchemaError("$.pieces", f"expected {J + 1} pieces, found {len(pieces)}")
    for j, given in enumerate(pieces):
        if given != json.loads(dumps(piece_to_dict(K, j))):
            raise SchemaError(f"$.pieces[{j}]", "piece does not match the construction")
    return K


def _first_type(doc):
    pieces = doc.get("pieces") if isinstance(doc, dict) else None
    if isinstance(pieces, list) and pieces and isinstance(pieces[0], dict):
        return pieces[0].get("type")
    return None


# ---------------------------------------------------------------------------
# approximate patches
# ---------------------------------------------------------------------------

def ap_to_dict(ap: EpsAP) -> dict:
    P = ap.reference
    return {"k": P.size, "m": P.m, "eps": ap.epsilon, "scale": P.scale,
            "t": P.initial_point.tolist(), "t_prime": np.asarray(ap.initial_point).tolist(),
            "orientation": P.orientation.vectors.tolist(),
            "Q": np.asarray(ap.points).tolist(), "level": ap.level,
            "worst_ratio": ap.worst_ratio, "frame": ap.frame}


def ap_from_dict(doc) -> EpsAP:
    k = _field(doc, "k", "$", "int")
    m = _field(doc, "m", "$", "int")
    eps = _field(doc, "eps", "$", "number")
    scale = _field(doc, "scale", "$", "number")
    t = _field(doc, "t", "$", "vector")
    t_prime = _field(doc, "t_prime", "$", "vector")
    orient = _field(doc, "orientation", "$", "matrix")
    Q = _field(doc, "Q", "$", "matrix")
    level = doc.get("level")
    if level is not None and not _is_kind(level, "int"):
        raise SchemaError("$.level", "expected int or null")
    frame = doc.get("frame", 0)
    if not _is_kind(frame, "int"):
        raise SchemaError("$.frame", "expected int")
    worst = doc.get("worst_ratio")
    if worst is not None and not _is_kind(worst, "number"):
        raise SchemaError("$.worst_ratio", "expected number or null")
    try:
        E = Orientation(np.array(orient, dtype=np.float64))
        if E.m != m:
            raise SchemaError("$.orientation", f"expected {m} vectors")
        P = ArithmeticPatch(np.array(t, dtype=np.float64), float(scale), E, k)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError("$", str(exc)) from exc
    Qa = np.array(Q, dtype=np.float64)
    if Qa.ndim != 2 or Qa.shape[1] != E.d:
        raise SchemaError("$.Q", "points must all have the orientation's dimension")
    return EpsAP(Qa, P, float(eps), np.array(t_prime, dtype=np.float64), level, frame,
                 None if worst is None else float(worst))


# ---------------------------------------------------------------------------
# certificates, estimates, CSV
# ---------------------------------------------------------------------------

def certificate_to_dict(c) -> dict:
    return {"k": c.k, "m": c.m, "eps": c.eps, "delta_k": c.delta_k, "t_k": list(c.t_k),
            "R_k": c.R_k, "r_k": c.r_k, "ratio": c.ratio, "big_c": c.big_c,
            "packing_count": c.packing_count, "certified_exponent": c.certified_exponent,
            "frame": c.frame, "level": c.level}


def estimate_to_dict(est) -> dict:
    return {"sup_exponent_lower": est.sup_exponent_lower,
            "sup_exponent_upper": est.sup_exponent_upper,
            "rhos": list(est.scan_config.rhos), "rho_min": est.scan_config.rho_min,
            "n_samples": len(est.samples)}


SCAN_COLUMNS = ["R", "r", "lower", "upper", "analytic_bound", "exponent_lower", "exponent_upper"]


def scan_csv(records, analytic) -> str:
    """CSV text; ``analytic(R, r)`` fills the analytic_bound column."""
    buf = io.StringIO()
    d = len(records[0].x) if records else 0
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS + [f"x{i}" for i in range(d)])
    for s in records:
        w.writerow([fmt_float(s.R), fmt_float(s.r), s.lower, s.upper, fmt_float(analytic(s.R, s.r)),
                    fmt_float(s.exponent_lower), fmt_float(s.exponent_upper)]
                   + [fmt_float(v) for v in s.x])
    return buf.getvalue()


def cover_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["R", "r", "lower", "upper", "analytic_bound"])
    for R, r, lower, upper, bound in rows:
        w.writerow([fmt_float(R), fmt_float(r), lower, upper, fmt_float(bound)])
    return buf.getvalue()
