"""Command-line front end.

Exit codes: 0 success, 1 verdict fail, 2 budget, 3 certification,
4 input schema, 64 usage.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import re
import sys

import numpy as np

from . import _kernels
from .assouad import CertificateError, certify_lower_bound, estimate_assouad, proof_scan_plan
from .construction import DIAMONDS, SEGMENTS, BudgetExceeded, OmniSet
from .covering import analytic_cover_bound, cover_bracket
from .directions import iter_directions
from .geometry import Ball, Orientation
from .patches import (
    CertificationError,
    TupleBudgetExceeded,
    find_ap_in_omni,
    find_patch_in_diamond,
    verify_eps_ap,
)
from .serialize import (
    SchemaError,
    ap_from_dict,
    ap_to_dict,
    certificate_to_dict,
    cover_csv,
    dumps,
    estimate_to_dict,
    read_json,
    scan_csv,
    set_from_dict,
    set_to_dict,
    write_json,
)

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_CERT, EXIT_SCHEMA, EXIT_USAGE = 0, 1, 2, 3, 4, 64

_DYADIC = re.compile(r"^\s*([+-]?\d+)\s*/\s*2\s*\^\s*(\d+)\s*$")


class UsageError(ValueError):
    pass


def parse_number(text: str) -> float:
    """Decimal literal or exact dyadic ``p/2^q``."""
    m = _DYADIC.match(text)
    if m:
        p, q = int(m.group(1)), int(m.group(2))
        value = math.ldexp(float(p), -q)
        if int(float(p)) != p:
            raise argparse.ArgumentTypeError(f"numerator of {text!r} is not exactly representable")
        return value
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def parse_vector(text: str) -> list:
    return [parse_number(t) for t in text.split(",") if t.strip()]


def parse_matrix(text: str) -> list:
    return [parse_vector(row) for row in text.split(";") if row.strip()]


def parse_ints(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="accepted for reproducibility; outputs are seed independent")
    common.add_argument("--threads", type=int, default=None, help="cap on numba worker threads")
    common.add_argument("--budget", type=int, default=None, help="sample cap (overrides APK_BUDGET)")

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("--d", type=int, default=2)
    shape.add_argument("--m", type=int, default=1)
    shape.add_argument("--depth", type=int, default=8)
    shape.add_argument("--diamonds", action="store_true")

    p = _Parser(prog="omniap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", parents=[common, shape], help="build a truncated set and write JSON")
    c.add_argument("--out")

    c = sub.add_parser("enum-dirs", parents=[common], help="list enumerated rational directions")
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--count", type=int, default=16)
    c.add_argument("--start", type=int, default=0)
    c.add_argument("--out")

    c = sub.add_parser("find-ap", parents=[common], help="certified approximate patch")
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--m", type=int, default=None)
    g = c.add_mutually_exclusive_group()
    g.add_argument("--e", type=parse_vector, help="unit direction, e.g. 0,1")
    g.add_argument("--angle", type=parse_number, help="direction angle in radians (d = 2)")
    g.add_argument("--orientation", type=parse_matrix, help="rows separated by ';', e.g. 1,0;0,1")
    c.add_argument("--k", type=int, default=3)
    c.add_argument("--eps", type=parse_number, default=0.1)
    c.add_argument("--strategy", choices=("direct", "scan"), default="direct")
    c.add_argument("--index-budget", type=int, default=None)
    c.add_argument("--out")

    c = sub.add_parser("verify-ap", parents=[common], help="check an EpsAP JSON file")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--eps", type=parse_number, default=None)

    c = sub.add_parser("cover", parents=[common, shape], help="covering brackets at one centre")
    c.add_argument("--in", dest="inp")
    c.add_argument("--center", type=parse_vector, default=None)
    c.add_argument("--R", dest="radii", type=parse_vector, default=None)
    c.add_argument("--r", dest="small_r", type=parse_number, default=None)
    c.add_argument("--rhos", type=parse_vector, default=None)
    c.add_argument("--net-factor", type=parse_number, default=0.25)
    c.add_argument("--out")

    c = sub.add_parser("estimate-dim", parents=[common], help="local-exponent scan of a set")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--rhos", type=parse_vector, default=[16.0, 64.0, 256.0])
    c.add_argument("--rho-min", type=parse_number, default=16.0)
    c.add_argument("--inner-steps", type=int, default=2)
    c.add_argument("--max-level", type=int, default=None)
    c.add_argument("--out")
    c.add_argument("--json", dest="json_out")

    c = sub.add_parser("certify-lb", parents=[common], help="finite-k lower-bound certificates")
    c.add_argument("--d", type=int, default=2)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--e", type=parse_vector)
    g.add_argument("--orientation", type=parse_matrix)
    c.add_argument("--eps", type=parse_number, default=0.0)
    c.add_argument("--ks", type=parse_ints, default=[3, 16, 128, 1024])
    c.add_argument("--out")
    return p


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _emit(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _emit_json(path, obj) -> None:
    if path is None:
        sys.stdout.write(dumps(obj, indent=1) + "\n")
    else:
        write_json(path, obj)


def _info(msg: str, to_stderr: bool) -> None:
    print(msg, file=sys.stderr if to_stderr else sys.stdout)


def _load_set(path) -> OmniSet:
    try:
        doc = read_json(path)
    except OSError as exc:
        raise SchemaError("$", f"cannot read {path}: {exc.strerror}") from exc
    return set_from_dict(doc)


def _set_from_args(a) -> OmniSet:
    if getattr(a, "inp", None):
        return _load_set(a.inp)
    return OmniSet(a.d, a.m, a.depth, DIAMONDS if a.diamonds else SEGMENTS)


def _check_eps(eps, lo_open=False):
    if eps is None:
        return
    ok = (eps > 0 if lo_open else eps >= 0) and eps < 1
    if not ok:
        raise UsageError(f"eps must lie in {'(0' if lo_open else '[0'}, 1), got {eps}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_construct(a) -> int:
    if a.depth < 0:
        raise UsageError("depth must be nonnegative")
    K = OmniSet(a.d, a.m, a.depth, DIAMONDS if a.diamonds else SEGMENTS)
    doc = set_to_dict(K)
    _emit_json(a.out, doc)
    # total size: sum over pieces of the product of full generator widths
    size = 0.0
    for j in range(K.depth + 1):
        _, hws = K.local_generators(j)
        size += math.ldexp(float(np.prod(2.0 * hws)), -j * len(hws))
    kind = "segment" if K.mode == SEGMENTS else "diamond"
    _info(f"{K.depth + 1} {kind} pieces + origin; total size parameter {size:.17g}; "
          f"bounding radius {K.bounding_radius():.17g}", a.out is None)
    return EXIT_OK


def cmd_enum_dirs(a) -> int:
    if a.d < 1 or a.count < 0 or a.start < 0:
        raise UsageError("need d >= 1, count >= 0, start >= 0")
    lines = []
    for xi in itertools.islice(iter_directions(a.d), a.start, a.start + a.count):
        lines.append(dumps({"index": xi.index, "z": list(xi.integer_vector), "unit": xi.unit.tolist()}))
    _emit(a.out, "".join(line + "\n" for line in lines))
    return EXIT_OK


def cmd_find_ap(a) -> int:
    _check_eps(a.eps)
    if a.orientation is not None:
        E = Orientation(np.array(a.orientation, dtype=np.float64))
        m = E.m if a.m is None else a.m
        kwargs = {"strategy": a.strategy}
        if a.index_budget is not None:
            kwargs["index_budget"] = a.index_budget
        _check_eps(a.eps, lo_open=True)
        ap = find_patch_in_diamond(a.d, m, E, a.k, a.eps, **kwargs)
    else:
        if a.angle is not None:
            if a.d != 2:
                raise UsageError("--angle needs --d 2")
            e = [math.cos(a.angle), math.sin(a.angle)]
        elif a.e is not None:
            e = a.e
        else:
            raise UsageError("give --e, --angle or --orientation")
        if len(e) != a.d:
            raise UsageError(f"direction has {len(e)} components, expected {a.d}")
        norm = math.sqrt(math.fsum(v * v for v in e))
        if abs(norm - 1.0) > 1e-12:
            raise UsageError("--e must be a unit vector")
        ap = find_ap_in_omni(a.d, e, a.k, a.eps)
    _emit_json(a.out, ap_to_dict(ap))
    _info(f"certified: level {ap.level}, scale {ap.scale:.17g}, frame {ap.frame}, "
          f"worst_ratio {ap.worst_ratio:.17g}", a.out is None)
    return EXIT_OK


def cmd_verify_ap(a) -> int:
    _check_eps(a.eps)
    try:
        doc = read_json(a.inp)
    except OSError as exc:
        raise SchemaError("$", f"cannot read {a.inp}: {exc.strerror}") from exc
    ap = ap_from_dict(doc)
    eps = ap.epsilon if a.eps is None else a.eps
    _check_eps(eps)
    v = verify_eps_ap(ap.points, ap.reference, eps)
    print(f"{'pass' if v.passed else 'fail'} worst_ratio {v.worst_ratio:.17g} eps {eps:.17g}")
    return EXIT_OK if v.passed else EXIT_FAIL


def cmd_cover(a) -> int:
    K = _set_from_args(a)
    center = np.zeros(K.dimension) if a.center is None else np.array(a.center, dtype=np.float64)
    if center.size != K.dimension:
        raise UsageError("centre has the wrong dimension")
    radii = a.radii or [math.ldexp(1.0, -n) for n in range(9)]
    if a.small_r is not None:
        pairs = [(R, a.small_r) for R in radii]
    else:
        pairs = [(R, R / rho) for R in radii for rho in (a.rhos or [16.0])]
    rows = []
    for R, r in pairs:
        if not 0 < r < R:
            raise UsageError("need 0 < r < R")
        b = cover_bracket(K, Ball(center, R), r, net_factor=a.net_factor)
        rows.append((R, r, b.lower, b.upper, analytic_cover_bound(R, r)))
    _emit(a.out, cover_csv(rows))
    return EXIT_OK


def cmd_estimate_dim(a) -> int:
    K = _load_set(a.inp)
    plan = proof_scan_plan(K, a.rhos, a.rho_min, a.inner_steps, a.max_level)
    est = estimate_assouad(K, plan)
    _emit(a.out, scan_csv(est.samples, analytic_cover_bound))
    if a.json_out:
        write_json(a.json_out, estimate_to_dict(est))
    _info(f"sup exponent_lower {est.sup_exponent_lower:.17g}\n"
          f"sup exponent_upper {est.sup_exponent_upper:.17g}", a.out is None)
    return EXIT_OK


def cmd_certify_lb(a) -> int:
    _check_eps(a.eps)
    rows = [a.e] if a.e is not None else a.orientation
    E = Orientation(np.array(rows, dtype=np.float64))
    if E.d != a.d:
        raise UsageError(f"orientation lives in R^{E.d}, expected {a.d}")
    F = OmniSet(a.d, E.m, 0, SEGMENTS if E.m == 1 and a.e is not None else DIAMONDS)
    certs = certify_lower_bound(F, E, a.eps, a.ks)
    _emit_json(a.out, {"certificates": [certificate_to_dict(c) for c in certs]})
    for c in certs:
        _info(f"k={c.k} ratio {c.ratio:.17g} C {c.big_c:.17g} packing {c.packing_count} "
              f"exponent {c.certified_exponent:.17g}", a.out is None)
    return EXIT_OK


COMMANDS = {
    "construct": cmd_construct,
    "enum-dirs": cmd_enum_dirs,
    "find-ap": cmd_find_ap,
    "verify-ap": cmd_verify_ap,
    "cover": cmd_cover,
    "estimate-dim": cmd_estimate_dim,
    "certify-lb": cmd_certify_lb,
}


def _apply_common(a) -> None:
    if a.budget is not None:
        if a.budget < 1:
            raise UsageError("budget must be positive")
        os.environ["APK_BUDGET"] = str(a.budget)
    if a.threads is not None:
        if a.threads < 1:
            raise UsageError("threads must be positive")
        if _kernels.HAVE_NUMBA:
            import numba

            numba.set_num_threads(min(a.threads, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    saved_budget = os.environ.get("APK_BUDGET")
    try:
        _apply_common(args)
        return COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"input schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (BudgetExceeded, TupleBudgetExceeded) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (CertificationError, CertificateError) as exc:
        print(f"certification error: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (UsageError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        # --budget applies to this invocation only
        if saved_budget is None:
            os.environ.pop("APK_BUDGET", None)
        else:
            os.environ["APK_BUDGET"] = saved_budget


if __name__ == "__main__":
    sys.exit(main())
