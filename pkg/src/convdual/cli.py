"""Command-line front door: JSON documents in, machine-readable reports out.

Exit codes: 0 success, 1 input error, 2 falsification (a certificate or
search that came back negative).  Reports are deterministic: identical
inputs and seed produce byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import bronsted, conjugate, cyclic, exposed, subdifferential
from .reconstruct import (
    EXPOSED_ONLY,
    FULL,
    convergence_study,
    reconstruct,
)
from .core import (
    DEFAULT_TOL,
    GridFunction1D,
    InputError,
    MaxAffineFunction,
    OperatorSample,
    PreconditionError,
    ToleranceProfile,
    UnsupportedInputError,
    eval_max_affine,
    grid_function,
    max_affine,
    operator_sample,
)
from .exposed import PointBody, point_body

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FALSIFIED = 2

SCHEMA_VERSION = 1

_DOC_FIELDS = {
    "max_affine": {"kind", "version", "dim", "pieces", "box"},
    "grid_function": {"kind", "version", "xs", "values"},
    "operator_sample": {"kind", "version", "dim", "pairs", "base"},
    "body": {"kind", "version", "dim", "points"},
    "experiment": {
        "kind", "version", "operation", "g", "xstar0", "x0", "xstar",
        "eps", "beta", "alpha", "region", "trials",
    },
}


class DocumentError(InputError):
    pass


def _bound_from_json(v):
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return float(v)


def _bound_to_json(v: float):
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return v


def _check_fields(doc: dict, kind: str):
    extra = set(doc) - _DOC_FIELDS[kind]
    if extra:
        raise DocumentError(f"unknown fields {sorted(extra)} in {kind} document")
    if doc.get("version") != SCHEMA_VERSION:
        raise DocumentError(f"unsupported document version {doc.get('version')!r}")


def parse_document(doc: dict):
    """Strict parse of a JSON document into the corresponding object."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DocumentError("document must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind not in _DOC_FIELDS:
        raise DocumentError(f"unknown document kind {kind!r}")
    _check_fields(doc, kind)
    try:
        if kind == "max_affine":
            box = doc.get("box")
            if box is not None:
                box = [[_bound_from_json(b) for b in pair] for pair in box]
            return max_affine(
                [(p["slope"], p["intercept"]) for p in doc["pieces"]],
                box=box,
                dim=doc["dim"],
            )
        if kind == "grid_function":
            return grid_function(doc["xs"], doc["values"])
        if kind == "operator_sample":
            return operator_sample(
                [(p["xstar"], p["x"]) for p in doc["pairs"]],
                base=doc.get("base", 0),
                dim=doc["dim"],
            )
        if kind == "body":
            return point_body(doc["points"], dim=doc["dim"])
        if kind == "experiment":
            return doc
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed {kind} document: {exc}") from exc
    raise AssertionError


def serialize_document(obj) -> dict:
    if isinstance(obj, MaxAffineFunction):
        return {
            "kind": "max_affine",
            "version": SCHEMA_VERSION,
            "dim": obj.dim,
            "pieces": [
                {"slope": list(s), "intercept": b} for s, b in obj.pieces
            ],
            "box": None
            if obj.box is None
            else [[_bound_to_json(lo), _bound_to_json(hi)] for lo, hi in obj.box],
        }
    if isinstance(obj, GridFunction1D):
        return {
            "kind": "grid_function",
            "version": SCHEMA_VERSION,
            "xs": list(obj.xs),
            "values": list(obj.values),
        }
    if isinstance(obj, OperatorSample):
        return {
            "kind": "operator_sample",
            "version": SCHEMA_VERSION,
            "dim": obj.dim,
            "pairs": [{"xstar": list(a), "x": list(b)} for a, b in obj.pairs],
            "base": obj.base,
        }
    if isinstance(obj, PointBody):
        return {
            "kind": "body",
            "version": SCHEMA_VERSION,
            "dim": obj.dim,
            "points": [list(p) for p in obj.points],
        }
    raise InputError(f"cannot serialize {type(obj).__name__}")


def load_document(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    return parse_document(doc), hashlib.sha256(text.encode()).hexdigest()


def _sanitize(obj):
    """Make an arbitrary result JSON-safe (tuples, inf, dataclasses)."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: _sanitize(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_report(path: str, command: str, digest: str, seed: int,
                 tol: ToleranceProfile, payload) -> None:
    report = {
        "kind": "report",
        "version": SCHEMA_VERSION,
        "command": command,
        "input_digest": digest,
        "seed": seed,
        "tolerances": {"eq_tol": tol.eq_tol, "strict_tol": tol.strict_tol},
        "payload": _sanitize(payload),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")


def parse_grid_spec(spec: str, tol: ToleranceProfile = DEFAULT_TOL) -> List[float]:
    """Inclusive 'lo:hi:step' grid; the endpoint counts within strict_tol."""
    parts = spec.strip().split(":")
    if len(parts) != 3:
        raise InputError(f"grid spec must be lo:hi:step, got {spec!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise InputError(f"bad grid spec {spec!r}")
    out = []
    k = 0
    while True:
        v = lo + k * step
        if v > hi + tol.strict_tol:
            break
        out.append(min(v, hi))
        k += 1
    return out


def _parse_point(text: str) -> List[float]:
    return [float(p) for p in text.split(",")]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map usage errors onto the input-error exit
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="convdual", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("input")
        sp.add_argument("--out", required=True)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", default=None, help="eq_tol[,strict_tol]")

    sp = sub.add_parser("conjugate", help="discrete or exact Legendre transform")
    common(sp)
    sp.add_argument("--dual", required=True, help="dual grid lo:hi:step")

    sp = sub.add_parser("subdiff", help="subdifferential at a point")
    common(sp)
    sp.add_argument("--point", required=True)

    sp = sub.add_parser("check-cyclic", help="cyclic monotonicity certificate")
    common(sp)

    sp = sub.add_parser("build-h", help="chain-supremum antiderivative")
    common(sp)
    sp.add_argument("--base", type=int, default=None)

    sp = sub.add_parser("reconstruct", help="rebuild a function from samples")
    common(sp)
    sp.add_argument("--grid", required=True, help="dual grid lo:hi:step")
    sp.add_argument("--eval", dest="eval_grid", required=True)
    sp.add_argument("--base", type=float, required=True)
    sp.add_argument("--multivalued", action="store_true")
    sp.add_argument("--mode", choices=["full", "exposed"], default="full")

    sp = sub.add_parser("exposed", help="exposed points and density check")
    common(sp)
    sp.add_argument("--trials", type=int, default=1000)

    sp = sub.add_parser("bronsted", help="run a refinement/lemma experiment")
    common(sp)

    sp = sub.add_parser("convergence", help="gap vs dual grid spacing")
    common(sp)
    sp.add_argument("--range", dest="dual_range", required=True, help="lo:hi")
    sp.add_argument("--spacings", required=True, help="comma list")
    sp.add_argument("--eval", dest="eval_grid", required=True)
    sp.add_argument("--base", type=float, required=True)
    sp.add_argument("--multivalued", action="store_true")
    return p


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CONVDUAL_SEED")
    return int(env) if env else 0


def _resolve_tol(args) -> ToleranceProfile:
    spec = args.tol if args.tol is not None else os.environ.get("CONVDUAL_TOL")
    if not spec:
        return DEFAULT_TOL
    parts = [float(p) for p in spec.split(",")]
    if len(parts) == 1:
        return ToleranceProfile(eq_tol=parts[0])
    return ToleranceProfile(eq_tol=parts[0], strict_tol=parts[1])


def _cmd_conjugate(args, obj, digest, seed, tol) -> int:
    dual = parse_grid_spec(args.dual, tol)
    if isinstance(obj, GridFunction1D):
        fast = conjugate.fast_conjugate_1d(obj, dual, tol)
        brute = conjugate.discrete_conjugate(obj, dual)
        diff = max(
            abs(a - b) for a, b in zip(fast.values, brute.values)
        )
        if diff > tol.strict_tol:
            raise RuntimeError(f"fast/brute transforms disagree by {diff}")
        rep = conjugate.conjugate_report(obj, dual, "fast1d")
        payload = {
            "dual_values": serialize_document(rep.dual_values),
            "max_young_violation": rep.max_young_violation,
            "method": rep.method,
            "fast_vs_brute_max_diff": diff,
        }
    elif isinstance(obj, MaxAffineFunction):
        fstar = conjugate.conjugate_max_affine(obj, tol)
        if obj.dim != 1:
            raise UnsupportedInputError("grid output for max-affine input is 1-D")
        vals = [fstar((y,)) for y in dual]
        payload = {
            "dual_values": serialize_document(grid_function(dual, vals)),
            "max_young_violation": 0.0,
            "method": fstar.method,
        }
    else:
        raise InputError("conjugate expects a grid_function or max_affine input")
    write_report(args.out, "conjugate", digest, seed, tol, payload)
    return EXIT_OK


def _cmd_subdiff(args, obj, digest, seed, tol) -> int:
    if not isinstance(obj, MaxAffineFunction):
        raise InputError("subdiff expects a max_affine input")
    pt = _parse_point(args.point)
    gens = subdifferential.subdiff(obj, pt, tol)
    payload = {"point": pt, "generators": [list(g) for g in gens.generators]}
    write_report(args.out, "subdiff", digest, seed, tol, payload)
    return EXIT_OK


def _cmd_check_cyclic(args, obj, digest, seed, tol) -> int:
    if not isinstance(obj, OperatorSample):
        raise InputError("check-cyclic expects an operator_sample input")
    cert = cyclic.check_cyclic(obj, tol)
    write_report(args.out, "check-cyclic", digest, seed, tol, cert)
    return EXIT_OK if cert.is_monotone else EXIT_FALSIFIED


def _cmd_build_h(args, obj, digest, seed, tol) -> int:
    if not isinstance(obj, OperatorSample):
        raise InputError("build-h expects an operator_sample input")
    if args.base is not None:
        obj = OperatorSample(dim=obj.dim, pairs=obj.pairs, base=args.base)
    try:
        res = cyclic.build_antiderivative(obj, tol)
    except cyclic.NotCyclicallyMonotoneError as exc:
        write_report(args.out, "build-h", digest, seed, tol, exc.certificate)
        return EXIT_FALSIFIED
    payload = {
        "h": serialize_document(res.h),
        "chain_values": list(res.chain_values),
        "base": res.base,
    }
    write_report(args.out, "build-h", digest, seed, tol, payload)
    return EXIT_OK


def _cmd_reconstruct(args, obj, digest, seed, tol) -> int:
    if not isinstance(obj, MaxAffineFunction):
        raise InputError("reconstruct expects a max_affine input")
    grid = parse_grid_spec(args.grid, tol)
    eval_pts = parse_grid_spec(args.eval_grid, tol)
    mode = FULL if args.mode == "full" else EXPOSED_ONLY
    rep = reconstruct(
        obj, grid, args.base, eval_pts, mode, args.multivalued, tol
    )
    g_base = eval_max_affine(obj, (args.base,), tol).value
    csv_path = os.path.splitext(args.out)[0] + ".csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "g", "h", "gap"])
        for y, gap in zip(rep.eval_points, rep.true_minus_h):
            gy = eval_max_affine(obj, y, tol).value
            w.writerow([repr(y[0]), repr(gy), repr(gy - g_base - gap), repr(gap)])
    payload = {
        "h": serialize_document(rep.h),
        "sup_gap": rep.sup_gap,
        "mode": rep.mode,
        "profile_csv": os.path.basename(csv_path),
    }
    write_report(args.out, "reconstruct", digest, seed, tol, payload)
    return EXIT_OK


def _cmd_exposed(args, obj, digest, seed, tol) -> int:
    if isinstance(obj, PointBody):
        payload: Dict[str, Any] = {
            "density": _sanitize(exposed.density_check(obj, args.trials, seed, tol))
        }
        if obj.dim <= 3:
            payload["exact"] = list(exposed.exp_points(obj, "exact", tol=tol).indices)
    elif isinstance(obj, GridFunction1D):
        res = exposed.exp_g(obj, tol)
        payload = {
            "indices": list(res.indices),
            "functionals": [list(f) for f in res.functionals],
        }
    else:
        raise InputError("exposed expects a body or grid_function input")
    write_report(args.out, "exposed", digest, seed, tol, payload)
    return EXIT_OK


def _cmd_bronsted(args, obj, digest, seed, tol) -> int:
    if not isinstance(obj, dict):
        raise InputError("bronsted expects an experiment document")
    op = obj.get("operation")
    g = parse_document(obj["g"])
    if not isinstance(g, MaxAffineFunction):
        raise InputError("experiment field 'g' must be a max_affine document")
    if op == "t0":
        res = bronsted.t0_refine(g, obj["xstar0"], obj["x0"], obj["eps"], tol=tol)
        ok = res.success
    elif op == "t1":
        res = bronsted.t1_refine(
            g, obj["xstar0"], obj["x0"], obj["eps"], obj["beta"], seed=seed, tol=tol
        )
        ok = res.success
    elif op == "l1":
        res = bronsted.l1_search(g, obj["xstar0"], obj["alpha"], obj["beta"], tol)
        ok = res.success
    elif op == "l2":
        res = bronsted.l2_search(g, obj["xstar"], tol)
        ok = res.success
    elif op == "density_probe":
        res = bronsted.density_probe(
            g, obj["region"], obj["trials"], obj.get("eps", 1e-4), seed, tol=tol
        )
        ok = res.fraction == 1.0
    else:
        raise InputError(f"unknown experiment operation {op!r}")
    write_report(args.out, f"bronsted/{op}", digest, seed, tol, res)
    return EXIT_OK if ok else EXIT_FALSIFIED


def _cmd_convergence(args, obj, digest, seed, tol) -> int:
    if not isinstance(obj, MaxAffineFunction):
        raise InputError("convergence expects a max_affine input")
    lo, hi = (float(p) for p in args.dual_range.split(":"))
    spacings = [float(s) for s in args.spacings.split(",")]
    grids = [parse_grid_spec(f"{lo}:{hi}:{s}", tol) for s in spacings]
    eval_pts = parse_grid_spec(args.eval_grid, tol)
    rows = convergence_study(
        obj, grids, args.base, eval_pts, args.multivalued, tol
    )
    write_report(args.out, "convergence", digest, seed, tol,
                 {"rows": [_sanitize(r) for r in rows]})
    return EXIT_OK


_HANDLERS = {
    "conjugate": _cmd_conjugate,
    "subdiff": _cmd_subdiff,
    "check-cyclic": _cmd_check_cyclic,
    "build-h": _cmd_build_h,
    "reconstruct": _cmd_reconstruct,
    "exposed": _cmd_exposed,
    "bronsted": _cmd_bronsted,
    "convergence": _cmd_convergence,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        obj, digest = load_document(args.input)
        seed = _resolve_seed(args)
        tol = _resolve_tol(args)
        return _HANDLERS[args.command](args, obj, digest, seed, tol)
    except (InputError, PreconditionError, UnsupportedInputError, OSError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
