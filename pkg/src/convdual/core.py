"""Shared numeric types for piecewise-linear convex analysis.

Vectors are plain tuples of floats, functions are frozen dataclasses, and
``math.inf`` is the only admissible infinite value: it marks points outside
an effective domain.  ``-inf`` and ``NaN`` are rejected at construction
time, so every stored number is either finite or the single +inf tag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

Vector = Tuple[float, ...]

INF = math.inf


class InputError(ValueError):
    """Malformed or dimensionally inconsistent input."""


class UnsupportedInputError(ValueError):
    """Structurally valid input outside the supported class."""


class PreconditionError(ValueError):
    """A stated hypothesis of the operation fails on this input."""


class DomainError(ValueError):
    """An evaluation hit +inf where a finite value is required."""


def vector(coords: Sequence[float]) -> Vector:
    """Validate and freeze a coordinate sequence into a Vector."""
    v = tuple(float(c) for c in coords)
    if len(v) < 1:
        raise InputError("vector must have length >= 1")
    for c in v:
        if not math.isfinite(c):
            raise InputError(f"non-finite coordinate {c!r} in vector")
    return v


def dot(a: Sequence[float], b: Sequence[float]) -> float:
    """Dot product with fixed left-to-right summation order."""
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")
    s = 0.0
    for x, y in zip(a, b):
        s += x * y
    return s


def norm(a: Sequence[float]) -> float:
    return math.sqrt(dot(a, a))


def sub(a: Vector, b: Vector) -> Vector:
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class ToleranceProfile:
    """Equality and strict-comparison tolerances used throughout."""

    eq_tol: float = 1e-9
    strict_tol: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.strict_tol <= self.eq_tol):
            raise InputError("require 0 < strict_tol <= eq_tol")


DEFAULT_TOL = ToleranceProfile()

Box = Tuple[Tuple[float, float], ...]


def make_box(bounds: Sequence[Sequence[float]]) -> Box:
    """Per-coordinate closed intervals; bounds may be infinite but lo < hi."""
    out = []
    for lo, hi in bounds:
        lo, hi = float(lo), float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise InputError("NaN box bound")
        if not lo < hi:
            raise InputError(f"degenerate box interval [{lo}, {hi}]")
        out.append((lo, hi))
    return tuple(out)


@dataclass(frozen=True)
class MaxAffineFunction:
    """f(x) = max_k (<slope_k, x> - intercept_k) on box, +inf outside.

    Pieces are deduplicated; a box, when present, must have nonempty
    interior.  This is the one concrete convex function class the package
    computes with exactly.
    """

    dim: int
    pieces: Tuple[Tuple[Vector, float], ...]
    box: Optional[Box] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dim must be >= 1")
        if not self.pieces:
            raise InputError("need at least one affine piece")
        seen = set()
        for slope, intercept in self.pieces:
            if len(slope) != self.dim:
                raise InputError("piece slope has wrong dimension")
            if not math.isfinite(intercept):
                raise InputError("non-finite intercept")
            key = (slope, intercept)
            if key in seen:
                raise InputError(f"duplicate piece {key}")
            seen.add(key)
        if self.box is not None and len(self.box) != self.dim:
            raise InputError("box has wrong dimension")

    @property
    def slopes(self) -> np.ndarray:
        return np.array([s for s, _ in self.pieces], dtype=float)

    @property
    def intercepts(self) -> np.ndarray:
        return np.array([b for _, b in self.pieces], dtype=float)

    def has_bounded_box(self) -> bool:
        return self.box is not None and all(
            math.isfinite(lo) and math.isfinite(hi) for lo, hi in self.box
        )

    def contains(self, x: Sequence[float], tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        if self.box is None:
            return True
        return all(
            lo - tol.strict_tol <= c <= hi + tol.strict_tol
            for c, (lo, hi) in zip(x, self.box)
        )

    def is_interior(self, x: Sequence[float], tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        if self.box is None:
            return True
        return all(
            lo + tol.strict_tol < c < hi - tol.strict_tol
            for c, (lo, hi) in zip(x, self.box)
        )

    def __call__(self, x: Sequence[float], tol: ToleranceProfile = DEFAULT_TOL) -> float:
        return eval_max_affine(self, x, tol).value


def max_affine(
    pieces: Sequence[Sequence], box=None, dim: Optional[int] = None
) -> MaxAffineFunction:
    """Factory normalizing pieces to (Vector, float) and deduplicating."""
    norm_pieces = []
    seen = set()
    for slope, intercept in pieces:
        if isinstance(slope, (int, float)):
            slope = (slope,)
        v = vector(slope)
        key = (v, float(intercept))
        if key not in seen:
            seen.add(key)
            norm_pieces.append(key)
    if not norm_pieces:
        raise InputError("need at least one affine piece")
    if dim is None:
        dim = len(norm_pieces[0][0])
    b = make_box(box) if box is not None else None
    return MaxAffineFunction(dim=dim, pieces=tuple(norm_pieces), box=b)


@dataclass(frozen=True)
class EvalResult:
    """Value of a max-affine function plus the argmax piece indices."""

    value: float
    active: Tuple[int, ...]

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def eval_max_affine(
    f: MaxAffineFunction, x: Sequence[float], tol: ToleranceProfile = DEFAULT_TOL
) -> EvalResult:
    """Exact pointwise max over pieces; +inf with empty active set off-box.

    All piece indices whose value is within strict_tol of the max are
    reported active; callers wanting a single representative take the
    smallest index.
    """
    if len(x) != f.dim:
        raise InputError(f"point has dimension {len(x)}, expected {f.dim}")
    if not f.contains(x, tol):
        return EvalResult(INF, ())
    vals = [dot(s, x) - b for s, b in f.pieces]
    best = max(vals)
    active = tuple(i for i, v in enumerate(vals) if v >= best - tol.strict_tol)
    return EvalResult(best, active)


def eval_max_affine_grid(
    f: MaxAffineFunction, points: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL
) -> np.ndarray:
    """Vectorized evaluation on an (n, dim) array; +inf outside box."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != f.dim:
        raise InputError("grid has wrong dimension")
    vals = pts @ f.slopes.T - f.intercepts
    out = vals.max(axis=1)
    if f.box is not None:
        lo = np.array([b[0] for b in f.box])
        hi = np.array([b[1] for b in f.box])
        outside = (pts < lo - tol.strict_tol).any(axis=1) | (
            pts > hi + tol.strict_tol
        ).any(axis=1)
        out[outside] = INF
    return out


@dataclass(frozen=True)
class GridFunction1D:
    """Finite function samples on strictly increasing abscissae."""

    xs: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.values):
            raise InputError("xs and values must have equal length")
        if len(self.xs) < 1:
            raise InputError("need at least one sample")
        for v in self.xs + self.values:
            if not math.isfinite(v):
                raise InputError("non-finite grid entry")
        if any(a >= b for a, b in zip(self.xs, self.xs[1:])):
            raise InputError("xs must be strictly increasing")

    def as_arrays(self):
        return np.array(self.xs, dtype=float), np.array(self.values, dtype=float)

    def __len__(self):
        return len(self.xs)


def grid_function(xs: Sequence[float], values: Sequence[float]) -> GridFunction1D:
    return GridFunction1D(tuple(float(x) for x in xs), tuple(float(v) for v in values))


@dataclass(frozen=True)
class OperatorSample:
    """Finite multiset of (dual point, functional) pairs with a base pair.

    Duplicate dual points are allowed (the sampled operator is set-valued);
    duplicate full pairs are not.
    """

    dim: int
    pairs: Tuple[Tuple[Vector, Vector], ...]
    base: int = 0

    def __post_init__(self):
        if not self.pairs:
            raise InputError("sample must contain at least one pair")
        seen = set()
        for xstar, x in self.pairs:
            if len(xstar) != self.dim or len(x) != self.dim:
                raise InputError("pair has wrong dimension")
            if (xstar, x) in seen:
                raise InputError(f"duplicate pair {(xstar, x)}")
            seen.add((xstar, x))
        if not 0 <= self.base < len(self.pairs):
            raise InputError(f"base index {self.base} out of range")

    @property
    def base_dual_point(self) -> Vector:
        return self.pairs[self.base][0]

    def __len__(self):
        return len(self.pairs)


def operator_sample(pairs: Sequence[Sequence], base: int = 0, dim=None) -> OperatorSample:
    norm_pairs = []
    for xstar, x in pairs:
        if isinstance(xstar, (int, float)):
            xstar = (xstar,)
        if isinstance(x, (int, float)):
            x = (x,)
        norm_pairs.append((vector(xstar), vector(x)))
    if dim is None:
        dim = len(norm_pairs[0][0])
    return OperatorSample(dim=dim, pairs=tuple(norm_pairs), base=base)


def lower_convex_envelope(
    points: Sequence[Tuple], tol: ToleranceProfile = DEFAULT_TOL
) -> Tuple[int, ...]:
    """Strict vertices of the lower convex hull of 1-D (abscissa, value) data.

    Returns indices into `points` sorted by abscissa.  A point lying on the
    relative interior of a hull edge is NOT returned: the supporting-line
    test uses strict_tol, so only points whose deletion changes the
    envelope survive.
    """
    if len(points) < 1:
        raise InputError("need at least one point")
    flat = []
    for x, v in points:
        if isinstance(x, (tuple, list)):
            if len(x) != 1:
                raise InputError("envelope points must be 1-D")
            x = x[0]
        flat.append((float(x), float(v)))
    xs = [p[0] for p in flat]
    if len(set(xs)) != len(xs):
        raise InputError("abscissae must be distinct")
    order = sorted(range(len(flat)), key=lambda i: flat[i][0])
    hull: list[int] = []
    for i in order:
        xi, vi = flat[i]
        while len(hull) >= 2:
            x1, v1 = flat[hull[-2]]
            x2, v2 = flat[hull[-1]]
            # cross > tol  <=>  (x2, v2) strictly below segment (x1,v1)-(xi,vi)
            cross = (x2 - x1) * (vi - v1) - (v2 - v1) * (xi - x1)
            if cross <= tol.strict_tol:
                hull.pop()
            else:
                break
        hull.append(i)
    return tuple(hull)
