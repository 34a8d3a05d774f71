"""Support functions and strongly exposed points of finite convex bodies.

For a finite point set, strong exposure by a direction u is equivalent to
"unique linear maximizer with positive margin": any maximizing sequence
over finitely many points eventually stabilizes at the unique argmax, so
the sequential definition collapses to a finitely decidable test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import (
    DEFAULT_TOL,
    GridFunction1D,
    InputError,
    MaxAffineFunction,
    ToleranceProfile,
    UnsupportedInputError,
    Vector,
    dot,
    lower_convex_envelope,
    vector,
)

EXPOSES = "exposes"
TIES = "ties"


@dataclass(frozen=True)
class PointBody:
    """Convex hull of finitely many points, kept as the point list."""

    dim: int
    points: Tuple[Vector, ...]

    def __post_init__(self):
        if not self.points:
            raise InputError("body needs at least one point")
        seen = set()
        for p in self.points:
            if len(p) != self.dim:
                raise InputError("point has wrong dimension")
            if p in seen:
                raise InputError(f"duplicate point {p}")
            seen.add(p)


def point_body(points: Sequence[Sequence[float]], dim=None) -> PointBody:
    norm_pts = []
    seen = set()
    for p in points:
        if isinstance(p, (int, float)):
            p = (p,)
        v = vector(p)
        if v not in seen:
            seen.add(v)
            norm_pts.append(v)
    if dim is None:
        dim = len(norm_pts[0])
    return PointBody(dim=dim, points=tuple(norm_pts))


@dataclass(frozen=True)
class ExposureCertificate:
    direction: Vector
    sigma: float
    argmax_indices: Tuple[int, ...]
    verdict: str
    margin: float

    @property
    def exposes(self) -> bool:
        return self.verdict == EXPOSES


def support_function(C: PointBody, u) -> float:
    """sigma_C(u) = max over points of <p, u>."""
    if isinstance(u, (int, float)):
        u = (u,)
    u = vector(u)
    if len(u) != C.dim:
        raise InputError("direction has wrong dimension")
    return max(dot(p, u) for p in C.points)


def expose(
    C: PointBody, u, tol: ToleranceProfile = DEFAULT_TOL
) -> ExposureCertificate:
    """Certificate for whether direction u strongly exposes a point of C."""
    if isinstance(u, (int, float)):
        u = (u,)
    u = vector(u)
    if len(u) != C.dim:
        raise InputError("direction has wrong dimension")
    if all(abs(c) <= 0.0 for c in u):
        raise InputError("direction must be nonzero")
    vals = [dot(p, u) for p in C.points]
    sigma = max(vals)
    argmax = tuple(i for i, v in enumerate(vals) if v >= sigma - tol.strict_tol)
    others = [v for i, v in enumerate(vals) if i not in argmax]
    margin = sigma - max(others) if others else math.inf
    verdict = EXPOSES if len(argmax) == 1 and margin > tol.strict_tol else TIES
    return ExposureCertificate(u, sigma, argmax, verdict, margin)


@dataclass(frozen=True)
class ExpPointsResult:
    indices: Tuple[int, ...]
    mode: str  # "exact" or "sampled"

    @property
    def approximate(self) -> bool:
        return self.mode == "sampled"


def _strict_hull_2d(points, tol: ToleranceProfile) -> Tuple[int, ...]:
    """Indices of strict hull vertices in 2-D via monotone chain."""
    order = sorted(range(len(points)), key=lambda i: points[i])
    out = set()
    for sign in (1.0, -1.0):
        chain: list[int] = []
        for i in order:
            xi, yi = points[i]
            while len(chain) >= 2:
                x1, y1 = points[chain[-2]]
                x2, y2 = points[chain[-1]]
                cross = sign * ((x2 - x1) * (yi - y1) - (y2 - y1) * (xi - x1))
                if cross <= tol.strict_tol:
                    chain.pop()
                else:
                    break
            chain.append(i)
        out.update(chain)
    return tuple(sorted(out))


def exp_points(
    C: PointBody,
    mode: str = "exact",
    trials: int = 1000,
    seed: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> ExpPointsResult:
    """Strongly exposed points of the body.

    Exact mode (d <= 3) returns the strict hull vertices: for a polytope a
    point is strongly exposed iff it is a vertex.  Sampled mode returns the
    points exposed by at least one of `trials` random directions and is
    flagged approximate.
    """
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        found = set()
        for _ in range(trials):
            u = rng.standard_normal(C.dim)
            nu = np.linalg.norm(u)
            if nu <= tol.strict_tol:
                continue
            cert = expose(C, tuple(u / nu), tol)
            if cert.exposes:
                found.add(cert.argmax_indices[0])
        return ExpPointsResult(tuple(sorted(found)), "sampled")
    if mode != "exact":
        raise InputError(f"unknown mode {mode!r}")
    if C.dim == 1:
        xs = [p[0] for p in C.points]
        idx = {xs.index(min(xs)), xs.index(max(xs))}
        return ExpPointsResult(tuple(sorted(idx)), "exact")
    if C.dim == 2:
        return ExpPointsResult(_strict_hull_2d(C.points, tol), "exact")
    if C.dim == 3:
        from scipy.spatial import ConvexHull, QhullError

        try:
            hull = ConvexHull(np.array(C.points))
        except QhullError as exc:
            raise UnsupportedInputError(
                "degenerate 3-D body: use sampled mode"
            ) from exc
        return ExpPointsResult(tuple(sorted(int(i) for i in hull.vertices)), "exact")
    raise UnsupportedInputError("exact mode supports d <= 3")


@dataclass(frozen=True)
class ExpGResult:
    """Strongly exposed grid points of a 1-D sampled function.

    For every exposed index the accompanying functional (s, -1) supports
    the epigraph strictly at that vertex; s is a separating slope.
    """

    indices: Tuple[int, ...]
    functionals: Tuple[Tuple[float, float], ...]


def exp_g(g: GridFunction1D, tol: ToleranceProfile = DEFAULT_TOL) -> ExpGResult:
    """Strict lower-envelope vertices of the graph = exposed points of g."""
    env = lower_convex_envelope(list(zip(g.xs, g.values)), tol)
    functionals = []
    hx = [g.xs[i] for i in env]
    hv = [g.values[i] for i in env]
    slopes = [
        (hv[k + 1] - hv[k]) / (hx[k + 1] - hx[k]) for k in range(len(env) - 1)
    ]
    for k in range(len(env)):
        if len(env) == 1:
            s = 0.0
        elif k == 0:
            s = slopes[0] - 1.0
        elif k == len(env) - 1:
            s = slopes[-1] + 1.0
        else:
            s = 0.5 * (slopes[k - 1] + slopes[k])
        functionals.append((s, -1.0))
    return ExpGResult(env, tuple(functionals))


def epi_pointed(g: MaxAffineFunction, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """Whether the slope hull has nonempty interior (dim = full dimension).

    For a box-free max-affine g the domain of its conjugate restricted to
    the predual is the convex hull of the slopes, so this is the computable
    form of the epi-pointedness hypothesis.
    """
    slopes = g.slopes
    if len(slopes) <= g.dim:
        return False
    diffs = slopes[1:] - slopes[0]
    rank = np.linalg.matrix_rank(diffs, tol=1e-9)
    return int(rank) == g.dim


@dataclass(frozen=True)
class DensityReport:
    fraction: float
    exposing: int
    trials: int
    seed: int


def density_check(
    C: PointBody, trials: int, seed: int = 0, tol: ToleranceProfile = DEFAULT_TOL
) -> DensityReport:
    """Fraction of random unit directions that strongly expose a point.

    For bodies in general position the tie set has measure zero, so the
    fraction tends to 1; a deficit localizes the degenerate directions.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        u = rng.standard_normal(C.dim)
        nu = np.linalg.norm(u)
        if nu <= tol.strict_tol:
            continue
        done += 1
        if expose(C, tuple(u / nu), tol).exposes:
            hits += 1
    return DensityReport(hits / trials, hits, trials, seed)
