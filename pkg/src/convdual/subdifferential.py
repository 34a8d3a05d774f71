"""Exact and epsilon-subdifferentials of max-affine functions.

Membership in the epsilon-subdifferential is decided through the
conjugate-gap identity (gap = f(x) + f*(y) - <y,x> <= eps), never by
quantifier elimination, so the test is exact wherever f* is exact.
Boundary points of the box are rejected by the exact subdifferential:
normal-cone contributions are out of scope and silence would fabricate
wrong sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .core import (
    DEFAULT_TOL,
    InputError,
    MaxAffineFunction,
    ToleranceProfile,
    UnsupportedInputError,
    Vector,
    dot,
    eval_max_affine,
    vector,
)
from .conjugate import conjugate_max_affine, conjugate_unbounded_1d

MEMBER = "member"
NONMEMBER = "nonmember"


@dataclass(frozen=True)
class SubdiffSet:
    """Convex hull of the listed generators (active piece slopes)."""

    generators: Tuple[Vector, ...]

    def __len__(self):
        return len(self.generators)


@dataclass(frozen=True)
class EpsMembershipCertificate:
    gap: float
    eps: float
    verdict: str

    def __post_init__(self):
        want = MEMBER if self.gap <= self.eps + DEFAULT_TOL.strict_tol else NONMEMBER
        if self.verdict != want:
            raise InputError("certificate verdict inconsistent with its gap")

    @property
    def is_member(self) -> bool:
        return self.verdict == MEMBER


def _certificate(gap: float, eps: float, tol: ToleranceProfile) -> EpsMembershipCertificate:
    verdict = MEMBER if gap <= eps + tol.strict_tol else NONMEMBER
    return EpsMembershipCertificate(gap, eps, verdict)


def subdiff(
    f: MaxAffineFunction, x, tol: ToleranceProfile = DEFAULT_TOL
) -> SubdiffSet:
    """Slopes of the pieces active at an interior point x."""
    if isinstance(x, (int, float)):
        x = (x,)
    x = vector(x)
    if not f.is_interior(x, tol):
        raise UnsupportedInputError(
            f"{x} is outside or on the boundary of the box: normal-cone "
            "terms are not implemented"
        )
    res = eval_max_affine(f, x, tol)
    return SubdiffSet(tuple(f.pieces[i][0] for i in res.active))


def eps_subdiff_member(
    f: MaxAffineFunction, x, y, eps: float, tol: ToleranceProfile = DEFAULT_TOL
) -> EpsMembershipCertificate:
    """Decide y in the eps-subdifferential of f at x via the conjugate gap."""
    if isinstance(x, (int, float)):
        x = (x,)
    if isinstance(y, (int, float)):
        y = (y,)
    x, y = vector(x), vector(y)
    if eps < 0:
        raise InputError("eps must be >= 0")
    fx = eval_max_affine(f, x, tol).value
    if not math.isfinite(fx):
        raise InputError(f"f is not finite at {x}")
    fstar = conjugate_max_affine(f, tol)
    fy = fstar(y)
    gap = fx + fy - dot(y, x)
    return _certificate(gap, eps, tol)


def eps_subdiff_witness(
    g: MaxAffineFunction, xstar, eps: float, tol: ToleranceProfile = DEFAULT_TOL
) -> Vector:
    """An element of the eps-subdifferential at any point of dom g.

    Any slope active at xstar is an exact subgradient there (the piece
    attains the sup defining g* at xstar, so its conjugate gap is zero),
    hence belongs to every eps-subdifferential with eps >= 0.  Works at
    boundary points of the box too.
    """
    if isinstance(xstar, (int, float)):
        xstar = (xstar,)
    xstar = vector(xstar)
    if eps <= 0:
        raise InputError("eps must be > 0")
    res = eval_max_affine(g, xstar, tol)
    if not res.is_finite:
        raise InputError(f"{xstar} is outside dom g")
    return g.pieces[res.active[0]][0]


def directional_derivative(
    f: MaxAffineFunction, x, u, tol: ToleranceProfile = DEFAULT_TOL
) -> float:
    """One-sided directional derivative: max of <a, u> over active slopes."""
    if isinstance(u, (int, float)):
        u = (u,)
    u = vector(u)
    gens = subdiff(f, x, tol).generators
    return max(dot(a, u) for a in gens)


@dataclass(frozen=True)
class SwapReport:
    """Gap symmetry between y in d_eps f(x) and x in d_eps f*(y)."""

    gap_primal: float
    gap_dual: float
    primal: EpsMembershipCertificate
    dual: EpsMembershipCertificate

    @property
    def verdicts_agree(self) -> bool:
        return self.primal.verdict == self.dual.verdict


def duality_swap_check(
    f: MaxAffineFunction, x, y, eps: float, tol: ToleranceProfile = DEFAULT_TOL
) -> SwapReport:
    """Check that both membership certificates carry the same gap.

    The dual-side gap is computed through an independent route: f* is
    materialized as an explicit max-affine function and conjugated again
    by breakpoint enumeration, so agreement is evidence rather than an
    arithmetic tautology.  1-D only (exact biconjugation in higher
    dimension is out of scope).
    """
    if f.dim != 1:
        raise UnsupportedInputError("swap check is implemented for dim 1 only")
    if isinstance(x, (int, float)):
        x = (x,)
    if isinstance(y, (int, float)):
        y = (y,)
    x, y = vector(x), vector(y)
    if eps < 0:
        raise InputError("eps must be >= 0")
    fstar = conjugate_max_affine(f, tol)
    fstar_fn = fstar.as_max_affine()
    fx = eval_max_affine(f, x, tol).value
    if not math.isfinite(fx):
        raise InputError(f"f is not finite at {x}")
    fy = fstar(y)
    gap_primal = fx + fy - dot(y, x)
    # second conjugation: (f*)* evaluated at x from the f* representation
    fss_x = conjugate_unbounded_1d(fstar_fn, x[0], tol)
    gap_dual = fy + fss_x - dot(y, x)
    return SwapReport(
        gap_primal,
        gap_dual,
        _certificate(gap_primal, eps, tol),
        _certificate(gap_dual, eps, tol),
    )
