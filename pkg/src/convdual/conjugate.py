"""Discrete and exact Legendre-Fenchel transforms for sampled and
max-affine functions, plus biconjugation and the Fenchel-Young gap.

The discrete transforms are exact for the *sampled* function: every
statement here quantifies over the given grid, never over the underlying
continuum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .core import (
    DEFAULT_TOL,
    DomainError,
    GridFunction1D,
    InputError,
    MaxAffineFunction,
    ToleranceProfile,
    UnsupportedInputError,
    Vector,
    dot,
    eval_max_affine,
    grid_function,
    lower_convex_envelope,
    max_affine,
)

# Total dense-grid budget for the d >= 2 cross-check (64 per axis, d <= 3).
_GRID_CAP = 64 ** 3


@dataclass(frozen=True)
class ConjugateReport:
    """Conjugate values plus the worst Fenchel-Young violation observed."""

    dual_values: GridFunction1D
    max_young_violation: float
    method: str


def _check_dual_grid(dual_xs: Sequence[float]) -> np.ndarray:
    ys = np.asarray(dual_xs, dtype=float)
    if ys.size == 0:
        raise InputError("dual grid is empty")
    if ys.ndim != 1 or np.any(np.diff(ys) <= 0):
        raise InputError("dual grid must be strictly increasing")
    return ys


def discrete_conjugate(f: GridFunction1D, dual_xs: Sequence[float]) -> GridFunction1D:
    """f*(y) = max_i (y * xs_i - values_i), the O(n*m) reference transform."""
    ys = _check_dual_grid(dual_xs)
    xs, vals = f.as_arrays()
    out = (np.outer(ys, xs) - vals).max(axis=1)
    return grid_function(ys, out)


def fast_conjugate_1d(
    f: GridFunction1D, dual_xs: Sequence[float], tol: ToleranceProfile = DEFAULT_TOL
) -> GridFunction1D:
    """Linear-time discrete transform via the lower convex envelope.

    Only envelope points can attain the max, and as y grows the maximizer
    index is nondecreasing, so a single monotone merge suffices.
    """
    ys = _check_dual_grid(dual_xs)
    env = lower_convex_envelope(list(zip(f.xs, f.values)), tol)
    hx = np.array([f.xs[i] for i in env])
    hv = np.array([f.values[i] for i in env])
    out = np.empty(len(ys))
    k = 0
    for j, y in enumerate(ys):
        while k + 1 < len(hx) and y * hx[k + 1] - hv[k + 1] >= y * hx[k] - hv[k]:
            k += 1
        out[j] = y * hx[k] - hv[k]
    return grid_function(ys, out)


def conjugate_report(
    f: GridFunction1D, dual_xs: Sequence[float], method: str = "fast1d"
) -> ConjugateReport:
    if method == "brute":
        conj = discrete_conjugate(f, dual_xs)
    elif method == "fast1d":
        conj = fast_conjugate_1d(f, dual_xs)
    else:
        raise InputError(f"unknown method {method!r}")
    xs, vals = f.as_arrays()
    ys, cv = conj.as_arrays()
    # violation of f(x) + f*(y) >= x*y over all sampled pairs
    gaps = vals[None, :] + cv[:, None] - np.outer(ys, xs)
    return ConjugateReport(conj, float(max(0.0, -gaps.min())), method)


class MaxAffineConjugate:
    """Callable computing f* exactly for a max-affine f on a bounded box.

    1-D: the maximizer of y*x - f(x) over the box sits at a kink or an
    endpoint, so f* is itself max-affine with pieces (x_c, f(x_c)) over
    that candidate set.

    d >= 2: candidates are box vertices plus solutions of square systems
    mixing piece-equality hyperplanes with box facets; every evaluation is
    cross-checked against a dense-grid lower bound and fails loudly if the
    enumeration ever misses the optimum.
    """

    def __init__(self, f: MaxAffineFunction, tol: ToleranceProfile = DEFAULT_TOL):
        if not f.has_bounded_box():
            raise UnsupportedInputError(
                "exact conjugation needs a bounded box (sup must be attained)"
            )
        self.f = f
        self.tol = tol
        self.method = "exact_maxaffine"
        pts = _candidate_points(f, tol)
        self._cand = pts
        self._cand_vals = np.array([eval_max_affine(f, tuple(p), tol).value for p in pts])
        if f.dim >= 2:
            per_axis = max(2, int(round(_GRID_CAP ** (1.0 / f.dim))))
            axes = [np.linspace(lo, hi, min(64, per_axis)) for lo, hi in f.box]
            mesh = np.meshgrid(*axes, indexing="ij")
            grid = np.stack([m.ravel() for m in mesh], axis=1)
            self._grid = grid
            self._grid_vals = grid @ f.slopes.T - f.intercepts
            self._grid_f = self._grid_vals.max(axis=1)
        else:
            self._grid = None

    def as_max_affine(self) -> MaxAffineFunction:
        """f* as an explicit max-affine function (finite on all of R^d)."""
        return max_affine(
            [(tuple(p), float(v)) for p, v in zip(self._cand, self._cand_vals)],
            dim=self.f.dim,
        )

    def __call__(self, y: Sequence[float]) -> float:
        if isinstance(y, (int, float)):
            y = (y,)
        if len(y) != self.f.dim:
            raise InputError("dual point has wrong dimension")
        ya = np.asarray(y, dtype=float)
        val = float((self._cand @ ya - self._cand_vals).max())
        if self._grid is not None:
            lb = float((self._grid @ ya - self._grid_f).max())
            if lb > val + self.tol.eq_tol * max(1.0, abs(val)):
                raise RuntimeError(
                    f"candidate enumeration missed the optimum: grid {lb} > {val}"
                )
        return val


def _candidate_points(f: MaxAffineFunction, tol: ToleranceProfile) -> np.ndarray:
    """Box vertices plus arrangement vertices of piece-equality hyperplanes."""
    d = f.dim
    lo = np.array([b[0] for b in f.box])
    hi = np.array([b[1] for b in f.box])
    slopes = f.slopes
    inters = f.intercepts
    k = len(f.pieces)
    cands = [np.array(v) for v in itertools.product(*[(l, h) for l, h in zip(lo, hi)])]
    # piece-equality hyperplanes <a_j - a_i, x> = b_j - b_i
    planes = []
    for i in range(k):
        for j in range(i + 1, k):
            n_vec = slopes[j] - slopes[i]
            if np.linalg.norm(n_vec) > tol.strict_tol:
                planes.append((n_vec, inters[j] - inters[i]))
    n_systems = sum(
        math.comb(len(planes), m) * math.comb(d, d - m) * 2 ** (d - m)
        for m in range(1, d + 1)
    )
    if n_systems > 200_000:
        raise UnsupportedInputError(
            f"candidate enumeration too large ({n_systems} systems)"
        )
    for m in range(1, d + 1):
        for chosen in itertools.combinations(range(len(planes)), m):
            for fixed in itertools.combinations(range(d), d - m):
                free = [c for c in range(d) if c not in fixed]
                for corner in itertools.product(*[(lo[c], hi[c]) for c in fixed]):
                    A = np.zeros((m, m))
                    rhs = np.zeros(m)
                    for r, pi in enumerate(chosen):
                        n_vec, c_val = planes[pi]
                        A[r] = n_vec[free]
                        rhs[r] = c_val - sum(
                            n_vec[c] * corner[t] for t, c in enumerate(fixed)
                        )
                    try:
                        sol = np.linalg.solve(A, rhs)
                    except np.linalg.LinAlgError:
                        continue
                    if not np.all(np.isfinite(sol)):
                        continue
                    x = np.empty(d)
                    for t, c in enumerate(fixed):
                        x[c] = corner[t]
                    x[free] = sol
                    if np.all(x >= lo - tol.eq_tol) and np.all(x <= hi + tol.eq_tol):
                        cands.append(np.clip(x, lo, hi))
    return np.array(cands)


def conjugate_max_affine(
    f: MaxAffineFunction, tol: ToleranceProfile = DEFAULT_TOL
) -> MaxAffineConjugate:
    """Exact evaluator for f* of a max-affine f with bounded box."""
    return MaxAffineConjugate(f, tol)


def conjugate_unbounded_1d(
    g: MaxAffineFunction, x: float, tol: ToleranceProfile = DEFAULT_TOL
) -> float:
    """g*(x) for a box-free 1-D max-affine g; +inf raises DomainError.

    The sup of x*y - g(y) over all of R is finite iff x lies between the
    extreme slopes of g, and is then attained at a breakpoint (intersection
    of two pieces).
    """
    if g.dim != 1 or g.box is not None:
        raise UnsupportedInputError("expects a box-free 1-D max-affine function")
    slopes = g.slopes[:, 0]
    inters = g.intercepts
    s_min, s_max = slopes.min(), slopes.max()
    if x < s_min - tol.eq_tol or x > s_max + tol.eq_tol:
        raise DomainError(f"conjugate is +inf at {x}: outside [{s_min}, {s_max}]")
    if len(slopes) == 1:
        return inters[0]  # g affine: g*(slope) = intercept
    best = -math.inf
    k = len(slopes)
    for i in range(k):
        for j in range(i + 1, k):
            if abs(slopes[i] - slopes[j]) <= tol.strict_tol:
                continue
            yb = (inters[i] - inters[j]) / (slopes[i] - slopes[j])
            best = max(best, x * yb - g((yb,), tol))
    return float(best)


@dataclass(frozen=True)
class BiconjugateReport:
    """f** on the primal grid with envelope bookkeeping."""

    biconjugate: GridFunction1D
    max_excess: float  # max of f** - f (should be <= eq_tol)
    equality_indices: Tuple[int, ...]
    envelope_indices: Tuple[int, ...]


def matched_dual_grid(f: GridFunction1D, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Envelope slopes plus their midpoints: guarantees f** = f on vertices."""
    env = lower_convex_envelope(list(zip(f.xs, f.values)), tol)
    if len(env) == 1:
        return np.array([0.0])
    hx = np.array([f.xs[i] for i in env])
    hv = np.array([f.values[i] for i in env])
    slopes = np.diff(hv) / np.diff(hx)
    mids = (slopes[:-1] + slopes[1:]) / 2.0 if len(slopes) > 1 else np.array([])
    ys = np.unique(np.concatenate([slopes, mids]))
    return ys


def biconjugate_check(
    f: GridFunction1D, tol: ToleranceProfile = DEFAULT_TOL
) -> BiconjugateReport:
    """Compute f** over matched grids; assert f** <= f + eq_tol everywhere."""
    env = lower_convex_envelope(list(zip(f.xs, f.values)), tol)
    ys = matched_dual_grid(f, tol)
    fstar = discrete_conjugate(f, ys)
    fss = discrete_conjugate(fstar, f.xs)
    xs, vals = f.as_arrays()
    _, fss_vals = fss.as_arrays()
    excess = float((fss_vals - vals).max())
    if excess > tol.eq_tol:
        raise RuntimeError(f"biconjugate exceeds the function by {excess}")
    equal = tuple(
        int(i) for i in np.nonzero(np.abs(fss_vals - vals) <= tol.eq_tol)[0]
    )
    return BiconjugateReport(fss, excess, equal, env)


def young_fenchel_gap(
    f_eval: Callable[[Vector], float],
    fstar_eval: Callable[[Vector], float],
    x: Vector,
    y: Vector,
) -> float:
    """gap = f(x) + f*(y) - <y, x>; nonnegative up to roundoff."""
    fx = f_eval(x)
    fy = fstar_eval(y)
    if not math.isfinite(fx):
        raise DomainError(f"f is not finite at {x}")
    if not math.isfinite(fy):
        raise DomainError(f"f* is not finite at {y}")
    return fx + fy - dot(y, x)
