"""Seeded random instance generators shared by the test suite.

Every generator takes an explicit ``numpy.random.Generator`` so each test
pins its own seed; nothing here touches global RNG state.
"""
from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from convdual import MaxAffineFunction, OperatorSample, max_affine, operator_sample
from convdual.subdifferential import subdiff


def random_max_affine_1d(
    rng: np.random.Generator,
    max_pieces: int = 6,
    box: Optional[Tuple[float, float]] = (-3.0, 3.0),
    straddle_zero: bool = False,
) -> Tuple[MaxAffineFunction, List[float]]:
    """Random 1-D max-affine function with every piece active somewhere.

    Built kink-first: choose increasing kink abscissae and increasing
    slopes, then chain intercepts so consecutive pieces meet exactly at
    the kinks.  That construction guarantees the upper envelope uses all
    pieces and the kink list is exact.  With ``straddle_zero`` the slopes
    change sign, so the minimum sits at an interior kink.

    Returns (function, kink abscissae sorted ascending).
    """
    m = int(rng.integers(1, max_pieces + 1))
    if straddle_zero and m < 2:
        m = 2
    lo, hi = box if box is not None else (-3.0, 3.0)
    inner_lo, inner_hi = lo + 0.4, hi - 0.4
    kinks = sorted(rng.uniform(inner_lo, inner_hi, size=m - 1))
    # enforce separation so no two kinks merge numerically
    ok = all(b - a >= 0.05 for a, b in zip(kinks, kinks[1:]))
    if not ok:
        return random_max_affine_1d(rng, max_pieces, box, straddle_zero)
    if straddle_zero:
        neg = sorted(rng.uniform(-3.0, -0.1, size=m // 2))
        pos = sorted(rng.uniform(0.1, 3.0, size=m - m // 2))
        slopes = neg + pos
    else:
        slopes = sorted(rng.uniform(-3.0, 3.0, size=m))
    if any(b - a < 0.05 for a, b in zip(slopes, slopes[1:])):
        return random_max_affine_1d(rng, max_pieces, box, straddle_zero)
    intercepts = [float(rng.uniform(-1.0, 1.0))]
    for k, x in enumerate(kinks):
        intercepts.append(intercepts[-1] + (slopes[k + 1] - slopes[k]) * x)
    pieces = [((s,), b) for s, b in zip(slopes, intercepts)]
    box_arg = [box] if box is not None else None
    return max_affine(pieces, box=box_arg), [float(x) for x in kinks]


def random_max_affine_nd(
    rng: np.random.Generator,
    dim: int,
    max_pieces: int = 5,
    box_halfwidth: Optional[float] = None,
) -> MaxAffineFunction:
    """Random d-dimensional max-affine function (slopes in general position)."""
    m = int(rng.integers(2, max_pieces + 1))
    slopes = rng.uniform(-2.0, 2.0, size=(m, dim))
    inters = rng.uniform(-1.0, 1.0, size=m)
    box = None
    if box_halfwidth is not None:
        box = [(-box_halfwidth, box_halfwidth)] * dim
    return max_affine(
        [(tuple(s), float(b)) for s, b in zip(slopes, inters)], box=box, dim=dim
    )


def random_monotone_sample(
    rng: np.random.Generator,
    dim: int,
    n_points: int,
    multivalued: bool = False,
) -> OperatorSample:
    """Cyclically monotone sample: the graph of a random subdifferential.

    Dual points are drawn in [-2, 2]^d; the functional at each point is an
    active slope of a random box-free max-affine function (every active
    slope when multivalued).  Subdifferential graphs are cyclically
    monotone by the telescoping subgradient inequality.
    """
    g = random_max_affine_nd(rng, dim)
    pairs = []
    seen = set()
    for _ in range(n_points):
        xstar = tuple(float(c) for c in rng.uniform(-2.0, 2.0, size=dim))
        gens = subdiff(g, xstar).generators
        chosen = gens if multivalued else gens[:1]
        for x in chosen:
            if (xstar, x) not in seen:
                seen.add((xstar, x))
                pairs.append((xstar, x))
    return operator_sample(pairs, base=0, dim=dim)


def random_violated_sample(
    rng: np.random.Generator, dim: int, n_points: int
) -> OperatorSample:
    """Raw random pairs; typically not cyclically monotone (no guarantee)."""
    pairs = []
    seen = set()
    while len(pairs) < n_points:
        xstar = tuple(float(c) for c in rng.uniform(-2.0, 2.0, size=dim))
        x = tuple(float(c) for c in rng.uniform(-2.0, 2.0, size=dim))
        if (xstar, x) not in seen:
            seen.add((xstar, x))
            pairs.append((xstar, x))
    return operator_sample(pairs, base=0, dim=dim)


def random_grid_function(
    rng: np.random.Generator, max_points: int = 12, span: float = 4.0
):
    """Random strictly increasing abscissae with random values."""
    from convdual import grid_function

    n = int(rng.integers(1, max_points + 1))
    xs = np.sort(rng.uniform(-span, span, size=n))
    while np.any(np.diff(xs) < 1e-6):
        xs = np.sort(rng.uniform(-span, span, size=n))
    vals = rng.uniform(-3.0, 3.0, size=n)
    return grid_function(xs, vals)
