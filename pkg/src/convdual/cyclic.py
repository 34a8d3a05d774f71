"""Cyclic-monotonicity certificates and the chain-supremum antiderivative.

An operator sample induces a complete directed graph whose edge weight
w(i -> j) = <x_i, xstar_j - xstar_i> is the chain term picked up when a
telescoping chain moves from pair i to pair j.  The sample is cyclically
monotone iff this graph has no positive-weight cycle, and in that case the
supremum over arbitrarily long chains collapses to a longest-path value
reachable in at most #pairs relaxation rounds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import (
    DEFAULT_TOL,
    InputError,
    MaxAffineFunction,
    OperatorSample,
    ToleranceProfile,
    Vector,
    dot,
    eval_max_affine,
    max_affine,
    sub,
    vector,
)

CYCLICALLY_MONOTONE = "cyclically_monotone"
VIOLATED = "violated"

_BRUTE_FORCE_MAX_PAIRS = 10


@dataclass(frozen=True)
class CycleCertificate:
    """Verdict with, on violation, an explicit witness cycle.

    cycle_sum is oriented as sum_k <x_k, xstar_k - xstar_{k+1}> over the
    listed cycle (cyclic successor), i.e. negative exactly when the
    chain-graph weight of the cycle is positive.
    """

    verdict: str
    cycle: Optional[Tuple[int, ...]] = None
    cycle_sum: Optional[float] = None

    @property
    def is_monotone(self) -> bool:
        return self.verdict == CYCLICALLY_MONOTONE


class NotCyclicallyMonotoneError(ValueError):
    """Raised when an operation requires a cyclically monotone sample."""

    def __init__(self, certificate: CycleCertificate):
        self.certificate = certificate
        super().__init__(
            f"sample is not cyclically monotone: cycle {certificate.cycle} "
            f"has sum {certificate.cycle_sum}"
        )


def chain_weights(sample: OperatorSample) -> np.ndarray:
    """Edge weight matrix w[i, j] = <x_i, xstar_j - xstar_i> (diagonal 0)."""
    n = len(sample)
    w = np.zeros((n, n))
    for i, (xstar_i, x_i) in enumerate(sample.pairs):
        for j, (xstar_j, _) in enumerate(sample.pairs):
            if i != j:
                w[i, j] = dot(x_i, sub(xstar_j, xstar_i))
    return w


def _paper_cycle_sum(sample: OperatorSample, cycle: Sequence[int]) -> float:
    total = 0.0
    for k, i in enumerate(cycle):
        j = cycle[(k + 1) % len(cycle)]
        total += dot(sample.pairs[i][1], sub(sample.pairs[i][0], sample.pairs[j][0]))
    return total


def check_monotone(
    sample: OperatorSample, tol: ToleranceProfile = DEFAULT_TOL
) -> CycleCertificate:
    """2-cycle (plain monotonicity) check over all unordered pairs."""
    n = len(sample)
    for i in range(n):
        xstar_i, x_i = sample.pairs[i]
        for j in range(i + 1, n):
            xstar_j, x_j = sample.pairs[j]
            if dot(sub(x_i, x_j), sub(xstar_i, xstar_j)) < -tol.strict_tol:
                cycle = (i, j)
                return CycleCertificate(VIOLATED, cycle, _paper_cycle_sum(sample, cycle))
    return CycleCertificate(CYCLICALLY_MONOTONE)


def check_cyclic(
    sample: OperatorSample, tol: ToleranceProfile = DEFAULT_TOL
) -> CycleCertificate:
    """Positive-cycle detection by iterative relaxation with witness walk."""
    n = len(sample)
    if n == 1:
        return CycleCertificate(CYCLICALLY_MONOTONE)
    w = chain_weights(sample)
    pot = [0.0] * n
    pred = [-1] * n
    touched = -1
    for _ in range(n):
        changed = False
        for i in range(n):
            pi = pot[i]
            for j in range(n):
                if i != j and pi + w[i, j] > pot[j] + tol.strict_tol:
                    pot[j] = pi + w[i, j]
                    pred[j] = i
                    touched = j
                    changed = True
        if not changed:
            return CycleCertificate(CYCLICALLY_MONOTONE)
    # still improving after n full rounds: a positive cycle exists in pred
    cert = _extract_cycle(sample, pred, touched, n, tol)
    if cert is not None:
        return cert
    # corner case: the predecessor walk failed to produce a genuine witness
    if n <= _BRUTE_FORCE_MAX_PAIRS:
        return check_cyclic_bruteforce(sample, tol)
    raise RuntimeError("positive cycle detected but witness extraction failed")


def _extract_cycle(sample, pred, start, n, tol) -> Optional[CycleCertificate]:
    v = start
    for _ in range(n):
        if pred[v] < 0:
            return None
        v = pred[v]
    cycle = [v]
    u = pred[v]
    steps = 0
    while u != v:
        if u < 0 or steps > n:
            return None
        cycle.append(u)
        u = pred[u]
        steps += 1
    cycle.reverse()
    s = _paper_cycle_sum(sample, cycle)
    if s < -tol.strict_tol:
        return CycleCertificate(VIOLATED, tuple(cycle), s)
    return None


def check_cyclic_bruteforce(
    sample: OperatorSample, tol: ToleranceProfile = DEFAULT_TOL
) -> CycleCertificate:
    """Exhaustive enumeration of simple cycles; the independent oracle."""
    n = len(sample)
    if n > _BRUTE_FORCE_MAX_PAIRS:
        raise InputError(f"exhaustive enumeration limited to {_BRUTE_FORCE_MAX_PAIRS} pairs")
    worst: Optional[Tuple[float, Tuple[int, ...]]] = None
    for size in range(2, n + 1):
        for nodes in itertools.combinations(range(n), size):
            first = nodes[0]
            for rest in itertools.permutations(nodes[1:]):
                cycle = (first,) + rest
                s = _paper_cycle_sum(sample, cycle)
                if worst is None or s < worst[0]:
                    worst = (s, cycle)
    if worst is not None and worst[0] < -tol.strict_tol:
        return CycleCertificate(VIOLATED, worst[1], worst[0])
    return CycleCertificate(CYCLICALLY_MONOTONE)


@dataclass(frozen=True)
class AntiderivativeResult:
    """Chain-supremum antiderivative normalized to 0 at the base point."""

    h: MaxAffineFunction
    chain_values: Tuple[float, ...]
    base: int


def _source_indices(sample: OperatorSample, tol: ToleranceProfile) -> Tuple[int, ...]:
    base_pt = sample.base_dual_point
    out = []
    for i, (xstar, _) in enumerate(sample.pairs):
        if max(abs(a - b) for a, b in zip(xstar, base_pt)) <= tol.strict_tol:
            out.append(i)
    return tuple(out)


def build_antiderivative(
    sample: OperatorSample, tol: ToleranceProfile = DEFAULT_TOL
) -> AntiderivativeResult:
    """Longest-chain values from the base dual point, packaged max-affine.

    Every pair sharing the base dual point is a chain source (the sampled
    operator is set-valued there, and collapsing to one functional breaks
    exact recovery at kinks).  Refuses non-cyclically-monotone input: the
    supremum would be +inf.
    """
    cert = check_cyclic(sample, tol)
    if not cert.is_monotone:
        raise NotCyclicallyMonotoneError(cert)
    n = len(sample)
    w = chain_weights(sample)
    sources = _source_indices(sample, tol)
    v = [-math.inf] * n
    for s in sources:
        v[s] = 0.0
    for _ in range(n):
        changed = False
        for i in range(n):
            vi = v[i]
            if not math.isfinite(vi):
                continue
            for j in range(n):
                if i != j and vi + w[i, j] > v[j]:
                    v[j] = vi + w[i, j]
                    changed = True
        if not changed:
            break
    pieces = []
    for (xstar, x), vj in zip(sample.pairs, v):
        pieces.append((x, dot(x, xstar) - vj))
    h = max_affine(pieces, dim=sample.dim)
    res = AntiderivativeResult(h, tuple(v), sample.base)
    h0 = eval_max_affine(h, sample.base_dual_point, tol).value
    if abs(h0) > tol.strict_tol:
        raise RuntimeError(f"normalization failed: h(base) = {h0}")
    return res


def chain_sup_bruteforce(
    sample: OperatorSample,
    y,
    max_len: int,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> float:
    """Oracle: exhaust all chains of up to max_len steps from the base.

    Chains may revisit pairs; on a sample with a positive cycle the value
    grows without bound as max_len increases, which is exactly the
    behaviour the antiderivative builder refuses to paper over.
    """
    if isinstance(y, (int, float)):
        y = (y,)
    y = vector(y)
    n = len(sample)
    if n > _BRUTE_FORCE_MAX_PAIRS:
        raise InputError(f"brute force limited to {_BRUTE_FORCE_MAX_PAIRS} pairs")
    if max_len < 0:
        raise InputError("max_len must be >= 0")
    w = chain_weights(sample)
    sources = _source_indices(sample, tol)
    best = [-math.inf] * n  # best edge-sum over chains of the current length
    for s in sources:
        best[s] = 0.0
    overall = -math.inf
    for length in range(max_len + 1):
        for j, bj in enumerate(best):
            if math.isfinite(bj):
                xstar_j, x_j = sample.pairs[j]
                overall = max(overall, bj + dot(x_j, sub(y, xstar_j)))
        if length == max_len:
            break
        nxt = [-math.inf] * n
        for i, bi in enumerate(best):
            if not math.isfinite(bi):
                continue
            for j in range(n):
                if i != j and bi + w[i, j] > nxt[j]:
                    nxt[j] = bi + w[i, j]
        best = nxt
    return overall


@dataclass(frozen=True)
class InclusionReport:
    """Worst subgradient-inequality slack of the sample inside Gr(dh)."""

    worst_slack: float
    worst_pair: int
    n_points: int

    @property
    def holds(self) -> bool:
        return self.worst_slack >= -DEFAULT_TOL.strict_tol


def check_graph_inclusion(
    sample: OperatorSample,
    h: MaxAffineFunction,
    tol: ToleranceProfile = DEFAULT_TOL,
    n_random: int = 50,
    seed: int = 0,
) -> InclusionReport:
    """Verify h(z) >= h(xstar_j) + <x_j, z - xstar_j> for every pair.

    Checked exactly at every sampled dual point and at seeded random z
    around the sampled region.
    """
    rng = np.random.default_rng(seed)
    duals = np.array([p[0] for p in sample.pairs])
    lo = duals.min(axis=0) - 1.0
    hi = duals.max(axis=0) + 1.0
    zs = [tuple(p) for p in duals]
    zs += [tuple(lo + (hi - lo) * rng.random(sample.dim)) for _ in range(n_random)]
    worst = math.inf
    worst_pair = -1
    for j, (xstar_j, x_j) in enumerate(sample.pairs):
        hj = eval_max_affine(h, xstar_j, tol).value
        for z in zs:
            slack = eval_max_affine(h, z, tol).value - hj - dot(x_j, sub(z, xstar_j))
            if slack < worst:
                worst = slack
                worst_pair = j
    return InclusionReport(worst, worst_pair, len(zs))
