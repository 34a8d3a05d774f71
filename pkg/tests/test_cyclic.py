"""Cyclic-monotonicity certificates and the chain-supremum antiderivative."""
import math

import numpy as np
import pytest

from convdual import (
    NotCyclicallyMonotoneError,
    build_antiderivative,
    chain_sup_bruteforce,
    check_cyclic,
    check_cyclic_bruteforce,
    check_graph_inclusion,
    check_monotone,
    eval_max_affine,
    operator_sample,
)
from convdual.core import InputError

from helpers import random_monotone_sample, random_violated_sample

SWAPPED = operator_sample([((0,), (1,)), ((1,), (0,))])
ABS_KINK = operator_sample([((0,), (1,)), ((0,), (-1,))])
QUAD3 = operator_sample([((-1,), (-1,)), ((0,), (0,)), ((1,), (1,))], base=1)


class TestMonotone:
    def test_identity_sample(self):
        s = operator_sample([((t,), (t,)) for t in (-1, 0, 1)])
        assert check_monotone(s).is_monotone

    def test_swapped_pair_violated(self):
        cert = check_monotone(SWAPPED)
        assert not cert.is_monotone
        assert cert.cycle == (0, 1) and cert.cycle_sum == -1.0

    def test_single_pair(self):
        assert check_monotone(operator_sample([((0,), (1,))])).is_monotone


class TestCheckCyclic:
    def test_subdifferential_samples_pass(self):
        rng = np.random.default_rng(2)
        for d in (1, 2, 3):
            for _ in range(10):
                s = random_monotone_sample(rng, d, int(rng.integers(2, 7)))
                assert check_cyclic(s).is_monotone
                assert check_cyclic_bruteforce(s).is_monotone

    def test_swapped_pair(self):
        cert = check_cyclic(SWAPPED)
        assert not cert.is_monotone and cert.cycle_sum < -1e-12

    def test_rotation_sample_violated(self):
        # 90-degree rotation on the 4 unit points: not a subdifferential
        pts = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
        rot = [(-p[1], p[0]) for p in pts]
        s = operator_sample(list(zip(pts, rot)))
        cert = check_cyclic(s)
        assert not cert.is_monotone
        assert check_cyclic_bruteforce(s).cycle_sum < -1e-12
        # the returned witness really has negative sum in the stated orientation
        total = 0.0
        for k, i in enumerate(cert.cycle):
            j = cert.cycle[(k + 1) % len(cert.cycle)]
            xs_i, x_i = s.pairs[i]
            xs_j, _ = s.pairs[j]
            total += sum(a * (b - c) for a, b, c in zip(x_i, xs_i, xs_j))
        assert abs(total - cert.cycle_sum) <= 1e-12 and total < -1e-12

    def test_single_pair(self):
        assert check_cyclic(operator_sample([((0,), (1,))])).is_monotone


class TestBuildAntiderivative:
    def test_abs_from_kink_sample(self):
        res = build_antiderivative(ABS_KINK)
        for y in (-2.0, -0.5, 0.0, 1.0, 3.0):
            assert eval_max_affine(res.h, (y,)).value == abs(y)

    def test_single_pair_zero(self):
        res = build_antiderivative(operator_sample([((0,), (0,))]))
        for y in (-1.0, 0.0, 2.0):
            assert eval_max_affine(res.h, (y,)).value == 0.0

    def test_three_point_quadratic_sample(self):
        res = build_antiderivative(QUAD3)
        # h(y) = max(0, y - 1, -y - 1)
        assert eval_max_affine(res.h, (2.0,)).value == 1.0
        assert eval_max_affine(res.h, (0.5,)).value == 0.0
        assert res.chain_values == (0.0, 0.0, 0.0)

    def test_normalized_at_base(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            s = random_monotone_sample(rng, 2, 5)
            res = build_antiderivative(s)
            h0 = eval_max_affine(res.h, s.base_dual_point).value
            assert abs(h0) <= 1e-12

    def test_refuses_violated_sample(self):
        with pytest.raises(NotCyclicallyMonotoneError):
            build_antiderivative(SWAPPED)


class TestChainSupBruteforce:
    def test_reproduces_dp_on_named_examples(self):
        for sample, ys in ((ABS_KINK, (-2, 0, 1, 3)), (QUAD3, (-2, 0.5, 2))):
            res = build_antiderivative(sample)
            for y in ys:
                dp = eval_max_affine(res.h, (float(y),)).value
                assert abs(dp - chain_sup_bruteforce(sample, y, len(sample))) <= 1e-12

    def test_max_len_zero_base_only(self):
        val = chain_sup_bruteforce(QUAD3, 2.0, 0)
        # only the base pair (0, 0): <0, 2 - 0> = 0
        assert val == 0.0

    def test_unbounded_growth_on_violated_sample(self):
        v4 = chain_sup_bruteforce(SWAPPED, 0.5, 4)
        v10 = chain_sup_bruteforce(SWAPPED, 0.5, 10)
        assert v10 > v4  # positive cycle pumps value without bound

    def test_pair_cap(self):
        rng = np.random.default_rng(3)
        s = random_violated_sample(rng, 1, 11)
        with pytest.raises(InputError):
            chain_sup_bruteforce(s, 0.0, 3)


class TestGraphInclusion:
    def test_abs_reconstruction(self):
        res = build_antiderivative(ABS_KINK)
        assert check_graph_inclusion(ABS_KINK, res.h).holds

    def test_single_pair(self):
        s = operator_sample([((0.5,), (2.0,))])
        res = build_antiderivative(s)
        assert check_graph_inclusion(s, res.h).holds

    def test_quadratic_sample_slack_zero_at_samples(self):
        res = build_antiderivative(QUAD3)
        rep = check_graph_inclusion(QUAD3, res.h)
        assert rep.holds
        # subgradient inequality holds across all sampled dual-point pairs,
        # with equality when the chain value is tight along that edge
        for xstar_j, x_j in QUAD3.pairs:
            hj = eval_max_affine(res.h, xstar_j).value
            for z, _ in QUAD3.pairs:
                hz = eval_max_affine(res.h, z).value
                slack = hz - hj - x_j[0] * (z[0] - xstar_j[0])
                assert slack >= -1e-12

    def test_random_monotone_samples(self):
        rng = np.random.default_rng(31)
        for d in (1, 2):
            for _ in range(10):
                s = random_monotone_sample(rng, d, 5)
                res = build_antiderivative(s)
                assert check_graph_inclusion(s, res.h).holds
