"""Exact and epsilon-subdifferentials, duality swap."""
import numpy as np
import pytest

from convdual import (
    InputError,
    UnsupportedInputError,
    directional_derivative,
    duality_swap_check,
    eps_subdiff_member,
    eps_subdiff_witness,
    max_affine,
    subdiff,
)

from helpers import random_max_affine_1d

ABS = max_affine([(1, 0), (-1, 0)], box=[(-2, 2)])
ABS_FREE = max_affine([(1, 0), (-1, 0)])


class TestSubdiff:
    def test_abs_kink(self):
        gens = set(subdiff(ABS_FREE, (0.0,)).generators)
        assert gens == {(1.0,), (-1.0,)}

    def test_abs_smooth(self):
        assert subdiff(ABS_FREE, (3.0,)).generators == ((1.0,),)

    def test_coordinate_max_tie(self):
        f = max_affine([((1, 0), 0), ((0, 1), 0)])
        gens = set(subdiff(f, (0.0, 0.0)).generators)
        assert gens == {(1.0, 0.0), (0.0, 1.0)}

    def test_boundary_rejected(self):
        with pytest.raises(UnsupportedInputError):
            subdiff(ABS, (2.0,))
        with pytest.raises(UnsupportedInputError):
            subdiff(ABS, (3.0,))


class TestEpsMembership:
    def test_exact_subgradient(self):
        cert = eps_subdiff_member(ABS, (0.0,), (1.0,), 0.0)
        assert cert.is_member and cert.gap == 0.0

    def test_nonmember_below_gap(self):
        cert = eps_subdiff_member(ABS, (1.0,), (0.0,), 0.5)
        assert not cert.is_member and cert.gap == 1.0

    def test_boundary_gap_equals_eps(self):
        cert = eps_subdiff_member(ABS, (1.0,), (0.0,), 1.0)
        assert cert.is_member and cert.gap == 1.0

    def test_negative_eps_rejected(self):
        with pytest.raises(InputError):
            eps_subdiff_member(ABS, (0.0,), (1.0,), -0.1)

    def test_exact_subdiff_inside_every_eps(self):
        # every generator of the exact subdifferential is an eps-member for all eps
        rng = np.random.default_rng(17)
        for _ in range(25):
            f, _ = random_max_affine_1d(rng)
            x = float(rng.uniform(-2.5, 2.5))
            for y in subdiff(f, (x,)).generators:
                for eps in (0.0, 1e-6, 0.3):
                    assert eps_subdiff_member(f, (x,), y, eps).is_member


class TestEpsWitness:
    def test_abs_at_kink(self):
        y = eps_subdiff_witness(ABS_FREE, (0.0,), 0.1)
        assert eps_subdiff_member(ABS, (0.0,), y, 0.1).gap == 0.0

    def test_abs_smooth_point(self):
        assert eps_subdiff_witness(ABS_FREE, (0.5,), 0.01) == (1.0,)

    def test_quadratic_model_gap_law(self):
        # fine max-affine model of x^2/2: tangent pieces at lattice slopes
        slopes = np.linspace(-2, 2, 81)
        g = max_affine([((s,), s * s / 2) for s in slopes], box=[(-2, 2)])
        # at xstar = 0 the gap of functional y is ~y^2/2: accepted iff <= eps
        for y in (0.05, 0.1, 0.2, -0.3):
            cert = eps_subdiff_member(g, (0.0,), (y,), 0.01)
            assert cert.is_member == (y * y / 2 <= 0.01 + 1e-12)

    def test_works_at_box_boundary(self):
        y = eps_subdiff_witness(ABS, (2.0,), 0.1)
        assert y == (1.0,)

    def test_eps_zero_rejected(self):
        with pytest.raises(InputError):
            eps_subdiff_witness(ABS_FREE, (0.0,), 0.0)


class TestDirectionalDerivative:
    def test_abs_both_directions(self):
        assert directional_derivative(ABS_FREE, (0.0,), (1.0,)) == 1.0
        assert directional_derivative(ABS_FREE, (0.0,), (-1.0,)) == 1.0

    def test_coordinate_max(self):
        f = max_affine([((1, 0), 0), ((0, 1), 0)])
        assert directional_derivative(f, (0.0, 0.0), (1.0, -1.0)) == 1.0

    def test_support_of_subdifferential(self):
        # d+f(x)(u) = max over subgradients of <y, u>
        rng = np.random.default_rng(29)
        for _ in range(20):
            f, _ = random_max_affine_1d(rng)
            x = float(rng.uniform(-2.5, 2.5))
            u = float(rng.uniform(-2, 2))
            gens = subdiff(f, (x,)).generators
            assert directional_derivative(f, (x,), (u,)) == max(
                g[0] * u for g in gens
            )


class TestDualitySwap:
    def test_exact_pair(self):
        rep = duality_swap_check(ABS, (0.0,), (1.0,), 0.0)
        assert rep.verdicts_agree and rep.primal.is_member
        assert abs(rep.gap_primal - rep.gap_dual) <= 1e-12

    def test_boundary_gap(self):
        rep = duality_swap_check(ABS, (1.0,), (0.0,), 1.0)
        assert rep.verdicts_agree and rep.primal.is_member
        assert rep.gap_primal == 1.0

    def test_random_triples_agree(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            f, _ = random_max_affine_1d(rng)
            x = float(rng.uniform(-2.5, 2.5))
            y = float(rng.uniform(-3.5, 3.5))
            eps = float(rng.uniform(0, 1))
            rep = duality_swap_check(f, (x,), (y,), eps)
            assert rep.verdicts_agree
            assert abs(rep.gap_primal - rep.gap_dual) <= 1e-9

    def test_dim_two_unsupported(self):
        f = max_affine([((1, 0), 0)], box=[(-1, 1), (-1, 1)])
        with pytest.raises(UnsupportedInputError):
            duality_swap_check(f, (0.0, 0.0), (0.0, 0.0), 0.1)
