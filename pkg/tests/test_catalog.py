"""Catalog functions: values, derivatives, metadata, combinators."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import conefrac as cf
from conefrac.errors import InputDomainError

S = 0.5


def fd_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    return np.array([
        (f.value(x + h * e) - f.value(x - h * e)) / (2.0 * h)
        for e in np.eye(x.size)
    ])


def fd_hessian(f, x, h=1e-4):
    x = np.asarray(x, dtype=float)
    n = x.size
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei, ej = np.eye(n)[i], np.eye(n)[j]
            out[i, j] = (f.value(x + h * ei + h * ej) - f.value(x + h * ei - h * ej)
                         - f.value(x - h * ei + h * ej) + f.value(x - h * ei - h * ej)) \
                / (4.0 * h * h)
    return out


class TestHalfSpacePower:
    def test_values(self):
        f = cf.HalfSpacePower(2, S, alpha=0.4)
        assert f.value((3.0, 2.0)) == pytest.approx(2.0 ** 0.4)
        assert f.value((0.0, -1.0)) == 0.0
        assert f.value((5.0, 0.0)) == 0.0

    def test_vanishes_on_lower_halfspace(self):
        f = cf.HalfSpacePower(2, S, alpha=0.4)
        assert f.vanishes_lower_halfspace

    def test_kink_plane(self):
        f = cf.HalfSpacePower(2, S, alpha=0.4)
        (kink,) = f.kink_surfaces
        assert kink.normal == (0.0, 1.0)
        assert kink.offset == 0.0
        assert kink.exponent == pytest.approx(0.4)

    @pytest.mark.parametrize("alpha", [0.0, -0.2, 1.0, 1.5])
    def test_exponent_must_lie_in_zero_two_s(self, alpha):
        with pytest.raises(InputDomainError):
            cf.HalfSpacePower(2, S, alpha=alpha)

    def test_gradient_matches_finite_differences(self):
        f = cf.HalfSpacePower(2, S, alpha=0.4)
        x = np.array([0.3, 1.7])
        assert f.gradient(x) == pytest.approx(fd_gradient(f, x), rel=1e-7)


class TestKelvinHalfSpacePower:
    def test_value_formula(self):
        f = cf.KelvinHalfSpacePower(2, S, alpha=0.25)
        x = np.array([0.7, 0.5])
        expected = 0.5 ** 0.25 / np.linalg.norm(x) ** (2.0 - 2.0 * S + 0.5)
        assert f.value(x) == pytest.approx(expected, rel=1e-14)

    def test_decay_exponent(self):
        f = cf.kelvin(0.25, 2, S)
        assert f.radial_exponent == pytest.approx(2.0 - 2.0 * S + 0.5)

    def test_origin_is_singular(self):
        f = cf.kelvin(0.25, 2, S)
        assert (0.0, 0.0) in f.singular_points

    @pytest.mark.parametrize("alpha", [0.0, 0.9, 1.2])
    def test_exponent_validation(self, alpha):
        with pytest.raises(InputDomainError):
            cf.kelvin(alpha, 2, S)


class TestBump:
    def test_plateau_and_support(self):
        f = cf.Bump(2, S, center=(0.4, 0.9), r_in=0.5, r_out=1.0)
        assert f.value((0.4, 0.9)) == 1.0
        assert f.value((0.4, 1.35)) == 1.0
        assert f.value((0.4, 2.0)) == 0.0
        assert 0.0 < f.value((0.4, 1.65)) < 1.0

    def test_support_ball(self):
        f = cf.Bump(2, S, center=(0.4, 0.9), r_in=0.5, r_out=1.0)
        ball = f.support_ball
        assert ball.center == (0.4, 0.9)
        assert ball.radius == 1.0

    def test_radii_ordering_enforced(self):
        with pytest.raises(InputDomainError):
            cf.Bump(2, S, center=(0.0, 0.0), r_in=1.0, r_out=1.0)

    def test_derivatives_match_finite_differences(self):
        f = cf.Bump(2, S, center=(0.4, 0.9), r_in=0.5, r_out=1.0)
        x = np.array([0.4, 1.6])
        assert f.gradient(x) == pytest.approx(fd_gradient(f, x), rel=1e-6)
        assert f.hessian(x) == pytest.approx(fd_hessian(f, x), rel=1e-4, abs=1e-4)

    def test_profile_is_flat_at_the_edges(self):
        # C^inf glue: derivative negligible just inside either radius
        f = cf.Bump(2, S, center=(0.0, 0.0), r_in=0.5, r_out=1.0)
        near_in = np.array([0.0, 0.5 + 1e-4])
        near_out = np.array([0.0, 1.0 - 1e-4])
        assert abs(f.gradient(near_in)[1]) < 1e-2
        assert abs(f.gradient(near_out)[1]) < 1e-2

    def test_whole_space_bump_defaults(self):
        f = cf.WholeSpaceBump(2, S)
        assert f.value((0.0, 0.0)) == 1.0
        assert f.value((4.0, 0.0)) == 0.0
        assert f.value((0.0, -1.2)) > 0.0
        assert not f.vanishes_lower_halfspace


class TestCombinators:
    def test_product_values(self, rng):
        g = cf.HalfSpacePower(2, S, alpha=0.4)
        h = cf.Bump(2, S, center=(0.0, 1.0), r_in=0.25, r_out=0.5)
        prod = cf.Product(g, h)
        X = rng.uniform(-2.0, 2.0, size=(40, 2))
        np.testing.assert_allclose(prod.values(X), g.values(X) * h.values(X), rtol=1e-14)

    def test_product_support_is_the_smaller_ball(self):
        g = cf.HalfSpacePower(2, S, alpha=0.4)
        h = cf.Bump(2, S, center=(0.4, 0.9), r_in=0.5, r_out=1.0)
        ball = cf.Product(g, h).support_ball
        assert ball.center == (0.4, 0.9)
        assert ball.radius == 1.0
        assert cf.Product(g, h).vanishes_lower_halfspace

    def test_scalar_multiple(self):
        f = cf.Bump(2, S, center=(0.0, 0.0), r_in=0.5, r_out=1.0)
        assert cf.ScalarMultiple(0.25, f).value((0.0, 0.0)) == 0.25

    def test_rescale_values_and_support(self):
        f = cf.Bump(2, S, center=(0.4, 0.9), r_in=0.5, r_out=1.0)
        r = cf.Rescale(f, 2.0)
        assert r.value((0.8, 1.8)) == f.value((0.4, 0.9))
        assert r.support_ball.center == (0.8, 1.8)
        assert r.support_ball.radius == 2.0

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=0.25, max_value=4.0),
           st.floats(min_value=-1.5, max_value=1.5),
           st.floats(min_value=-1.5, max_value=1.5))
    def test_rescale_roundtrip(self, R, x1, x2):
        f = cf.Bump(2, S, center=(0.0, 0.0), r_in=0.5, r_out=1.0)
        x = np.array([[x1, x2]])
        back = cf.Rescale(cf.Rescale(f, R), 1.0 / R)
        assert back.values(x)[0] == pytest.approx(f.values(x)[0], rel=1e-12, abs=1e-12)

    def test_translate_truncate_values(self):
        base = cf.kelvin(0.25, 2, S)
        f = cf.translate_truncate(base)
        assert f.values(np.array([[0.0, 0.5]]))[0] == pytest.approx(
            base.values(np.array([[0.0, 1.5]]))[0], rel=1e-14)
        assert f.values(np.array([[0.0, -0.5]]))[0] == 0.0
        assert f.vanishes_lower_halfspace
        assert f.singular_points == ()

    def test_zero_and_constant(self):
        X = np.array([[0.3, 0.4], [-1.0, 2.0]])
        assert cf.Zero(2, S).values(X) == pytest.approx([0.0, 0.0])
        assert cf.Constant(2, S, c=3.0).values(X) == pytest.approx([3.0, 3.0])
