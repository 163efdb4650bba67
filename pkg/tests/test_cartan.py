"""Cartan coefficients, adapted derivatives, covariant derivatives."""

import math

import pytest

import dualjet as dj
from dualjet import expr as ex
from dualjet.cartan import (
    CovariantKind, adapted_delta_spatial, adapted_delta_temporal,
    cartan_coefficients, cartan_coefficients_full, covariant_derivative,
)
from dualjet.chart import Point
from dualjet.sampling import sample_points
from dualjet.spaces import RawHamiltonian, canonical_nlc_general
from dualjet.tensors import DTensor, spatial_christoffel

from conftest import electrodynamic_body, evaluators_for, make_space, tensor_worst


class TestAdaptedDelta:
    def test_momentum_free_scalar(self, sphere_space):
        chart = sphere_space.chart
        N = sphere_space.nonlinear_connection
        f = dj.parse_scalar("sin(x1)*t2 + x2^2", chart)
        for i in range(2):
            delta = adapted_delta_spatial(f, i, N)
            plain = f.diff(ex.x_var(chart, i))
            assert delta is plain  # vertical term folds away exactly

    def test_flat_connection_is_plain_derivative(self, flat_space):
        chart = flat_space.chart
        N = flat_space.nonlinear_connection
        assert N.n1.is_zero() and N.n2.is_zero()
        e = dj.parse_scalar("p1_1^2*t1 + p2_2*x2", chart)
        assert adapted_delta_spatial(e, 0, N) is e.diff(ex.x_var(chart, 0))
        assert adapted_delta_temporal(e, 1, N) is e.diff(ex.t_var(chart, 1))

    def test_momentum_leaf_picks_up_connection(self, sphere_m1_space):
        """delta p_r / delta x^i = N2_(r)i^(1) with the plus convention."""
        chart = sphere_m1_space.chart
        N = canonical_nlc_general(sphere_m1_space)
        pt = Point.of([1.0], [math.pi / 4, 0.8], [[0.6, -0.4]])
        for r in range(2):
            for i in range(2):
                got = dj.evaluate(
                    adapted_delta_spatial(ex.p_var(chart, r, 0), i, N), pt)
                assert got == pytest.approx(dj.evaluate(N.n2[r, i, 0], pt),
                                            rel=1e-14, abs=1e-14)


class TestCoefficients:
    def test_conformally_flat_time_dependent(self):
        """g = e^{t1} delta, m = 2: A = delta/2 along t1, 0 along t2;
        H and C vanish."""
        space = make_space(2, 2, [["1", "0"], ["0", "1"]],
                           lambda chart: electrodynamic_body(
                               chart, [["exp(t1)", "0"], ["0", "exp(t1)"]]))
        coeffs = cartan_coefficients(space)
        pt = sample_points(space.chart, 1, 3)[0]
        for i in range(2):
            for j in range(2):
                want = 0.5 if i == j else 0.0
                assert dj.evaluate(coeffs.A[i, j, 0], pt) == pytest.approx(want)
                assert dj.evaluate(coeffs.A[i, j, 1], pt) == 0.0
        assert coeffs.Hc.is_zero()
        assert coeffs.C.is_zero()

    def test_momentum_free_single_time_has_zero_c(self, rheonomic_space):
        coeffs = cartan_coefficients(rheonomic_space)
        assert coeffs.C.is_zero()

    def test_sphere_t_independent(self, sphere_space, sphere_boxes):
        coeffs = cartan_coefficients(sphere_space)
        assert coeffs.A.is_zero()
        gamma = spatial_christoffel(sphere_space.spatial_metric)
        for idx in coeffs.Hc.indices():
            assert coeffs.Hc[idx] is gamma[idx]

    def test_full_equals_reduced_for_mge2(self, sphere_space, sphere_boxes):
        N = sphere_space.nonlinear_connection
        full = cartan_coefficients_full(sphere_space, N)
        reduced = cartan_coefficients(sphere_space, N)
        evaluators = evaluators_for(sphere_space, 25, 5, sphere_boxes)
        for lhs, rhs in ((full.A, reduced.A), (full.Hc, reduced.Hc),
                         (full.C, reduced.C)):
            for ev in evaluators:
                for idx in lhs.indices():
                    assert abs(ev(lhs[idx]) - ev(rhs[idx])) < 1e-12

    def test_chi_is_temporal_christoffel(self):
        space = make_space(2, 1, [["1", "0"], ["0", "t1^2"]],
                           lambda chart: electrodynamic_body(chart, [["1"]]))
        coeffs = cartan_coefficients(space)
        pt = Point.of([0.8, 0.5], [1.0], [[0.0], [0.0]])
        assert dj.evaluate(coeffs.chi[1, 0, 1], pt) == pytest.approx(1 / 0.8)


class TestCovariantDerivative:
    @pytest.fixture(params=["flat", "sphere", "rheonomic", "quartic"])
    def space(self, request, flat_space, sphere_space, rheonomic_space,
              quartic_space):
        return {"flat": flat_space, "sphere": sphere_space,
                "rheonomic": rheonomic_space, "quartic": quartic_space}[request.param]

    def test_metric_parallel_everywhere(self, space):
        """g_{ij|k}, g_{ij/c}, g vertical and all three h-derivatives vanish;
        this pins the sign conventions across every branch, including the
        momentum-dependent metric."""
        N = space.nonlinear_connection
        coeffs = cartan_coefficients(space, N)
        g, h = space.spatial_metric, space.h
        evaluators = evaluators_for(space, 20, 11)
        for tensor in (g.lower, h.lower):
            for kind in CovariantKind:
                out = covariant_derivative(tensor, kind, coeffs, N)
                assert tensor_worst(out, evaluators) < 1e-9
        vert = covariant_derivative(g.upper, CovariantKind.VERTICAL, coeffs, N)
        assert tensor_worst(vert, evaluators) < 1e-9

    def test_scalar_rank_zero(self, sphere_space):
        chart = sphere_space.chart
        N = sphere_space.nonlinear_connection
        coeffs = cartan_coefficients(sphere_space, N)
        f = dj.parse_scalar("t1*x2 + sin(x1)", chart)
        scalar = DTensor(chart, (), [f])
        out = covariant_derivative(scalar, CovariantKind.SPATIAL_H, coeffs, N)
        assert out.shape == (2,)
        for k in range(2):
            assert out[k,] is adapted_delta_spatial(f, k, N)

    def test_vertical_raises_rank_by_two(self, sphere_space):
        N = sphere_space.nonlinear_connection
        coeffs = cartan_coefficients(sphere_space, N)
        g = sphere_space.spatial_metric
        out = covariant_derivative(g.lower, CovariantKind.VERTICAL, coeffs, N)
        assert out.rank == 4
        assert out.shape == (2, 2, 2, 2)

    def test_leibniz_rule(self, sphere_space, sphere_boxes):
        chart = sphere_space.chart
        N = sphere_space.nonlinear_connection
        coeffs = cartan_coefficients(sphere_space, N)
        g = sphere_space.spatial_metric
        f = dj.parse_scalar("t2 + x2^2", chart)
        fg = g.lower.map(lambda e: ex.mul(f, e))
        lhs = covariant_derivative(fg, CovariantKind.SPATIAL_H, coeffs, N)
        g_cov = covariant_derivative(g.lower, CovariantKind.SPATIAL_H, coeffs, N)
        for pt in sample_points(chart, 20, 13, sphere_boxes):
            ev = dj.Evaluator(chart, pt)
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        rhs = (ev(adapted_delta_spatial(f, k, N)) * ev(g.lower[i, j])
                               + ev(f) * ev(g_cov[i, j, k]))
                        assert abs(ev(lhs[i, j, k]) - rhs) < 1e-10

    def test_symmetries_of_coefficients(self, quartic_space):
        """H symmetric in (j,k) and C in its upper spatial pair, evaluated
        on the momentum-dependent space where both are nontrivial."""
        coeffs = cartan_coefficients(quartic_space)
        assert not coeffs.C.is_zero()
        evaluators = evaluators_for(quartic_space, 25, 15)
        for ev in evaluators:
            for idx in coeffs.Hc.indices():
                i, j, k = idx
                assert ev(coeffs.Hc[idx]) == pytest.approx(
                    ev(coeffs.Hc[i, k, j]), rel=1e-12, abs=1e-12)
            for idx in coeffs.C.indices():
                i, c, j, k = idx
                assert ev(coeffs.C[idx]) == pytest.approx(
                    ev(coeffs.C[i, c, k, j]), rel=1e-12, abs=1e-12)
