"""Torsion and curvature tables: values, zeros, antisymmetries, identities."""

import math

import numpy as np
import pytest

import dualjet as dj
from dualjet.chart import Point
from dualjet.sampling import sample_points
from dualjet.spaces import canonical_nlc_electrodynamic
from dualjet.tensors import christoffel_curvature_spatial, spatial_christoffel
from dualjet.torsion_curvature import build_geometry, verify_table_zeros

from conftest import electrodynamic_body, evaluators_for, make_space, tensor_worst


@pytest.fixture(scope="module")
def sphere_geo(sphere_no_potential_space):
    return build_geometry(sphere_no_potential_space)


@pytest.fixture(scope="module")
def quartic_geo(quartic_space):
    return build_geometry(quartic_space)


class TestFlatSpace:
    def test_everything_vanishes(self, flat_space):
        geo = build_geometry(flat_space)
        for cell in geo.torsion.cells + geo.curvature.cells:
            assert cell.tensor.is_zero(), cell.key


class TestTorsion:
    def test_sphere_curvature_contraction(self, sphere_geo):
        """U = 0: R^{(f)}_{(r)ij} = -frakR^k_rij p_k^f; at the equator with
        p_1^1 = 1 the (2)12^(1) component is +1."""
        r_ij = sphere_geo.torsion["R_ij"]
        pt = Point.of([1.0, 1.0], [math.pi / 2, 0.7], [[1.0, 0.0], [0.0, 0.0]])
        assert dj.evaluate(r_ij[1, 0, 1, 0], pt) == pytest.approx(1.0, rel=1e-12)

    def test_curvature_contraction_everywhere(self, sphere_no_potential_space,
                                              sphere_geo):
        space = sphere_no_potential_space
        frak = christoffel_curvature_spatial(
            spatial_christoffel(space.spatial_metric))
        r_ij = sphere_geo.torsion["R_ij"]
        for pt in sample_points(space.chart, 30, 3):
            ev = dj.Evaluator(space.chart, pt)
            for r, i, j, f in r_ij.indices():
                want = -sum(ev(frak[k, r, i, j]) * pt.p[f][k] for k in range(2))
                assert abs(ev(r_ij[r, i, j, f]) - want) < 1e-10

    def test_polar_h_flat_chi_curvature(self):
        """h = diag(1, t1^2), g = delta, U = 0: R_ab = 0 though N1 != 0,
        and T = 0 because A = 0."""
        space = make_space(2, 2, [["1", "0"], ["0", "t1^2"]],
                           lambda chart: electrodynamic_body(
                               chart, [["1", "0"], ["0", "1"]]))
        geo = build_geometry(space)
        assert not geo.connection.n1.is_zero()
        evaluators = evaluators_for(space, 20, 5)
        assert tensor_worst(geo.torsion["R_ab"], evaluators) < 1e-12
        assert tensor_worst(geo.torsion["T"], evaluators) < 1e-12

    def test_t_equals_minus_a(self, geometries):
        for geo in geometries.values():
            t_cell = geo.torsion["T"]
            A = geo.coefficients.A
            evaluators = evaluators_for(geo.space, 10, 7)
            for ev in evaluators:
                for r, a, j in t_cell.indices():
                    assert ev(t_cell[r, a, j]) == pytest.approx(
                        -ev(A[r, j, a]), rel=1e-13, abs=1e-13)

    def test_p_collapses_to_a(self, geometries):
        """Both branches: P^{(f)(j)}_{(r)a(b)} = delta_b^f A^j_ra (for m = 1
        this is the chi-cancellation reading of the displayed formula)."""
        for geo in geometries.values():
            p_cell = geo.torsion["P"]
            A = geo.coefficients.A
            evaluators = evaluators_for(geo.space, 10, 9)
            for ev in evaluators:
                for r, a, b, f, j in p_cell.indices():
                    want = ev(A[j, r, a]) if b == f else 0.0
                    assert abs(ev(p_cell[r, a, b, f, j]) - want) < 1e-12

    def test_m1_p_hm_is_c(self, quartic_geo):
        c = quartic_geo.coefficients.C
        p_hm = quartic_geo.torsion["P_hm"]
        assert all(p_hm[idx] is c[idx] for idx in c.indices())

    def test_momentum_homogeneity_of_r_ab(self):
        space = make_space(2, 2, [["1 + t2^2", "0"], ["0", "t1^2"]],
                           lambda chart: electrodynamic_body(
                               chart, [["1", "0"], ["0", "1 + x1^2"]]))
        geo = build_geometry(space)
        r_ab = geo.torsion["R_ab"]
        pt = sample_points(space.chart, 1, 11)[0]
        scaled = Point.of(pt.t, pt.x, np.asarray(pt.p) * 2.5)
        for idx in r_ab.indices():
            assert dj.evaluate(r_ab[idx], scaled) == pytest.approx(
                2.5 * dj.evaluate(r_ab[idx], pt), rel=1e-12, abs=1e-13)


class TestCurvature:
    def test_sphere_frak_value(self, sphere_geo):
        frak = sphere_geo.curvature["frak_R"]
        pt = Point.of([1.0, 1.0], [math.pi / 2, 0.4], [[0.0, 0.0], [0.0, 0.0]])
        assert dj.evaluate(frak[0, 1, 0, 1], pt) == pytest.approx(-1.0, rel=1e-12)

    def test_conformal_exponential_r_ibc_vanishes(self):
        """g = e^{t1+t2} delta: A = delta/2 constant, so R_ibc = 0 even
        though A != 0."""
        space = make_space(2, 2, [["1", "0"], ["0", "1"]],
                           lambda chart: electrodynamic_body(
                               chart, [["exp(t1 + t2)", "0"],
                                       ["0", "exp(t1 + t2)"]]))
        geo = build_geometry(space)
        assert not geo.coefficients.A.is_zero()
        evaluators = evaluators_for(space, 15, 13)
        assert tensor_worst(geo.curvature["R_ibc"], evaluators) < 1e-12

    def test_sphere_v_block_identity(self, sphere_no_potential_space, sphere_geo):
        """-R^{(d)(l)}_{(i)(a)jk} = -delta^d_a frakR^l_ijk, checked entrywise
        with independent loops."""
        frak = sphere_geo.curvature["frak_R"]
        v_cell = sphere_geo.curvature["vR_jk"]
        chart = sphere_no_potential_space.chart
        for pt in sample_points(chart, 15, 17):
            ev = dj.Evaluator(chart, pt)
            for i in range(2):
                for a in range(2):
                    for j in range(2):
                        for k in range(2):
                            for d in range(2):
                                for l in range(2):
                                    want = -ev(frak[l, i, j, k]) if d == a else 0.0
                                    assert abs(ev(v_cell[i, a, j, k, d, l])
                                               - want) < 1e-12

    def test_m1_v_mirrors(self, quartic_geo):
        evaluators = evaluators_for(quartic_geo.space, 10, 19)
        for v_key, h_key in (("vR_ibk", "R_ibk"), ("vR_ijk", "R_ijk"),
                             ("vP_ibk", "P_ibk"), ("vP_ijk", "P_ijk"),
                             ("vS", "S")):
            v_cell = quartic_geo.curvature[v_key]
            h_cell = quartic_geo.curvature[h_key]
            for ev in evaluators:
                for idx in h_cell.indices():
                    assert ev(v_cell[idx]) == pytest.approx(
                        -ev(h_cell[idx]), rel=1e-13, abs=1e-13)

    def test_quartic_s_is_nontrivial(self, quartic_geo):
        evaluators = evaluators_for(quartic_geo.space, 10, 23)
        assert tensor_worst(quartic_geo.curvature["S"], evaluators) > 1e-4

    def test_m1_sphere_matches_mge2_frak(self, sphere_m1_space):
        """h = 1, g = sphere, U = 0: the m=1 hM-hM curvature R_ijk reduces
        to the plain coefficient curvature of Gamma."""
        geo = build_geometry(sphere_m1_space)
        frak = christoffel_curvature_spatial(
            spatial_christoffel(sphere_m1_space.spatial_metric))
        r_ijk = geo.curvature["R_ijk"]
        for pt in sample_points(sphere_m1_space.chart, 20, 29):
            ev = dj.Evaluator(sphere_m1_space.chart, pt)
            for idx in r_ijk.indices():
                assert abs(ev(r_ijk[idx]) - ev(frak[idx])) < 1e-10


class TestAntisymmetries:
    def test_final_pair_antisymmetry(self, geometries, quartic_geo):
        """R_ij, R_ab, frakR, chi and S flip sign under their final pair."""
        cases = dict(geometries)
        cases["quartic"] = quartic_geo
        for name, geo in cases.items():
            evaluators = evaluators_for(geo.space, 25, 31)
            swaps = []
            tor, curv = geo.torsion, geo.curvature
            swaps.append((tor["R_ij"], lambda i: (i[0], i[2], i[1], i[3])))
            if "R_ab" in tor:
                swaps.append((tor["R_ab"], lambda i: (i[0], i[2], i[1], i[3])))
            swaps.append((curv["chi"], lambda i: (i[0], i[1], i[3], i[2])))
            if "frak_R" in curv:
                swaps.append((curv["frak_R"], lambda i: (i[0], i[1], i[3], i[2])))
            if "S" in curv:
                swaps.append((curv["S"],
                              lambda i: (i[0], i[1], i[4], i[5], i[2], i[3])))
            for tensor, swap in swaps:
                for ev in evaluators:
                    for idx in tensor.indices():
                        a = ev(tensor[idx])
                        b = ev(tensor[swap(idx)])
                        assert abs(a + b) <= 1e-12, (name, idx)


class TestTableZeros:
    def test_bundled_spaces_clean(self, geometries):
        for name, geo in geometries.items():
            pts = sample_points(geo.space.chart, 25, 37)
            rows = verify_table_zeros(geo.space, geo.torsion, geo.curvature,
                                      pts, geo.connection, geo.coefficients)
            for check, value in rows:
                assert value < 1e-12, (name, check)

    def test_zero_cells_complete_tables(self, geometries):
        for geo in geometries.values():
            for table in (geo.torsion, geo.curvature):
                cells = {(c.row, c.column) for c in table.cells}
                assert len(cells) == 18  # 6 rows x 3 columns, all present

    def test_quartic_momentum_dependent_has_no_c_witness(self, quartic_geo):
        pts = sample_points(quartic_geo.space.chart, 10, 41)
        rows = dict(verify_table_zeros(quartic_geo.space, quartic_geo.torsion,
                                       quartic_geo.curvature, pts))
        assert "witness_c_vanishes" not in rows
        assert rows["torsion_zero_cells"] == 0.0
        assert rows["witness_v_mirrors"] < 1e-12
