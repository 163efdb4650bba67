"""Independent numeric oracles: finite differences, metrical conditions,
affine chart transport, and general-vs-reduced formula equivalence.

Every suite is deterministic for a fixed seed: points are drawn from a
fresh generator per call, and reports carry no timing or environment data.
Residuals tagged "relative" are |a - b| / max(1, |a|, |b|); everything
else is a max absolute value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .cartan import (
    CartanCoefficients, CovariantKind,
    cartan_coefficients, cartan_coefficients_full, covariant_derivative,
)
from .chart import ChartSpec, Point
from .expr import Evaluator, Expr
from .sampling import DEFAULT_BOXES, SampleBoxes, sample_points
from .spaces import (
    Electrodynamic, HamiltonSpace, NonlinearConnection, RawHamiltonian,
    canonical_nlc_electrodynamic, canonical_nlc_general,
    decompose_electrodynamic,
)
from .tensors import DTensor, MetricField, SPATIAL, TEMPORAL, spatial_christoffel
from .torsion_curvature import Geometry, build_geometry, verify_table_zeros

__all__ = [
    "AffineChartMap", "ResidualReport", "SampleBoxes", "sample_points",
    "fd_check", "metric_condition_suite", "nlc_transformation_check",
    "reduction_equivalence_check", "table_zero_suite", "fd_pipeline_suite",
    "transform_space", "builtin_chart_maps",
]


@dataclass(frozen=True)
class ResidualReport:
    name: str
    max_residual: float
    samples: int
    tolerance: float
    passed: bool

    @staticmethod
    def of(name, residual, samples, tolerance) -> "ResidualReport":
        residual = float(residual)
        return ResidualReport(name=name, max_residual=residual, samples=samples,
                              tolerance=float(tolerance),
                              passed=residual <= tolerance)


# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------

def _fd_worst(chart: ChartSpec, exprs, points, eps: float) -> float:
    """Worst relative deviation of symbolic vs central-difference derivatives.

    Evaluation is batched: all expressions share one memo per (point,
    shift), which is what makes checking every pipeline expression cheap.
    """
    exprs = list(exprs)
    derivs = [[ex.differentiate(e, ex.variable(chart, k)) for e in exprs]
              for k in range(chart.size)]
    worst = 0.0
    for pt in points:
        base = list(pt.flatten(chart))
        ev0 = Evaluator(chart, pt)
        for k in range(chart.size):
            sym = [ev0(d) for d in derivs[k]]
            plus = list(base)
            minus = list(base)
            plus[k] += eps
            minus[k] -= eps
            evp = Evaluator(chart, Point.from_flat(chart, plus))
            evm = Evaluator(chart, Point.from_flat(chart, minus))
            for q, e in enumerate(exprs):
                fd = (evp(e) - evm(e)) / (2.0 * eps)
                scale = max(1.0, abs(sym[q]), abs(fd))
                worst = max(worst, abs(sym[q] - fd) / scale)
    return worst


def fd_check(e: Expr, points, eps: float = 1e-6,
             chart: ChartSpec | None = None) -> ResidualReport:
    """Symbolic derivative of e vs central differences, every chart variable."""
    if not 1e-8 <= eps <= 1e-4:
        raise ValueError(f"eps {eps:g} outside [1e-8, 1e-4]")
    if chart is None:
        chart = e.chart
    if chart is None:
        raise ValueError("a chart is needed for constant-only expressions")
    worst = _fd_worst(chart, [e], points, eps)
    return ResidualReport.of("fd_check", worst, len(points), 1e-6)


def _pipeline_expressions(geometry: Geometry):
    """Every expression the pipeline constructs, deduplicated by identity."""
    space = geometry.space
    tensors = [geometry.connection.n1, geometry.connection.n2,
               geometry.coefficients.chi, geometry.coefficients.A,
               geometry.coefficients.Hc, geometry.coefficients.C,
               space.h.lower, space.h.upper,
               space.spatial_metric.lower, space.spatial_metric.upper]
    tensors += [c.tensor for c in geometry.torsion.components()]
    tensors += [c.tensor for c in geometry.curvature.components()]
    seen = set()
    exprs = [space.hamiltonian]
    seen.add(id(space.hamiltonian))
    for t in tensors:
        for e in t.entries():
            if id(e) not in seen:
                seen.add(id(e))
                exprs.append(e)
    return exprs


def fd_pipeline_suite(space: HamiltonSpace, samples: int = 10, seed: int = 0,
                      eps: float = 1e-6, tol: float = 1e-6,
                      boxes: SampleBoxes | None = None,
                      geometry: Geometry | None = None) -> ResidualReport:
    """FD cross-check of every symbolic derivative the pipeline produces."""
    if geometry is None:
        geometry = build_geometry(space)
    points = sample_points(space.chart, samples, seed, boxes)
    worst = _fd_worst(space.chart, _pipeline_expressions(geometry), points, eps)
    return ResidualReport.of("fd_pipeline", worst, samples, tol)


# ---------------------------------------------------------------------------
# Metrical-condition suite
# ---------------------------------------------------------------------------

def _tensor_worst(tensor: DTensor, evaluators) -> float:
    worst = 0.0
    for ev in evaluators:
        for e in tensor.entries():
            worst = max(worst, abs(ev(e)))
    return worst


def metric_condition_suite(space: HamiltonSpace, N: NonlinearConnection,
                           coeffs: CartanCoefficients, samples: int = 100,
                           tol: float = 1e-9, seed: int = 0,
                           boxes: SampleBoxes | None = None):
    """Residuals of the defining metrical properties of the connection:

    g_{ij|k} = 0,  g_{ij/c} = 0,  g^{ij}|^{(k)}_{(c)} = 0,
    h_{ab/c} = h_{ab|k} = h_{ab}|^{(k)}_{(c)} = 0,
    plus the coefficient symmetries H^i_jk = H^i_kj and
    C_{i(c)}^{j(k)} = C_{i(c)}^{k(j)}.
    """
    chart = space.chart
    points = sample_points(chart, samples, seed, boxes)
    evaluators = [Evaluator(chart, pt) for pt in points]
    g = space.spatial_metric
    h = space.h

    checks = [
        ("g_lower_h_spatial",
         covariant_derivative(g.lower, CovariantKind.SPATIAL_H, coeffs, N)),
        ("g_lower_h_temporal",
         covariant_derivative(g.lower, CovariantKind.TEMPORAL_H, coeffs, N)),
        ("g_upper_vertical",
         covariant_derivative(g.upper, CovariantKind.VERTICAL, coeffs, N)),
        ("h_lower_h_temporal",
         covariant_derivative(h.lower, CovariantKind.TEMPORAL_H, coeffs, N)),
        ("h_lower_h_spatial",
         covariant_derivative(h.lower, CovariantKind.SPATIAL_H, coeffs, N)),
        ("h_lower_vertical",
         covariant_derivative(h.lower, CovariantKind.VERTICAL, coeffs, N)),
    ]
    reports = [ResidualReport.of(name, _tensor_worst(t, evaluators), samples, tol)
               for name, t in checks]

    Hc, C = coeffs.Hc, coeffs.C
    hc_asym = DTensor.build(chart, Hc.sig,
                            lambda idx: ex.sub(Hc[idx], Hc[idx[0], idx[2], idx[1]]))
    c_asym = DTensor.build(chart, C.sig,
                           lambda idx: ex.sub(C[idx],
                                              C[idx[0], idx[1], idx[3], idx[2]]))
    reports.append(ResidualReport.of("hc_symmetry",
                                     _tensor_worst(hc_asym, evaluators),
                                     samples, tol))
    reports.append(ResidualReport.of("c_symmetry",
                                     _tensor_worst(c_asym, evaluators),
                                     samples, tol))
    return reports


# ---------------------------------------------------------------------------
# Affine chart transport
# ---------------------------------------------------------------------------

class AffineChartMap:
    """Affine chart change: t~ = L t + t0, x~ = B x + x0.

    Only affine maps are supported, so all Jacobians are constant and the
    dp~/dt, dp~/dx terms of the transformation rules vanish.
    """

    def __init__(self, temporal_matrix, spatial_matrix,
                 temporal_offset=None, spatial_offset=None, name="map"):
        self.lam = np.asarray(temporal_matrix, dtype=float)
        self.b = np.asarray(spatial_matrix, dtype=float)
        m = self.lam.shape[0]
        n = self.b.shape[0]
        if self.lam.shape != (m, m) or self.b.shape != (n, n):
            raise ValueError("chart-map matrices must be square")
        if abs(np.linalg.det(self.lam)) <= 1e-9:
            raise ValueError("temporal matrix is (nearly) singular")
        if abs(np.linalg.det(self.b)) <= 1e-9:
            raise ValueError("spatial matrix is (nearly) singular")
        self.lam_inv = np.linalg.inv(self.lam)
        self.b_inv = np.linalg.inv(self.b)
        self.t0 = (np.zeros(m) if temporal_offset is None
                   else np.asarray(temporal_offset, dtype=float))
        self.x0 = (np.zeros(n) if spatial_offset is None
                   else np.asarray(spatial_offset, dtype=float))
        self.name = name

    @property
    def m(self) -> int:
        return self.lam.shape[0]

    @property
    def n(self) -> int:
        return self.b.shape[0]

    @staticmethod
    def identity(m, n) -> "AffineChartMap":
        return AffineChartMap(np.eye(m), np.eye(n), name="identity")

    @staticmethod
    def temporal_scaling(m, n, factor=2.0) -> "AffineChartMap":
        return AffineChartMap(factor * np.eye(m), np.eye(n),
                              name=f"t_scale_{factor:g}")

    @staticmethod
    def spatial_shear(m, n) -> "AffineChartMap":
        b = np.eye(n)
        if n >= 2:
            b[0, 1] = 1.0
        return AffineChartMap(np.eye(m), b, name="spatial_shear")

    def map_point(self, point: Point) -> Point:
        t = self.lam @ np.asarray(point.t) + self.t0
        x = self.b @ np.asarray(point.x) + self.x0
        p = np.asarray(point.p)  # p[a][i]
        p_new = np.einsum("ji,ab,bj->ai", self.b_inv, self.lam, p)
        return Point.of(t, x, p_new)


def builtin_chart_maps(m, n):
    """The transport test set: identity, doubled time, unimodular shear."""
    return (AffineChartMap.identity(m, n),
            AffineChartMap.temporal_scaling(m, n, 2.0),
            AffineChartMap.spatial_shear(m, n))


def _inverse_substitution(chart: ChartSpec, new_chart: ChartSpec,
                          cmap: AffineChartMap) -> dict:
    """Old-chart variables expressed in the new chart (affine inverse)."""
    m, n = chart.m, chart.n
    sub = {}
    t_new = [ex.t_var(new_chart, a) for a in range(m)]
    x_new = [ex.x_var(new_chart, i) for i in range(n)]
    for b in range(m):
        sub[chart.t_index(b)] = ex.esum(
            ex.mul(ex.constant(cmap.lam_inv[b, a]),
                   ex.sub(t_new[a], ex.constant(cmap.t0[a])))
            for a in range(m))
    for j in range(n):
        sub[chart.x_index(j)] = ex.esum(
            ex.mul(ex.constant(cmap.b_inv[j, i]),
                   ex.sub(x_new[i], ex.constant(cmap.x0[i])))
            for i in range(n))
    for k in range(n):
        for c in range(m):
            sub[chart.p_index(k, c)] = ex.esum(
                ex.mul(ex.constant(cmap.b[i, k] * cmap.lam_inv[c, a]),
                       ex.p_var(new_chart, i, a))
                for i in range(n) for a in range(m))
    return sub


def transform_space(space: HamiltonSpace, cmap: AffineChartMap) -> HamiltonSpace:
    """The same space expressed in the affine target chart.

    h transforms as a (0,2) temporal tensor, g^{ij} as a (2,0) spatial one,
    U with one spatial-upper and one temporal-lower index; raw Hamiltonians
    are scalars and are simply composed with the inverse map.
    """
    chart = space.chart
    if cmap.m != chart.m or cmap.n != chart.n:
        raise ValueError("chart map dimensions do not match the space")
    new_chart = ChartSpec(chart.m, chart.n)
    sub = _inverse_substitution(chart, new_chart, cmap)
    m, n = chart.m, chart.n

    def pull(e: Expr) -> Expr:
        return ex.substitute(e, sub, target_chart=new_chart)

    h_old = [[pull(space.h.lower[a, b]) for b in range(m)] for a in range(m)]
    h_rows = [[None] * m for _ in range(m)]
    for ap in range(m):
        for bp in range(ap, m):
            entry = ex.esum(
                ex.mul(ex.constant(cmap.lam_inv[a, ap] * cmap.lam_inv[b, bp]),
                       h_old[a][b])
                for a in range(m) for b in range(m))
            h_rows[ap][bp] = h_rows[bp][ap] = entry
    h_new = MetricField.from_lower(new_chart, TEMPORAL, h_rows)

    if isinstance(space.body, RawHamiltonian):
        return HamiltonSpace(new_chart, h_new,
                             RawHamiltonian(pull(space.hamiltonian)))

    body = space.body
    g_old = [[pull(body.g.upper[i, j]) for j in range(n)] for i in range(n)]
    g_rows = [[None] * n for _ in range(n)]
    for ip in range(n):
        for jp in range(ip, n):
            entry = ex.esum(
                ex.mul(ex.constant(cmap.b[ip, i] * cmap.b[jp, j]), g_old[i][j])
                for i in range(n) for j in range(n))
            g_rows[ip][jp] = g_rows[jp][ip] = entry
    g_new = MetricField.from_upper(new_chart, SPATIAL, g_rows)

    u_entries = []
    for ip in range(n):
        for ap in range(m):
            u_entries.append(ex.esum(
                ex.mul(ex.constant(cmap.b[ip, i] * cmap.lam_inv[a, ap]),
                       pull(body.potential[i, a]))
                for i in range(n) for a in range(m)))
    potential = DTensor(new_chart, body.potential.sig, u_entries,
                        labels=body.potential.labels)
    return HamiltonSpace(new_chart, h_new,
                         Electrodynamic(g=g_new, potential=potential,
                                        scalar=pull(body.scalar)))


def nlc_transformation_check(space: HamiltonSpace, cmap: AffineChartMap,
                             samples: int = 100, tol: float = 1e-9,
                             seed: int = 0,
                             boxes: SampleBoxes | None = None) -> ResidualReport:
    """Transport N per the nonlinear-connection rules and compare with the
    canonical N recomputed from the transformed space data.

    For affine maps the rules reduce to constant-Jacobian transport:
        N1~_{(j)c}^{(b)} L^c_a = N1_{(k)a}^{(c)} L^b_c (B^{-1})^k_j
        N2~_{(j)k}^{(b)} B^k_i = N2_{(l)i}^{(c)} L^b_c (B^{-1})^l_j
    """
    chart = space.chart
    m, n = chart.m, chart.n
    new_space = transform_space(space, cmap)
    N = space.nonlinear_connection
    N_t = new_space.nonlinear_connection
    points = sample_points(chart, samples, seed, boxes)

    worst = 0.0
    for pt in points:
        ev = Evaluator(chart, pt)
        ev_t = Evaluator(new_space.chart, cmap.map_point(pt))
        n1 = np.array([[[ev(N.n1[k, a, c]) for c in range(m)]
                        for a in range(m)] for k in range(n)])
        n2 = np.array([[[ev(N.n2[l, i, c]) for c in range(m)]
                        for i in range(n)] for l in range(n)])
        n1_t = np.array([[[ev_t(N_t.n1[j, c, b]) for b in range(m)]
                          for c in range(m)] for j in range(n)])
        n2_t = np.array([[[ev_t(N_t.n2[j, k, b]) for b in range(m)]
                          for k in range(n)] for j in range(n)])
        # rhs1[j,a,b] = N1[k,a,c] L[b,c] Binv[k,j]
        rhs1 = np.einsum("kac,bc,kj->jab", n1, cmap.lam, cmap.b_inv)
        expect1 = np.einsum("jab,ac->jcb", rhs1, cmap.lam_inv)
        rhs2 = np.einsum("lic,bc,lj->jib", n2, cmap.lam, cmap.b_inv)
        expect2 = np.einsum("jib,ik->jkb", rhs2, cmap.b_inv)
        worst = max(worst, float(np.max(np.abs(n1_t - expect1))),
                    float(np.max(np.abs(n2_t - expect2))))
    return ResidualReport.of(f"transform_{cmap.name}", worst, samples, tol)


# ---------------------------------------------------------------------------
# General-vs-reduced equivalence
# ---------------------------------------------------------------------------

def reduction_equivalence_check(space: HamiltonSpace, samples: int = 100,
                                tol_exact: float = 1e-12,
                                tol_rel: float = 1e-9, seed: int = 0,
                                boxes: SampleBoxes | None = None):
    """Compare the two routes the theory says agree.

    Electrodynamic bodies: full delta-based Cartan coefficients against the
    reduced forms (A via plain d/dt, H = Gamma, C = 0), entrywise absolute.
    Raw quadratic m=1 bodies: the general N2 bracket formula against
    -Gamma p + T from the decomposed body, relative.
    """
    chart = space.chart
    points = sample_points(chart, samples, seed, boxes)
    evaluators = [Evaluator(chart, pt) for pt in points]
    reports = []

    if isinstance(space.body, Electrodynamic):
        N = space.nonlinear_connection
        full = cartan_coefficients_full(space, N)
        g = space.spatial_metric
        tv = [ex.t_var(chart, c) for c in range(chart.m)]
        half = ex.constant(0.5)

        def reduced_a(idx):
            i, j, c = idx
            return ex.esum(ex.mul(ex.mul(half, g.upper[i, l]),
                                  g.lower[l, j].diff(tv[c]))
                           for l in range(chart.n))

        a_reduced = DTensor.build(chart, full.A.sig, reduced_a)
        gamma = spatial_christoffel(g)
        pairs = [("reduction_A", full.A, a_reduced),
                 ("reduction_Hc", full.Hc, gamma)]
        for name, lhs, rhs in pairs:
            worst = 0.0
            for ev in evaluators:
                for idx in lhs.indices():
                    worst = max(worst, abs(ev(lhs[idx]) - ev(rhs[idx])))
            reports.append(ResidualReport.of(name, worst, samples, tol_exact))
        reports.append(ResidualReport.of(
            "reduction_C", _tensor_worst(full.C, evaluators), samples, tol_exact))
        return reports

    # Raw body: the dual-route N2 check needs the quadratic decomposition.
    if space.m != 1:
        raise ValueError("raw bodies are checkable only for m = 1")
    body = decompose_electrodynamic(space, samples=samples, seed=seed, boxes=boxes)
    ed_space = HamiltonSpace(chart, space.h, body)
    n2_general = canonical_nlc_general(space).n2
    n2_ed = canonical_nlc_electrodynamic(ed_space).n2
    worst = 0.0
    for ev in evaluators:
        for idx in n2_general.indices():
            a = ev(n2_general[idx])
            b = ev(n2_ed[idx])
            worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    reports.append(ResidualReport.of("reduction_n2_dual_path", worst,
                                     samples, tol_rel))
    return reports


# ---------------------------------------------------------------------------
# Table-zero suite
# ---------------------------------------------------------------------------

def table_zero_suite(space: HamiltonSpace, samples: int = 100,
                     tol: float = 1e-12, seed: int = 0,
                     boxes: SampleBoxes | None = None,
                     geometry: Geometry | None = None):
    """verify_table_zeros wrapped into tolerance-checked reports."""
    if geometry is None:
        geometry = build_geometry(space)
    points = sample_points(space.chart, samples, seed, boxes)
    rows = verify_table_zeros(space, geometry.torsion, geometry.curvature,
                              points, geometry.connection,
                              geometry.coefficients)
    return [ResidualReport.of(name, value, samples, tol) for name, value in rows]
