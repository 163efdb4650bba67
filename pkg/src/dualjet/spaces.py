"""Multi-time Hamilton spaces and their canonical nonlinear connection.

A space is a chart, a temporal metric h(t), and a body: either a raw
Hamiltonian expression (geometry requires m = 1 there) or electrodynamic
data (g, U, F) assembling H = h_ab g^{ij} p_i^a p_j^b + U^{(i)}_{(a)} p_i^a + F.
The vertical metric G = (1/2) d2H/dp dp is always computed by actual
differentiation of the assembled Hamiltonian, so the electrodynamic
factorization G = h_ab g^{ij} stays a checkable fact rather than an input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from . import expr as ex
from .chart import ChartSpec, Point
from .expr import Evaluator, Expr
from .sampling import SampleBoxes, sample_points
from .tensors import (
    LOWER, SPATIAL, TEMPORAL, UPPER,
    DTensor, MetricField, Slot,
    S_LO_M, S_UP_M, T_LO_M, T_UP_M, S_LO, S_UP, T_LO, T_UP,
    temporal_christoffel, spatial_christoffel,
)

__all__ = [
    "RawHamiltonian", "Electrodynamic", "HamiltonSpace", "NonlinearConnection",
    "RegularityReport", "NonQuadraticError", "RegularityIndeterminateError",
    "vertical_metric", "check_kronecker_regularity", "decompose_electrodynamic",
    "canonical_nlc_general", "canonical_nlc_electrodynamic",
    "electrodynamic_t_term",
]


class NonQuadraticError(ValueError):
    """Raw Hamiltonian is not polynomial of degree <= 2 in the momenta."""


class RegularityIndeterminateError(ArithmeticError):
    """h_11 vanished at every sampled point; no factorization witness exists."""


@dataclass(frozen=True)
class RawHamiltonian:
    expression: Expr


@dataclass(frozen=True)
class Electrodynamic:
    """g is the spatial metric field, potential is U^{(i)}_{(a)} stored [i][a]."""

    g: MetricField
    potential: DTensor
    scalar: Expr  # the momentum-free term F(t, x)


class HamiltonSpace:
    """Immutable space definition; geometric objects are built lazily."""

    def __init__(self, chart: ChartSpec, h: MetricField, body):
        if h.kind != TEMPORAL or h.dim != chart.m:
            raise ValueError("h must be an m-dimensional temporal metric")
        _require_vars(chart, h.lower.entries(), allowed="t", what="temporal metric h")
        if isinstance(body, Electrodynamic):
            if body.g.kind != SPATIAL or body.g.dim != chart.n:
                raise ValueError("g must be an n-dimensional spatial metric")
            _require_vars(chart, body.g.lower.entries(), allowed="tx",
                          what="electrodynamic metric g")
            _require_vars(chart, body.potential.entries(), allowed="tx",
                          what="potential U")
            _require_vars(chart, [body.scalar], allowed="tx", what="scalar F")
            if body.potential.shape != (chart.n, chart.m):
                raise ValueError("potential U must have shape [i][a] = (n, m)")
        elif not isinstance(body, RawHamiltonian):
            raise TypeError("body must be RawHamiltonian or Electrodynamic")
        self.chart = chart
        self.h = h
        self.body = body

    @property
    def m(self) -> int:
        return self.chart.m

    @property
    def n(self) -> int:
        return self.chart.n

    @property
    def is_electrodynamic(self) -> bool:
        return isinstance(self.body, Electrodynamic)

    @cached_property
    def hamiltonian(self) -> Expr:
        if isinstance(self.body, RawHamiltonian):
            return self.body.expression
        chart = self.chart
        g, u, f = self.body.g, self.body.potential, self.body.scalar
        total = f
        for a in range(chart.m):
            for i in range(chart.n):
                total = ex.add(total, ex.mul(u[i, a], ex.p_var(chart, i, a)))
        for a in range(chart.m):
            for b in range(chart.m):
                for i in range(chart.n):
                    for j in range(chart.n):
                        term = ex.mul(ex.mul(self.h.lower[a, b], g.upper[i, j]),
                                      ex.mul(ex.p_var(chart, i, a),
                                             ex.p_var(chart, j, b)))
                        total = ex.add(total, term)
        return total

    @cached_property
    def vertical_metric(self) -> DTensor:
        return vertical_metric(self)

    @cached_property
    def spatial_metric(self) -> MetricField:
        """The Kronecker factor g: the body's metric, or G/h_11 for raw m=1."""
        if isinstance(self.body, Electrodynamic):
            return self.body.g
        if self.m != 1:
            raise ValueError("raw Hamiltonians carry a derived spatial metric "
                             "only for m = 1")
        G = self.vertical_metric
        h11 = self.h.lower[0, 0]
        n = self.n
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = rows[j][i] = ex.div(G[0, 0, i, j], h11)
        return MetricField.from_upper(self.chart, SPATIAL, rows)

    @cached_property
    def nonlinear_connection(self) -> "NonlinearConnection":
        if isinstance(self.body, Electrodynamic):
            return canonical_nlc_electrodynamic(self)
        return canonical_nlc_general(self)

    def check_point(self, point: Point):
        """Degeneracy guard for every metric the pipeline inverts at a point."""
        ev = Evaluator(self.chart, point)
        self.h.check_point(ev)
        self.spatial_metric.check_point(ev)

    def __repr__(self):
        kind = "electrodynamic" if self.is_electrodynamic else "raw"
        return f"<HamiltonSpace m={self.m} n={self.n} {kind}>"


@dataclass(frozen=True)
class NonlinearConnection:
    """Canonical nonlinear connection: N1 stored [i][b][a], N2 stored [i][j][a]."""

    n1: DTensor
    n2: DTensor


def _require_vars(chart, entries, allowed: str, what: str):
    allowed_idx = set()
    if "t" in allowed:
        allowed_idx.update(chart.t_indices())
    if "x" in allowed:
        allowed_idx.update(chart.x_indices())
    for e in entries:
        bad = ex.free_variables(e) - allowed_idx
        if bad:
            names = ", ".join(sorted(chart.names[k] for k in bad))
            raise ValueError(f"{what} may only depend on {allowed}-variables; "
                             f"found {names}")


def _momentum_vars(chart):
    return [[ex.p_var(chart, i, a) for i in range(chart.n)] for a in range(chart.m)]


G_SIG = (T_LO_M, T_LO_M, S_UP_M, S_UP_M)
G_LABELS = ("(a)", "(b)", "(i)", "(j)")


def vertical_metric(space: HamiltonSpace) -> DTensor:
    """G_{(a)(b)}^{(i)(j)} = (1/2) d2H/dp_i^a dp_j^b, stored [a][b][i][j].

    Symmetric under the simultaneous pair swap (a,i) <-> (b,j); the two
    orders of mixed differentiation are built once and mirrored so the
    symmetry is structural.
    """
    chart = space.chart
    H = space.hamiltonian
    pv = _momentum_vars(chart)
    m, n = chart.m, chart.n
    half = ex.constant(0.5)
    entries = {}
    pairs = [(a, i) for a in range(m) for i in range(n)]
    for qi, (a, i) in enumerate(pairs):
        first = H.diff(pv[a][i])
        for (b, j) in pairs[qi:]:
            e = ex.mul(half, first.diff(pv[b][j]))
            entries[(a, b, i, j)] = e
            entries[(b, a, j, i)] = e
    return DTensor.build(chart, G_SIG, lambda idx: entries[idx], labels=G_LABELS)


@dataclass(frozen=True)
class RegularityReport:
    passed: bool
    max_residual: float
    samples: int
    tolerance: float
    witness_g_upper: tuple  # g^{ij} candidate at the witness point
    witness_point: Point


def check_kronecker_regularity(space: HamiltonSpace, samples: int = 100,
                               tol: float = 1e-12, seed: int = 0,
                               boxes: SampleBoxes | None = None) -> RegularityReport:
    """Sampling test of the factorization G_{(a)(b)}^{(i)(j)} = h_ab g^{ij}.

    The witness g^{ij} is solved from the (1,1) temporal block at each
    point where h_11 does not vanish and every other block is compared
    against h_ab * g^{ij}.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    chart = space.chart
    pts = sample_points(chart, samples, seed, boxes)
    G = space.vertical_metric
    m, n = chart.m, chart.n
    max_residual = -1.0
    witness = None
    witness_point = None
    usable = 0
    for pt in pts:
        ev = Evaluator(chart, pt)
        h_val = [[ev(space.h.lower[a, b]) for b in range(m)] for a in range(m)]
        if abs(h_val[0][0]) < 1e-12:
            continue
        usable += 1
        g_w = [[ev(G[0, 0, i, j]) / h_val[0][0] for j in range(n)] for i in range(n)]
        if witness is None:
            witness = tuple(tuple(row) for row in g_w)
            witness_point = pt
        for a in range(m):
            for b in range(m):
                for i in range(n):
                    for j in range(n):
                        r = abs(ev(G[a, b, i, j]) - h_val[a][b] * g_w[i][j])
                        if r > max_residual:
                            max_residual = r
    if usable == 0:
        raise RegularityIndeterminateError(
            "h_11 vanished at every sampled point; factorization test is "
            "indeterminate")
    return RegularityReport(passed=max_residual <= tol,
                            max_residual=max_residual, samples=usable,
                            tolerance=tol, witness_g_upper=witness,
                            witness_point=witness_point)


def decompose_electrodynamic(space: HamiltonSpace, samples: int = 100,
                             tol: float = 1e-10, seed: int = 0,
                             boxes: SampleBoxes | None = None) -> Electrodynamic:
    """Split a quadratic raw Hamiltonian (m = 1) into (g, U, F) at p = 0.

    F = H|_{p=0}, U^{(i)} = dH/dp_i|_{p=0}, h_11 g^{ij} = (1/2) d2H/dp dp.
    Degree > 2 in the momenta is rejected by evaluating every third
    momentum derivative at sampled points.
    """
    if not isinstance(space.body, RawHamiltonian):
        raise ValueError("decompose_electrodynamic needs a raw Hamiltonian body")
    if space.m != 1:
        raise ValueError("electrodynamic decomposition is defined for m = 1")
    chart = space.chart
    H = space.hamiltonian
    pv = _momentum_vars(chart)[0]
    n = chart.n

    second = {}
    for i in range(n):
        di = H.diff(pv[i])
        for j in range(i, n):
            second[(i, j)] = di.diff(pv[j])
    pts = sample_points(chart, samples, seed, boxes)
    evs = [Evaluator(chart, pt) for pt in pts]
    for (i, j), e in second.items():
        for k in range(n):
            third = e.diff(pv[k])
            worst = max(abs(ev(third)) for ev in evs)
            if worst > tol:
                raise NonQuadraticError(
                    f"third momentum derivative d3H/dp{i + 1} dp{j + 1} dp{k + 1} "
                    f"reaches {worst:.3e} > {tol:g}; H is not quadratic in p")

    p_zero = {chart.p_index(i, 0): ex.ZERO for i in range(n)}
    scalar = ex.substitute(H, p_zero)
    u_cols = [ex.substitute(H.diff(pv[i]), p_zero) for i in range(n)]
    potential = DTensor(chart, (S_UP_M, T_LO_M), u_cols, labels=("(i)", "(a)"))
    h11 = space.h.lower[0, 0]
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            g_ij = ex.div(ex.substitute(ex.mul(ex.constant(0.5), second[(i, j)]),
                                        p_zero), h11)
            rows[i][j] = rows[j][i] = g_ij
    g = MetricField.from_upper(chart, SPATIAL, rows)
    return Electrodynamic(g=g, potential=potential, scalar=scalar)


N1_SIG = (S_LO_M, T_LO, T_UP_M)
N1_LABELS = ("(i)", "b", "(a)")
N2_SIG = (S_LO_M, S_LO, T_UP_M)
N2_LABELS = ("(i)", "j", "(a)")


def _n1_tensor(space: HamiltonSpace, chi: DTensor) -> DTensor:
    """N1_{(i)b}^{(a)} = chi^a_bc p_i^c, stored [i][b][a]."""
    chart = space.chart

    def entry(idx):
        i, b, a = idx
        return ex.esum(ex.mul(chi[a, b, c], ex.p_var(chart, i, c))
                       for c in range(chart.m))

    return DTensor.build(chart, N1_SIG, entry, labels=N1_LABELS)


def canonical_nlc_general(space: HamiltonSpace) -> NonlinearConnection:
    """Canonical N from the Hamiltonian itself (m = 1 branch).

    N2_{(i)j}^{(1)} = (h^{11}/4) [ dg_ij/dx^k dH/dp_k - dg_ij/dp_k dH/dx^k
                                   + g_ik d2H/dx^j dp_k + g_jk d2H/dx^i dp_k ]
    with g_ij the symbolic inverse of g^{ij} = G_{(1)(1)}^{(i)(j)} / h_11.
    """
    if space.m != 1:
        raise ValueError("the general nonlinear-connection formula is "
                         "implemented for m = 1 only")
    chart = space.chart
    n = chart.n
    H = space.hamiltonian
    chi = temporal_christoffel(space.h)
    g = space.spatial_metric
    pv = _momentum_vars(chart)[0]
    xv = [ex.x_var(chart, i) for i in range(n)]
    quarter = ex.constant(0.25)
    h_up = space.h.upper[0, 0]

    dH_dp = [H.diff(pv[k]) for k in range(n)]
    dH_dx = [H.diff(xv[k]) for k in range(n)]
    d2H_xp = [[dH_dp[k].diff(xv[j]) for k in range(n)] for j in range(n)]

    def entry(idx):
        i, j, _a = idx
        bracket = ex.ZERO
        for k in range(n):
            g_ij = g.lower[i, j]
            bracket = ex.add(bracket, ex.mul(g_ij.diff(xv[k]), dH_dp[k]))
            bracket = ex.sub(bracket, ex.mul(g_ij.diff(pv[k]), dH_dx[k]))
            bracket = ex.add(bracket, ex.mul(g.lower[i, k], d2H_xp[j][k]))
            bracket = ex.add(bracket, ex.mul(g.lower[j, k], d2H_xp[i][k]))
        return ex.mul(ex.mul(quarter, h_up), bracket)

    n2 = DTensor.build(chart, N2_SIG, entry, labels=N2_LABELS)
    return NonlinearConnection(n1=_n1_tensor(space, chi), n2=n2)


def electrodynamic_t_term(space: HamiltonSpace) -> DTensor:
    """T_{(i)j}^{(a)} = (h^{ab}/4)(U_{ib.j} + U_{jb.i}), stored [i][j][a].

    U_ib = g_ik U^{(k)}_{(b)} and U_{kb.r} = dU_kb/dx^r - U_sb Gamma^s_kr;
    symmetric in (i, j) by construction.
    """
    if not isinstance(space.body, Electrodynamic):
        raise ValueError("the T-term is defined for electrodynamic bodies")
    chart = space.chart
    m, n = chart.m, chart.n
    g = space.body.g
    u = space.body.potential
    gamma = spatial_christoffel(g)
    xv = [ex.x_var(chart, i) for i in range(n)]
    quarter = ex.constant(0.25)

    u_low = [[ex.esum(ex.mul(g.lower[i, k], u[k, b]) for k in range(n))
              for b in range(m)] for i in range(n)]
    u_dot = [[[ex.sub(u_low[k][b].diff(xv[r]),
                      ex.esum(ex.mul(u_low[s][b], gamma[s, k, r])
                              for s in range(n)))
               for r in range(n)] for b in range(m)] for k in range(n)]

    def entry(idx):
        i, j, a = idx
        return ex.esum(
            ex.mul(ex.mul(quarter, space.h.upper[a, b]),
                   ex.add(u_dot[i][b][j], u_dot[j][b][i]))
            for b in range(m))

    return DTensor.build(chart, N2_SIG, entry, labels=N2_LABELS)


def canonical_nlc_electrodynamic(space: HamiltonSpace) -> NonlinearConnection:
    """Canonical N of an electrodynamic space: N1 = chi p, N2 = -Gamma p + T."""
    if not isinstance(space.body, Electrodynamic):
        raise ValueError("canonical_nlc_electrodynamic needs an electrodynamic body")
    chart = space.chart
    chi = temporal_christoffel(space.h)
    gamma = spatial_christoffel(space.body.g)
    t_term = electrodynamic_t_term(space)

    def entry(idx):
        i, j, a = idx
        gamma_p = ex.esum(ex.mul(gamma[k, i, j], ex.p_var(chart, k, a))
                          for k in range(chart.n))
        return ex.add(ex.neg(gamma_p), t_term[idx])

    n2 = DTensor.build(chart, N2_SIG, entry, labels=N2_LABELS)
    return NonlinearConnection(n1=_n1_tensor(space, chi), n2=n2)
