"""Shared fixtures: bundled spaces, hand-built test spaces, numeric oracles."""

import random

import numpy as np
import pytest

import dualjet as dj
from dualjet import expr as ex
from dualjet.config import bundled_config
from dualjet.sampling import SampleBoxes, sample_points
from dualjet.spaces import Electrodynamic, HamiltonSpace, RawHamiltonian
from dualjet.tensors import DTensor, MetricField, SPATIAL, TEMPORAL, S_UP_M, T_LO_M
from dualjet.torsion_curvature import build_geometry


def make_space(m, n, h_rows, body_fn):
    """Build a HamiltonSpace from expression sources; body_fn(chart) -> body."""
    chart = dj.ChartSpec(m, n)
    h = MetricField.from_lower(
        chart, TEMPORAL,
        [[dj.parse_scalar(src, chart) for src in row] for row in h_rows])
    return HamiltonSpace(chart, h, body_fn(chart))


def electrodynamic_body(chart, g_lower_rows, u_rows=None, f_src="0"):
    """g_lower_rows / u_rows are matrices of sources; u_rows indexed [a][i]."""
    g = MetricField.from_lower(
        chart, SPATIAL,
        [[dj.parse_scalar(src, chart) for src in row] for row in g_lower_rows])
    entries = []
    for i in range(chart.n):
        for a in range(chart.m):
            src = "0" if u_rows is None else u_rows[a][i]
            entries.append(dj.parse_scalar(src, chart))
    potential = DTensor(chart, (S_UP_M, T_LO_M), entries, labels=("(i)", "(a)"))
    return Electrodynamic(g=g, potential=potential,
                          scalar=dj.parse_scalar(f_src, chart))


@pytest.fixture(scope="session")
def flat_space():
    return bundled_config("flat").build_space()


@pytest.fixture(scope="session")
def sphere_space():
    return bundled_config("sphere").build_space()


@pytest.fixture(scope="session")
def sphere_boxes(sphere_space):
    return bundled_config("sphere").build_boxes(sphere_space.chart)


@pytest.fixture(scope="session")
def rheonomic_space():
    return bundled_config("rheonomic").build_space()


@pytest.fixture(scope="session")
def sphere_no_potential_space():
    """Round 2-sphere x flat h, U = 0: torsion reduces to the pure curvature
    contraction, the cleanest oracle target."""
    return make_space(
        2, 2, [["1", "0"], ["0", "1"]],
        lambda chart: electrodynamic_body(
            chart, [["1", "0"], ["0", "sin(x1)^2"]]))


@pytest.fixture(scope="session")
def sphere_m1_space():
    """Single-time sphere: raw quadratic H = g^{ij}(x) p_i p_j with h = 1."""
    return make_space(
        1, 2, [["1"]],
        lambda chart: RawHamiltonian(dj.parse_scalar(
            "p1_1^2 + p2_1^2 / sin(x1)^2", chart)))


@pytest.fixture(scope="session")
def quartic_space():
    """m = 1 with a genuinely momentum-dependent spatial metric: exercises
    the C coefficients, the S curvature and the vertical machinery."""
    return make_space(
        1, 2, [["1"]],
        lambda chart: RawHamiltonian(dj.parse_scalar(
            "p1_1^2 + p2_1^2 + 0.1*p1_1^2*p2_1^2", chart)))


@pytest.fixture(scope="session")
def counterexample_space():
    """m = 2 raw Hamiltonian whose Hessian blocks are not proportional via
    h: Kronecker regularity must fail."""
    return make_space(
        2, 1, [["1", "0"], ["0", "1"]],
        lambda chart: RawHamiltonian(dj.parse_scalar(
            "t1*p1_1^2 + p1_2^2", chart)))


@pytest.fixture(scope="session")
def geometries(flat_space, sphere_space, rheonomic_space):
    return {
        "flat": build_geometry(flat_space),
        "sphere": build_geometry(sphere_space),
        "rheonomic": build_geometry(rheonomic_space),
    }


def points_for(space, count=30, seed=3, boxes=None):
    return sample_points(space.chart, count, seed, boxes)


def evaluators_for(space, count=30, seed=3, boxes=None):
    return [dj.Evaluator(space.chart, pt)
            for pt in points_for(space, count, seed, boxes)]


def tensor_worst(tensor, evaluators):
    return max((abs(ev(e)) for ev in evaluators for e in tensor.entries()),
               default=0.0)


def fd_christoffel(metric_fn, x, step=1e-6):
    """Gamma^k_ij of a metric callable via central differences (numpy only);
    independent of every symbolic code path."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    dg = np.empty((n, n, n))
    for l in range(n):
        xp, xm = x.copy(), x.copy()
        xp[l] += step
        xm[l] -= step
        dg[l] = (metric_fn(xp) - metric_fn(xm)) / (2 * step)
    ginv = np.linalg.inv(metric_fn(x))
    gamma = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                gamma[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[j][l, i] + dg[i][l, j] - dg[l][i, j])
                    for l in range(n))
    return gamma


def fd_curvature(metric_fn, x, step=1e-4):
    """frakR^r_kij = dGamma^r_ki/dx^j - dGamma^r_kj/dx^i + GG - GG."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    dgamma = np.empty((n, n, n, n))
    for j in range(n):
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        dgamma[j] = (fd_christoffel(metric_fn, xp) -
                     fd_christoffel(metric_fn, xm)) / (2 * step)
    gamma = fd_christoffel(metric_fn, x)
    frak = np.empty((n, n, n, n))
    for r in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    frak[r, k, i, j] = dgamma[j][r, k, i] - dgamma[i][r, k, j] + sum(
                        gamma[p, k, i] * gamma[r, p, j]
                        - gamma[p, k, j] * gamma[r, p, i]
                        for p in range(n))
    return frak


class TreeGen:
    """Seeded random expression trees of bounded depth over one chart."""

    FUNCS = ("sin", "cos", "exp", "log", "sqrt", "neg")

    def __init__(self, chart, seed=0):
        self.chart = chart
        self.rng = random.Random(seed)

    def leaf(self):
        if self.rng.random() < 0.35:
            return ex.constant(self.rng.uniform(0.5, 2.0))
        return ex.variable(self.chart, self.rng.randrange(self.chart.size))

    def tree(self, depth):
        if depth <= 0 or self.rng.random() < 0.2:
            return self.leaf()
        kind = self.rng.choice(("add", "sub", "mul", "div", "pow") + self.FUNCS)
        if kind in ("add", "sub", "mul", "div"):
            return getattr(ex, kind)(self.tree(depth - 1), self.tree(depth - 1))
        if kind == "pow":
            return ex.power(self.tree(depth - 1),
                            self.rng.choice((2.0, 3.0, 0.5, -1.0)))
        return getattr(ex, kind)(self.tree(depth - 1))
