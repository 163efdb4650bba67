"""Generalized Cartan canonical connection and its covariant derivatives.

Coefficients (chi^a_bc, A^i_jc, H^i_jk, C_{i(c)}^{j(k)}) are built from the
adapted derivatives

    delta/delta t^a = d/dt^a + N1_{(k)a}^{(b)} d/dp_k^b
    delta/delta x^i = d/dx^i + N2_{(k)i}^{(b)} d/dp_k^b

with a plus sign on the momentum correction. In covariant derivatives,
temporal slots receive chi-terms in the temporal direction and nothing in
the spatial or vertical directions; spatial slots receive A, H and C terms
respectively. This is exactly the assignment under which h_ab and g_ij are
parallel in all three directions.

Every coefficient entry is built from its own displayed formula (no
mirroring), so the symmetry conditions H^i_jk = H^i_kj and
C_{i(c)}^{j(k)} = C_{i(c)}^{k(j)} stay honest numeric checks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import expr as ex
from .expr import Expr
from .spaces import Electrodynamic, HamiltonSpace, NonlinearConnection
from .tensors import (
    DTensor, Slot, SPATIAL, TEMPORAL, UPPER, LOWER,
    S_LO, S_UP, S_UP_M, T_LO, T_LO_M,
    spatial_christoffel, temporal_christoffel,
)

__all__ = [
    "CovariantKind", "CartanCoefficients",
    "adapted_delta_temporal", "adapted_delta_spatial",
    "cartan_coefficients", "cartan_coefficients_full", "covariant_derivative",
]


class CovariantKind(enum.Enum):
    TEMPORAL_H = "/c"        # horizontal temporal derivative
    SPATIAL_H = "|k"         # horizontal spatial derivative
    VERTICAL = "|(k)(c)"     # vertical (momentum) derivative


@dataclass(frozen=True)
class CartanCoefficients:
    """chi[a][b][c], A[i][j][c], Hc[i][j][k], C[i][(c)][j][(k)]."""

    chi: DTensor
    A: DTensor
    Hc: DTensor
    C: DTensor


def adapted_delta_temporal(e: Expr, a: int, N: NonlinearConnection) -> Expr:
    """delta e / delta t^a = de/dt^a + N1_{(k)a}^{(b)} de/dp_k^b."""
    chart = N.n1.chart
    out = e.diff(ex.t_var(chart, a))
    for k in range(chart.n):
        for b in range(chart.m):
            out = ex.add(out, ex.mul(N.n1[k, a, b],
                                     e.diff(ex.p_var(chart, k, b))))
    return out


def adapted_delta_spatial(e: Expr, i: int, N: NonlinearConnection) -> Expr:
    """delta e / delta x^i = de/dx^i + N2_{(k)i}^{(b)} de/dp_k^b."""
    chart = N.n2.chart
    out = e.diff(ex.x_var(chart, i))
    for k in range(chart.n):
        for b in range(chart.m):
            out = ex.add(out, ex.mul(N.n2[k, i, b],
                                     e.diff(ex.p_var(chart, k, b))))
    return out


A_SIG = (S_UP, S_LO, T_LO)
A_LABELS = ("i", "j", "c")
HC_SIG = (S_UP, S_LO, S_LO)
HC_LABELS = ("i", "j", "k")
C_SIG = (S_LO, T_LO_M, S_UP, S_UP_M)
C_LABELS = ("i", "(c)", "j", "(k)")


def cartan_coefficients_full(space: HamiltonSpace,
                             N: NonlinearConnection | None = None) -> CartanCoefficients:
    """The delta-based coefficient formulas, valid on every branch.

    A^i_jc = (g^{il}/2) delta g_lj / delta t^c
    H^i_jk = (g^{ir}/2)(delta g_jr/delta x^k + delta g_kr/delta x^j
                        - delta g_jk/delta x^r)
    C_{i(c)}^{j(k)} = -(g_ir/2)(dg^{jr}/dp_k^c + dg^{kr}/dp_j^c
                                - dg^{jk}/dp_r^c)
    """
    if N is None:
        N = space.nonlinear_connection
    chart = space.chart
    n, m = chart.n, chart.m
    g = space.spatial_metric
    half = ex.constant(0.5)
    chi = temporal_christoffel(space.h)

    dgl_dt = [[[adapted_delta_temporal(g.lower[l, j], c, N) for c in range(m)]
               for j in range(n)] for l in range(n)]
    dgl_dx = [[[adapted_delta_spatial(g.lower[l, j], k, N) for k in range(n)]
               for j in range(n)] for l in range(n)]
    pv = [[ex.p_var(chart, i, a) for a in range(m)] for i in range(n)]
    dgu_dp = [[[[g.upper[l, j].diff(pv[k][c]) for c in range(m)]
                for k in range(n)] for j in range(n)] for l in range(n)]

    def a_entry(idx):
        i, j, c = idx
        return ex.esum(ex.mul(ex.mul(half, g.upper[i, l]), dgl_dt[l][j][c])
                       for l in range(n))

    def hc_entry(idx):
        i, j, k = idx
        total = ex.ZERO
        for r in range(n):
            bracket = ex.sub(ex.add(dgl_dx[j][r][k], dgl_dx[k][r][j]),
                             dgl_dx[j][k][r])
            total = ex.add(total, ex.mul(ex.mul(half, g.upper[i, r]), bracket))
        return total

    def c_entry(idx):
        i, c, j, k = idx
        total = ex.ZERO
        for r in range(n):
            bracket = ex.sub(ex.add(dgu_dp[j][r][k][c], dgu_dp[k][r][j][c]),
                             dgu_dp[j][k][r][c])
            total = ex.add(total, ex.mul(ex.mul(half, g.lower[i, r]), bracket))
        return ex.neg(total)

    return CartanCoefficients(
        chi=chi,
        A=DTensor.build(chart, A_SIG, a_entry, labels=A_LABELS),
        Hc=DTensor.build(chart, HC_SIG, hc_entry, labels=HC_LABELS),
        C=DTensor.build(chart, C_SIG, c_entry, labels=C_LABELS),
    )


def cartan_coefficients(space: HamiltonSpace,
                        N: NonlinearConnection | None = None) -> CartanCoefficients:
    """Branch-appropriate Cartan coefficients.

    For m >= 2 the reduced forms apply (A^i_jc = (g^{il}/2) dg_lj/dt^c,
    H = Gamma, C = 0); for m = 1 the full delta-based formulas are used.
    chi always equals the temporal Christoffel symbols.
    """
    if space.m == 1:
        return cartan_coefficients_full(space, N)
    if not isinstance(space.body, Electrodynamic):
        raise ValueError("m >= 2 requires an electrodynamic body")
    chart = space.chart
    n = chart.n
    g = space.spatial_metric
    half = ex.constant(0.5)
    tv = [ex.t_var(chart, c) for c in range(chart.m)]

    def a_entry(idx):
        i, j, c = idx
        return ex.esum(ex.mul(ex.mul(half, g.upper[i, l]),
                              g.lower[l, j].diff(tv[c]))
                       for l in range(n))

    return CartanCoefficients(
        chi=temporal_christoffel(space.h),
        A=DTensor.build(chart, A_SIG, a_entry, labels=A_LABELS),
        Hc=spatial_christoffel(g).relabel(HC_LABELS),
        C=DTensor.zeros(chart, C_SIG, labels=C_LABELS),
    )


def covariant_derivative(tensor: DTensor, kind: CovariantKind,
                         coeffs: CartanCoefficients,
                         N: NonlinearConnection) -> DTensor:
    """Local covariant derivative of a d-tensor in one of the three directions.

    The scalar part is the adapted delta (or d/dp for the vertical kind);
    each slot then contributes a coefficient contraction according to its
    kind and variance. The derivative appends one lower slot of its own
    direction; the vertical kind appends the momentum pair (upper spatial,
    lower temporal), raising the rank by two.
    """
    chart = tensor.chart
    rank = tensor.rank

    if kind is CovariantKind.TEMPORAL_H:
        new_slots, new_labels = (T_LO,), ("c'",)
    elif kind is CovariantKind.SPATIAL_H:
        new_slots, new_labels = (S_LO,), ("k'",)
    elif kind is CovariantKind.VERTICAL:
        new_slots, new_labels = (S_UP_M, T_LO_M), ("(k')", "(c')")
    else:
        raise TypeError(f"unknown covariant kind {kind!r}")

    sig = tensor.sig + new_slots
    labels = None
    if tensor.labels is not None:
        labels = tensor.labels + new_labels

    def entry(full_idx):
        base = full_idx[:rank]
        if kind is CovariantKind.TEMPORAL_H:
            c = full_idx[rank]
            total = adapted_delta_temporal(tensor[base], c, N)
        elif kind is CovariantKind.SPATIAL_H:
            k = full_idx[rank]
            total = adapted_delta_spatial(tensor[base], k, N)
        else:
            k, c = full_idx[rank], full_idx[rank + 1]
            total = tensor[base].diff(ex.p_var(chart, k, c))

        for s, slot in enumerate(tensor.sig):
            held = base[s]
            if slot.kind == TEMPORAL:
                if kind is not CovariantKind.TEMPORAL_H:
                    continue  # temporal slots are inert in |k and vertical
                c = full_idx[rank]
                for d in range(chart.m):
                    swapped = base[:s] + (d,) + base[s + 1:]
                    if slot.variance == UPPER:
                        term = ex.mul(coeffs.chi[held, d, c], tensor[swapped])
                        total = ex.add(total, term)
                    else:
                        term = ex.mul(coeffs.chi[d, held, c], tensor[swapped])
                        total = ex.sub(total, term)
            else:  # spatial slot
                for r in range(chart.n):
                    swapped = base[:s] + (r,) + base[s + 1:]
                    if kind is CovariantKind.TEMPORAL_H:
                        c = full_idx[rank]
                        coeff = (coeffs.A[held, r, c] if slot.variance == UPPER
                                 else coeffs.A[r, held, c])
                    elif kind is CovariantKind.SPATIAL_H:
                        k = full_idx[rank]
                        coeff = (coeffs.Hc[held, r, k] if slot.variance == UPPER
                                 else coeffs.Hc[r, held, k])
                    else:
                        k, c = full_idx[rank], full_idx[rank + 1]
                        coeff = (coeffs.C[r, c, held, k] if slot.variance == UPPER
                                 else coeffs.C[held, c, r, k])
                    term = ex.mul(coeff, tensor[swapped])
                    if slot.variance == UPPER:
                        total = ex.add(total, term)
                    else:
                        total = ex.sub(total, term)
        return total

    return DTensor.build(chart, sig, entry, labels=labels)
