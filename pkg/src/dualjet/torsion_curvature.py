"""Local torsion and curvature components of the Cartan canonical connection.

Both component families are organized as the block tables of the adapted
frame: rows name the pair of directions (ht_ht, hm_ht, v_ht, hm_hm, v_hm,
vv), columns the block the value lives in (ht, hm, v). Cells the theory
fixes to zero are materialized as zero tensors so consumers and the zero
verifier always see a complete table.

Storage orders (upper indices first for classical coefficient families,
subscripts before superscripts for jet-bundle objects); m=1 components use
the same arrays with singleton temporal ranges:

    torsion   T[r][a][j]          T^r_aj = -A^r_ja
              P[(r)][a][(b)][(f)][(j)]   (row v_ht, col v)
              R_ab[(r)][a][b][(f)]       chi^f_gab p_r^g           (m>=2)
              R_aj[(r)][a][j][(f)]
              R_ij[(r)][i][j][(f)]
              P_hm[i][(c)][r][(j)]       equals C                  (m=1)
              P_vm[(r)][i][(b)][(f)][(j)]  dN2/dp + H              (m=1)
    curvature chi[d][a][b][c]
              R_ibc[l][i][b][c]                                    (m>=2)
              R_ibk[l][i][b][k]
              R_ijk[l][i][j][k]                                    (m=1)
              frak_R[l][i][j][k]                                   (m>=2)
              P_ibk[l][i][b][(k)][(c)]                             (m=1)
              P_ijk[l][i][j][(k)][(c)]                             (m=1)
              S[l][i][(j)][(b)][(k)][(c)]                          (m=1)
              vR_bc, vR_bk, vR_jk        via the delta identities  (m>=2)
              vR_ibk, vR_ijk, vP_ibk, vP_ijk, vS   negated mirrors (m=1)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import expr as ex
from .cartan import (
    CartanCoefficients, CovariantKind,
    adapted_delta_spatial, adapted_delta_temporal,
    cartan_coefficients, covariant_derivative,
)
from .chart import ChartSpec
from .expr import Evaluator
from .spaces import (
    Electrodynamic, HamiltonSpace, NonlinearConnection, electrodynamic_t_term,
)
from .tensors import (
    DTensor,
    S_LO, S_LO_M, S_UP, S_UP_M, T_LO, T_LO_M, T_UP, T_UP_M,
    christoffel_curvature_spatial, christoffel_curvature_temporal,
)

__all__ = [
    "TableCell", "TorsionSet", "CurvatureSet", "Geometry",
    "torsion_components", "curvature_components", "verify_table_zeros",
    "build_geometry",
]

ROWS = ("ht_ht", "hm_ht", "v_ht", "hm_hm", "v_hm", "vv")
COLUMNS = ("ht", "hm", "v")

# Index blocks used to shape zero cells: value block per column, direction
# legs per row component.
_OUT_SLOTS = {
    "ht": ((T_UP, "a"),),
    "hm": ((S_UP, "r"),),
    "v": ((S_LO_M, "(r)"), (T_UP_M, "(f)")),
}
_LEG_SLOTS = {
    "ht": ((T_LO, "b"),),
    "hm": ((S_LO, "j"),),
    "v": ((S_UP_M, "(j)"), (T_LO_M, "(b)")),
}
_ARG_SLOTS = {
    "ht": ((T_UP, "d"), (T_LO, "a")),
    "hm": ((S_UP, "l"), (S_LO, "i")),
    "v": ((S_LO_M, "(l)"), (T_LO_M, "(a)"), (T_UP_M, "(d)"), (S_UP_M, "(i)")),
}


@dataclass(frozen=True)
class TableCell:
    key: str        # component symbol, or "zero.<row>.<col>"
    row: str
    column: str
    tensor: DTensor
    is_zero: bool   # marked 0 in the table


class _ComponentTable:
    def __init__(self, branch: str, cells):
        self.branch = branch  # "m1" | "mge2"
        self.cells = tuple(cells)
        self._by_key = {c.key: c for c in self.cells}
        if len(self._by_key) != len(self.cells):
            raise ValueError("duplicate component keys")

    def __getitem__(self, key: str) -> DTensor:
        return self._by_key[key].tensor

    def __contains__(self, key: str) -> bool:
        return key in self._by_key

    def components(self):
        return [c for c in self.cells if not c.is_zero]

    def zero_cells(self):
        return [c for c in self.cells if c.is_zero]


class TorsionSet(_ComponentTable):
    pass


class CurvatureSet(_ComponentTable):
    pass


def _zero_cell(chart, row, col, leg_pair):
    slots = _OUT_SLOTS[col] + _LEG_SLOTS[leg_pair[0]] + _LEG_SLOTS[leg_pair[1]]
    sig = tuple(s for s, _ in slots)
    labels = tuple(l for _, l in slots)
    return TableCell(key=f"zero.{row}.{col}", row=row, column=col,
                     tensor=DTensor.zeros(chart, sig, labels=labels),
                     is_zero=True)


def _zero_curvature_cell(chart, row, col, leg_pair):
    slots = _ARG_SLOTS[col] + _LEG_SLOTS[leg_pair[0]] + _LEG_SLOTS[leg_pair[1]]
    sig = tuple(s for s, _ in slots)
    labels = tuple(l for _, l in slots)
    return TableCell(key=f"zero.{row}.{col}", row=row, column=col,
                     tensor=DTensor.zeros(chart, sig, labels=labels),
                     is_zero=True)


_ROW_LEGS = {
    "ht_ht": ("ht", "ht"), "hm_ht": ("hm", "ht"), "v_ht": ("v", "ht"),
    "hm_hm": ("hm", "hm"), "v_hm": ("v", "hm"), "vv": ("v", "v"),
}


# ---------------------------------------------------------------------------
# Torsion
# ---------------------------------------------------------------------------

T_SIG = (S_UP, T_LO, S_LO)
T_LABELS = ("r", "a", "j")
P_SIG = (S_LO_M, T_LO, T_LO_M, T_UP_M, S_UP_M)
P_LABELS = ("(r)", "a", "(b)", "(f)", "(j)")
R_AB_SIG = (S_LO_M, T_LO, T_LO, T_UP_M)
R_AB_LABELS = ("(r)", "a", "b", "(f)")
R_AJ_SIG = (S_LO_M, T_LO, S_LO, T_UP_M)
R_AJ_LABELS = ("(r)", "a", "j", "(f)")
R_IJ_SIG = (S_LO_M, S_LO, S_LO, T_UP_M)
R_IJ_LABELS = ("(r)", "i", "j", "(f)")
P_VM_SIG = (S_LO_M, S_LO, T_LO_M, T_UP_M, S_UP_M)
P_VM_LABELS = ("(r)", "i", "(b)", "(f)", "(j)")


def torsion_components(space: HamiltonSpace, N: NonlinearConnection,
                       coeffs: CartanCoefficients) -> TorsionSet:
    """All local torsion components of the Cartan canonical connection."""
    chart = space.chart
    m, n = chart.m, chart.n
    A, chi, C = coeffs.A, coeffs.chi, coeffs.C

    def t_entry(idx):
        r, a, j = idx
        return ex.neg(A[r, j, a])

    t_tensor = DTensor.build(chart, T_SIG, t_entry, labels=T_LABELS)

    if m == 1:
        pv = [ex.p_var(chart, k, 0) for k in range(n)]

        def p_entry(idx):
            r, _a, _b, _f, j = idx
            value = N.n1[r, 0, 0].diff(pv[j])
            value = ex.add(value, A[j, r, 0])
            if j == r:
                value = ex.sub(value, chi[0, 0, 0])
            return value

        def r_aj_entry(idx):
            r, _a, j, _f = idx
            return ex.sub(adapted_delta_spatial(N.n1[r, 0, 0], j, N),
                          adapted_delta_temporal(N.n2[r, j, 0], 0, N))

        def r_ij_entry(idx):
            r, i, j, _f = idx
            return ex.sub(adapted_delta_spatial(N.n2[r, i, 0], j, N),
                          adapted_delta_spatial(N.n2[r, j, 0], i, N))

        def p_vm_entry(idx):
            r, i, _b, _f, j = idx
            return ex.add(N.n2[r, i, 0].diff(pv[j]), coeffs.Hc[j, r, i])

        components = {
            ("hm_ht", "hm"): TableCell("T", "hm_ht", "hm", t_tensor, False),
            ("hm_ht", "v"): TableCell(
                "R_aj", "hm_ht", "v",
                DTensor.build(chart, R_AJ_SIG, r_aj_entry, labels=R_AJ_LABELS),
                False),
            ("v_ht", "v"): TableCell(
                "P", "v_ht", "v",
                DTensor.build(chart, P_SIG, p_entry, labels=P_LABELS), False),
            ("hm_hm", "v"): TableCell(
                "R_ij", "hm_hm", "v",
                DTensor.build(chart, R_IJ_SIG, r_ij_entry, labels=R_IJ_LABELS),
                False),
            ("v_hm", "hm"): TableCell(
                "P_hm", "v_hm", "hm",
                C.relabel(("i", "(c)", "r", "(j)")), False),
            ("v_hm", "v"): TableCell(
                "P_vm", "v_hm", "v",
                DTensor.build(chart, P_VM_SIG, p_vm_entry, labels=P_VM_LABELS),
                False),
        }
        branch = "m1"
    else:
        if not isinstance(space.body, Electrodynamic):
            raise ValueError("m >= 2 requires an electrodynamic body")
        chi4 = christoffel_curvature_temporal(chi)
        frak = christoffel_curvature_spatial(coeffs.Hc)  # Hc = Gamma here
        t_term = electrodynamic_t_term(space)
        t_cov = covariant_derivative(t_term, CovariantKind.SPATIAL_H, coeffs, N)
        tv = [ex.t_var(chart, a) for a in range(m)]

        def p_entry(idx):
            r, a, b, f, j = idx
            return A[j, r, a] if b == f else ex.ZERO

        def r_ab_entry(idx):
            r, a, b, f = idx
            return ex.esum(ex.mul(chi4[f, g, a, b], ex.p_var(chart, r, g))
                           for g in range(m))

        def r_aj_entry(idx):
            r, a, j, f = idx
            value = ex.neg(N.n2[r, j, f].diff(tv[a]))
            for c in range(m):
                value = ex.sub(value, ex.mul(chi[f, c, a], t_term[r, j, c]))
            return value

        def r_ij_entry(idx):
            r, i, j, f = idx
            value = ex.neg(ex.esum(ex.mul(frak[k, r, i, j], ex.p_var(chart, k, f))
                                   for k in range(n)))
            # T has slots [(i)][j][(a)]: the spatial covariant derivative
            # appends the direction slot, so T^{(f)}_{(r)i|j} = t_cov[r,i,f,j].
            value = ex.add(value, ex.sub(t_cov[r, i, f, j], t_cov[r, j, f, i]))
            return value

        components = {
            ("ht_ht", "v"): TableCell(
                "R_ab", "ht_ht", "v",
                DTensor.build(chart, R_AB_SIG, r_ab_entry, labels=R_AB_LABELS),
                False),
            ("hm_ht", "hm"): TableCell("T", "hm_ht", "hm", t_tensor, False),
            ("hm_ht", "v"): TableCell(
                "R_aj", "hm_ht", "v",
                DTensor.build(chart, R_AJ_SIG, r_aj_entry, labels=R_AJ_LABELS),
                False),
            ("v_ht", "v"): TableCell(
                "P", "v_ht", "v",
                DTensor.build(chart, P_SIG, p_entry, labels=P_LABELS), False),
            ("hm_hm", "v"): TableCell(
                "R_ij", "hm_hm", "v",
                DTensor.build(chart, R_IJ_SIG, r_ij_entry, labels=R_IJ_LABELS),
                False),
        }
        branch = "mge2"

    cells = []
    for row in ROWS:
        legs = _ROW_LEGS[row]
        for col in COLUMNS:
            cell = components.get((row, col))
            if cell is None:
                cell = _zero_cell(chart, row, col, legs)
            cells.append(cell)
    return TorsionSet(branch, cells)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

R_IBC_SIG = (S_UP, S_LO, T_LO, T_LO)
R_IBC_LABELS = ("l", "i", "b", "c")
R_IBK_SIG = (S_UP, S_LO, T_LO, S_LO)
R_IBK_LABELS = ("l", "i", "b", "k")
R_IJK_SIG = (S_UP, S_LO, S_LO, S_LO)
R_IJK_LABELS = ("l", "i", "j", "k")
P_IBK_SIG = (S_UP, S_LO, T_LO, S_UP_M, T_LO_M)
P_IBK_LABELS = ("l", "i", "b", "(k)", "(c)")
P_IJK_SIG = (S_UP, S_LO, S_LO, S_UP_M, T_LO_M)
P_IJK_LABELS = ("l", "i", "j", "(k)", "(c)")
S_SIG = (S_UP, S_LO, S_UP_M, T_LO_M, S_UP_M, T_LO_M)
S_LABELS = ("l", "i", "(j)", "(b)", "(k)", "(c)")
VR_BC_SIG = (S_LO_M, T_LO_M, T_LO, T_LO, T_UP_M, S_UP_M)
VR_BC_LABELS = ("(l)", "(a)", "b", "c", "(d)", "(i)")
VR_BK_SIG = (S_LO_M, T_LO_M, T_LO, S_LO, T_UP_M, S_UP_M)
VR_BK_LABELS = ("(l)", "(a)", "b", "k", "(d)", "(i)")
VR_JK_SIG = (S_LO_M, T_LO_M, S_LO, S_LO, T_UP_M, S_UP_M)
VR_JK_LABELS = ("(i)", "(a)", "j", "k", "(d)", "(l)")


def curvature_components(space: HamiltonSpace, N: NonlinearConnection,
                         coeffs: CartanCoefficients,
                         torsion: TorsionSet | None = None) -> CurvatureSet:
    """All adapted local curvature components of the Cartan connection."""
    chart = space.chart
    m, n = chart.m, chart.n
    A, chi, Hc, C = coeffs.A, coeffs.chi, coeffs.Hc, coeffs.C
    chi4 = christoffel_curvature_temporal(chi)
    chi_cell = TableCell("chi", "ht_ht", "ht",
                         chi4.relabel(("d", "a", "b", "c")), False)

    if m == 1:
        if torsion is None:
            torsion = torsion_components(space, N, coeffs)
        tor_r_aj = torsion["R_aj"]
        tor_r_ij = torsion["R_ij"]
        tor_p = torsion["P"]
        tor_p_vm = torsion["P_vm"]
        pv = [ex.p_var(chart, k, 0) for k in range(n)]
        c_cov_t = covariant_derivative(C, CovariantKind.TEMPORAL_H, coeffs, N)
        c_cov_x = covariant_derivative(C, CovariantKind.SPATIAL_H, coeffs, N)

        def r_ibk_entry(idx):
            l, i, _b, k = idx
            value = ex.sub(adapted_delta_spatial(A[l, i, 0], k, N),
                           adapted_delta_temporal(Hc[l, i, k], 0, N))
            for r in range(n):
                value = ex.add(value, ex.mul(A[r, i, 0], Hc[l, r, k]))
                value = ex.sub(value, ex.mul(Hc[r, i, k], A[l, r, 0]))
                value = ex.add(value, ex.mul(C[i, 0, l, r], tor_r_aj[r, 0, k, 0]))
            return value

        def r_ijk_entry(idx):
            l, i, j, k = idx
            value = ex.sub(adapted_delta_spatial(Hc[l, i, j], k, N),
                           adapted_delta_spatial(Hc[l, i, k], j, N))
            for r in range(n):
                value = ex.add(value, ex.mul(Hc[r, i, j], Hc[l, r, k]))
                value = ex.sub(value, ex.mul(Hc[r, i, k], Hc[l, r, j]))
                value = ex.add(value, ex.mul(C[i, 0, l, r], tor_r_ij[r, j, k, 0]))
            return value

        def p_ibk_entry(idx):
            l, i, _b, k, _c = idx
            value = ex.sub(A[l, i, 0].diff(pv[k]), c_cov_t[i, 0, l, k, 0])
            for r in range(n):
                value = ex.add(value, ex.mul(C[i, 0, l, r], tor_p[r, 0, 0, 0, k]))
            return value

        def p_ijk_entry(idx):
            l, i, j, k, _c = idx
            value = ex.sub(Hc[l, i, j].diff(pv[k]), c_cov_x[i, 0, l, k, j])
            for r in range(n):
                value = ex.add(value, ex.mul(C[i, 0, l, r],
                                             tor_p_vm[r, j, 0, 0, k]))
            return value

        def s_entry(idx):
            l, i, j, _b, k, _c = idx
            value = ex.sub(C[i, 0, l, j].diff(pv[k]), C[i, 0, l, k].diff(pv[j]))
            for r in range(n):
                value = ex.add(value, ex.mul(C[i, 0, r, j], C[r, 0, l, k]))
                value = ex.sub(value, ex.mul(C[i, 0, r, k], C[r, 0, l, j]))
            return value

        r_ibk = DTensor.build(chart, R_IBK_SIG, r_ibk_entry, labels=R_IBK_LABELS)
        r_ijk = DTensor.build(chart, R_IJK_SIG, r_ijk_entry, labels=R_IJK_LABELS)
        p_ibk = DTensor.build(chart, P_IBK_SIG, p_ibk_entry, labels=P_IBK_LABELS)
        p_ijk = DTensor.build(chart, P_IJK_SIG, p_ijk_entry, labels=P_IJK_LABELS)
        s_tensor = DTensor.build(chart, S_SIG, s_entry, labels=S_LABELS)

        def mirror(tensor):
            return tensor.map(ex.neg)

        components = {
            ("ht_ht", "ht"): chi_cell,
            ("hm_ht", "hm"): TableCell("R_ibk", "hm_ht", "hm", r_ibk, False),
            ("hm_ht", "v"): TableCell("vR_ibk", "hm_ht", "v", mirror(r_ibk), False),
            ("v_ht", "hm"): TableCell("P_ibk", "v_ht", "hm", p_ibk, False),
            ("v_ht", "v"): TableCell("vP_ibk", "v_ht", "v", mirror(p_ibk), False),
            ("hm_hm", "hm"): TableCell("R_ijk", "hm_hm", "hm", r_ijk, False),
            ("hm_hm", "v"): TableCell("vR_ijk", "hm_hm", "v", mirror(r_ijk), False),
            ("v_hm", "hm"): TableCell("P_ijk", "v_hm", "hm", p_ijk, False),
            ("v_hm", "v"): TableCell("vP_ijk", "v_hm", "v", mirror(p_ijk), False),
            ("vv", "hm"): TableCell("S", "vv", "hm", s_tensor, False),
            ("vv", "v"): TableCell("vS", "vv", "v", mirror(s_tensor), False),
        }
        branch = "m1"
    else:
        gamma = Hc  # reduced branch: H = Gamma
        frak = christoffel_curvature_spatial(gamma)
        tv = [ex.t_var(chart, a) for a in range(m)]
        xv = [ex.x_var(chart, i) for i in range(n)]

        def r_ibc_entry(idx):
            l, i, b, c = idx
            value = ex.sub(A[l, i, b].diff(tv[c]), A[l, i, c].diff(tv[b]))
            for r in range(n):
                value = ex.add(value, ex.mul(A[r, i, b], A[l, r, c]))
                value = ex.sub(value, ex.mul(A[r, i, c], A[l, r, b]))
            return value

        def r_ibk_entry(idx):
            l, i, b, k = idx
            value = ex.sub(A[l, i, b].diff(xv[k]), gamma[l, i, k].diff(tv[b]))
            for r in range(n):
                value = ex.add(value, ex.mul(A[r, i, b], gamma[l, r, k]))
                value = ex.sub(value, ex.mul(gamma[r, i, k], A[l, r, b]))
            return value

        r_ibc = DTensor.build(chart, R_IBC_SIG, r_ibc_entry, labels=R_IBC_LABELS)
        r_ibk = DTensor.build(chart, R_IBK_SIG, r_ibk_entry, labels=R_IBK_LABELS)
        frak_cell = frak.relabel(("l", "i", "j", "k"))

        def vr_bc_entry(idx):
            l, a, b, c, d, i = idx
            value = ex.ZERO
            if i == l:
                value = chi4[d, a, b, c]
            if d == a:
                value = ex.sub(value, r_ibc[i, l, b, c])
            return value

        def vr_bk_entry(idx):
            l, a, b, k, d, i = idx
            return ex.neg(r_ibk[i, l, b, k]) if d == a else ex.ZERO

        def vr_jk_entry(idx):
            i, a, j, k, d, l = idx
            return ex.neg(frak_cell[l, i, j, k]) if d == a else ex.ZERO

        components = {
            ("ht_ht", "ht"): chi_cell,
            ("ht_ht", "hm"): TableCell("R_ibc", "ht_ht", "hm", r_ibc, False),
            ("ht_ht", "v"): TableCell(
                "vR_bc", "ht_ht", "v",
                DTensor.build(chart, VR_BC_SIG, vr_bc_entry, labels=VR_BC_LABELS),
                False),
            ("hm_ht", "hm"): TableCell("R_ibk", "hm_ht", "hm", r_ibk, False),
            ("hm_ht", "v"): TableCell(
                "vR_bk", "hm_ht", "v",
                DTensor.build(chart, VR_BK_SIG, vr_bk_entry, labels=VR_BK_LABELS),
                False),
            ("hm_hm", "hm"): TableCell("frak_R", "hm_hm", "hm", frak_cell, False),
            ("hm_hm", "v"): TableCell(
                "vR_jk", "hm_hm", "v",
                DTensor.build(chart, VR_JK_SIG, vr_jk_entry, labels=VR_JK_LABELS),
                False),
        }
        branch = "mge2"

    cells = []
    for row in ROWS:
        legs = _ROW_LEGS[row]
        for col in COLUMNS:
            cell = components.get((row, col))
            if cell is None:
                cell = _zero_curvature_cell(chart, row, col, legs)
            cells.append(cell)
    return CurvatureSet(branch, cells)


# ---------------------------------------------------------------------------
# Pipeline bundle and table-zero verification
# ---------------------------------------------------------------------------

@dataclass
class Geometry:
    """One space with every derived object, built once and shared."""

    space: HamiltonSpace

    @cached_property
    def connection(self) -> NonlinearConnection:
        return self.space.nonlinear_connection

    @cached_property
    def coefficients(self) -> CartanCoefficients:
        return cartan_coefficients(self.space, self.connection)

    @cached_property
    def torsion(self) -> TorsionSet:
        return torsion_components(self.space, self.connection, self.coefficients)

    @cached_property
    def curvature(self) -> CurvatureSet:
        return curvature_components(self.space, self.connection,
                                    self.coefficients, self.torsion)


def build_geometry(space: HamiltonSpace) -> Geometry:
    return Geometry(space)


def _max_abs(tensor: DTensor, evaluators) -> float:
    worst = 0.0
    for ev in evaluators:
        for e in tensor.entries():
            v = abs(ev(e))
            if v > worst:
                worst = v
    return worst


def _spatial_metric_momentum_free(space) -> bool:
    chart = space.chart
    p_idx = set(chart.p_indices())
    g = space.spatial_metric
    return all(not (ex.free_variables(e) & p_idx)
               for e in g.lower.entries() + g.upper.entries())


def verify_table_zeros(space: HamiltonSpace, torsion: TorsionSet,
                       curvature: CurvatureSet, points,
                       N: NonlinearConnection | None = None,
                       coeffs: CartanCoefficients | None = None):
    """Max |value| of every 0-cell, plus the computable reasons behind them.

    Returns (name, residual) rows: the materialized zero cells of both
    tables, the coefficient symmetries that zero the ht/hm torsion columns,
    and the branch-specific witnesses (C = 0 and momentum-independence for
    m >= 2; C, S = 0 for momentum-free m = 1 metrics; mirror agreement and
    the three delta identities for the v blocks).
    """
    chart = space.chart
    if N is None:
        N = space.nonlinear_connection
    if coeffs is None:
        coeffs = cartan_coefficients(space, N)
    evaluators = [Evaluator(chart, pt) for pt in points]
    m, n = chart.m, chart.n
    rows = []

    worst = 0.0
    for cell in torsion.zero_cells():
        worst = max(worst, _max_abs(cell.tensor, evaluators))
    rows.append(("torsion_zero_cells", worst))
    worst = 0.0
    for cell in curvature.zero_cells():
        worst = max(worst, _max_abs(cell.tensor, evaluators))
    rows.append(("curvature_zero_cells", worst))

    chi, A, Hc, C = coeffs.chi, coeffs.A, coeffs.Hc, coeffs.C
    chi_asym = DTensor.build(chart, chi.sig,
                             lambda idx: ex.sub(chi[idx],
                                                chi[idx[0], idx[2], idx[1]]))
    hc_asym = DTensor.build(chart, Hc.sig,
                            lambda idx: ex.sub(Hc[idx],
                                               Hc[idx[0], idx[2], idx[1]]))
    rows.append(("witness_chi_symmetric", _max_abs(chi_asym, evaluators)))
    rows.append(("witness_hc_symmetric", _max_abs(hc_asym, evaluators)))

    pv = [[ex.p_var(chart, i, a) for a in range(m)] for i in range(n)]
    if m >= 2:
        rows.append(("witness_c_vanishes", _max_abs(C, evaluators)))

        def slope_entry(idx):
            r, i, b, f, j = idx
            value = N.n2[r, i, f].diff(pv[j][b])
            if b == f:
                value = ex.add(value, Hc[j, r, i])
            return value

        slope = DTensor.build(chart, P_VM_SIG, slope_entry)
        rows.append(("witness_n2_momentum_slope", _max_abs(slope, evaluators)))

        a_dp = [A[l, i, b].diff(pv[j][c])
                for l in range(n) for i in range(n) for b in range(m)
                for j in range(n) for c in range(m)]
        g_dp = [Hc[l, i, k].diff(pv[j][c])
                for l in range(n) for i in range(n) for k in range(n)
                for j in range(n) for c in range(m)]
        worst = max((abs(ev(e)) for ev in evaluators for e in a_dp + g_dp),
                    default=0.0)
        rows.append(("witness_coefficients_momentum_free", worst))

        # The displayed v-block identities, recomputed with fresh loops.
        chi4 = curvature["chi"]
        r_ibc = curvature["R_ibc"]
        r_ibk = curvature["R_ibk"]
        frak = curvature["frak_R"]
        worst = 0.0
        for ev in evaluators:
            for l in range(n):
                for a in range(m):
                    for d in range(m):
                        for i in range(n):
                            for b in range(m):
                                for c in range(m):
                                    lhs = ev(curvature["vR_bc"][l, a, b, c, d, i])
                                    rhs = (1.0 if i == l else 0.0) * ev(chi4[d, a, b, c]) \
                                        - (1.0 if d == a else 0.0) * ev(r_ibc[i, l, b, c])
                                    worst = max(worst, abs(lhs - rhs))
                                for k in range(n):
                                    lhs = ev(curvature["vR_bk"][l, a, b, k, d, i])
                                    rhs = -(1.0 if d == a else 0.0) * ev(r_ibk[i, l, b, k])
                                    worst = max(worst, abs(lhs - rhs))
            for i in range(n):
                for a in range(m):
                    for d in range(m):
                        for l in range(n):
                            for j in range(n):
                                for k in range(n):
                                    lhs = ev(curvature["vR_jk"][i, a, j, k, d, l])
                                    rhs = -(1.0 if d == a else 0.0) * ev(frak[l, i, j, k])
                                    worst = max(worst, abs(lhs - rhs))
        rows.append(("witness_v_identities", worst))
    else:
        if _spatial_metric_momentum_free(space):
            rows.append(("witness_c_vanishes", _max_abs(C, evaluators)))
            rows.append(("witness_s_vanishes",
                         _max_abs(curvature["S"], evaluators)))
        worst = 0.0
        for v_key, h_key in (("vR_ibk", "R_ibk"), ("vR_ijk", "R_ijk"),
                             ("vP_ibk", "P_ibk"), ("vP_ijk", "P_ijk"),
                             ("vS", "S")):
            mirror_sum = DTensor.build(
                chart, curvature[h_key].sig,
                lambda idx, vk=v_key, hk=h_key: ex.add(curvature[vk][idx],
                                                       curvature[hk][idx]))
            worst = max(worst, _max_abs(mirror_sum, evaluators))
        rows.append(("witness_v_mirrors", worst))

    return rows
