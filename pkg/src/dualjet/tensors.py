"""Dense tensors of symbolic entries with tagged index slots.

A DTensor stores one expression per multi-index; each slot is tagged with
its kind (spatial slots range over n, temporal over m), its variance, and
whether it is the spatial or temporal half of a parenthesized momentum
pair. Component arrays follow the written index order of their defining
formula: classical coefficient families put the upper index first
(chi[a][b][c], Gamma[k][i][j], frakR[r][k][i][j]), jet-bundle objects put
subscripts before superscripts (N2[i][j][a]); each constructor documents
its order and attaches the labels that reports echo.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .chart import ChartSpec
from .expr import EvalDomainError, Evaluator, Expr

__all__ = [
    "Slot", "DTensor", "MetricField", "DegenerateMetricError",
    "SPATIAL", "TEMPORAL", "UPPER", "LOWER",
    "symbolic_inverse", "temporal_christoffel", "spatial_christoffel",
    "christoffel_curvature_spatial", "christoffel_curvature_temporal",
]

SPATIAL = "spatial"
TEMPORAL = "temporal"
UPPER = "upper"
LOWER = "lower"

DEGENERACY_TOL = 1e-12


class DegenerateMetricError(EvalDomainError):
    """A metric determinant vanished (or nearly so) at an evaluation point."""

    def __init__(self, kind: str, value: float, det_expr: Expr):
        ArithmeticError.__init__(
            self, f"{kind} metric is degenerate: |det| = {abs(value):.3e} "
                  f"< {DEGENERACY_TOL:g}")
        self.expr = det_expr
        self.value = value


@dataclass(frozen=True)
class Slot:
    kind: str                 # SPATIAL | TEMPORAL
    variance: str             # UPPER | LOWER
    momentum: bool = False    # half of a parenthesized momentum pair

    def range(self, chart: ChartSpec) -> int:
        return chart.n if self.kind == SPATIAL else chart.m

    def __post_init__(self):
        if self.kind not in (SPATIAL, TEMPORAL):
            raise ValueError(f"bad slot kind {self.kind!r}")
        if self.variance not in (UPPER, LOWER):
            raise ValueError(f"bad slot variance {self.variance!r}")


# Shorthand used throughout the geometry modules.
S_UP = Slot(SPATIAL, UPPER)
S_LO = Slot(SPATIAL, LOWER)
T_UP = Slot(TEMPORAL, UPPER)
T_LO = Slot(TEMPORAL, LOWER)
S_UP_M = Slot(SPATIAL, UPPER, momentum=True)
S_LO_M = Slot(SPATIAL, LOWER, momentum=True)
T_UP_M = Slot(TEMPORAL, UPPER, momentum=True)
T_LO_M = Slot(TEMPORAL, LOWER, momentum=True)


class DTensor:
    """Immutable dense array of expressions with an index signature."""

    __slots__ = ("chart", "sig", "shape", "labels", "_entries")

    def __init__(self, chart: ChartSpec, sig, entries, labels=None):
        sig = tuple(sig)
        shape = tuple(slot.range(chart) for slot in sig)
        size = 1
        for d in shape:
            size *= d
        entries = tuple(ex.as_expr(e) for e in entries)
        if len(entries) != size:
            raise ValueError(f"expected {size} entries for shape {shape}, "
                             f"got {len(entries)}")
        for e in entries:
            if e.chart is not None and e.chart is not chart:
                raise ValueError("entry belongs to a different chart")
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != len(sig):
                raise ValueError("labels do not match signature length")
        self.chart = chart
        self.sig = sig
        self.shape = shape
        self.labels = labels
        self._entries = entries

    @classmethod
    def build(cls, chart, sig, fn, labels=None) -> "DTensor":
        sig = tuple(sig)
        shape = tuple(slot.range(chart) for slot in sig)
        entries = [fn(idx) for idx in itertools.product(*map(range, shape))]
        return cls(chart, sig, entries, labels)

    @classmethod
    def zeros(cls, chart, sig, labels=None) -> "DTensor":
        sig = tuple(sig)
        shape = tuple(slot.range(chart) for slot in sig)
        size = 1
        for d in shape:
            size *= d
        return cls(chart, sig, [ex.ZERO] * size, labels)

    @property
    def rank(self) -> int:
        return len(self.sig)

    def indices(self):
        return itertools.product(*map(range, self.shape))

    def _offset(self, idx) -> int:
        if len(idx) != len(self.shape):
            raise IndexError(f"expected {len(self.shape)} indices, got {len(idx)}")
        off = 0
        for k, d in zip(idx, self.shape):
            if not 0 <= k < d:
                raise IndexError(f"index {idx} outside shape {self.shape}")
            off = off * d + k
        return off

    def __getitem__(self, idx) -> Expr:
        if isinstance(idx, int):
            idx = (idx,)
        return self._entries[self._offset(idx)]

    def entries(self):
        return self._entries

    def map(self, fn, labels=None) -> "DTensor":
        return DTensor(self.chart, self.sig, [fn(e) for e in self._entries],
                       labels if labels is not None else self.labels)

    def relabel(self, labels) -> "DTensor":
        return DTensor(self.chart, self.sig, self._entries, labels)

    def evaluate(self, ev: Evaluator) -> np.ndarray:
        values = np.array([ev(e) for e in self._entries], dtype=float)
        return values.reshape(self.shape) if self.shape else values.reshape(())

    def is_zero(self) -> bool:
        """True when every entry folded to the literal constant 0."""
        return all(e is ex.ZERO for e in self._entries)

    def __repr__(self):
        lbl = "" if self.labels is None else f" labels={','.join(self.labels)}"
        return f"<DTensor shape={self.shape}{lbl}>"


class MetricField:
    """A symmetric rank-2 metric with its symbolic (adjugate/det) inverse.

    ``lower`` has two lower slots, ``upper`` two upper slots; the two are
    exact symbolic inverses. ``det`` is the determinant of the matrix the
    caller supplied, tracked for the evaluation-time degeneracy check.
    """

    __slots__ = ("chart", "kind", "lower", "upper", "det")

    def __init__(self, chart, kind, lower: DTensor, upper: DTensor, det: Expr):
        self.chart = chart
        self.kind = kind  # SPATIAL | TEMPORAL
        self.lower = lower
        self.upper = upper
        self.det = det

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @classmethod
    def from_lower(cls, chart, kind, rows) -> "MetricField":
        rows = _symmetric_rows(rows, "lower metric")
        slot = Slot(kind, LOWER)
        lower = DTensor(chart, (slot, slot), [e for row in rows for e in row])
        inverse, det = symbolic_inverse_rows(rows)
        up = Slot(kind, UPPER)
        upper = DTensor(chart, (up, up), [e for row in inverse for e in row])
        return cls(chart, kind, lower, upper, det)

    @classmethod
    def from_upper(cls, chart, kind, rows) -> "MetricField":
        rows = _symmetric_rows(rows, "upper metric")
        up = Slot(kind, UPPER)
        upper = DTensor(chart, (up, up), [e for row in rows for e in row])
        inverse, det = symbolic_inverse_rows(rows)
        slot = Slot(kind, LOWER)
        lower = DTensor(chart, (slot, slot), [e for row in inverse for e in row])
        return cls(chart, kind, lower, upper, det)

    def check_point(self, ev: Evaluator):
        value = ev(self.det)
        if abs(value) < DEGENERACY_TOL:
            raise DegenerateMetricError(self.kind, value, self.det)

    def __repr__(self):
        return f"<MetricField {self.kind} dim={self.dim}>"


def _symmetric_rows(rows, what):
    rows = [[ex.as_expr(e) for e in row] for row in rows]
    dim = len(rows)
    if dim == 0 or any(len(row) != dim for row in rows):
        raise ValueError(f"{what} must be a square matrix")
    if dim > 4:
        raise ValueError(f"{what} dimension {dim} exceeds the supported cap of 4")
    for i in range(dim):
        for j in range(i + 1, dim):
            if rows[i][j] is not rows[j][i]:
                raise ValueError(f"{what} is not symmetric at entry ({i + 1},{j + 1})")
    return rows


def _minor(rows, drop_row, drop_col):
    return [[e for j, e in enumerate(row) if j != drop_col]
            for i, row in enumerate(rows) if i != drop_row]


def _det(rows) -> Expr:
    dim = len(rows)
    if dim == 1:
        return rows[0][0]
    if dim == 2:
        return ex.sub(ex.mul(rows[0][0], rows[1][1]), ex.mul(rows[0][1], rows[1][0]))
    total = ex.ZERO
    for j in range(dim):
        term = ex.mul(rows[0][j], _det(_minor(rows, 0, j)))
        total = ex.add(total, term) if j % 2 == 0 else ex.sub(total, term)
    return total


def symbolic_inverse_rows(rows):
    """Adjugate/determinant inverse of a square symbolic matrix (dim <= 4)."""
    dim = len(rows)
    det = _det(rows)
    if isinstance(det, ex.Const) and det.value == 0.0:
        raise ZeroDivisionError("matrix is identically singular")
    if dim == 1:
        return [[ex.div(ex.ONE, rows[0][0])]], det
    inverse = [[None] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            cof = _det(_minor(rows, j, i))  # transposed cofactor
            if (i + j) % 2 == 1:
                cof = ex.neg(cof)
            inverse[i][j] = ex.div(cof, det)
    return inverse, det


def symbolic_inverse(lower: DTensor) -> DTensor:
    """Symbolic inverse of a symmetric rank-2 tensor, flipping its variance."""
    if lower.rank != 2 or lower.shape[0] != lower.shape[1]:
        raise ValueError("symbolic_inverse expects a square rank-2 tensor")
    kind = lower.sig[0].kind
    dim = lower.shape[0]
    rows = [[lower[i, j] for j in range(dim)] for i in range(dim)]
    inverse, _ = symbolic_inverse_rows(rows)
    flipped = UPPER if lower.sig[0].variance == LOWER else LOWER
    slot = Slot(kind, flipped)
    return DTensor(lower.chart, (slot, slot), [e for row in inverse for e in row])


# ---------------------------------------------------------------------------
# Christoffel symbols and their curvatures
# ---------------------------------------------------------------------------

def temporal_christoffel(h: MetricField) -> DTensor:
    """chi^a_bc of the temporal metric, stored chi[a][b][c]; symmetric in (b,c).

    chi^a_bc = (h^{ad}/2)(dh_db/dt^c + dh_dc/dt^b - dh_bc/dt^d)
    """
    chart = h.chart
    m = chart.m
    tv = [ex.t_var(chart, a) for a in range(m)]
    half = ex.constant(0.5)

    def entry(idx):
        a, b, c = idx
        total = ex.ZERO
        for d in range(m):
            bracket = ex.sub(
                ex.add(h.lower[d, b].diff(tv[c]), h.lower[d, c].diff(tv[b])),
                h.lower[b, c].diff(tv[d]))
            total = ex.add(total, ex.mul(ex.mul(half, h.upper[a, d]), bracket))
        return total

    return DTensor.build(chart, (T_UP, T_LO, T_LO), entry, labels=("a", "b", "c"))


def spatial_christoffel(g: MetricField) -> DTensor:
    """Gamma^k_ij of the spatial metric, stored Gamma[k][i][j]; symmetric in (i,j).

    Gamma^k_ij = (g^{kl}/2)(dg_li/dx^j + dg_lj/dx^i - dg_ij/dx^l)
    """
    chart = g.chart
    n = chart.n
    xv = [ex.x_var(chart, i) for i in range(n)]
    half = ex.constant(0.5)

    def entry(idx):
        k, i, j = idx
        total = ex.ZERO
        for l in range(n):
            bracket = ex.sub(
                ex.add(g.lower[l, i].diff(xv[j]), g.lower[l, j].diff(xv[i])),
                g.lower[i, j].diff(xv[l]))
            total = ex.add(total, ex.mul(ex.mul(half, g.upper[k, l]), bracket))
        return total

    return DTensor.build(chart, (S_UP, S_LO, S_LO), entry, labels=("k", "i", "j"))


def _coefficient_curvature(coeffs: DTensor, variables, sig, labels) -> DTensor:
    """d(C^r_ki)/dv^j - d(C^r_kj)/dv^i + C^p_ki C^r_pj - C^p_kj C^r_pi."""
    chart = coeffs.chart
    dim = coeffs.shape[0]

    def entry(idx):
        r, k, i, j = idx
        total = ex.sub(coeffs[r, k, i].diff(variables[j]),
                       coeffs[r, k, j].diff(variables[i]))
        for p in range(dim):
            total = ex.add(total, ex.mul(coeffs[p, k, i], coeffs[r, p, j]))
            total = ex.sub(total, ex.mul(coeffs[p, k, j], coeffs[r, p, i]))
        return total

    return DTensor.build(chart, sig, entry, labels=labels)


def christoffel_curvature_spatial(gamma: DTensor) -> DTensor:
    """frakR^r_kij of the spatial Christoffels, stored [r][k][i][j].

    frakR^r_kij = dGamma^r_ki/dx^j - dGamma^r_kj/dx^i
                  + Gamma^p_ki Gamma^r_pj - Gamma^p_kj Gamma^r_pi
    Antisymmetric in (i, j).
    """
    chart = gamma.chart
    xv = [ex.x_var(chart, i) for i in range(chart.n)]
    return _coefficient_curvature(gamma, xv, (S_UP, S_LO, S_LO, S_LO),
                                  ("r", "k", "i", "j"))


def christoffel_curvature_temporal(chi: DTensor) -> DTensor:
    """chi^d_abc of the temporal Christoffels, stored [d][a][b][c].

    chi^d_abc = dchi^d_ab/dt^c - dchi^d_ac/dt^b
                + chi^f_ab chi^d_fc - chi^f_ac chi^d_fb
    Antisymmetric in (b, c); identically zero when m = 1.
    """
    chart = chi.chart
    tv = [ex.t_var(chart, a) for a in range(chart.m)]
    return _coefficient_curvature(chi, tv, (T_UP, T_LO, T_LO, T_LO),
                                  ("d", "a", "b", "c"))
