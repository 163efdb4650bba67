"""Chart bookkeeping for dual 1-jet bundles: variables t^a, x^i, p_i^a."""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_DIM = 4

TEMPORAL = "temporal"
SPATIAL = "spatial"
MOMENTUM = "momentum"


class ChartSpec:
    """Variable declarations for one chart of an (m, n) dual 1-jet bundle.

    The chart has m temporal variables t1..tm, n spatial variables x1..xn
    and m*n momenta named p{i}_{a} with the spatial index written first
    (p2_1 is p with spatial index 2, temporal index 1). Variable order is
    the t-block, the x-block, then the momentum block with the temporal
    index outermost; ``Point.flatten`` uses the same order.

    A chart owns the intern tables of its expressions, so two charts with
    equal dimensions are still distinct variable universes. Instances are
    immutable; identity is the only meaningful equality.
    """

    __slots__ = ("m", "n", "names", "_index", "_intern", "_diff_cache", "__weakref__")

    def __init__(self, m: int, n: int):
        if not 1 <= m <= MAX_DIM:
            raise ValueError(f"temporal dimension m={m} outside 1..{MAX_DIM}")
        if not 1 <= n <= MAX_DIM:
            raise ValueError(f"spatial dimension n={n} outside 1..{MAX_DIM}")
        self.m = m
        self.n = n
        names = [f"t{a + 1}" for a in range(m)]
        names += [f"x{i + 1}" for i in range(n)]
        names += [f"p{i + 1}_{a + 1}" for a in range(m) for i in range(n)]
        self.names = tuple(names)
        self._index = {name: k for k, name in enumerate(names)}
        self._intern: dict = {}
        self._diff_cache: dict = {}

    @property
    def size(self) -> int:
        return self.m + self.n + self.m * self.n

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"variable {name!r} not declared in this chart") from None

    def declares(self, name: str) -> bool:
        return name in self._index

    def t_index(self, a: int) -> int:
        """Flat index of t^{a+1} (a is 0-based)."""
        if not 0 <= a < self.m:
            raise IndexError(f"temporal index {a} outside 0..{self.m - 1}")
        return a

    def x_index(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"spatial index {i} outside 0..{self.n - 1}")
        return self.m + i

    def p_index(self, i: int, a: int) -> int:
        """Flat index of p_{i+1}^{a+1} (both 0-based)."""
        if not (0 <= i < self.n and 0 <= a < self.m):
            raise IndexError(f"momentum index ({i},{a}) outside chart ranges")
        return self.m + self.n + a * self.n + i

    def kind_of(self, index: int) -> str:
        if index < self.m:
            return TEMPORAL
        if index < self.m + self.n:
            return SPATIAL
        return MOMENTUM

    def t_indices(self):
        return range(self.m)

    def x_indices(self):
        return range(self.m, self.m + self.n)

    def p_indices(self):
        return range(self.m + self.n, self.size)

    def __repr__(self):
        return f"ChartSpec(m={self.m}, n={self.n})"


@dataclass(frozen=True)
class Point:
    """One evaluation point: t, x arrays and the momentum matrix p[a][i]."""

    t: tuple
    x: tuple
    p: tuple  # p[a][i] holds p_i^a

    @staticmethod
    def of(t, x, p) -> "Point":
        pt = Point(tuple(float(v) for v in t),
                   tuple(float(v) for v in x),
                   tuple(tuple(float(v) for v in row) for row in p))
        for v in pt.t + pt.x + tuple(v for row in pt.p for v in row):
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate {v!r} in point")
        return pt

    def flatten(self, chart: ChartSpec) -> tuple:
        """Values in chart variable order; validates shapes against the chart."""
        if len(self.t) != chart.m or len(self.x) != chart.n:
            raise ValueError(
                f"point shape (t:{len(self.t)}, x:{len(self.x)}) does not match "
                f"chart (m={chart.m}, n={chart.n})")
        if len(self.p) != chart.m or any(len(row) != chart.n for row in self.p):
            raise ValueError(f"momentum block shape does not match chart "
                             f"(expected {chart.m}x{chart.n})")
        return self.t + self.x + tuple(v for row in self.p for v in row)

    @staticmethod
    def from_flat(chart: ChartSpec, values) -> "Point":
        values = [float(v) for v in values]
        if len(values) != chart.size:
            raise ValueError(f"expected {chart.size} values, got {len(values)}")
        m, n = chart.m, chart.n
        t = values[:m]
        x = values[m:m + n]
        p = [values[m + n + a * n: m + n + (a + 1) * n] for a in range(m)]
        return Point.of(t, x, p)
