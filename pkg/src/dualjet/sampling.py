"""Seeded uniform sampling of chart points from per-variable boxes."""

from __future__ import annotations

import numpy as np

from .chart import MOMENTUM, SPATIAL, ChartSpec, Point

__all__ = ["SampleBoxes", "sample_points", "DEFAULT_BOXES"]

# Defaults keep every bundled metric away from its singular set.
DEFAULT_BOXES = {"t": (0.5, 1.5), "x": (0.5, 1.2), "p": (-1.0, 1.0)}


class SampleBoxes:
    """Per-variable sampling intervals, resolved var > group > default."""

    __slots__ = ("chart", "lo", "hi")

    def __init__(self, chart: ChartSpec, overrides: dict | None = None):
        overrides = dict(overrides or {})
        lo = np.empty(chart.size)
        hi = np.empty(chart.size)
        for idx, name in enumerate(chart.names):
            kind = chart.kind_of(idx)
            group = {SPATIAL: "x", MOMENTUM: "p"}.get(kind, "t")
            box = overrides.get(name, overrides.get(group, DEFAULT_BOXES[group]))
            a, b = float(box[0]), float(box[1])
            if not a < b:
                raise ValueError(f"empty sampling box for {name}: [{a}, {b}]")
            lo[idx], hi[idx] = a, b
        self.chart = chart
        self.lo = lo
        self.hi = hi

    def contains(self, point: Point, slack: float = 1e-9) -> bool:
        values = np.asarray(point.flatten(self.chart))
        return bool(np.all(values >= self.lo - slack)
                    and np.all(values <= self.hi + slack))

    def sample(self, rng: np.random.Generator, count: int):
        draws = rng.uniform(self.lo, self.hi, size=(count, self.chart.size))
        return [Point.from_flat(self.chart, row) for row in draws]


def sample_points(chart: ChartSpec, count: int, seed: int,
                  boxes: SampleBoxes | None = None):
    """Deterministic points for a given seed; fresh generator per call."""
    if count < 1:
        raise ValueError("sample count must be at least 1")
    if boxes is None:
        boxes = SampleBoxes(chart)
    rng = np.random.default_rng(seed)
    return boxes.sample(rng, count)
