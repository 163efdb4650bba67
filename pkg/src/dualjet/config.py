"""JSON space configurations: validation, loading, bundled test spaces."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import expr as ex
from .chart import ChartSpec
from .parser import ParseError, parse_scalar
from .sampling import SampleBoxes
from .spaces import Electrodynamic, HamiltonSpace, RawHamiltonian
from .tensors import DTensor, MetricField, SPATIAL, TEMPORAL, S_UP_M, T_LO_M

__all__ = ["SpaceConfig", "ConfigError", "bundled_config", "bundled_names",
           "DEFAULT_TOLERANCES"]

DEFAULT_TOLERANCES = {
    "identity": 1e-9,   # exact-modulo-rounding identities
    "zero": 1e-12,      # table zeros, antisymmetries, m>=2 reduction
    "fd": 1e-6,         # relative FD comparisons
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _expect(condition, message):
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class SpaceConfig:
    """Validated space definition plus sampling/tolerance settings."""

    m: int
    n: int
    h_rows: tuple              # m x m expression strings
    body: dict                 # raw: {"hamiltonian": str}; else g/U/F/mc
    sample_boxes: dict = field(default_factory=dict)
    seed: int = 0
    tolerances: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(data: dict) -> "SpaceConfig":
        _expect(isinstance(data, dict), "config must be a JSON object")
        for key in ("m", "n", "h", "body"):
            _expect(key in data, f"missing required field {key!r}")
        m, n = data["m"], data["n"]
        _expect(isinstance(m, int) and 1 <= m <= 4, "m must be an integer in 1..4")
        _expect(isinstance(n, int) and 1 <= n <= 4, "n must be an integer in 1..4")
        h = data["h"]
        _expect(_is_matrix(h, m, m), f"h must be an {m}x{m} matrix of strings")
        body = data["body"]
        _expect(isinstance(body, dict), "body must be an object")
        if "hamiltonian" in body:
            _expect(set(body) == {"hamiltonian"},
                    "raw body takes exactly the field 'hamiltonian'")
            _expect(m == 1, "a raw hamiltonian body requires m = 1")
            _expect(isinstance(body["hamiltonian"], str),
                    "hamiltonian must be an expression string")
        else:
            has_up = "g_upper" in body
            has_lo = "g_lower" in body
            _expect(has_up != has_lo,
                    "electrodynamic body needs exactly one of g_upper/g_lower")
            g_key = "g_upper" if has_up else "g_lower"
            _expect(_is_matrix(body[g_key], n, n),
                    f"{g_key} must be an {n}x{n} matrix of strings")
            unknown = set(body) - {g_key, "U", "F", "mc"}
            _expect(not unknown, f"unknown body fields: {sorted(unknown)}")
            if "U" in body:
                _expect(_is_matrix(body["U"], m, n),
                        f"U must be an {m}x{n} matrix of strings (rows by a)")
            if "F" in body:
                _expect(isinstance(body["F"], str), "F must be an expression string")
            if "mc" in body:
                _expect(isinstance(body["mc"], (int, float)) and body["mc"] > 0,
                        "mc must be a positive number")
        boxes = data.get("sample_boxes", {})
        _expect(isinstance(boxes, dict), "sample_boxes must be an object")
        for key, box in boxes.items():
            _expect(isinstance(box, (list, tuple)) and len(box) == 2,
                    f"sample_boxes[{key!r}] must be a [lo, hi] pair")
        seed = data.get("seed", 0)
        _expect(isinstance(seed, int), "seed must be an integer")
        tolerances = data.get("tolerances", {})
        _expect(isinstance(tolerances, dict), "tolerances must be an object")
        unknown = set(tolerances) - set(DEFAULT_TOLERANCES)
        _expect(not unknown, f"unknown tolerance keys: {sorted(unknown)}")
        unknown = set(data) - {"m", "n", "h", "body", "sample_boxes", "seed",
                               "tolerances"}
        _expect(not unknown, f"unknown config fields: {sorted(unknown)}")
        return SpaceConfig(
            m=m, n=n,
            h_rows=tuple(tuple(row) for row in h),
            body=body,
            sample_boxes=dict(boxes),
            seed=seed,
            tolerances={**DEFAULT_TOLERANCES, **tolerances},
        )

    @staticmethod
    def from_file(path) -> "SpaceConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config {path} is not valid JSON: {err}") from err
        return SpaceConfig.from_dict(data)

    def build_space(self) -> HamiltonSpace:
        chart = ChartSpec(self.m, self.n)

        def parse(source, where):
            try:
                return parse_scalar(source, chart)
            except ParseError as err:
                raise ConfigError(f"{where}: {err}") from err

        h_rows = _parse_symmetric(self.h_rows, "h", parse)
        try:
            h = MetricField.from_lower(chart, TEMPORAL, h_rows)
        except ValueError as err:
            raise ConfigError(f"h: {err}") from err

        if "hamiltonian" in self.body:
            body = RawHamiltonian(parse(self.body["hamiltonian"], "hamiltonian"))
        else:
            mc = float(self.body.get("mc", 1.0))
            has_up = "g_upper" in self.body
            g_key = "g_upper" if has_up else "g_lower"
            rows = _parse_symmetric(self.body[g_key], g_key, parse)
            if mc != 1.0:
                # mc scales the quadratic coefficient: the Kronecker factor
                # the geometry consumes is g_upper / mc. Interning keeps the
                # scaled mirror entries identical, so symmetry survives.
                scale = ex.constant(1.0 / mc if has_up else mc)
                rows = [[ex.mul(scale, e) for e in row] for row in rows]
            try:
                g = (MetricField.from_upper(chart, SPATIAL, rows) if has_up
                     else MetricField.from_lower(chart, SPATIAL, rows))
            except ValueError as err:
                raise ConfigError(f"{g_key}: {err}") from err
            u_src = self.body.get("U")
            if u_src is None:
                u_entries = [ex.ZERO] * (self.n * self.m)
            else:
                u_entries = []
                for i in range(self.n):
                    for a in range(self.m):
                        u_entries.append(parse(u_src[a][i], f"U[{a + 1}][{i + 1}]"))
            potential = DTensor(chart, (S_UP_M, T_LO_M), u_entries,
                                labels=("(i)", "(a)"))
            f_expr = (parse(self.body["F"], "F") if "F" in self.body else ex.ZERO)
            body = Electrodynamic(g=g, potential=potential, scalar=f_expr)
        try:
            return HamiltonSpace(chart, h, body)
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def build_boxes(self, chart: ChartSpec) -> SampleBoxes:
        try:
            return SampleBoxes(chart, self.sample_boxes)
        except ValueError as err:
            raise ConfigError(f"sample_boxes: {err}") from err

    def canonical_dict(self) -> dict:
        return {
            "m": self.m, "n": self.n,
            "h": [list(row) for row in self.h_rows],
            "body": self.body,
            "sample_boxes": self.sample_boxes,
            "seed": self.seed,
            "tolerances": self.tolerances,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True,
                          separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def _is_matrix(value, rows, cols) -> bool:
    return (isinstance(value, (list, tuple)) and len(value) == rows
            and all(isinstance(row, (list, tuple)) and len(row) == cols
                    and all(isinstance(e, str) for e in row) for row in value))


def _parse_symmetric(rows_src, name, parse):
    """Parse a matrix of sources; mirror-equal sources share one tree, which
    is what the MetricField symmetry check keys on."""
    dim = len(rows_src)
    for i in range(dim):
        for j in range(dim):
            if rows_src[i][j].split() != rows_src[j][i].split():
                raise ConfigError(
                    f"{name} is not symmetric: entry ({i + 1},{j + 1}) differs "
                    f"from ({j + 1},{i + 1})")
    return [[parse(rows_src[i][j], f"{name}[{i + 1}][{j + 1}]")
             for j in range(dim)] for i in range(dim)]


def bundled_names():
    return ("flat", "sphere", "rheonomic")


def bundled_config(name: str) -> SpaceConfig:
    """One of the shipped test spaces (see configs/)."""
    if name not in bundled_names():
        raise ConfigError(f"unknown bundled config {name!r}; "
                          f"available: {', '.join(bundled_names())}")
    text = resources.files("dualjet").joinpath(f"configs/{name}.json").read_text("utf-8")
    return SpaceConfig.from_dict(json.loads(text))
