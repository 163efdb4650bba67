"""Expression engine: parsing, differentiation, evaluation, printing."""

import math

import pytest
from hypothesis import given, settings, strategies as st

import dualjet as dj
from dualjet import expr as ex
from dualjet.chart import Point
from dualjet.expr import EvalDomainError
from dualjet.parser import ParseError, UnknownVariableError
from dualjet.sampling import sample_points

from conftest import TreeGen


@pytest.fixture
def chart():
    return dj.ChartSpec(1, 2)


def test_parse_mixed_expression(chart):
    e = dj.parse_scalar("sin(x1)^2 + t1*p1_1", chart)
    names = {chart.names[k] for k in ex.free_variables(e)}
    assert names == {"x1", "t1", "p1_1"}


def test_parse_error_position(chart):
    with pytest.raises(ParseError) as err:
        dj.parse_scalar("x1 +", chart)
    assert err.value.position == 4


def test_unknown_variable_named(chart):
    with pytest.raises(UnknownVariableError, match="y9"):
        dj.parse_scalar("y9", chart)
    with pytest.raises(UnknownVariableError, match="t9"):
        dj.parse_scalar("t9", chart)


def test_power_rule(chart):
    e = dj.parse_scalar("x1^3", chart)
    d = e.diff(ex.x_var(chart, 0))
    assert str(d) == "3 * x1^2"


def test_chain_rule_sin_squared(chart):
    e = dj.parse_scalar("sin(x1)^2", chart)
    d = e.diff(ex.x_var(chart, 0))
    pt = Point.of([0.3], [0.7, 1.0], [[0.2, 0.4]])
    assert dj.evaluate(d, pt) == pytest.approx(
        2 * math.sin(0.7) * math.cos(0.7), rel=1e-15)


def test_product_rule_bilinear(chart):
    e = dj.parse_scalar("t1*p1_1", chart)
    d = e.diff(ex.p_var(chart, 0, 0))
    assert d is ex.t_var(chart, 0)


def test_evaluate_identities(chart):
    pt = Point.of([0.0], [math.pi / 2, 1.0], [[0.0, 0.0]])
    assert dj.evaluate(dj.parse_scalar("exp(t1)", chart), pt) == 1.0
    assert dj.evaluate(dj.parse_scalar("sin(x1)^2", chart), pt) == 1.0


def test_domain_errors(chart):
    bad = Point.of([1.0], [0.0, 1.0], [[0.0, 0.0]])
    with pytest.raises(EvalDomainError, match="division by zero"):
        dj.evaluate(dj.parse_scalar("1/x1", chart), bad)
    with pytest.raises(EvalDomainError, match="log"):
        dj.evaluate(dj.parse_scalar("log(0 - t1)", chart), bad)
    with pytest.raises(EvalDomainError, match="sqrt"):
        dj.evaluate(dj.parse_scalar("sqrt(0 - t1)", chart), bad)


def test_folding_rules(chart):
    x = ex.x_var(chart, 0)
    assert ex.mul(ex.ZERO, x) is ex.ZERO
    assert ex.add(x, ex.ZERO) is x
    assert ex.mul(ex.ONE, x) is x
    assert ex.sub(x, x) is ex.ZERO
    assert ex.power(x, 1.0) is x
    assert ex.power(x, 0.0) is ex.ONE
    assert ex.neg(ex.neg(x)) is x
    assert ex.constant(2.0) + ex.constant(3.0) is ex.constant(5.0)


def test_hash_consing_shares_structure(chart):
    a = dj.parse_scalar("sin(x1) + t1", chart)
    b = dj.parse_scalar("sin( x1 )   + t1", chart)
    assert a is b


def test_no_attribute_injection(chart):
    e = dj.parse_scalar("x1 + 1", chart)
    with pytest.raises(AttributeError):
        e.extra = None  # slotted nodes reject new state


def test_cross_chart_rejected(chart):
    other = dj.ChartSpec(1, 2)
    with pytest.raises(ValueError, match="different charts"):
        ex.add(ex.x_var(chart, 0), ex.x_var(other, 0))


def test_substitute(chart):
    e = dj.parse_scalar("x1^2 + p1_1*t1", chart)
    zeroed = ex.substitute(e, {chart.p_index(0, 0): ex.ZERO})
    pt = Point.of([2.0], [3.0, 0.0], [[5.0, 0.0]])
    assert dj.evaluate(zeroed, pt) == 9.0


# ---------------------------------------------------------------------------
# Spec invariants over random trees
# ---------------------------------------------------------------------------

def _usable_points(chart, e, pts, extra=()):
    good = []
    for pt in pts:
        try:
            dj.evaluate(e, pt)
            for other in extra:
                dj.evaluate(other, pt)
        except EvalDomainError:
            continue
        good.append(pt)
    return good


def test_fd_agreement_100_random_pairs():
    """Central differences vs symbolic derivative on depth<=6 random trees."""
    chart = dj.ChartSpec(2, 2)
    gen = TreeGen(chart, seed=101)
    pts = sample_points(chart, 200, 17)
    eps = 1e-6
    checked = 0
    attempts = 0
    while checked < 100 and attempts < 2000:
        attempts += 1
        e = gen.tree(gen.rng.randrange(1, 7))
        var = ex.variable(chart, gen.rng.randrange(chart.size))
        d = e.diff(var)
        for pt in _usable_points(chart, e, pts[:40], extra=[d]):
            base = list(pt.flatten(chart))
            sym = dj.evaluate(d, pt)
            if not (abs(sym) < 1e3 and abs(dj.evaluate(e, pt)) < 1e3):
                continue  # stay on tame scales so eps^2 truncation is visible
            plus, minus = list(base), list(base)
            plus[var.index] += eps
            minus[var.index] -= eps
            try:
                fd = (dj.evaluate(e, Point.from_flat(chart, plus))
                      - dj.evaluate(e, Point.from_flat(chart, minus))) / (2 * eps)
            except EvalDomainError:
                continue
            assert abs(sym - fd) <= 1e-6 * max(1.0, abs(sym), abs(fd))
            checked += 1
            break
    assert checked == 100


def test_differentiation_linearity():
    chart = dj.ChartSpec(2, 2)
    gen = TreeGen(chart, seed=55)
    pts = sample_points(chart, 30, 23)
    for _ in range(40):
        e1 = gen.tree(4)
        e2 = gen.tree(4)
        var = ex.variable(chart, gen.rng.randrange(chart.size))
        a, b = ex.constant(gen.rng.uniform(-2, 2)), ex.constant(gen.rng.uniform(-2, 2))
        combo = ex.add(ex.mul(a, e1), ex.mul(b, e2)).diff(var)
        split = ex.add(ex.mul(a, e1.diff(var)), ex.mul(b, e2.diff(var)))
        for pt in _usable_points(chart, combo, pts[:6], extra=[split]):
            lhs, rhs = dj.evaluate(combo, pt), dj.evaluate(split, pt)
            assert lhs == pytest.approx(rhs, rel=1e-14, abs=1e-14)


def test_mixed_partials_commute():
    """d(d(e,u),v) and d(d(e,v),u) are differently associated trees, so
    agreement is up to a couple of ulp rather than bit-exact."""
    chart = dj.ChartSpec(2, 2)
    gen = TreeGen(chart, seed=77)
    pts = sample_points(chart, 30, 29)
    for _ in range(60):
        e = gen.tree(5)
        u = ex.variable(chart, gen.rng.randrange(chart.size))
        v = ex.variable(chart, gen.rng.randrange(chart.size))
        duv = e.diff(u).diff(v)
        dvu = e.diff(v).diff(u)
        for pt in _usable_points(chart, duv, pts[:5], extra=[dvu]):
            a, b = dj.evaluate(duv, pt), dj.evaluate(dvu, pt)
            assert abs(a - b) <= 1e-15 * max(1.0, abs(a), abs(b))


def test_print_parse_roundtrip_random_trees():
    chart = dj.ChartSpec(2, 2)
    gen = TreeGen(chart, seed=13)
    for _ in range(300):
        e = gen.tree(gen.rng.randrange(0, 7))
        assert dj.parse_scalar(str(e), chart) is e


@settings(max_examples=200, deadline=None)
@given(value=st.floats(min_value=-1e12, max_value=1e12,
                       allow_nan=False, allow_infinity=False))
def test_constant_roundtrip(value):
    c = ex.constant(value)
    assert dj.parse_scalar(str(c), dj.ChartSpec(1, 1)) is c
