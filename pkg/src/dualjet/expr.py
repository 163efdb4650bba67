"""Immutable symbolic expressions over a chart, with exact differentiation.

Nodes are hash-consed: structurally equal trees built over the same chart
are the same Python object, so ``is`` doubles as structural equality,
derivative results can be cached per node, and evaluation memoizes on node
identity (shared subtrees are evaluated once per point). Construction
applies light constant folding only (0*e -> 0, e+0 -> e, 1*e -> e and the
obvious constant arithmetic); no canonical form beyond that is promised,
and comparisons downstream are made by evaluation, not by structure.

Supported node kinds: real constants, chart variables, unary
neg/sin/cos/exp/log/sqrt, binary add/sub/mul/div, and pow with a constant
real exponent.
"""

from __future__ import annotations

import math

from .chart import ChartSpec, Point

__all__ = [
    "Expr", "Const", "Var", "Unary", "Binary", "Power",
    "constant", "variable", "t_var", "x_var", "p_var",
    "add", "sub", "mul", "div", "power", "neg",
    "sin", "cos", "exp", "log", "sqrt",
    "differentiate", "Evaluator", "evaluate", "substitute",
    "free_variables", "to_source", "EvalDomainError",
]

UNARY_OPS = ("neg", "sin", "cos", "exp", "log", "sqrt")
BINARY_OPS = ("add", "sub", "mul", "div")


class EvalDomainError(ArithmeticError):
    """Evaluation hit a domain violation (log of non-positive, zero divide...)."""

    def __init__(self, message: str, expr: "Expr"):
        src = to_source(expr)
        if len(src) > 120:
            src = src[:117] + "..."
        super().__init__(f"{message} in subexpression: {src}")
        self.expr = expr


class Expr:
    """Base node. Instances are interned; do not construct directly."""

    __slots__ = ("chart", "__weakref__")

    def diff(self, var: "Var") -> "Expr":
        return differentiate(self, var)

    def __call__(self, point: Point) -> float:
        return evaluate(self, point)

    def __str__(self) -> str:
        return to_source(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {to_source(self)}>"

    # Arithmetic sugar; floats/ints coerce to constants.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, k):
        return power(self, k)

    def __neg__(self):
        return neg(self)


class Const(Expr):
    __slots__ = ("value",)
    __match_args__ = ("value",)


class Var(Expr):
    __slots__ = ("index", "name")
    __match_args__ = ("index",)


class Unary(Expr):
    __slots__ = ("op", "arg")
    __match_args__ = ("op", "arg")


class Binary(Expr):
    __slots__ = ("op", "left", "right")
    __match_args__ = ("op", "left", "right")


class Power(Expr):
    __slots__ = ("base", "exponent")
    __match_args__ = ("base", "exponent")


_FREE_TABLE: dict = {}  # intern table for chart-free nodes (constants etc.)


def _table(chart):
    return _FREE_TABLE if chart is None else chart._intern


def _merge_charts(*nodes) -> ChartSpec | None:
    chart = None
    for node in nodes:
        if node.chart is not None:
            if chart is None:
                chart = node.chart
            elif chart is not node.chart:
                raise ValueError("cannot combine expressions from different charts")
    return chart


def _intern(chart, key, factory):
    table = _table(chart)
    node = table.get(key)
    if node is None:
        node = factory()
        node.chart = chart
        table[key] = node
    return node


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return constant(value)
    raise TypeError(f"cannot treat {value!r} as an expression")


def constant(value) -> Const:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value!r}")
    if value == 0.0:
        value = 0.0  # collapse -0.0
    def make():
        node = Const.__new__(Const)
        node.value = value
        return node
    return _intern(None, ("c", value), make)


ZERO = constant(0.0)
ONE = constant(1.0)


def variable(chart: ChartSpec, name_or_index) -> Var:
    index = (chart.index_of(name_or_index) if isinstance(name_or_index, str)
             else int(name_or_index))
    if not 0 <= index < chart.size:
        raise IndexError(f"variable index {index} outside chart")
    def make():
        node = Var.__new__(Var)
        node.index = index
        node.name = chart.names[index]
        return node
    return _intern(chart, ("v", index), make)


def t_var(chart, a):
    return variable(chart, chart.t_index(a))


def x_var(chart, i):
    return variable(chart, chart.x_index(i))


def p_var(chart, i, a):
    return variable(chart, chart.p_index(i, a))


def _binary(op, left, right):
    chart = _merge_charts(left, right)
    def make():
        node = Binary.__new__(Binary)
        node.op = op
        node.left = left
        node.right = right
        return node
    return _intern(chart, ("b", op, id(left), id(right)), make)


def add(left, right) -> Expr:
    left, right = as_expr(left), as_expr(right)
    if isinstance(left, Const) and isinstance(right, Const):
        return constant(left.value + right.value)
    if left is ZERO:
        return right
    if right is ZERO:
        return left
    return _binary("add", left, right)


def sub(left, right) -> Expr:
    left, right = as_expr(left), as_expr(right)
    if isinstance(left, Const) and isinstance(right, Const):
        return constant(left.value - right.value)
    if right is ZERO:
        return left
    if left is ZERO:
        return neg(right)
    if left is right:
        return ZERO
    return _binary("sub", left, right)


def mul(left, right) -> Expr:
    left, right = as_expr(left), as_expr(right)
    if isinstance(left, Const) and isinstance(right, Const):
        return constant(left.value * right.value)
    if left is ZERO or right is ZERO:
        return ZERO
    if left is ONE:
        return right
    if right is ONE:
        return left
    return _binary("mul", left, right)


def div(left, right) -> Expr:
    left, right = as_expr(left), as_expr(right)
    if isinstance(right, Const):
        if right.value == 0.0:
            raise ZeroDivisionError("division by constant zero")
        if isinstance(left, Const):
            return constant(left.value / right.value)
        if right is ONE:
            return left
    if left is ZERO:
        return ZERO
    return _binary("div", left, right)


def power(base, exponent) -> Expr:
    """base ** exponent with a constant real exponent (never an Expr)."""
    base = as_expr(base)
    if isinstance(exponent, Const):
        exponent = exponent.value
    exponent = float(exponent)
    if not math.isfinite(exponent):
        raise ValueError(f"non-finite exponent {exponent!r}")
    if exponent == 0.0:
        return ONE
    if exponent == 1.0:
        return base
    if isinstance(base, Const) and _pow_defined(base.value, exponent):
        return constant(math.pow(base.value, exponent))
    chart = base.chart
    def make():
        node = Power.__new__(Power)
        node.base = base
        node.exponent = exponent
        return node
    return _intern(chart, ("p", id(base), exponent), make)


def _unary(op, arg):
    arg = as_expr(arg)
    chart = arg.chart
    def make():
        node = Unary.__new__(Unary)
        node.op = op
        node.arg = arg
        return node
    return _intern(chart, ("u", op, id(arg)), make)


def neg(arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const):
        return constant(-arg.value)
    if isinstance(arg, Unary) and arg.op == "neg":
        return arg.arg
    return _unary("neg", arg)


def sin(arg) -> Expr:
    return _unary("sin", arg)


def cos(arg) -> Expr:
    return _unary("cos", arg)


def exp(arg) -> Expr:
    return _unary("exp", arg)


def log(arg) -> Expr:
    return _unary("log", arg)


def sqrt(arg) -> Expr:
    return _unary("sqrt", arg)


def esum(terms) -> Expr:
    """Sum of an iterable of expressions (empty sum is 0)."""
    total = ZERO
    for term in terms:
        total = add(total, term)
    return total


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

def differentiate(e: Expr, var: Var) -> Expr:
    """Exact partial derivative of e with respect to a chart variable."""
    if not isinstance(var, Var):
        raise TypeError("differentiation variable must be a Var node")
    if e.chart is not None and e.chart is not var.chart:
        raise ValueError("variable does not belong to the chart of the expression")
    return _diff(e, var)


def _diff(e, var):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e is var else ZERO
    if e.chart is None:  # composite of constants only: no variables anywhere
        return ZERO
    cache = e.chart._diff_cache
    key = (id(e), var.index)
    hit = cache.get(key)
    if hit is not None:
        return hit
    match e:
        case Unary("neg", u):
            out = neg(_diff(u, var))
        case Unary("sin", u):
            out = mul(cos(u), _diff(u, var))
        case Unary("cos", u):
            out = neg(mul(sin(u), _diff(u, var)))
        case Unary("exp", u):
            out = mul(e, _diff(u, var))
        case Unary("log", u):
            out = div(_diff(u, var), u)
        case Unary("sqrt", u):
            out = div(_diff(u, var), mul(constant(2.0), e))
        case Binary("add", l, r):
            out = add(_diff(l, var), _diff(r, var))
        case Binary("sub", l, r):
            out = sub(_diff(l, var), _diff(r, var))
        case Binary("mul", l, r):
            out = add(mul(_diff(l, var), r), mul(l, _diff(r, var)))
        case Binary("div", l, r):
            out = div(sub(mul(_diff(l, var), r), mul(l, _diff(r, var))),
                      power(r, 2.0))
        case Power(b, k):
            out = mul(mul(constant(k), power(b, k - 1.0)), _diff(b, var))
        case _:
            raise TypeError(f"unknown node {e!r}")
    cache[key] = out
    return out


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _pow_defined(base, exponent) -> bool:
    if base == 0.0 and exponent < 0.0:
        return False
    if base < 0.0 and exponent != int(exponent):
        return False
    return True


def _pow_value(base, exponent, node):
    if base == 0.0 and exponent < 0.0:
        raise EvalDomainError("zero base with negative exponent", node)
    if base < 0.0 and exponent != int(exponent):
        raise EvalDomainError("negative base with non-integer exponent", node)
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise EvalDomainError("power overflow", node) from None


class Evaluator:
    """Evaluates expressions of one chart at one point, memoizing shared nodes.

    Reuse a single Evaluator for all expressions evaluated at the same
    point: hash-consing makes the memo hit rate across a tensor's entries
    very high.
    """

    __slots__ = ("chart", "point", "values", "memo")

    def __init__(self, chart: ChartSpec, point: Point):
        self.chart = chart
        self.point = point
        self.values = point.flatten(chart)
        self.memo: dict = {}

    def __call__(self, e: Expr) -> float:
        if e.chart is not None and e.chart is not self.chart:
            raise ValueError("expression belongs to a different chart")
        memo = self.memo
        values = self.values
        stack = [e]
        while stack:
            node = stack[-1]
            nid = id(node)
            if nid in memo:
                stack.pop()
                continue
            if isinstance(node, Const):
                memo[nid] = node.value
                stack.pop()
            elif isinstance(node, Var):
                memo[nid] = values[node.index]
                stack.pop()
            elif isinstance(node, Unary):
                v = memo.get(id(node.arg))
                if v is None:
                    stack.append(node.arg)
                else:
                    memo[nid] = self._apply_unary(node, v)
                    stack.pop()
            elif isinstance(node, Binary):
                lv = memo.get(id(node.left))
                rv = memo.get(id(node.right))
                if lv is None or rv is None:
                    if lv is None:
                        stack.append(node.left)
                    if rv is None:
                        stack.append(node.right)
                else:
                    memo[nid] = self._apply_binary(node, lv, rv)
                    stack.pop()
            else:  # Power
                v = memo.get(id(node.base))
                if v is None:
                    stack.append(node.base)
                else:
                    memo[nid] = _pow_value(v, node.exponent, node)
                    stack.pop()
        return memo[id(e)]

    @staticmethod
    def _apply_unary(node, v):
        op = node.op
        if op == "neg":
            return -v
        if op == "sin":
            return math.sin(v)
        if op == "cos":
            return math.cos(v)
        if op == "exp":
            try:
                return math.exp(v)
            except OverflowError:
                raise EvalDomainError("exp overflow", node) from None
        if op == "log":
            if v <= 0.0:
                raise EvalDomainError(f"log of non-positive value {v!r}", node)
            return math.log(v)
        if op == "sqrt":
            if v < 0.0:
                raise EvalDomainError(f"sqrt of negative value {v!r}", node)
            return math.sqrt(v)
        raise TypeError(f"unknown unary op {op!r}")

    @staticmethod
    def _apply_binary(node, lv, rv):
        op = node.op
        if op == "add":
            return lv + rv
        if op == "sub":
            return lv - rv
        if op == "mul":
            return lv * rv
        if op == "div":
            if rv == 0.0:
                raise EvalDomainError("division by zero", node)
            return lv / rv
        raise TypeError(f"unknown binary op {op!r}")


def evaluate(e: Expr, point: Point) -> float:
    """IEEE double value of e at the point (convenience, fresh memo)."""
    chart = e.chart
    if chart is None:
        # Constant-only tree: evaluate against a trivial stand-in chart.
        if isinstance(e, Const):
            return e.value
        chart = _SCRATCH_CHART
        point = _SCRATCH_POINT
    return Evaluator(chart, point)(e)


_SCRATCH_CHART = ChartSpec(1, 1)
_SCRATCH_POINT = Point.of((0.0,), (0.0,), ((0.0,),))


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def substitute(e: Expr, mapping: dict, target_chart: ChartSpec | None = None) -> Expr:
    """Rebuild e with variables replaced per ``mapping`` (index -> Expr).

    With ``target_chart`` set, every variable of e must be mapped and the
    replacements must live on the target chart (used for chart changes).
    Without it, unmapped variables stay as they are.
    """
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    memo: dict = {}

    def walk(node):
        nid = id(node)
        hit = memo.get(nid)
        if hit is not None:
            return hit
        match node:
            case Const(_):
                out = node
            case Var(index):
                if index in mapping:
                    out = mapping[index]
                elif target_chart is None:
                    out = node
                else:
                    raise KeyError(f"no substitution for variable {node.name}")
            case Unary(op, u):
                out = _unary(op, walk(u)) if op != "neg" else neg(walk(u))
            case Binary(op, l, r):
                out = _BINARY_FACTORY[op](walk(l), walk(r))
            case Power(b, k):
                out = power(walk(b), k)
            case _:
                raise TypeError(f"unknown node {node!r}")
        memo[nid] = out
        return out

    return walk(e)


_BINARY_FACTORY = {"add": add, "sub": sub, "mul": mul, "div": div}


def free_variables(e: Expr) -> frozenset:
    """Indices of the chart variables occurring in e."""
    seen = set()
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        nid = id(node)
        if nid in seen:
            continue
        seen.add(nid)
        if isinstance(node, Var):
            out.add(node.index)
        elif isinstance(node, Unary):
            stack.append(node.arg)
        elif isinstance(node, Binary):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Power):
            stack.append(node.base)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Printing (round-trips through the parser)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _fmt_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_source(e: Expr) -> str:
    """Render e in the expression grammar; parsing the result rebuilds e."""
    src, _ = _render(e)
    return src


def _render(e):
    match e:
        case Const(v):
            if v < 0.0:
                return f"neg({_fmt_number(-v)})", _PREC_ATOM
            return _fmt_number(v), _PREC_ATOM
        case Var(_):
            return e.name, _PREC_ATOM
        case Unary(op, u):
            return f"{op}({to_source(u)})", _PREC_ATOM
        case Binary(op, l, r):
            sym, prec = {"add": ("+", _PREC_ADD), "sub": ("-", _PREC_ADD),
                         "mul": ("*", _PREC_MUL), "div": ("/", _PREC_MUL)}[op]
            ls = _wrap(l, prec)
            rs = _wrap(r, prec + 1)  # left-associative grammar
            return f"{ls} {sym} {rs}", prec
        case Power(b, k):
            bs = _wrap(b, _PREC_ATOM)
            return f"{bs}^{_fmt_number(k)}", _PREC_POW
    raise TypeError(f"unknown node {e!r}")


def _wrap(e, minimum):
    src, prec = _render(e)
    if prec < minimum:
        return f"({src})"
    return src
