"""
Net Expression Language

Closed-form expression trees for nets eps -> R and for nets of smooth
functions (eps, x) -> R: parsing, printing, substitution, symbolic
differentiation, big-float evaluation and the growth-order normal form of the
fragment  C * eps^a * (-log eps)^b * exp(c/eps).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import mpmath

from errors import ExpressionSyntaxError, NetDomainError, NotDifferentiableError, UnknownIdentifierError


Number = Union[int, Fraction]

UNARY_OPS = ("neg", "abs", "exp", "log", "floor", "sin", "cos", "erf")
BINARY_OPS = ("add", "sub", "mul", "div", "min", "max")
EXTENDED_FUNCTIONS = ("sin", "cos", "erf")
KNOWN_VARIABLES = ("eps", "x", "t", "n")

_BINARY_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------

class NetExpr:
    """Base class of expression nodes; nodes are immutable and hashable"""

    def __add__(self, other):
        return Binary("add", self, as_expr(other))

    def __radd__(self, other):
        return Binary("add", as_expr(other), self)

    def __sub__(self, other):
        return Binary("sub", self, as_expr(other))

    def __rsub__(self, other):
        return Binary("sub", as_expr(other), self)

    def __mul__(self, other):
        return Binary("mul", self, as_expr(other))

    def __rmul__(self, other):
        return Binary("mul", as_expr(other), self)

    def __truediv__(self, other):
        return Binary("div", self, as_expr(other))

    def __rtruediv__(self, other):
        return Binary("div", as_expr(other), self)

    def __neg__(self):
        return Unary("neg", self)

    def __pow__(self, exponent):
        return Pow(self, as_expr(exponent))

    def __str__(self) -> str:
        return print_expr(self)

    def evaluate_at(self, point, precision: int = 50, var: str = "eps"):
        """Evaluate as a net in a single index variable"""
        return evaluate(self, {var: point}, precision)


@dataclass(frozen=True, eq=True, repr=False)
class Const(NetExpr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    def __repr__(self):
        return f"Const({self.value})"


@dataclass(frozen=True, eq=True, repr=False)
class Var(NetExpr):
    name: str

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True, eq=True, repr=False)
class NamedConst(NetExpr):
    name: str

    def __repr__(self):
        return f"NamedConst({self.name})"


@dataclass(frozen=True, eq=True, repr=False)
class Unary(NetExpr):
    op: str
    arg: NetExpr

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary operator '{self.op}'")

    def __repr__(self):
        return f"Unary({self.op}, {self.arg!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Binary(NetExpr):
    op: str
    left: NetExpr
    right: NetExpr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator '{self.op}'")

    def __repr__(self):
        return f"Binary({self.op}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Pow(NetExpr):
    """base ** exponent; in the fragment only when the exponent is a Const"""
    base: NetExpr
    exponent: NetExpr

    @property
    def is_fragment_pow(self) -> bool:
        return isinstance(self.exponent, Const)

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Compose(NetExpr):
    """eps -> outer(inner(eps)); `var` names the variable of outer that is replaced"""
    outer: NetExpr
    inner: NetExpr
    var: str = "eps"

    def __repr__(self):
        return f"Compose({self.outer!r}, {self.inner!r}, {self.var})"


EPS = Var("eps")
X = Var("x")
T = Var("t")
N = Var("n")
ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
PI = NamedConst("pi")


def as_expr(value) -> NetExpr:
    if isinstance(value, NetExpr):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    raise TypeError(f"cannot use {type(value).__name__} as a net expression")


def fn(name: str, *args: NetExpr) -> NetExpr:
    """Build a function node by its DSL name"""
    if name in ("min", "max"):
        return Binary(name, as_expr(args[0]), as_expr(args[1]))
    return Unary(name, as_expr(args[0]))


def minus_log_eps() -> NetExpr:
    """L(eps) = -log(eps), the log factor of the fragment"""
    return Unary("neg", Unary("log", EPS))


def free_vars(e: NetExpr) -> FrozenSet[str]:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, (Const, NamedConst)):
        return frozenset()
    if isinstance(e, Unary):
        return free_vars(e.arg)
    if isinstance(e, Binary):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Pow):
        return free_vars(e.base) | free_vars(e.exponent)
    if isinstance(e, Compose):
        return (free_vars(e.outer) - {e.var}) | free_vars(e.inner)
    raise TypeError(f"not a net expression: {e!r}")


def depends_on(e: NetExpr, var: str) -> bool:
    return var in free_vars(e)


def uses_extended(e: NetExpr) -> bool:
    """True if the tree contains sin/cos/erf/pi"""
    if isinstance(e, NamedConst):
        return True
    if isinstance(e, Unary):
        return e.op in EXTENDED_FUNCTIONS or uses_extended(e.arg)
    if isinstance(e, Binary):
        return uses_extended(e.left) or uses_extended(e.right)
    if isinstance(e, Pow):
        return uses_extended(e.base) or uses_extended(e.exponent)
    if isinstance(e, Compose):
        return uses_extended(e.outer) or uses_extended(e.inner)
    return False


def node_count(e: NetExpr) -> int:
    if isinstance(e, Unary):
        return 1 + node_count(e.arg)
    if isinstance(e, Binary):
        return 1 + node_count(e.left) + node_count(e.right)
    if isinstance(e, Pow):
        return 1 + node_count(e.base) + node_count(e.exponent)
    if isinstance(e, Compose):
        return 1 + node_count(e.outer) + node_count(e.inner)
    return 1


# ---------------------------------------------------------------------------
# Sampling schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingSchedule:
    """Geometric schedule eps_k = start * ratio^k, k = 0..count-1"""
    start: Fraction = Fraction(1, 10)
    ratio: Fraction = Fraction(1, 10)
    count: int = 12
    precision: int = 50

    def __post_init__(self):
        object.__setattr__(self, "start", Fraction(self.start))
        object.__setattr__(self, "ratio", Fraction(self.ratio))
        if not (0 < self.start <= 1):
            raise ValueError(f"schedule start must lie in (0, 1], got {self.start}")
        if not (0 < self.ratio < 1):
            raise ValueError(f"schedule ratio must lie in (0, 1), got {self.ratio}")
        if self.count < 8:
            raise ValueError(f"schedule needs at least 8 points, got {self.count}")
        if self.precision < 15:
            raise ValueError(f"working precision must be at least 15 digits, got {self.precision}")

    def points(self) -> List[Fraction]:
        return [self.start * self.ratio ** k for k in range(self.count)]

    def mp_points(self) -> list:
        with mpmath.workdps(self.precision):
            return [to_mpf(p) for p in self.points()]

    def decades(self) -> float:
        """Number of decades spanned by the schedule"""
        first, last = self.points()[0], self.points()[-1]
        return float(mpmath.log10(to_mpf(first) / to_mpf(last)))

    def with_precision(self, precision: int) -> "SamplingSchedule":
        return SamplingSchedule(self.start, self.ratio, self.count, precision)

    def describe(self) -> Dict[str, str]:
        return {
            "start": str(self.start),
            "ratio": str(self.ratio),
            "count": str(self.count),
            "precision": str(self.precision),
        }


DEFAULT_SCHEDULE = SamplingSchedule()


def to_mpf(value):
    """Exact-as-possible conversion of ints/Fractions/strings to mpf at the current precision"""
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


# ---------------------------------------------------------------------------
# Parser and printer
# ---------------------------------------------------------------------------

@dataclass
class _Token:
    kind: str          # "num", "ident", "op", "end"
    text: str
    pos: int
    value: Optional[Fraction] = None


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            literal = text[start:i]
            # p/q literal: a slash immediately followed by digits
            if i + 1 < n and text[i] == "/" and text[i + 1].isdigit():
                j = i + 1
                while j < n and text[j].isdigit():
                    j += 1
                if not (j < n and (text[j].isalpha() or text[j] == ".")):
                    literal = text[start:j]
                    i = j
            try:
                if "/" in literal:
                    p, q = literal.split("/")
                    value = Fraction(p) / Fraction(q)
                else:
                    value = Fraction(literal)
            except (ValueError, ZeroDivisionError):
                raise ExpressionSyntaxError(f"invalid number '{literal}'", start)
            tokens.append(_Token("num", literal, start, value))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("ident", text[start:i], start))
            continue
        if ch in "+-*/(),":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character '{ch}'", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    """Recursive-descent parser for the net DSL"""

    def __init__(self, text: str, variables: Iterable[str], extended: bool):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0
        self.variables = set(variables)
        self.extended = extended

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, text: str):
        token = self.current
        if token.kind != "op" or token.text != text:
            found = token.text or "end of input"
            raise ExpressionSyntaxError(f"expected '{text}', found '{found}'", token.pos)
        self._advance()

    def parse(self) -> NetExpr:
        expr = self._expr()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"unexpected '{self.current.text}'", self.current.pos)
        return expr

    def _expr(self) -> NetExpr:
        node = self._term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = "add" if self._advance().text == "+" else "sub"
            node = Binary(op, node, self._term())
        return node

    def _term(self) -> NetExpr:
        node = self._factor()
        while self.current.kind == "op" and self.current.text in "*/":
            op = "mul" if self._advance().text == "*" else "div"
            node = Binary(op, node, self._factor())
        return node

    def _factor(self) -> NetExpr:
        token = self.current
        if token.kind == "op" and token.text == "-":
            self._advance()
            if self.current.kind == "num":
                return Const(-self._advance().value)
            return Unary("neg", self._factor())
        if token.kind == "op" and token.text == "(":
            self._advance()
            node = self._expr()
            self._expect(")")
            return node
        if token.kind == "num":
            self._advance()
            return Const(token.value)
        if token.kind == "ident":
            return self._identifier()
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected '{found}'", token.pos)

    def _identifier(self) -> NetExpr:
        token = self._advance()
        name = token.text
        if name in self.variables:
            return Var(name)
        if name == "pi":
            if not self.extended:
                raise UnknownIdentifierError(name, token.pos)
            return PI
        if name == "pow":
            self._expect("(")
            base = self._expr()
            self._expect(",")
            exp_pos = self.current.pos
            exponent = simplify(self._expr())
            self._expect(")")
            if not isinstance(exponent, Const) and not self.extended:
                raise ExpressionSyntaxError("pow exponent must be a rational constant", exp_pos)
            return Pow(base, exponent)
        if name == "compose":
            self._expect("(")
            outer = self._expr()
            self._expect(",")
            inner = self._expr()
            var = "eps"
            if self.current.kind == "op" and self.current.text == ",":
                self._advance()
                var_token = self._advance()
                if var_token.kind != "ident" or var_token.text not in KNOWN_VARIABLES:
                    raise ExpressionSyntaxError("compose variable must be a variable name", var_token.pos)
                var = var_token.text
            self._expect(")")
            return Compose(outer, inner, var)
        if name in ("min", "max"):
            self._expect("(")
            left = self._expr()
            self._expect(",")
            right = self._expr()
            self._expect(")")
            return Binary(name, left, right)
        if name in UNARY_OPS and name != "neg":
            if name in EXTENDED_FUNCTIONS and not self.extended:
                raise UnknownIdentifierError(name, token.pos)
            self._expect("(")
            arg = self._expr()
            self._expect(")")
            return Unary(name, arg)
        raise UnknownIdentifierError(name, token.pos)


def parse(text: str, variables: Iterable[str] = ("eps",), extended: bool = False) -> NetExpr:
    """
    Parse a DSL string into a NetExpr

    Args:
        text: Expression in the net DSL
        variables: Identifiers accepted as variables ("eps" for nets, plus "x"/"t" for function nets)
        extended: Enable sin, cos, erf and pi (always out of the growth fragment)

    Returns:
        Expression tree

    Raises:
        ExpressionSyntaxError: With the character position of the error
        UnknownIdentifierError: For identifiers outside the grammar
    """
    return _Parser(text, variables, extended).parse()


def _format_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def print_expr(e: NetExpr) -> str:
    """Print an expression so that parse(print_expr(e)) == e"""
    if isinstance(e, Const):
        return _format_fraction(e.value)
    if isinstance(e, (Var, NamedConst)):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"-({print_expr(e.arg)})"
        return f"{e.op}({print_expr(e.arg)})"
    if isinstance(e, Binary):
        if e.op in _BINARY_SYMBOLS:
            return f"({print_expr(e.left)} {_BINARY_SYMBOLS[e.op]} {print_expr(e.right)})"
        return f"{e.op}({print_expr(e.left)}, {print_expr(e.right)})"
    if isinstance(e, Pow):
        return f"pow({print_expr(e.base)}, {print_expr(e.exponent)})"
    if isinstance(e, Compose):
        if e.var == "eps":
            return f"compose({print_expr(e.outer)}, {print_expr(e.inner)})"
        return f"compose({print_expr(e.outer)}, {print_expr(e.inner)}, {e.var})"
    raise TypeError(f"not a net expression: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _domain_log(v):
    if v <= 0:
        raise NetDomainError(f"log of non-positive value {mpmath.nstr(v, 8)}")
    return mpmath.log(v)


def _domain_div(a, b):
    if b == 0:
        raise NetDomainError("division by zero")
    return a / b


def _domain_pow(base, exponent, exponent_is_const: bool, integer_exponent: bool):
    if integer_exponent:
        if base == 0 and exponent < 0:
            raise NetDomainError("zero raised to a negative power")
        return mpmath.power(base, int(exponent))
    if base < 0:
        raise NetDomainError("non-integer power of a negative base")
    if base == 0:
        if exponent <= 0:
            raise NetDomainError("zero raised to a non-positive power")
        return mpmath.mpf(0)
    return mpmath.power(base, exponent)


_UNARY_IMPL = {
    "neg": lambda v: -v,
    "abs": abs,
    "exp": mpmath.exp,
    "log": _domain_log,
    "floor": mpmath.floor,
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "erf": mpmath.erf,
}

_BINARY_IMPL = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _domain_div,
    "min": min,
    "max": max,
}


@lru_cache(maxsize=4096)
def _compile(e: NetExpr) -> Callable[[Dict[str, object]], object]:
    """Turn a tree into nested closures over mpmath; precision is taken from the active context"""
    if isinstance(e, Const):
        q = e.value
        return lambda env: to_mpf(q)
    if isinstance(e, Var):
        name = e.name

        def lookup(env):
            try:
                return env[name]
            except KeyError:
                raise NetDomainError(f"unbound variable '{name}'")
        return lookup
    if isinstance(e, NamedConst):
        return lambda env: +mpmath.pi
    if isinstance(e, Unary):
        arg = _compile(e.arg)
        impl = _UNARY_IMPL[e.op]
        return lambda env: impl(arg(env))
    if isinstance(e, Binary):
        left = _compile(e.left)
        right = _compile(e.right)
        impl = _BINARY_IMPL[e.op]
        return lambda env: impl(left(env), right(env))
    if isinstance(e, Pow):
        base = _compile(e.base)
        if isinstance(e.exponent, Const):
            q = e.exponent.value
            integer = q.denominator == 1
            return lambda env: _domain_pow(base(env), to_mpf(q), True, integer)
        exponent = _compile(e.exponent)
        return lambda env: _domain_pow(base(env), exponent(env), False, False)
    if isinstance(e, Compose):
        outer = _compile(e.outer)
        inner = _compile(e.inner)
        var = e.var

        def composed(env):
            inner_env = dict(env)
            inner_env[var] = inner(env)
            return outer(inner_env)
        return composed
    raise TypeError(f"not a net expression: {e!r}")


def evaluate(e: NetExpr, env: Mapping[str, object], precision: int = 50):
    """
    Evaluate an expression at a point with big-float arithmetic

    Args:
        e: Expression tree
        env: Variable bindings (ints, Fractions, strings or mpf)
        precision: Working precision in decimal digits

    Returns:
        mpmath.mpf value (exponent range is unbounded, exp(1/eps) never overflows)

    Raises:
        NetDomainError: log of non-positive, division by zero, non-finite results
    """
    with mpmath.workdps(precision):
        bound = {name: to_mpf(value) for name, value in env.items()}
        try:
            value = _compile(e)(bound)
        except (ValueError, ZeroDivisionError) as exc:
            raise NetDomainError(str(exc))
        if not mpmath.isfinite(value):
            raise NetDomainError(f"non-finite value for {print_expr(e)}")
        return +value


def _iv_value(value):
    iv = mpmath.iv
    if isinstance(value, Fraction):
        return iv.mpf(value.numerator) / iv.mpf(value.denominator)
    if isinstance(value, int):
        return iv.mpf(value)
    return iv.mpf(value)


def _iv_positive(v) -> bool:
    return (v > 0) is True


def _iv_eval(e: NetExpr, env: Mapping[str, object]):
    iv = mpmath.iv
    if isinstance(e, Const):
        return _iv_value(e.value)
    if isinstance(e, Var):
        if e.name not in env:
            raise NetDomainError(f"unbound variable '{e.name}'")
        return env[e.name]
    if isinstance(e, NamedConst):
        return iv.pi
    if isinstance(e, Unary):
        v = _iv_eval(e.arg, env)
        if e.op == "neg":
            return -v
        if e.op == "abs":
            return abs(v)
        if e.op == "exp":
            return iv.exp(v)
        if e.op == "log":
            if not _iv_positive(v):
                raise NetDomainError("log of an interval that is not strictly positive")
            return iv.log(v)
        if e.op == "sin":
            return iv.sin(v)
        if e.op == "cos":
            return iv.cos(v)
        raise NetDomainError(f"no interval enclosure for {e.op}")
    if isinstance(e, Binary):
        a = _iv_eval(e.left, env)
        b = _iv_eval(e.right, env)
        if e.op == "add":
            return a + b
        if e.op == "sub":
            return a - b
        if e.op == "mul":
            return a * b
        if e.op == "div":
            if not (_iv_positive(b) or (b < 0) is True):
                raise NetDomainError("division by an interval containing zero")
            return a / b
        raise NetDomainError(f"no interval enclosure for {e.op}")
    if isinstance(e, Pow):
        base = _iv_eval(e.base, env)
        if isinstance(e.exponent, Const) and e.exponent.value.denominator == 1:
            return base ** int(e.exponent.value)
        if not _iv_positive(base):
            raise NetDomainError("non-integer power of an interval that is not strictly positive")
        return iv.exp(_iv_eval(e.exponent, env) * iv.log(base))
    if isinstance(e, Compose):
        inner_env = dict(env)
        inner_env[e.var] = _iv_eval(e.inner, env)
        return _iv_eval(e.outer, inner_env)
    raise TypeError(f"not a net expression: {e!r}")


def evaluate_interval(e: NetExpr, env: Mapping[str, object], precision: int = 50):
    """
    Rigorous enclosure of the value with outward-rounded interval arithmetic

    Returns:
        mpmath.iv.mpf interval; compare with `(a < b) is True` for a certified inequality
    """
    iv = mpmath.iv
    saved = iv.prec
    iv.dps = precision
    try:
        bound = {name: _iv_value(value) for name, value in env.items()}
        return _iv_eval(e, bound)
    finally:
        iv.prec = saved


def eval_net(e: NetExpr, eps, precision: int = 50):
    """Evaluate a net (an expression in eps only) at eps in (0, 1]"""
    with mpmath.workdps(precision):
        point = to_mpf(eps)
        if not (0 < point <= 1):
            raise NetDomainError(f"eps={mpmath.nstr(point, 8)} is outside (0, 1]")
    return evaluate(e, {"eps": eps}, precision)


# ---------------------------------------------------------------------------
# Simplification, substitution, differentiation
# ---------------------------------------------------------------------------

def _exact_root(n: int, k: int) -> Optional[int]:
    """Integer k-th root of n >= 0 if exact"""
    if n < 0:
        return None
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x if x ** k == n else None


def rational_power(q: Fraction, r: Fraction) -> Optional[Fraction]:
    """q ** r when the result is rational, else None"""
    if r.denominator == 1:
        if q == 0 and r < 0:
            return None
        return q ** int(r)
    if q < 0:
        return None
    if q == 0:
        return Fraction(0) if r > 0 else None
    num = _exact_root(q.numerator, r.denominator)
    den = _exact_root(q.denominator, r.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** r.numerator


def _fold_binary(op: str, a: Fraction, b: Fraction) -> Optional[Fraction]:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b if b != 0 else None
    if op == "min":
        return min(a, b)
    return max(a, b)


def _is_const(e: NetExpr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


@lru_cache(maxsize=8192)
def simplify(e: NetExpr) -> NetExpr:
    """
    Local clean-up: constant folding, neutral and absorbing elements, double
    negation. Not a general simplifier; the result evaluates like the input
    wherever the input is defined.
    """
    if isinstance(e, (Const, Var, NamedConst)):
        return e
    if isinstance(e, Compose):
        return simplify(substitute_vars(e.outer, {e.var: e.inner}))
    if isinstance(e, Unary):
        arg = simplify(e.arg)
        if e.op == "neg":
            if isinstance(arg, Const):
                return Const(-arg.value)
            if isinstance(arg, Unary) and arg.op == "neg":
                return arg.arg
        elif e.op == "abs" and isinstance(arg, Const):
            return Const(abs(arg.value))
        elif e.op == "floor" and isinstance(arg, Const):
            return Const(Fraction(arg.value.numerator // arg.value.denominator))
        elif e.op == "exp" and _is_const(arg, 0):
            return ONE
        elif e.op == "log" and _is_const(arg, 1):
            return ZERO
        elif e.op in ("sin", "erf") and _is_const(arg, 0):
            return ZERO
        elif e.op == "cos" and _is_const(arg, 0):
            return ONE
        return Unary(e.op, arg)
    if isinstance(e, Binary):
        left = simplify(e.left)
        right = simplify(e.right)
        op = e.op
        if isinstance(left, Const) and isinstance(right, Const):
            folded = _fold_binary(op, left.value, right.value)
            if folded is not None:
                return Const(folded)
        if op == "add":
            if _is_const(left, 0):
                return right
            if _is_const(right, 0):
                return left
        elif op == "sub":
            if _is_const(right, 0):
                return left
            if _is_const(left, 0):
                return simplify(Unary("neg", right))
            if left == right:
                return ZERO
            # u - (u + w), u - (w + u), (u + w) - u, (w + u) - u
            if isinstance(right, Binary) and right.op == "add" and left in (right.left, right.right):
                rest = right.right if right.left == left else right.left
                return simplify(Unary("neg", rest))
            if isinstance(left, Binary) and left.op == "add" and right in (left.left, left.right):
                return left.right if left.left == right else left.left
        elif op == "mul":
            if _is_const(left, 0) or _is_const(right, 0):
                return ZERO
            if _is_const(left, 1):
                return right
            if _is_const(right, 1):
                return left
            if _is_const(left, -1):
                return simplify(Unary("neg", right))
            if _is_const(right, -1):
                return simplify(Unary("neg", left))
        elif op == "div":
            if _is_const(right, 1):
                return left
            if _is_const(left, 0) and not _is_const(right, 0):
                return ZERO
        return Binary(op, left, right)
    if isinstance(e, Pow):
        base = simplify(e.base)
        exponent = simplify(e.exponent)
        if _is_const(exponent, 1):
            return base
        if _is_const(exponent, 0):
            return ONE
        if isinstance(base, Const) and isinstance(exponent, Const):
            folded = rational_power(base.value, exponent.value)
            if folded is not None:
                return Const(folded)
        return Pow(base, exponent)
    raise TypeError(f"not a net expression: {e!r}")


def substitute_vars(e: NetExpr, mapping: Mapping[str, NetExpr]) -> NetExpr:
    """Simultaneous replacement of variables (no simplification)"""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, (Const, NamedConst)):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, substitute_vars(e.arg, mapping))
    if isinstance(e, Binary):
        return Binary(e.op, substitute_vars(e.left, mapping), substitute_vars(e.right, mapping))
    if isinstance(e, Pow):
        return Pow(substitute_vars(e.base, mapping), substitute_vars(e.exponent, mapping))
    if isinstance(e, Compose):
        inner = substitute_vars(e.inner, mapping)
        outer_mapping = {k: v for k, v in mapping.items() if k != e.var}
        return Compose(substitute_vars(e.outer, outer_mapping), inner, e.var)
    raise TypeError(f"not a net expression: {e!r}")


def eliminate_compose(e: NetExpr) -> NetExpr:
    """Replace every Compose node by the substituted tree"""
    if isinstance(e, Compose):
        outer = eliminate_compose(e.outer)
        inner = eliminate_compose(e.inner)
        return substitute_vars(outer, {e.var: inner})
    if isinstance(e, Unary):
        return Unary(e.op, eliminate_compose(e.arg))
    if isinstance(e, Binary):
        return Binary(e.op, eliminate_compose(e.left), eliminate_compose(e.right))
    if isinstance(e, Pow):
        return Pow(eliminate_compose(e.base), eliminate_compose(e.exponent))
    return e


def normalize(e: NetExpr) -> NetExpr:
    """
    Compose-free form of e. Nets in the growth fragment are rebuilt from their
    monomial normal form, which is unique; otherwise the largest in-fragment
    subtrees are rebuilt and the rest is simplified.
    """
    return simplify(_canonical_subtrees(simplify(eliminate_compose(e))))


def _canonical_subtrees(e: NetExpr) -> NetExpr:
    if isinstance(e, (Const, Var, NamedConst)):
        return e
    if free_vars(e) <= {"eps"}:
        form = fragment_form(e)
        if form is not None:
            return form.to_expr()
    if isinstance(e, Unary):
        return Unary(e.op, _canonical_subtrees(e.arg))
    if isinstance(e, Binary):
        return Binary(e.op, _canonical_subtrees(e.left), _canonical_subtrees(e.right))
    if isinstance(e, Pow):
        return Pow(_canonical_subtrees(e.base), _canonical_subtrees(e.exponent))
    return e


def substitute(e: NetExpr, f: NetExpr, var: str = "eps") -> NetExpr:
    """
    Compose a net with an index map: the result evaluates as e(f(eps))

    Args:
        e: Outer net
        f: Inner map (the underlying map of a morphism)
        var: Variable of e that is replaced

    Returns:
        Compose-normalized tree
    """
    if f == Var(var):
        return e
    return normalize(substitute_vars(e, {var: f}))


def differentiate(e: NetExpr, var: str = "x") -> NetExpr:
    """
    Symbolic derivative with respect to `var`, simplified

    Raises:
        NotDifferentiableError: For min/max/floor nodes depending on var
    """
    return simplify(_derive(eliminate_compose(e), var))


def _derive(e: NetExpr, var: str) -> NetExpr:
    if not depends_on(e, var):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Unary):
        u = e.arg
        du = _derive(u, var)
        if e.op == "neg":
            return Unary("neg", du)
        if e.op == "exp":
            return Binary("mul", e, du)
        if e.op == "log":
            return Binary("div", du, u)
        if e.op == "sin":
            return Binary("mul", Unary("cos", u), du)
        if e.op == "cos":
            return Unary("neg", Binary("mul", Unary("sin", u), du))
        if e.op == "erf":
            weight = Binary("mul", Const(2), Pow(PI, Const(Fraction(-1, 2))))
            gauss = Unary("exp", Unary("neg", Pow(u, Const(2))))
            return Binary("mul", Binary("mul", weight, gauss), du)
        if e.op == "abs":
            return Binary("div", Binary("mul", u, du), e)
        raise NotDifferentiableError(f"{e.op} has no symbolic derivative")
    if isinstance(e, Binary):
        u, v = e.left, e.right
        if e.op in ("add", "sub"):
            return Binary(e.op, _derive(u, var), _derive(v, var))
        if e.op == "mul":
            return Binary("add", Binary("mul", _derive(u, var), v), Binary("mul", u, _derive(v, var)))
        if e.op == "div":
            if not depends_on(v, var):
                return Binary("div", _derive(u, var), v)
            numerator = Binary("sub", Binary("mul", _derive(u, var), v), Binary("mul", u, _derive(v, var)))
            return Binary("div", numerator, Pow(v, Const(2)))
        raise NotDifferentiableError(f"{e.op} has no symbolic derivative")
    if isinstance(e, Pow):
        u, w = e.base, e.exponent
        if isinstance(w, Const):
            return Binary("mul", Binary("mul", w, Pow(u, Const(w.value - 1))), _derive(u, var))
        # d(u^w) = u^w * (w' log u + w u'/u)
        term1 = Binary("mul", _derive(w, var), Unary("log", u))
        term2 = Binary("div", Binary("mul", w, _derive(u, var)), u)
        return Binary("mul", e, Binary("add", term1, term2))
    raise TypeError(f"not a net expression: {e!r}")


def derivative(e: NetExpr, var: str = "x", order: int = 1) -> NetExpr:
    result = e
    for _ in range(order):
        result = differentiate(result, var)
    return result


# ---------------------------------------------------------------------------
# Growth fragment: sums of C * eps^a * L^b * exp(c/eps), L = -log eps
# ---------------------------------------------------------------------------

MonomialKey = Tuple[Fraction, Fraction, Fraction]   # (a, b, c)

_MAX_TERMS = 64
_MAX_EXPANSION_POWER = 8


def order_key(key: MonomialKey) -> Tuple[Fraction, Fraction, Fraction]:
    """Growth order of eps^a L^b exp(c/eps) as eps -> 0+: compare (c, -a, b)"""
    a, b, c = key
    return (c, -a, b)


@dataclass(frozen=True)
class FragmentForm:
    """Finite sum of monomials with exact rational coefficients"""
    terms: Tuple[Tuple[MonomialKey, Fraction], ...] = ()

    @staticmethod
    def from_dict(d: Mapping[MonomialKey, Fraction]) -> Optional["FragmentForm"]:
        items = [(k, q) for k, q in d.items() if q != 0]
        if len(items) > _MAX_TERMS:
            return None
        items.sort(key=lambda item: order_key(item[0]), reverse=True)
        return FragmentForm(tuple(items))

    @staticmethod
    def monomial(q: Fraction, a=0, b=0, c=0) -> "FragmentForm":
        return FragmentForm.from_dict({(Fraction(a), Fraction(b), Fraction(c)): Fraction(q)})

    def as_dict(self) -> Dict[MonomialKey, Fraction]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_single(self) -> bool:
        return len(self.terms) == 1

    def dominant(self) -> Optional[Tuple[MonomialKey, Fraction]]:
        return self.terms[0] if self.terms else None

    def add(self, other: "FragmentForm", sign: int = 1) -> Optional["FragmentForm"]:
        d = self.as_dict()
        for k, q in other.terms:
            d[k] = d.get(k, Fraction(0)) + sign * q
        return FragmentForm.from_dict(d)

    def mul(self, other: "FragmentForm") -> Optional["FragmentForm"]:
        d: Dict[MonomialKey, Fraction] = {}
        for (a1, b1, c1), q1 in self.terms:
            for (a2, b2, c2), q2 in other.terms:
                k = (a1 + a2, b1 + b2, c1 + c2)
                d[k] = d.get(k, Fraction(0)) + q1 * q2
        return FragmentForm.from_dict(d)

    def scale(self, s: Fraction) -> "FragmentForm":
        return FragmentForm.from_dict({k: q * s for k, q in self.terms})

    def to_expr(self) -> NetExpr:
        """Canonical tree, dominant monomial first"""
        if not self.terms:
            return ZERO
        result = None
        for key, q in self.terms:
            if result is None:
                result = _monomial_expr(q, key)
            elif q > 0:
                result = Binary("add", result, _monomial_expr(q, key))
            else:
                result = Binary("sub", result, _monomial_expr(-q, key))
        return result


def _monomial_expr(q: Fraction, key: MonomialKey) -> NetExpr:
    a, b, c = key
    factors: List[NetExpr] = []
    if a != 0:
        factors.append(EPS if a == 1 else Pow(EPS, Const(a)))
    if b != 0:
        factors.append(minus_log_eps() if b == 1 else Pow(minus_log_eps(), Const(b)))
    if c != 0:
        factors.append(Unary("exp", Binary("div", Const(c), EPS)))
    if not factors:
        return Const(q)
    core = factors[0]
    for factor in factors[1:]:
        core = Binary("mul", core, factor)
    if q == 1:
        return core
    if q == -1:
        return Unary("neg", core)
    return Binary("mul", Const(q), core)


@lru_cache(maxsize=8192)
def fragment_form(e: NetExpr) -> Optional[FragmentForm]:
    """Monomial normal form of a net in eps, or None when out of the fragment"""
    if isinstance(e, Const):
        return FragmentForm.monomial(e.value) if e.value != 0 else FragmentForm()
    if isinstance(e, Var):
        return FragmentForm.monomial(1, a=1) if e.name == "eps" else None
    if isinstance(e, NamedConst):
        return None
    if isinstance(e, Compose):
        return fragment_form(eliminate_compose(e))
    if isinstance(e, Unary):
        inner = fragment_form(e.arg)
        if inner is None:
            return None
        if e.op == "neg":
            return inner.scale(Fraction(-1))
        if e.op == "abs":
            if inner.is_zero:
                return inner
            if inner.is_single:
                key, q = inner.terms[0]
                return FragmentForm.from_dict({key: abs(q)})
            return None
        if e.op == "exp":
            return _fragment_exp(inner)
        if e.op == "log":
            return _fragment_log(inner)
        return None
    if isinstance(e, Binary):
        left = fragment_form(e.left)
        if left is None:
            return None
        right = fragment_form(e.right)
        if right is None:
            return None
        if e.op == "add":
            return left.add(right)
        if e.op == "sub":
            return left.add(right, sign=-1)
        if e.op == "mul":
            return left.mul(right)
        if e.op == "div":
            inverse = _fragment_inverse(right)
            return left.mul(inverse) if inverse is not None else None
        return None
    if isinstance(e, Pow):
        if not isinstance(e.exponent, Const):
            return None
        base = fragment_form(e.base)
        if base is None:
            return None
        return _fragment_pow(base, e.exponent.value)
    return None


def _fragment_inverse(form: FragmentForm) -> Optional[FragmentForm]:
    if not form.is_single:
        return None
    (a, b, c), q = form.terms[0]
    return FragmentForm.monomial(1 / q, -a, -b, -c)


def _fragment_pow(base: FragmentForm, r: Fraction) -> Optional[FragmentForm]:
    if base.is_zero:
        return FragmentForm() if r > 0 else None
    if base.is_single:
        (a, b, c), q = base.terms[0]
        coefficient = rational_power(q, r)
        if coefficient is None:
            return None
        return FragmentForm.monomial(coefficient, a * r, b * r, c * r)
    if r.denominator == 1 and 0 <= r <= _MAX_EXPANSION_POWER:
        result = FragmentForm.monomial(1)
        for _ in range(int(r)):
            result = result.mul(base)
            if result is None:
                return None
        return result
    return None


def _fragment_exp(arg: FragmentForm) -> Optional[FragmentForm]:
    # exp(q/eps) raises c by q; exp(q*L) = eps^(-q)
    a_total = Fraction(0)
    c_total = Fraction(0)
    for (a, b, c), q in arg.terms:
        if (a, b, c) == (-1, 0, 0):
            c_total += q
        elif (a, b, c) == (0, 1, 0):
            a_total -= q
        else:
            return None
    return FragmentForm.monomial(1, a_total, 0, c_total)


def _fragment_log(arg: FragmentForm) -> Optional[FragmentForm]:
    # log(eps^a exp(c/eps)) = -a L + c/eps; coefficients other than 1 and log factors leave the fragment
    if not arg.is_single:
        return None
    (a, b, c), q = arg.terms[0]
    if q != 1 or b != 0:
        return None
    return FragmentForm.from_dict({(Fraction(0), Fraction(1), Fraction(0)): -a,
                                   (Fraction(-1), Fraction(0), Fraction(0)): c})


@dataclass(frozen=True)
class GrowthKey:
    """
    Dominant monomial of a net, compared by (c, -a, b).

    An OutOfFragment key carries no triple; a zero net has an empty monomial
    list and sorts below every other key.
    """
    in_fragment: bool
    c: Optional[Fraction] = None
    a: Optional[Fraction] = None
    b: Optional[Fraction] = None
    coefficient: Optional[Fraction] = None
    monomials: Tuple[Tuple[MonomialKey, Fraction], ...] = field(default=())

    @property
    def is_zero(self) -> bool:
        return self.in_fragment and not self.monomials

    def as_tuple(self) -> Optional[Tuple[Fraction, Fraction, Fraction]]:
        """(c, -a, b); larger means faster growth as eps -> 0+"""
        if not self.in_fragment or self.is_zero:
            return None
        return (self.c, -self.a, self.b)

    def compare(self, other: "GrowthKey") -> int:
        if not (self.in_fragment and other.in_fragment):
            raise ValueError("only in-fragment keys are ordered")
        if self.is_zero or other.is_zero:
            return (not self.is_zero) - (not other.is_zero)
        mine, theirs = self.as_tuple(), other.as_tuple()
        return (mine > theirs) - (mine < theirs)

    def __lt__(self, other: "GrowthKey") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "GrowthKey") -> bool:
        return self.compare(other) <= 0

    def describe(self) -> str:
        if not self.in_fragment:
            return "OutOfFragment"
        if self.is_zero:
            return "zero"
        c, minus_a, b = self.as_tuple()
        return f"({_format_fraction(c)}, {_format_fraction(minus_a)}, {_format_fraction(b)})"


OUT_OF_FRAGMENT = GrowthKey(in_fragment=False)


def growth_key(e: NetExpr) -> GrowthKey:
    """Exact dominance invariant of a net in eps"""
    form = fragment_form(e) if free_vars(e) <= {"eps"} else None
    if form is None:
        return OUT_OF_FRAGMENT
    if form.is_zero:
        return GrowthKey(in_fragment=True)
    (a, b, c), q = form.dominant()
    return GrowthKey(True, c, a, b, q, form.terms)


def compare_forms(x: FragmentForm, y: FragmentForm) -> int:
    """Compare full monomial lists lexicographically by order key and |coefficient|"""
    for (kx, qx), (ky, qy) in zip(x.terms, y.terms):
        ox, oy = order_key(kx), order_key(ky)
        if ox != oy:
            return 1 if ox > oy else -1
        if abs(qx) != abs(qy):
            return 1 if abs(qx) > abs(qy) else -1
    return (len(x.terms) > len(y.terms)) - (len(x.terms) < len(y.terms))
