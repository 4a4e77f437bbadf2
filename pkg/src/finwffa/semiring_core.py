"""Exact extended reals, the arctic and tropical finance semirings, and expressions.

Values are exact rationals plus the two infinities.  Expressions are immutable
trees evaluated against a single market datum ``d``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union


class CarrierError(ValueError):
    """A value lies outside the carrier of the semiring in use."""


class DomainError(ValueError):
    """A market datum lies outside the data domain of the semiring in use."""


class UnsupportedError(ValueError):
    """The operation is not defined for the requested semiring."""


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.text = text


# ---------------------------------------------------------------------------
# ExtReal
# ---------------------------------------------------------------------------

class Tag(enum.IntEnum):
    NEG_INF = -1
    FINITE = 0
    POS_INF = 1


Number = Union[int, Fraction, str, "ExtReal"]


class ExtReal:
    """Exact rational extended with -inf and +inf.

    Ordering is total: ``-inf < finite < +inf``.  Finite values are stored as
    reduced :class:`fractions.Fraction` instances.
    """

    __slots__ = ("tag", "value")

    def __init__(self, value: Number | float):
        if isinstance(value, ExtReal):
            self.tag, self.value = value.tag, value.value
            return
        if isinstance(value, str):
            txt = value.strip()
            low = txt.lower()
            if low in ("-inf", "-infinity"):
                self.tag, self.value = Tag.NEG_INF, None
                return
            if low in ("+inf", "inf", "+infinity", "infinity"):
                self.tag, self.value = Tag.POS_INF, None
                return
            self.tag, self.value = Tag.FINITE, Fraction(txt)
            return
        if isinstance(value, float):
            if value == float("inf"):
                self.tag, self.value = Tag.POS_INF, None
                return
            if value == float("-inf"):
                self.tag, self.value = Tag.NEG_INF, None
                return
            if value != value:
                raise ValueError("NaN is not an extended real")
            self.tag, self.value = Tag.FINITE, Fraction(value)
            return
        self.tag, self.value = Tag.FINITE, Fraction(value)

    @classmethod
    def _make(cls, tag: Tag, value: Fraction | None) -> "ExtReal":
        obj = object.__new__(cls)
        obj.tag = tag
        obj.value = value
        return obj

    @property
    def is_finite(self) -> bool:
        return self.tag is Tag.FINITE

    def _key(self):
        return (int(self.tag), self.value if self.tag is Tag.FINITE else 0)

    def __eq__(self, other):
        if not isinstance(other, ExtReal):
            try:
                other = ExtReal(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.tag == other.tag and self.value == other.value

    def __hash__(self):
        return hash((int(self.tag), self.value))

    def __lt__(self, other: "ExtReal") -> bool:
        other = ext(other)
        return self._key() < other._key()

    def __le__(self, other: "ExtReal") -> bool:
        other = ext(other)
        return self._key() <= other._key()

    def __gt__(self, other: "ExtReal") -> bool:
        return ext(other).__lt__(self)

    def __ge__(self, other: "ExtReal") -> bool:
        return ext(other).__le__(self)

    def __neg__(self) -> "ExtReal":
        if self.tag is Tag.FINITE:
            return ExtReal._make(Tag.FINITE, -self.value)
        return POS_INF if self.tag is Tag.NEG_INF else NEG_INF

    def __add__(self, other: "ExtReal") -> "ExtReal":
        other = ext(other)
        if self.tag is Tag.FINITE and other.tag is Tag.FINITE:
            return ExtReal._make(Tag.FINITE, self.value + other.value)
        tags = {self.tag, other.tag}
        if Tag.NEG_INF in tags and Tag.POS_INF in tags:
            raise ArithmeticError("-inf + +inf is undefined")
        return NEG_INF if Tag.NEG_INF in tags else POS_INF

    __radd__ = __add__

    def __sub__(self, other: "ExtReal") -> "ExtReal":
        return self + (-ext(other))

    def scale(self, factor: Fraction) -> "ExtReal":
        """Multiply by a finite rational; infinities keep or flip sign, 0*inf raises."""
        if self.tag is Tag.FINITE:
            return ExtReal._make(Tag.FINITE, self.value * factor)
        if factor == 0:
            raise ArithmeticError("0 * inf is undefined")
        return self if factor > 0 else -self

    def __repr__(self):
        return f"ExtReal({format_number(self)!r})"

    def __str__(self):
        return format_number(self)


NEG_INF = ExtReal._make(Tag.NEG_INF, None)
POS_INF = ExtReal._make(Tag.POS_INF, None)
ZERO_R = ExtReal._make(Tag.FINITE, Fraction(0))


def ext(x: Number | float) -> ExtReal:
    return x if isinstance(x, ExtReal) else ExtReal(x)


def _is_terminating(q: Fraction) -> bool:
    den = q.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def format_number(x: ExtReal | Fraction | int, decimals: int | None = None) -> str:
    """Exact text form: integers, terminating decimals, else ``p/q``.

    With ``decimals`` the value is rounded for display only.
    """
    if isinstance(x, ExtReal):
        if x.tag is Tag.NEG_INF:
            return "-inf"
        if x.tag is Tag.POS_INF:
            return "+inf"
        q = x.value
    else:
        q = Fraction(x)
    if decimals is not None:
        scaled = round(q * 10 ** decimals)
        sign = "-" if scaled < 0 else ""
        digits = str(abs(scaled)).rjust(decimals + 1, "0")
        if decimals == 0:
            return sign + digits
        return f"{sign}{digits[:-decimals]}.{digits[-decimals:]}"
    if q.denominator == 1:
        return str(q.numerator)
    if _is_terminating(q):
        sign = "-" if q < 0 else ""
        a = abs(q)
        k = 0
        while (a * 10 ** k).denominator != 1:
            k += 1
        n = (a * 10 ** k).numerator
        digits = str(n).rjust(k + 1, "0")
        return f"{sign}{digits[:-k]}.{digits[-k:]}"
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Semirings
# ---------------------------------------------------------------------------

class Kind(enum.Enum):
    ARCTIC = "arctic"
    TROPICAL = "tropical"


class Domain(enum.Enum):
    NONNEG = "nonneg"
    REAL = "real"


class Binding(enum.Enum):
    TIMES_NONNEG = "times_nonneg"
    TIMES_REAL = "times_real"


@dataclass(frozen=True)
class SemiringSpec:
    """One of the supported finance semirings.

    The binding function is always multiplication ``d * s``; its variant is
    implied by the data domain.
    """

    kind: Kind = Kind.ARCTIC
    domain: Domain = Domain.NONNEG

    def __post_init__(self):
        if self.kind is Kind.TROPICAL and self.domain is not Domain.NONNEG:
            raise UnsupportedError("the tropical semiring is only offered over non-negative data")

    @property
    def binding(self) -> Binding:
        return Binding.TIMES_NONNEG if self.domain is Domain.NONNEG else Binding.TIMES_REAL

    @property
    def zero(self) -> ExtReal:
        return NEG_INF if self.kind is Kind.ARCTIC else POS_INF

    @property
    def one(self) -> ExtReal:
        return ZERO_R

    @property
    def is_arctic(self) -> bool:
        return self.kind is Kind.ARCTIC

    def name(self) -> str:
        return f"{self.kind.value}/{self.domain.value}"

    # carrier / domain checks -------------------------------------------------
    def check(self, a: Number) -> ExtReal:
        a = ext(a)
        forbidden = POS_INF if self.kind is Kind.ARCTIC else NEG_INF
        if a == forbidden:
            raise CarrierError(f"{a} is not an element of the {self.kind.value} semiring")
        return a

    def check_data(self, d: Number) -> Fraction:
        if type(d) is Fraction:
            if self.domain is Domain.NONNEG and d < 0:
                raise DomainError(f"market data {format_number(d)} is negative")
            return d
        if isinstance(d, ExtReal):
            if not d.is_finite:
                raise DomainError(f"market data must be finite, got {d}")
            d = d.value
        d = Fraction(d)
        if self.domain is Domain.NONNEG and d < 0:
            raise DomainError(f"market data {format_number(d)} is negative")
        return d

    # operations (unchecked fast paths) -----------------------------------------
    def add(self, a: ExtReal, b: ExtReal) -> ExtReal:
        ta, tb = a.tag, b.tag
        if ta is tb:
            if ta is not Tag.FINITE:
                return a
            if self.kind is Kind.ARCTIC:
                return a if a.value >= b.value else b
            return a if a.value <= b.value else b
        if self.kind is Kind.ARCTIC:
            return a if ta > tb else b
        return a if ta < tb else b

    def mul(self, a: ExtReal, b: ExtReal) -> ExtReal:
        if a.tag is Tag.FINITE and b.tag is Tag.FINITE:
            return ExtReal._make(Tag.FINITE, a.value + b.value)
        return self.zero

    def bind(self, d: Fraction, s: ExtReal) -> ExtReal:
        if s.tag is Tag.FINITE:
            return ExtReal._make(Tag.FINITE, d * s.value)
        return s

    def sum(self, values: Iterable[ExtReal]) -> ExtReal:
        acc = self.zero
        for v in values:
            acc = self.add(acc, v)
        return acc

    def prod(self, values: Iterable[ExtReal]) -> ExtReal:
        acc = self.one
        for v in values:
            acc = self.mul(acc, v)
        return acc


ARCTIC = SemiringSpec(Kind.ARCTIC, Domain.NONNEG)
ARCTIC_REAL = SemiringSpec(Kind.ARCTIC, Domain.REAL)
TROPICAL = SemiringSpec(Kind.TROPICAL, Domain.NONNEG)


def sr_add(spec: SemiringSpec, a: Number, b: Number) -> ExtReal:
    return spec.add(spec.check(a), spec.check(b))


def sr_mul(spec: SemiringSpec, a: Number, b: Number) -> ExtReal:
    return spec.mul(spec.check(a), spec.check(b))


def bind(spec: SemiringSpec, d: Number, s: Number) -> ExtReal:
    return spec.bind(spec.check_data(d), spec.check(s))


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

class FExpr:
    """Base class of expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(FExpr):
    s: ExtReal

    def __post_init__(self):
        object.__setattr__(self, "s", ext(self.s))


@dataclass(frozen=True)
class Bind(FExpr):
    s: ExtReal

    def __post_init__(self):
        object.__setattr__(self, "s", ext(self.s))


@dataclass(frozen=True)
class Plus(FExpr):
    l: FExpr
    r: FExpr


@dataclass(frozen=True)
class Times(FExpr):
    l: FExpr
    r: FExpr


@dataclass(frozen=True)
class Eq(FExpr):
    l: FExpr
    r: FExpr


@dataclass(frozen=True)
class Neq(FExpr):
    l: FExpr
    r: FExpr


BINARY = (Plus, Times, Eq, Neq)
COMPARISONS = (Eq, Neq)


def eval_expr(spec: SemiringSpec, e: FExpr, d: Number) -> ExtReal:
    """Value of ``e`` at datum ``d``."""
    return _eval(spec, e, spec.check_data(d))


def _eval(spec: SemiringSpec, e: FExpr, d: Fraction) -> ExtReal:
    t = type(e)
    if t is Const:
        return e.s
    if t is Bind:
        return spec.bind(d, e.s)
    a = _eval(spec, e.l, d)
    b = _eval(spec, e.r, d)
    if t is Plus:
        return spec.add(a, b)
    if t is Times:
        return spec.mul(a, b)
    if t is Eq:
        return spec.one if a == b else spec.zero
    if t is Neq:
        return spec.zero if a == b else spec.one
    raise TypeError(f"not an expression: {e!r}")


def expr_size(e: FExpr) -> int:
    if isinstance(e, (Const, Bind)):
        return 1
    return expr_size(e.l) + expr_size(e.r) + 1


def expr_depth(e: FExpr) -> int:
    if isinstance(e, (Const, Bind)):
        return 0
    return 1 + max(expr_depth(e.l), expr_depth(e.r))


def constants_of(e: FExpr) -> list[ExtReal]:
    if isinstance(e, (Const, Bind)):
        return [e.s]
    return constants_of(e.l) + constants_of(e.r)


def check_expr(spec: SemiringSpec, e: FExpr) -> FExpr:
    """Raise :class:`CarrierError` if a leaf lies outside the carrier."""
    for s in constants_of(e):
        spec.check(s)
    return e


def plus_all(terms: Iterable[FExpr]) -> FExpr:
    """Left-associated sum of a non-empty sequence."""
    it = iter(terms)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("plus_all needs at least one term") from None
    for t in it:
        acc = Plus(acc, t)
    return acc


def times_all(terms: Iterable[FExpr]) -> FExpr:
    it = iter(terms)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("times_all needs at least one term") from None
    for t in it:
        acc = Times(acc, t)
    return acc


def summands(e: FExpr) -> list[FExpr]:
    """Flatten the top-level sum of ``e``; a non-sum yields ``[e]``."""
    if isinstance(e, Plus):
        return summands(e.l) + summands(e.r)
    return [e]


# -- derived guards ------------------------------------------------------------

class GuardKind(enum.Enum):
    LE = "le"
    LT = "lt"
    MIN = "min"


def le(e1: FExpr, e2: FExpr) -> FExpr:
    """Indicator of ``e1 <= e2`` under max-plus."""
    return Eq(Plus(e1, e2), e2)


def lt(e1: FExpr, e2: FExpr) -> FExpr:
    """Indicator of ``e1 < e2`` under max-plus."""
    return Neq(Plus(e1, e2), e1)


def min_of(e1: FExpr, e2: FExpr) -> FExpr:
    return Plus(Times(le(e1, e2), e1), Times(le(e2, e1), e2))


def build_guard(kind: GuardKind | str, e1: FExpr, e2: FExpr, spec: SemiringSpec = ARCTIC) -> FExpr:
    if not spec.is_arctic:
        raise UnsupportedError("derived guards rely on max as the sum")
    kind = GuardKind(kind)
    return {GuardKind.LE: le, GuardKind.LT: lt, GuardKind.MIN: min_of}[kind](e1, e2)


# -- classification ------------------------------------------------------------

class ExprClass(enum.Enum):
    CONSTANT = "Constant"
    PRIMITIVE = "Primitive"
    AFFINE = "Affine"
    BASIC_CONSTRAINT = "BasicConstraint"
    SIMPLE_CONSTRAINT = "SimpleConstraint"
    PLAIN_CONSTRAINT = "PlainConstraint"
    CONSTRAINT = "Constraint"
    MONOMIAL = "Monomial"
    GENERAL = "General"


def is_constant(e: FExpr) -> bool:
    return isinstance(e, Const)


def is_primitive(e: FExpr) -> bool:
    return isinstance(e, (Const, Bind))


def is_affine(e: FExpr) -> bool:
    if is_primitive(e):
        return True
    return isinstance(e, Times) and isinstance(e.l, Bind) and isinstance(e.r, Const)


def is_plain_constraint(e: FExpr) -> bool:
    return isinstance(e, COMPARISONS)


def is_constraint(e: FExpr) -> bool:
    if isinstance(e, Times):
        return is_constraint(e.l) and is_constraint(e.r)
    return is_plain_constraint(e)


def is_basic_constraint(e: FExpr) -> bool:
    """``(p1 + p2) ~ p3`` with primitive operands, or the degenerate ``p1 ~ p2``."""
    if not isinstance(e, COMPARISONS) or not is_primitive(e.r):
        return False
    if is_primitive(e.l):
        return True
    return isinstance(e.l, Plus) and is_primitive(e.l.l) and is_primitive(e.l.r)


def is_simple_constraint(e: FExpr) -> bool:
    if is_basic_constraint(e):
        return True
    return isinstance(e, Times) and is_basic_constraint(e.l) and is_basic_constraint(e.r)


def is_monomial(e: FExpr) -> bool:
    return isinstance(e, Times) and is_simple_constraint(e.l) and is_affine(e.r)


def classify_expr(e: FExpr) -> ExprClass:
    """Most specific class of ``e``."""
    if is_constant(e):
        return ExprClass.CONSTANT
    if is_primitive(e):
        return ExprClass.PRIMITIVE
    if is_affine(e):
        return ExprClass.AFFINE
    if is_basic_constraint(e):
        return ExprClass.BASIC_CONSTRAINT
    if is_simple_constraint(e):
        return ExprClass.SIMPLE_CONSTRAINT
    if is_plain_constraint(e):
        return ExprClass.PLAIN_CONSTRAINT
    if is_constraint(e):
        return ExprClass.CONSTRAINT
    if is_monomial(e):
        return ExprClass.MONOMIAL
    return ExprClass.GENERAL


# chain used for bounding the weights of a whole automaton or regex
WEIGHT_CHAIN = (ExprClass.CONSTANT, ExprClass.PRIMITIVE, ExprClass.AFFINE,
                ExprClass.MONOMIAL, ExprClass.GENERAL)

_CHAIN_TEST = {
    ExprClass.CONSTANT: is_constant,
    ExprClass.PRIMITIVE: is_primitive,
    ExprClass.AFFINE: is_affine,
    ExprClass.MONOMIAL: lambda e: is_affine(e) or is_monomial(e),
    ExprClass.GENERAL: lambda e: True,
}


def weight_class_bound(exprs: Iterable[FExpr]) -> ExprClass:
    """Smallest class of the chain Constant < Primitive < Affine < Monomial < General
    containing every expression."""
    exprs = list(exprs)
    for cls in WEIGHT_CHAIN:
        if all(_CHAIN_TEST[cls](e) for e in exprs):
            return cls
    return ExprClass.GENERAL


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>[-+]inf\b|[-+]?(?:\d+/\d+|\d+(?:\.\d+)?))
  | (?P<op><<|>>|!=|[|&=()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), pos))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


def parse_number(token: str) -> ExtReal:
    return ExtReal(token)


class _ExprParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None, kind: str | None = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ExprSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2], self.text)
        if kind is not None and tok[0] != kind:
            raise ExprSyntaxError(f"expected a number, found {tok[1] or 'end of input'!r}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self) -> FExpr:
        e = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return e

    def sum(self) -> FExpr:
        e = self.prod()
        while self.peek()[1] == "|":
            self.take()
            e = Plus(e, self.prod())
        return e

    def prod(self) -> FExpr:
        e = self.cmp()
        while self.peek()[1] == "&":
            self.take()
            e = Times(e, self.cmp())
        return e

    def cmp(self) -> FExpr:
        e = self.primary()
        tok = self.peek()
        if tok[1] in ("=", "!="):
            self.take()
            r = self.primary()
            e = Eq(e, r) if tok[1] == "=" else Neq(e, r)
            nxt = self.peek()
            if nxt[1] in ("=", "!="):
                raise ExprSyntaxError("comparisons do not chain; add parentheses", nxt[2], self.text)
        return e

    def primary(self) -> FExpr:
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return Const(parse_number(tok[1]))
        if tok[1] == "<<":
            self.take()
            num = self.take(kind="num")
            self.take(">>")
            return Bind(parse_number(num[1]))
        if tok[1] == "(":
            self.take()
            e = self.sum()
            self.take(")")
            return e
        raise ExprSyntaxError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], self.text)


def parse_expr(text: str) -> FExpr:
    return _ExprParser(text).parse()


_PREC = {Plus: 1, Times: 2, Eq: 3, Neq: 3}


def print_expr(e: FExpr) -> str:
    if isinstance(e, Const):
        return format_number(e.s)
    if isinstance(e, Bind):
        return f"<<{format_number(e.s)}>>"
    p = _PREC[type(e)]
    if p == 3:
        # comparison operands are primaries
        left = _wrap(e.l, True)
        right = _wrap(e.r, True)
        op = "=" if isinstance(e, Eq) else "!="
        return f"{left} {op} {right}"
    left = _wrap(e.l, _prec_of(e.l) < p)
    right = _wrap(e.r, _prec_of(e.r) <= p)
    op = "|" if isinstance(e, Plus) else "&"
    return f"{left} {op} {right}"


def _prec_of(e: FExpr) -> int:
    return _PREC.get(type(e), 4)


def _wrap(e: FExpr, paren: bool) -> str:
    txt = print_expr(e)
    if paren and not isinstance(e, (Const, Bind)):
        return f"({txt})"
    return txt
