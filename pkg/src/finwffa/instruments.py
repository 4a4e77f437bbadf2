"""Automata for common financial instruments, scenario files and duration.

Discount factors and cash flows live in the data of a finance word, so none
of the builders embeds an interest-rate model.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .automaton import Wffa, behavior, make_word, op_hadamard
from .regex import Cauchy, EpsAtom, LetterAtom, Regex, Star, Sum
from .semiring_core import (ARCTIC, Bind, Const, DomainError, ExtReal, SemiringSpec, Times, ext,
                            le, lt)

BOT = "bot"
PRICE = Bind(ExtReal(1))


class Position(enum.Enum):
    LONG = "long"
    SHORT = "short"


def _num(x) -> Fraction:
    v = ext(x)
    if not v.is_finite:
        raise ValueError(f"parameter must be finite, got {v}")
    return v.value


def _nonneg(name: str, x) -> Fraction:
    v = _num(x)
    if v < 0:
        raise ValueError(f"{name} must be non-negative, got {v}")
    return v


# ---------------------------------------------------------------------------
# Parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BondParams:
    coupon: Fraction
    face: Fraction
    price: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coupon", _nonneg("coupon", self.coupon))
        object.__setattr__(self, "face", _nonneg("face", self.face))
        object.__setattr__(self, "price", _nonneg("price", self.price))


@dataclass(frozen=True)
class CallParams:
    premium: Fraction
    strike: Fraction

    def __post_init__(self):
        object.__setattr__(self, "premium", _num(self.premium))
        object.__setattr__(self, "strike", _nonneg("strike", self.strike))


@dataclass(frozen=True)
class LimitOrderParams:
    limit: Fraction = Fraction(50)
    qty: Fraction = Fraction(10)

    def __post_init__(self):
        object.__setattr__(self, "limit", _nonneg("limit", self.limit))
        object.__setattr__(self, "qty", _nonneg("qty", self.qty))


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_bond(coupon, face, price=0) -> Wffa:
    """Coupon bond paying ``coupon`` per period and ``coupon + face`` at maturity, bought at ``price``.

    Data of each letter is the discount factor of that period.
    """
    p = BondParams(coupon, face, price)
    return Wffa(ARCTIC, ("cpn", "fin", "dfl"), ("qc", "qf", "qd"),
                {"qc": -p.price}, {"qf": 0, "qd": 0},
                [("qc", "cpn", "qc", Bind(p.coupon)),
                 ("qc", "fin", "qf", Bind(p.coupon + p.face)),
                 ("qc", "dfl", "qd", Const(0))])


def build_ddm() -> Wffa:
    """Dividend discount model on already-discounted dividends and sale price."""
    return Wffa(ARCTIC, ("div", "sell"), ("qh", "qs"), {"qh": 0}, {"qs": 0},
                [("qh", "div", "qh", Bind(1)),
                 ("qh", "sell", "qs", Bind(1))])


def build_euro_call(position: Position | str, premium, strike) -> Wffa:
    """European call on a one-letter word carrying the price at maturity."""
    position = Position(position)
    p = CallParams(premium, strike)
    strike_c = Const(p.strike)
    if position is Position.LONG:
        return Wffa(ARCTIC, (BOT,), ("qs", "qe", "qd"), {"qs": -p.premium},
                    {"qe": -p.strike, "qd": 0},
                    [("qs", BOT, "qe", PRICE), ("qs", BOT, "qd", Const(0))])
    return Wffa(ARCTIC, (BOT,), ("qs", "qe", "qd"), {"qs": p.premium},
                {"qe": p.strike, "qd": 0},
                [("qs", BOT, "qe", Times(lt(strike_c, PRICE), Bind(-1))),
                 ("qs", BOT, "qd", Times(le(PRICE, strike_c), Const(0)))])


def build_american_call(premium, strike) -> Wffa:
    """American call that may be exercised at any observed price."""
    p = CallParams(premium, strike)
    return Wffa(ARCTIC, (BOT,), ("qw", "qe", "qd"), {"qw": -p.premium},
                {"qe": -p.strike, "qd": 0},
                [("qw", BOT, "qw", Const(0)),
                 ("qw", BOT, "qe", PRICE),
                 ("qw", BOT, "qd", Const(0)),
                 ("qe", BOT, "qe", Const(0))])


def build_limit_order(limit=50, qty=10) -> Wffa:
    """Buy limit order over symbols ``a`` (still active) and ``c`` (cancelled).

    The value is the acquisition cost at the first price at or below the
    limit, and the semiring zero when the order never executes.
    """
    p = LimitOrderParams(limit, qty)
    lim = Const(p.limit)
    return Wffa(ARCTIC, ("a", "c"), ("qw", "qe", "qc"), {"qw": 0}, {"qe": 0},
                [("qw", "a", "qw", lt(lim, PRICE)),
                 ("qw", "a", "qe", Times(le(PRICE, lim), Bind(p.qty))),
                 ("qw", "c", "qc", Const(0)),
                 ("qe", "a", "qe", Const(0))])


def build_bull_spread(premium_low, strike_low, premium_high, strike_high) -> Wffa:
    """Long call at the lower strike combined with a short call at the higher one."""
    if not _num(strike_low) < _num(strike_high):
        raise ValueError("bull spread needs strike_low < strike_high")
    return op_hadamard(build_euro_call(Position.LONG, premium_low, strike_low),
                       build_euro_call(Position.SHORT, premium_high, strike_high))


# ---------------------------------------------------------------------------
# Regular-expression counterparts
# ---------------------------------------------------------------------------

def bond_regex(coupon, face, price=0) -> Regex:
    p = BondParams(coupon, face, price)
    return Cauchy(Cauchy(EpsAtom(-p.price), Star(LetterAtom("cpn", Bind(p.coupon)))),
                  Sum(LetterAtom("fin", Bind(p.coupon + p.face)), LetterAtom("dfl", Const(0))))


def euro_call_long_regex(premium, strike) -> Regex:
    p = CallParams(premium, strike)
    exercised = Cauchy(LetterAtom(BOT, PRICE), EpsAtom(-p.strike))
    return Cauchy(EpsAtom(-p.premium), Sum(exercised, LetterAtom(BOT, Const(0))))


def american_call_regex(premium, strike) -> Regex:
    p = CallParams(premium, strike)
    wait = Star(LetterAtom(BOT, Const(0)))
    exercised = Cauchy(Cauchy(LetterAtom(BOT, PRICE), EpsAtom(-p.strike)), wait)
    return Cauchy(Cauchy(EpsAtom(-p.premium), wait), Sum(EpsAtom(0), exercised))


# ---------------------------------------------------------------------------
# Closed-form payoffs, used as independent references
# ---------------------------------------------------------------------------

def euro_call_payoff(position: Position | str, premium, strike, price) -> Fraction:
    premium, strike, price = _num(premium), _num(strike), _num(price)
    gain = max(price - strike, Fraction(0))
    return -premium + gain if Position(position) is Position.LONG else premium - gain


def american_call_payoff(premium, strike, prices: Sequence) -> Fraction:
    premium, strike = _num(premium), _num(strike)
    return -premium + max([Fraction(0)] + [_num(s) - strike for s in prices])


def bond_payoff(coupon, face, price, factors: Sequence, defaulted: bool = False) -> Fraction:
    """Default-free: all but the last factor carry a coupon and the last one ``coupon + face``.

    With ``defaulted`` the last letter is the default event and pays nothing.
    """
    coupon, face, price = _num(coupon), _num(face), _num(price)
    ds = [_num(d) for d in factors]
    if not ds:
        raise ValueError("a bond scenario has at least one period")
    head = sum((coupon * d for d in ds[:-1]), Fraction(0))
    return -price + head + (Fraction(0) if defaulted else (coupon + face) * ds[-1])


def bond_word(factors: Sequence, defaulted: bool = False):
    last = "dfl" if defaulted else "fin"
    syms = ["cpn"] * (len(factors) - 1) + [last]
    return make_word(zip(syms, factors))


def price_word(prices: Sequence, symbol: str = BOT):
    return make_word((symbol, s) for s in prices)


# ---------------------------------------------------------------------------
# Effective duration
# ---------------------------------------------------------------------------

def discount_factors(spots: Sequence, shift=0) -> list[Fraction]:
    """Exact ``(1 + s_i + shift) ** -i`` for ``i = 1..n``."""
    shift = _num(shift)
    out = []
    for i, s in enumerate(spots, start=1):
        base = 1 + _num(s) + shift
        if base <= 0:
            raise DomainError(f"1 + s_{i} + shift = {base} is not positive")
        out.append(1 / base ** i)
    return out


def effective_duration(bond: Wffa, spots: Sequence, delta, engine: str = "matrix") -> Fraction:
    """Central-difference sensitivity of the bond value to a parallel spot shift.

    ``bond`` should be priced at zero so that it returns the present value.
    """
    delta = _num(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not spots:
        raise ValueError("at least one spot rate is needed")

    def value(shift) -> Fraction:
        v = behavior(bond, bond_word(discount_factors(spots, shift)), engine)
        if not v.is_finite:
            raise DomainError(f"bond value is {v}")
        return v.value

    v0 = value(0)
    if v0 == 0:
        raise ZeroDivisionError("bond value is zero")
    return (value(-delta) - value(delta)) / (2 * v0 * delta)


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

class ScenarioSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class ScenarioSet:
    alphabet: tuple
    rows: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(zip(self.labels, self.rows))


_NUMBER = re.compile(r"^[-+]?(?:\d+/\d+|\d+(?:\.\d*)?|\.\d+)$")


def parse_scenarios(text: str, alphabet: Sequence[str] | None = None,
                    spec: SemiringSpec = ARCTIC) -> ScenarioSet:
    """Parse ``label, sym:value, ...`` rows.

    A blank line is the empty scenario and ``#`` starts a comment line.
    Structural problems raise :class:`ScenarioSyntaxError`; symbols outside
    the alphabet and data outside the domain raise :class:`DomainError`.
    """
    rows, labels, seen = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            rows.append(())
            labels.append("")
            continue
        fields = [f.strip() for f in line.split(",")]
        label, letters = fields[0], []
        if ":" in label:
            raise ScenarioSyntaxError("row must start with a label", lineno)
        for f in fields[1:]:
            sym, sep, val = f.partition(":")
            sym, val = sym.strip(), val.strip()
            if not sep or not sym or not _NUMBER.match(val):
                raise ScenarioSyntaxError(f"malformed letter {f!r}", lineno)
            if alphabet is not None and sym not in alphabet:
                raise DomainError(f"line {lineno}: symbol {sym!r} is not in the alphabet")
            try:
                d = spec.check_data(Fraction(val))
            except DomainError as exc:
                raise DomainError(f"line {lineno}: {exc}") from None
            letters.append((sym, d))
            seen.append(sym)
        rows.append(tuple(letters))
        labels.append(label)
    alpha = tuple(alphabet) if alphabet is not None else tuple(dict.fromkeys(seen))
    return ScenarioSet(alpha, rows, labels)


def load_scenarios(path, alphabet: Sequence[str] | None = None,
                   spec: SemiringSpec = ARCTIC) -> ScenarioSet:
    return parse_scenarios(Path(path).read_text(), alphabet, spec)


# ---------------------------------------------------------------------------
# Small fixtures
# ---------------------------------------------------------------------------

def max_of_two_automaton() -> Wffa:
    """Two-letter automaton whose value is the larger of the two prices."""
    return Wffa(ARCTIC, (BOT,), ("q0", "q1", "q2", "q3"), {"q0": 0}, {"q3": 0},
                [("q0", BOT, "q1", PRICE), ("q0", BOT, "q2", Const(0)),
                 ("q1", BOT, "q3", Const(0)), ("q2", BOT, "q3", PRICE)])


def parabola_envelope(N: int) -> Wffa:
    """``2N`` states whose value on one letter is ``max_{i <= N*N} (2 i d - i*i)``."""
    if N < 1:
        raise ValueError("N must be positive")
    left = [f"q{i}" for i in range(1, N + 1)]
    right = [f"q{N + j}" for j in range(1, N + 1)]
    trans = []
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            k = N * (i - 1) + j
            trans.append((left[i - 1], BOT, right[j - 1], Times(Bind(2 * k), Const(-k * k))))
    return Wffa(ARCTIC, (BOT,), left + right, {q: 0 for q in left}, {q: 0 for q in right}, trans)


def affine_loop() -> Wffa:
    """One state with loop weight ``d + 1``; the value is ``n + sum of data``."""
    return Wffa(ARCTIC, (BOT,), ("q",), {"q": 0}, {"q": 0},
                [("q", BOT, "q", Times(Bind(1), Const(1)))])


BUILDERS = {
    "bond": build_bond,
    "ddm": build_ddm,
    "euro_call": build_euro_call,
    "american_call": build_american_call,
    "limit_order": build_limit_order,
    "bull_spread": build_bull_spread,
}


__all__ = [
    "BOT", "Position", "BondParams", "CallParams", "LimitOrderParams",
    "build_bond", "build_ddm", "build_euro_call", "build_american_call", "build_limit_order",
    "build_bull_spread", "bond_regex", "euro_call_long_regex", "american_call_regex",
    "euro_call_payoff", "american_call_payoff", "bond_payoff", "bond_word", "price_word",
    "discount_factors", "effective_duration", "ScenarioSyntaxError", "ScenarioSet",
    "parse_scenarios", "load_scenarios", "max_of_two_automaton", "parabola_envelope",
    "affine_loop", "BUILDERS",
]
