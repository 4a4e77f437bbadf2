"""Weighted finance regular expressions.

Text syntax::

    eps[-95] . (cpn[<<5>>])* . (fin[<<105>>] | dfl[0])

``eps[s]`` is the empty-word atom with weight ``s``, ``sym[expr]`` reads one
letter and weighs it with ``expr``; ``|`` is the sum (lowest precedence),
``.`` concatenation, and postfix ``*`` the star.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import semiring_core as sc
from .automaton import (
    FinanceWord, Strategy, Wffa, epsilon_value as wffa_epsilon_value,
    op_cauchy, op_star, op_sum,
)
from .semiring_core import ExprClass, ExtReal, FExpr, SemiringSpec, ext


class RegexError(ValueError):
    pass


class RegexSyntaxError(RegexError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class Regex:
    __slots__ = ()


@dataclass(frozen=True, eq=True)
class EpsAtom(Regex):
    s: ExtReal

    def __post_init__(self):
        object.__setattr__(self, "s", ext(self.s))


@dataclass(frozen=True)
class LetterAtom(Regex):
    symbol: str
    e: FExpr


@dataclass(frozen=True)
class Sum(Regex):
    l: Regex
    r: Regex


@dataclass(frozen=True)
class Cauchy(Regex):
    l: Regex
    r: Regex


@dataclass(frozen=True)
class Star(Regex):
    child: Regex


# ---------------------------------------------------------------------------
# Structural queries
# ---------------------------------------------------------------------------

def epsilon_value(spec: SemiringSpec, R: Regex, _memo: Optional[dict] = None) -> Optional[ExtReal]:
    """Value on the empty word, or ``None`` when a star has a non-zero empty-word value."""
    memo = {} if _memo is None else _memo
    key = id(R)
    if key in memo:
        return memo[key]
    if isinstance(R, EpsAtom):
        v = R.s
    elif isinstance(R, LetterAtom):
        v = spec.zero
    elif isinstance(R, Star):
        c = epsilon_value(spec, R.child, memo)
        v = spec.one if c == spec.zero else None
    else:
        a = epsilon_value(spec, R.l, memo)
        b = epsilon_value(spec, R.r, memo)
        if a is None or b is None:
            v = None
        else:
            v = spec.add(a, b) if isinstance(R, Sum) else spec.mul(a, b)
    memo[key] = v
    return v


def validate(spec: SemiringSpec, R: Regex) -> bool:
    """True iff every starred subexpression is zero on the empty word."""
    memo: dict = {}
    seen: set = set()

    def ok(node: Regex) -> bool:
        if id(node) in seen:
            return True
        seen.add(id(node))
        if isinstance(node, (EpsAtom, LetterAtom)):
            return True
        if isinstance(node, Star):
            return ok(node.child) and epsilon_value(spec, node.child, memo) == spec.zero
        return ok(node.l) and ok(node.r)

    return ok(R)


def _memoized(fn):
    def wrapper(R, memo=None):
        memo = {} if memo is None else memo
        if id(R) not in memo:
            memo[id(R)] = fn(R, memo)
        return memo[id(R)]
    return wrapper


@_memoized
def is_eps_free(R: Regex, memo) -> bool:
    if isinstance(R, LetterAtom):
        return True
    if isinstance(R, Sum):
        return is_eps_free(R.l, memo) and is_eps_free(R.r, memo)
    if isinstance(R, Cauchy):
        l, r = R.l, R.r
        if isinstance(r, Star) and is_eps_free(l, memo) and is_eps_free(r.child, memo):
            return True
        if isinstance(l, Star) and is_eps_free(l.child, memo) and is_eps_free(r, memo):
            return True
        return is_eps_free(l, memo) and is_eps_free(r, memo)
    return False


@_memoized
def is_restricted(R: Regex, memo) -> bool:
    if isinstance(R, (EpsAtom, LetterAtom)):
        return True
    if isinstance(R, Star):
        return is_eps_free(R.child)
    return is_restricted(R.l, memo) and is_restricted(R.r, memo)


def letter_exprs(R: Regex) -> list[FExpr]:
    out, seen, stack = [], set(), [R]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, LetterAtom):
            out.append(node.e)
        elif isinstance(node, Star):
            stack.append(node.child)
        elif isinstance(node, (Sum, Cauchy)):
            stack.extend((node.r, node.l))
    return out


def symbols_of(R: Regex) -> list[str]:
    seen = []
    stack, visited = [R], set()
    while stack:
        node = stack.pop()
        if id(node) in visited:
            continue
        visited.add(id(node))
        if isinstance(node, LetterAtom):
            if node.symbol not in seen:
                seen.append(node.symbol)
        elif isinstance(node, Star):
            stack.append(node.child)
        elif isinstance(node, (Sum, Cauchy)):
            stack.extend((node.r, node.l))
    return seen


@dataclass(frozen=True)
class RegexClass:
    eps_free: bool
    restricted: bool
    weight_class: ExprClass
    general: bool = field(default=True)


def classify_regex(spec: SemiringSpec, R: Regex) -> RegexClass:
    if not validate(spec, R):
        raise RegexError("regex has a star over a subexpression that is non-zero on the empty word")
    return RegexClass(is_eps_free(R), is_restricted(R), sc.weight_class_bound(letter_exprs(R)))


def regex_size(R: Regex) -> int:
    """Number of nodes counted as a tree."""
    memo: dict = {}

    def size(node):
        if id(node) in memo:
            return memo[id(node)]
        if isinstance(node, (EpsAtom, LetterAtom)):
            v = 1
        elif isinstance(node, Star):
            v = 1 + size(node.child)
        else:
            v = 1 + size(node.l) + size(node.r)
        memo[id(node)] = v
        return v

    return size(R)


# ---------------------------------------------------------------------------
# Direct semantics
# ---------------------------------------------------------------------------

def regex_semantics_oracle(spec: SemiringSpec, R: Regex, w: FinanceWord,
                           memo: Optional[dict] = None) -> ExtReal:
    """Value of ``R`` on ``w`` by enumerating splits and factorizations.

    Meant for short words. A value depends only on the subword it covers, so
    passing the same ``memo`` dict for many words of one regex shares work.
    """
    if memo is None:
        memo = {}
        if not validate(spec, R):
            raise RegexError("regex is not valid")
    elif "valid" not in memo:
        if not validate(spec, R):
            raise RegexError("regex is not valid")
        memo["valid"] = True
    # letters are interned to small integers keyed by integer triples: hashing fractions is slow
    codes = memo.setdefault("codes", {})
    letters = memo.setdefault("letters", [])
    word = []
    for a, d in w:
        d = spec.check_data(d)
        ck = (a, d.numerator, d.denominator)
        code = codes.get(ck)
        if code is None:
            code = codes[ck] = len(letters)
            letters.append((a, d))
        word.append(code)
    word = tuple(word)

    zero, one, add, mul = spec.zero, spec.one, spec.add, spec.mul

    def val(node: Regex, sub: tuple) -> ExtReal:
        key = (id(node), sub)
        if key in memo:
            return memo[key]
        n = len(sub)
        if isinstance(node, EpsAtom):
            v = node.s if n == 0 else zero
        elif isinstance(node, LetterAtom):
            if n == 1 and letters[sub[0]][0] == node.symbol:
                v = sc._eval(spec, node.e, letters[sub[0]][1])
            else:
                v = zero
        elif isinstance(node, Sum):
            v = add(val(node.l, sub), val(node.r, sub))
        elif isinstance(node, Cauchy):
            v = zero
            for k in range(n + 1):
                left = val(node.l, sub[:k])
                if left != zero:
                    v = add(v, mul(left, val(node.r, sub[k:])))
        elif n == 0:
            v = one
        else:
            v = zero
            for k in range(1, n + 1):
                head = val(node.child, sub[:k])
                if head != zero:
                    v = add(v, mul(head, val(node, sub[k:])))
        memo[key] = v
        return v

    return val(R, word)


# ---------------------------------------------------------------------------
# Translations
# ---------------------------------------------------------------------------

def regex_to_wffa(spec: SemiringSpec, R: Regex, alphabet=None,
                  strategy: Strategy = Strategy.STATE_COPYING) -> Wffa:
    """Automaton with the same behaviour as ``R``."""
    if not validate(spec, R):
        raise RegexError("regex is not valid")
    alphabet = tuple(alphabet) if alphabet is not None else tuple(symbols_of(R))

    memo: dict[int, Wffa] = {}

    def build(node: Regex) -> Wffa:
        if id(node) not in memo:
            memo[id(node)] = _build(node)
        return memo[id(node)]

    def _build(node: Regex) -> Wffa:
        if isinstance(node, EpsAtom):
            return Wffa(spec, alphabet, ["p0"], {"p0": spec.one}, {"p0": node.s}, [])
        if isinstance(node, LetterAtom):
            return Wffa(spec, alphabet, ["q0", "q1"], {"q0": spec.one}, {"q1": spec.one},
                        [("q0", node.symbol, "q1", node.e)])
        if isinstance(node, Sum):
            return op_sum(build(node.l), build(node.r))
        if isinstance(node, Cauchy):
            return op_cauchy(build(node.l), build(node.r), strategy)
        return op_star(build(node.child), strategy)

    return build(R)


def wffa_to_regex(A: Wffa) -> Regex:
    """Restricted regex for ``A`` by eliminating states in index order.

    Subterms are shared, so the result is a DAG whose printed form may be
    much larger than its node count.
    """
    spec = A.spec
    states = A.states
    n = len(states)
    R: list[list[Optional[Regex]]] = [[None] * n for _ in range(n)]
    for t in A.iter_transitions():
        i, j = A.index[t.src], A.index[t.dst]
        atom = LetterAtom(t.sym, t.weight)
        R[i][j] = atom if R[i][j] is None else Sum(R[i][j], atom)
    for k in range(n):
        loop = R[k][k]
        loop_star = Star(loop) if loop is not None else None
        new = [row[:] for row in R]
        for p in range(n):
            if R[p][k] is None:
                continue
            head = R[p][k] if loop_star is None else Cauchy(R[p][k], loop_star)
            for r in range(n):
                if R[k][r] is None:
                    continue
                path = Cauchy(head, R[k][r])
                new[p][r] = path if R[p][r] is None else Sum(R[p][r], path)
        R = new
    terms: list[Regex] = []
    for i, wi in A.initials.items():
        for f, wf in A.finals.items():
            body = R[A.index[i]][A.index[f]]
            if body is not None:
                terms.append(Cauchy(Cauchy(EpsAtom(wi), body), EpsAtom(wf)))
    eps = wffa_epsilon_value(A)
    if eps != spec.zero:
        terms.append(EpsAtom(eps))
    if not terms:
        return EpsAtom(spec.zero)
    out = terms[0]
    for t in terms[1:]:
        out = Sum(out, t)
    return out


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_SYMBOL = re.compile(r"[^\s\[\]().|*]+")


class _RegexParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise RegexSyntaxError(f"expected {ch!r}, found {found!r}", self.pos)
        self.pos += 1

    def parse(self) -> Regex:
        r = self.sum()
        if self.peek():
            raise RegexSyntaxError(f"unexpected {self.peek()!r}", self.pos)
        return r

    def sum(self) -> Regex:
        r = self.cat()
        while self.peek() == "|":
            self.pos += 1
            r = Sum(r, self.cat())
        return r

    def cat(self) -> Regex:
        r = self.postfix()
        while self.peek() == ".":
            self.pos += 1
            r = Cauchy(r, self.postfix())
        return r

    def postfix(self) -> Regex:
        r = self.atom()
        while self.peek() == "*":
            self.pos += 1
            r = Star(r)
        return r

    def atom(self) -> Regex:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            r = self.sum()
            self.expect(")")
            return r
        m = _SYMBOL.match(self.text, self.pos)
        if not m:
            raise RegexSyntaxError(f"unexpected {ch or 'end of input'!r}", self.pos)
        name = m.group()
        self.pos = m.end()
        self.expect("[")
        start = self.pos
        end = self.text.find("]", start)
        if end < 0:
            raise RegexSyntaxError("unbalanced '['", start - 1)
        body = self.text[start:end]
        self.pos = end + 1
        try:
            if name == "eps":
                return EpsAtom(sc.ExtReal(_single_number(body, start)))
            return LetterAtom(name, sc.parse_expr(body))
        except sc.ExprSyntaxError as exc:
            raise RegexSyntaxError(f"in weight: {exc}", start + exc.pos) from exc


def _single_number(body: str, start: int) -> str:
    e = sc.parse_expr(body)
    if not isinstance(e, sc.Const):
        raise RegexSyntaxError("eps[...] takes a single number", start)
    return sc.format_number(e.s)


def parse_regex(text: str) -> Regex:
    return _RegexParser(text).parse()


def print_regex(R: Regex) -> str:
    if isinstance(R, EpsAtom):
        return f"eps[{sc.format_number(R.s)}]"
    if isinstance(R, LetterAtom):
        return f"{R.symbol}[{sc.print_expr(R.e)}]"
    if isinstance(R, Star):
        inner = print_regex(R.child)
        if not isinstance(R.child, (EpsAtom, LetterAtom, Star)):
            inner = f"({inner})"
        return inner + "*"
    if isinstance(R, Sum):
        right = print_regex(R.r)
        if isinstance(R.r, Sum):
            right = f"({right})"
        return f"{print_regex(R.l)} | {right}"
    left = print_regex(R.l)
    if isinstance(R.l, Sum):
        left = f"({left})"
    right = print_regex(R.r)
    if isinstance(R.r, (Sum, Cauchy)):
        right = f"({right})"
    return f"{left} . {right}"


def regex_behavior(spec: SemiringSpec, R: Regex, w: FinanceWord) -> ExtReal:
    return regex_semantics_oracle(spec, R, w)


__all__ = [
    "Regex", "EpsAtom", "LetterAtom", "Sum", "Cauchy", "Star", "RegexClass", "RegexError",
    "RegexSyntaxError", "epsilon_value", "validate", "classify_regex", "regex_semantics_oracle",
    "regex_to_wffa", "wffa_to_regex", "parse_regex", "print_regex", "is_eps_free", "is_restricted",
    "letter_exprs", "symbols_of", "regex_size",
]
