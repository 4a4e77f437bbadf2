"""Reference evaluators written independently of the package internals.

Values are exact ``Fraction`` objects or the float infinities, which Python
orders and compares correctly against fractions. Semiring zero is ``-inf``
for max-plus and ``+inf`` for min-plus.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from finwffa.semiring_core import Bind, Const, Eq, ExtReal, Neq, Plus, Times

INF = math.inf


def to_py(v: ExtReal):
    if v.is_finite:
        return v.value
    return -INF if v.tag < 0 else INF


def from_py(x) -> ExtReal:
    if x == INF:
        return ExtReal("+inf")
    if x == -INF:
        return ExtReal("-inf")
    return ExtReal(Fraction(x))


def ref_eval(e, d, arctic: bool = True):
    zero = -INF if arctic else INF
    if isinstance(e, Const):
        return to_py(e.s)
    if isinstance(e, Bind):
        s = to_py(e.s)
        return s if math.isinf(s) else Fraction(d) * s
    a = ref_eval(e.l, d, arctic)
    b = ref_eval(e.r, d, arctic)
    if isinstance(e, Plus):
        return max(a, b) if arctic else min(a, b)
    if isinstance(e, Times):
        return zero if zero in (a, b) else a + b
    if isinstance(e, Eq):
        return Fraction(0) if a == b else zero
    if isinstance(e, Neq):
        return zero if a == b else Fraction(0)
    raise TypeError(e)


def ref_behavior(A, word):
    """Aggregate every accepting run by walking transitions directly."""
    arctic = A.spec.is_arctic
    zero = -INF if arctic else INF
    pick = max if arctic else min

    def mul(a, b):
        return zero if zero in (a, b) else a + b

    best = zero
    frontier = [(q, to_py(w)) for q, w in A.initials.items()]
    for sym, d in word:
        nxt = []
        for q, acc in frontier:
            for (p, a, r), e in A.transitions.items():
                if p == q and a == sym:
                    nxt.append((r, mul(acc, ref_eval(e, d, arctic))))
        frontier = nxt
    for q, acc in frontier:
        if q in A.finals:
            best = pick(best, mul(acc, to_py(A.finals[q])))
    return best


def splits(word):
    for k in range(len(word) + 1):
        yield word[:k], word[k:]


def factorizations(word):
    """All ways to cut ``word`` into non-empty consecutive blocks."""
    n = len(word)
    if n == 0:
        yield ()
        return
    for cuts in itertools.product((False, True), repeat=n - 1):
        blocks, start = [], 0
        for i, cut in enumerate(cuts, start=1):
            if cut:
                blocks.append(word[start:i])
                start = i
        blocks.append(word[start:])
        yield tuple(blocks)


def cauchy_ref(fa, fb, word, arctic=True):
    zero = -INF if arctic else INF
    pick = max if arctic else min
    best = zero
    for u, v in splits(word):
        a, b = fa(u), fb(v)
        if zero not in (a, b):
            best = pick(best, a + b)
    return best


def star_ref(fa, word, arctic=True):
    zero = -INF if arctic else INF
    pick = max if arctic else min
    if not word:
        return Fraction(0)
    best = zero
    for blocks in factorizations(word):
        acc = Fraction(0)
        for b in blocks:
            v = fa(b)
            if v == zero:
                acc = zero
                break
            acc += v
        best = pick(best, acc)
    return best


def piecewise_max(lines, d):
    """Max of ``slope * d + intercept`` over a list of (slope, intercept)."""
    return max(Fraction(s) * d + Fraction(c) for s, c in lines)
