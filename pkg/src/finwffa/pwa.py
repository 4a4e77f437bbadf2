"""Piecewise-affine normal form of max-plus expressions over non-negative data.

A :class:`PiecewiseAffine` partitions ``[0, inf)`` by breakpoints
``0 < d1 < ... < dk`` into the cells::

    {0}, (0, d1), {d1}, (d1, d2), ..., {dk}, (dk, inf)

Cell ``2j`` is a singleton and cell ``2j + 1`` an open interval.  Each cell
carries a coefficient pair ``(a, b)`` read as ``x -> a*x + b``; a pair is the
zero function when either coefficient is ``-inf``.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .semiring_core import (
    ARCTIC, NEG_INF, POS_INF, ZERO_R, Bind, Const, Domain, Eq, ExtReal, FExpr,
    Neq, Plus, SemiringSpec, Tag, Times, UnsupportedError, ext, is_affine,
    is_monomial, is_primitive, is_simple_constraint,
)

Pair = tuple  # (a: ExtReal, b: ExtReal)

ZERO_PAIR: Pair = (ZERO_R, NEG_INF)
ONE_PAIR: Pair = (ZERO_R, ZERO_R)


def _is_zero(p: Pair) -> bool:
    return p[0].tag is Tag.NEG_INF or p[1].tag is Tag.NEG_INF


def _norm(p: Pair) -> Pair:
    return ZERO_PAIR if _is_zero(p) else p


def _at(p: Pair, x: Fraction) -> ExtReal:
    if _is_zero(p):
        return NEG_INF
    return ExtReal._make(Tag.FINITE, p[0].value * x + p[1].value)


def _const_pair(v: ExtReal) -> Pair:
    return ZERO_PAIR if v.tag is Tag.NEG_INF else (ZERO_R, v)


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` of non-negative data; ``hi`` may be ``+inf``."""

    lo: Fraction
    hi: ExtReal

    def __post_init__(self):
        lo = Fraction(self.lo.value if isinstance(self.lo, ExtReal) else self.lo)
        hi = ext(self.hi)
        if lo < 0:
            raise ValueError("interval must lie in [0, inf)")
        if hi.tag is Tag.NEG_INF or (hi.is_finite and hi.value < lo):
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x and (not self.hi.is_finite or x <= self.hi.value)


FULL = Interval(Fraction(0), POS_INF)


@dataclass(frozen=True)
class SupResult:
    value: ExtReal
    attained: bool
    witness: Fraction | None = None


@dataclass(frozen=True)
class PiecewiseAffine:
    breakpoints: tuple
    pieces: tuple

    def __post_init__(self):
        bps = tuple(Fraction(b) for b in self.breakpoints)
        if any(b <= 0 for b in bps) or any(x >= y for x, y in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be positive and strictly increasing")
        if len(self.pieces) != 2 * len(bps) + 2:
            raise ValueError("need exactly 2k+2 pieces for k breakpoints")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", tuple(_norm((ext(a), ext(b))) for a, b in self.pieces))

    # -- cells -------------------------------------------------------------------
    @property
    def n_cells(self) -> int:
        return len(self.pieces)

    def cell_bounds(self, i: int) -> tuple[Fraction, ExtReal]:
        """``(lo, hi)`` of cell ``i``; for a singleton ``lo == hi``."""
        bps = self.breakpoints
        if i % 2 == 0:
            x = Fraction(0) if i == 0 else bps[i // 2 - 1]
            return x, ExtReal._make(Tag.FINITE, x)
        lo = Fraction(0) if i == 1 else bps[i // 2 - 1]
        hi = bps[i // 2] if i // 2 < len(bps) else None
        return lo, (POS_INF if hi is None else ExtReal._make(Tag.FINITE, hi))

    def cells(self) -> Iterator[tuple[int, Fraction, ExtReal, Pair]]:
        for i, p in enumerate(self.pieces):
            lo, hi = self.cell_bounds(i)
            yield i, lo, hi, p

    def cell_index(self, x: Fraction) -> int:
        x = Fraction(x)
        if x < 0:
            raise ValueError("piecewise-affine functions live on [0, inf)")
        if x == 0:
            return 0
        j = bisect.bisect_left(self.breakpoints, x)
        if j < len(self.breakpoints) and self.breakpoints[j] == x:
            return 2 * (j + 1)
        return 2 * j + 1

    def eval(self, x) -> ExtReal:
        x = Fraction(x.value if isinstance(x, ExtReal) else x)
        return _at(self.pieces[self.cell_index(x)], x)

    def sample_points(self) -> list[Fraction]:
        """Every breakpoint, zero, every bounded-cell midpoint and a point past the last breakpoint."""
        pts = [Fraction(0)]
        prev = Fraction(0)
        for b in self.breakpoints:
            pts.append((prev + b) / 2)
            pts.append(b)
            prev = b
        pts.append(prev + 1)
        return pts

    def is_zero(self) -> bool:
        return all(_is_zero(p) for p in self.pieces)


def _representative(lo: Fraction, hi: ExtReal) -> Fraction:
    if hi.is_finite:
        return (lo + hi.value) / 2
    return lo + 1


def _build(cells: Sequence[tuple[Fraction | None, Pair]]) -> PiecewiseAffine:
    """Assemble from an alternating list ``[(None, p0), (None, p1), (d1, p2), (None, p3), ...]``.

    Singletons after the first carry their point; intervals carry ``None``.
    """
    bps = [c[0] for k, c in enumerate(cells) if k % 2 == 0 and k > 0]
    return canonicalize(PiecewiseAffine(tuple(bps), tuple(c[1] for c in cells)))


def canonicalize(p: PiecewiseAffine) -> PiecewiseAffine:
    """Drop every removable breakpoint, and store singleton pieces as constants."""
    bps = list(p.breakpoints)
    pieces = [(_const_pair(_at(pc, Fraction(0) if i == 0 else bps[i // 2 - 1])) if i % 2 == 0 else pc)
              for i, pc in enumerate(p.pieces)]
    changed = True
    while changed:
        changed = False
        for j in range(len(bps)):
            left, point, right = pieces[2 * j + 1], pieces[2 * j + 2], pieces[2 * j + 3]
            if left == right and _at(left, bps[j]) == _at(point, bps[j]):
                del bps[j]
                del pieces[2 * j + 2: 2 * j + 4]
                changed = True
                break
    return PiecewiseAffine(tuple(bps), tuple(pieces))


def _refine(p: PiecewiseAffine, bps: Sequence[Fraction]) -> list[Pair]:
    """Pieces of ``p`` on the partition generated by ``bps`` (a superset of its own)."""
    out = [p.pieces[0]]
    prev = Fraction(0)
    for b in list(bps) + [None]:
        rep = prev + 1 if b is None else (prev + b) / 2
        out.append(p.pieces[p.cell_index(rep)])
        if b is not None:
            out.append(p.pieces[p.cell_index(b)])
            prev = b
    return out


def _crossing(f: Pair, g: Pair) -> Fraction | None:
    """Unique point where two non-zero, non-parallel lines meet."""
    if f[0] == g[0]:
        return None
    return (g[1].value - f[1].value) / (f[0].value - g[0].value)


def _combine(p: PiecewiseAffine, q: PiecewiseAffine,
             on_point: Callable[[ExtReal, ExtReal], Pair],
             on_interval: Callable[[Pair, Pair, Fraction, ExtReal], list]) -> PiecewiseAffine:
    bps = sorted(set(p.breakpoints) | set(q.breakpoints))
    pp, qq = _refine(p, bps), _refine(q, bps)
    cells: list = []
    points = [Fraction(0)] + bps
    for k in range(len(pp)):
        if k % 2 == 0:
            x = points[k // 2]
            cells.append((x if k else None, on_point(_at(pp[k], x), _at(qq[k], x))))
        else:
            lo = points[k // 2]
            hi = ExtReal._make(Tag.FINITE, bps[k // 2]) if k // 2 < len(bps) else POS_INF
            for piece in on_interval(pp[k], qq[k], lo, hi):
                cells.append(piece)
    # on_interval returns [(None, pair)] or [(None, left), (x, mid), (None, right)]
    return _build(cells)


def _inside(x: Fraction | None, lo: Fraction, hi: ExtReal) -> bool:
    return x is not None and x > lo and (not hi.is_finite or x < hi.value)


def _max_interval(f: Pair, g: Pair, lo: Fraction, hi: ExtReal) -> list:
    if _is_zero(f):
        return [(None, g)]
    if _is_zero(g) or f == g:
        return [(None, f)]
    x = _crossing(f, g)
    if _inside(x, lo, hi):
        left_pt = (lo + x) / 2
        left = f if _at(f, left_pt) >= _at(g, left_pt) else g
        right = g if left is f else f
        return [(None, left), (x, _const_pair(_at(f, x))), (None, right)]
    rep = _representative(lo, hi)
    return [(None, f if _at(f, rep) >= _at(g, rep) else g)]


def _cmp_interval(equal_pair: Pair, unequal_pair: Pair):
    def handler(f: Pair, g: Pair, lo: Fraction, hi: ExtReal) -> list:
        fz, gz = _is_zero(f), _is_zero(g)
        if fz and gz or f == g:
            return [(None, equal_pair)]
        if fz or gz:
            return [(None, unequal_pair)]
        x = _crossing(f, g)
        if _inside(x, lo, hi):
            return [(None, unequal_pair), (x, equal_pair), (None, unequal_pair)]
        return [(None, unequal_pair)]
    return handler


def _times_pairs(f: Pair, g: Pair) -> Pair:
    if _is_zero(f) or _is_zero(g):
        return ZERO_PAIR
    return (f[0] + g[0], f[1] + g[1])


def _leaf(pair: Pair) -> PiecewiseAffine:
    return PiecewiseAffine((), (pair, pair))


def compile_pwa(e: FExpr, spec: SemiringSpec = ARCTIC) -> PiecewiseAffine:
    """Piecewise-affine form of an expression under max-plus with non-negative data."""
    if not spec.is_arctic or spec.domain is not Domain.NONNEG:
        raise UnsupportedError("piecewise-affine compilation covers the arctic semiring over [0, inf)")
    return _compile(e)


def _compile(e: FExpr) -> PiecewiseAffine:
    if isinstance(e, Const):
        return canonicalize(_leaf(_const_pair(e.s)))
    if isinstance(e, Bind):
        return canonicalize(_leaf(ZERO_PAIR if e.s.tag is Tag.NEG_INF else (e.s, ZERO_R)))
    p, q = _compile(e.l), _compile(e.r)
    if isinstance(e, Times):
        return _combine(p, q, lambda a, b: _const_pair(a + b if NEG_INF not in (a, b) else NEG_INF),
                        lambda f, g, lo, hi: [(None, _times_pairs(f, g))])
    if isinstance(e, Plus):
        return _combine(p, q, lambda a, b: _const_pair(max(a, b)), _max_interval)
    if isinstance(e, Eq):
        return _combine(p, q, lambda a, b: ONE_PAIR if a == b else ZERO_PAIR,
                        _cmp_interval(ONE_PAIR, ZERO_PAIR))
    if isinstance(e, Neq):
        return _combine(p, q, lambda a, b: ZERO_PAIR if a == b else ONE_PAIR,
                        _cmp_interval(ZERO_PAIR, ONE_PAIR))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Supremum and support
# ---------------------------------------------------------------------------

def pwa_sup(p: PiecewiseAffine, iv: Interval = FULL) -> SupResult:
    """Supremum of ``p`` over ``iv``, whether it is attained, and a maximiser."""
    best = NEG_INF
    attained = True
    witness: Fraction | None = None
    for i, lo, hi, pair in p.cells():
        if _is_zero(pair):
            continue
        if i % 2 == 0:
            if not iv.contains(lo):
                continue
            cand = [(_at(pair, lo), True, lo)]
        else:
            a_lo, lo_closed = (lo, False) if lo >= iv.lo else (iv.lo, True)
            if hi.is_finite and (not iv.hi.is_finite or hi.value <= iv.hi.value):
                a_hi, hi_closed = hi, False
            else:
                a_hi, hi_closed = iv.hi, iv.hi.is_finite
            if a_hi.is_finite and (a_hi.value < a_lo or (a_hi.value == a_lo and not (lo_closed and hi_closed))):
                continue
            slope = pair[0].value
            if slope > 0:
                if not a_hi.is_finite:
                    cand = [(POS_INF, False, None)]
                else:
                    cand = [(_at(pair, a_hi.value), hi_closed, a_hi.value)]
            elif slope < 0:
                cand = [(_at(pair, a_lo), lo_closed, a_lo)]
            else:
                rep = _representative(a_lo, a_hi) if not (a_hi.is_finite and a_hi.value == a_lo) else a_lo
                cand = [(pair[1], True, rep)]
        for value, att, pt in cand:
            if value > best:
                best, attained, witness = value, att, pt
            elif value == best and att and not attained:
                attained, witness = True, pt
    if best is NEG_INF:
        return SupResult(NEG_INF, True, None)
    return SupResult(best, attained, witness)


def pwa_support_nonempty(p: PiecewiseAffine) -> bool:
    return not p.is_zero()


# ---------------------------------------------------------------------------
# Monomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Monomial:
    constraint: FExpr
    affine: FExpr

    def __post_init__(self):
        if not is_simple_constraint(self.constraint):
            raise ValueError("monomial constraint must be a simple constraint")
        if not is_affine(self.affine):
            raise ValueError("monomial body must be affine")

    @property
    def expr(self) -> FExpr:
        return Times(self.constraint, self.affine)

    @classmethod
    def from_expr(cls, e: FExpr) -> "Monomial":
        if not is_monomial(e):
            raise ValueError("expression is not a monomial")
        return cls(e.l, e.r)


X = Bind(ExtReal(1))


def _affine(pair: Pair) -> FExpr:
    return Times(Bind(pair[0]), Const(pair[1]))


def above(d: Fraction) -> FExpr:
    """Max-plus indicator of ``x > d``."""
    c = Const(ExtReal(d))
    return Neq(Plus(X, c), c)


def below(d: Fraction) -> FExpr:
    """Max-plus indicator of ``x < d``."""
    return Neq(Plus(X, Const(ExtReal(d))), X)


def at_point(d: Fraction) -> FExpr:
    return Eq(X, Const(ExtReal(d)))


def pwa_to_monomials(p: PiecewiseAffine) -> list[Monomial]:
    """One monomial per non-zero cell; their sum equals ``p`` pointwise."""
    out = []
    for i, lo, hi, pair in p.cells():
        if _is_zero(pair):
            continue
        if i % 2 == 0:
            guard = at_point(lo)
        elif hi.is_finite:
            guard = Times(above(lo), below(hi.value))
        else:
            guard = above(lo)
        out.append(Monomial(guard, _affine(pair)))
    if not out:
        out.append(Monomial(Eq(Const(ZERO_R), Const(ZERO_R)), Const(NEG_INF)))
    return out


def monomial_sum(p: PiecewiseAffine) -> FExpr:
    terms = [m.expr for m in pwa_to_monomials(p)]
    acc = terms[0]
    for t in terms[1:]:
        acc = Plus(acc, t)
    return acc


# ---------------------------------------------------------------------------
# Bounded sums of primitive expressions
# ---------------------------------------------------------------------------

def reduce_primitive_sum(spec: SemiringSpec, terms: Sequence[FExpr]) -> list[FExpr]:
    """Shorter list of primitives with the same max-plus sum.

    Constants collapse to their maximum.  Over non-negative data the binding
    with the largest factor dominates all others; over all reals the largest
    and the smallest factor are both kept.  Each group appears where its first
    member appeared in the input.
    """
    if not spec.is_arctic:
        raise UnsupportedError("bounded-sum reduction is implemented for the arctic semiring")
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one term")
    for t in terms:
        if not is_primitive(t):
            raise ValueError(f"not a primitive expression: {t!r}")
    consts = [t.s for t in terms if isinstance(t, Const)]
    slopes = [t.s for t in terms if isinstance(t, Bind)]
    groups: dict[str, list[FExpr]] = {}
    if consts:
        groups["const"] = [Const(max(consts))]
    if slopes:
        hi = max(slopes)
        keep = [Bind(hi)]
        if spec.domain is Domain.REAL:
            finite = [s for s in slopes if s.is_finite]
            if finite:
                low = min(finite)
                if low != hi:
                    keep.append(Bind(low))
        groups["bind"] = keep
    order = []
    for t in terms:
        g = "const" if isinstance(t, Const) else "bind"
        if g not in order:
            order.append(g)
    return [x for g in order for x in groups[g]]


def bounded_sum_limit(spec: SemiringSpec) -> int:
    return 2 if spec.domain is Domain.NONNEG else 5
