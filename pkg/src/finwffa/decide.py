"""Support and strict-threshold decisions for max-plus automata.

The threshold procedure replaces each transition by the supremum of its
weight over the data interval, which turns the question into a longest-walk
problem on a graph with constant edge weights.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .automaton import Wffa, epsilon_value
from .pwa import FULL, Interval, compile_pwa, pwa_sup, pwa_support_nonempty
from .semiring_core import NEG_INF, POS_INF, ExtReal, UnsupportedError, ext, format_number


def _require_arctic(A: Wffa) -> None:
    if not A.spec.is_arctic:
        raise UnsupportedError("decision procedures are implemented for the arctic semiring")


@dataclass(frozen=True)
class Nfa:
    states: tuple
    initials: frozenset
    finals: frozenset
    transitions: tuple  # (src, sym, dst) in automaton order

    def successors(self) -> dict:
        out = defaultdict(list)
        for p, a, q in self.transitions:
            out[p].append((a, q))
        return out

    def accepts(self, symbols) -> bool:
        succ = self.successors()
        current = set(self.initials)
        for a in symbols:
            current = {q for p in current for b, q in succ[p] if b == a}
            if not current:
                return False
        return bool(current & self.finals)

    def is_empty(self) -> bool:
        succ = self.successors()
        seen = set(self.initials)
        stack = list(seen)
        while stack:
            p = stack.pop()
            if p in self.finals:
                return False
            for _, q in succ[p]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return True

    def dump(self) -> str:
        lines = [f"states: {' '.join(self.states)}",
                 f"initial: {' '.join(q for q in self.states if q in self.initials)}",
                 f"final: {' '.join(q for q in self.states if q in self.finals)}"]
        lines += [f"{p} --{a}--> {q}" for p, a, q in self.transitions]
        return "\n".join(lines)


def support_nfa(A: Wffa) -> Nfa:
    """Unweighted automaton accepting the symbol sequences of words with non-zero value."""
    _require_arctic(A)
    zero = A.spec.zero
    kept = tuple(k for k, e in A.transitions.items() if pwa_support_nonempty(compile_pwa(e, A.spec)))
    return Nfa(A.states,
               frozenset(q for q, w in A.initials.items() if w != zero),
               frozenset(q for q, w in A.finals.items() if w != zero),
               kept)


def support_nonempty(A: Wffa) -> bool:
    return not support_nfa(A).is_empty()


def transition_sups(A: Wffa, iv: Interval = FULL) -> dict:
    _require_arctic(A)
    return {k: pwa_sup(compile_pwa(e, A.spec), iv).value for k, e in A.transitions.items()}


class Reason(enum.Enum):
    POSITIVE_USEFUL_CYCLE = "PositiveUsefulCycle"
    INFINITE_TRANSITION = "InfiniteTransitionOnUsefulPath"
    FINITE_SUP = "FiniteSup"
    EMPTY_BEHAVIOR = "EmptyBehavior"


@dataclass(frozen=True)
class Witness:
    """Symbol sequence of a maximising walk with a maximising datum per position.

    A hint is ``None`` when the supremum of that transition is only approached.
    """

    symbols: tuple
    data_hints: tuple

    def render(self) -> str:
        if not self.symbols:
            return "<empty word>"
        return " ".join(f"({a},{'~' if d is None else format_number(d)})"
                        for a, d in zip(self.symbols, self.data_hints))


@dataclass(frozen=True)
class SupAnalysis:
    value: ExtReal
    reason: Reason
    witness: Optional[Witness]


def _useful(A: Wffa, edges) -> set:
    fwd, bwd = defaultdict(set), defaultdict(set)
    for p, _, q in edges:
        fwd[p].add(q)
        bwd[q].add(p)

    def reach(start, g):
        seen = set(start)
        stack = list(seen)
        while stack:
            p = stack.pop()
            for q in g[p]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return seen

    zero = A.spec.zero
    starts = [q for q, w in A.initials.items() if w != zero]
    ends = [q for q, w in A.finals.items() if w != zero]
    return reach(starts, fwd) & reach(ends, bwd)


def analyze_sup(A: Wffa, iv: Interval = FULL) -> SupAnalysis:
    _require_arctic(A)
    spec = A.spec
    zero = spec.zero
    sups = {}
    hints = {}
    for k, e in A.transitions.items():
        r = pwa_sup(compile_pwa(e, spec), iv)
        if r.value != NEG_INF:
            sups[k] = r.value
            hints[k] = r.witness if r.attained else None
    useful = _useful(A, sups)
    edges = [(k, m) for k, m in sups.items() if k[0] in useful and k[2] in useful]
    if any(m == POS_INF for _, m in edges):
        return SupAnalysis(POS_INF, Reason.INFINITE_TRANSITION, None)

    order = [q for q in A.states if q in useful]
    n = len(order)
    # best[q]: largest weight of a walk with at most k edges from an initial state to q
    best = {q: A.initials[q] for q in order if q in A.initials and A.initials[q] != zero}
    back: dict = {q: None for q in best}
    backs = [dict(back)]
    for step in range(1, n + 1):
        nxt = dict(best)
        nback = dict(back)
        for (p, a, q), m in edges:
            if p in best:
                cand = best[p] + m
                if q not in nxt or cand > nxt[q]:
                    nxt[q] = cand
                    nback[q] = (step, (p, a, q))
        if step == n:
            if any(q not in best or nxt[q] > best[q] for q in nxt):
                return SupAnalysis(POS_INF, Reason.POSITIVE_USEFUL_CYCLE, None)
            break
        best, back = nxt, nback
        backs.append(dict(back))

    value = NEG_INF
    arg = None
    for f, wf in A.finals.items():
        if f in best and wf != zero:
            cand = best[f] + wf
            if cand > value:
                value, arg = cand, f
    eps = epsilon_value(A)
    if eps > value:
        value, arg = eps, None
    if value == NEG_INF:
        return SupAnalysis(NEG_INF, Reason.EMPTY_BEHAVIOR, None)
    witness = _backtrace(arg, backs, hints) if arg is not None else Witness((), ())
    return SupAnalysis(value, Reason.FINITE_SUP, witness)


def _backtrace(q, backs, hints) -> Witness:
    """Follow predecessor records from the last table back to an initial state."""
    syms, data = [], []
    level = len(backs) - 1
    while True:
        rec = backs[level].get(q)
        if rec is None:
            break
        step, (p, a, _) = rec
        syms.append(a)
        data.append(hints.get((p, a, q)))
        q = p
        level = step - 1
    return Witness(tuple(reversed(syms)), tuple(reversed(data)))


def behavior_sup(A: Wffa, iv: Interval = FULL) -> ExtReal:
    """Supremum of the behaviour over all words with data in ``iv``."""
    return analyze_sup(A, iv).value


@dataclass(frozen=True)
class ThresholdVerdict:
    answer: bool
    sup_value: ExtReal
    reason: Reason
    witness: Optional[Witness]

    def render(self) -> str:
        lines = [f"answer: {'yes' if self.answer else 'no'}",
                 f"sup: {format_number(self.sup_value)}",
                 f"reason: {self.reason.value}"]
        if self.witness is not None:
            lines.append(f"witness: {self.witness.render()}")
        return "\n".join(lines)


def threshold_gt(A: Wffa, theta, iv: Interval = FULL) -> ThresholdVerdict:
    """Does some word with data in ``iv`` score strictly above ``theta``?

    For a strict inequality the answer is ``theta < sup`` whether or not the
    supremum is attained, since values come arbitrarily close to it.
    """
    theta = ext(theta)
    if not theta.is_finite:
        raise ValueError("threshold must be finite")
    res = analyze_sup(A, iv)
    return ThresholdVerdict(theta < res.value, res.value, res.reason, res.witness)


def make_interval(lo, hi=None) -> Interval:
    return Interval(Fraction(ext(lo).value), POS_INF if hi is None else ext(hi))
