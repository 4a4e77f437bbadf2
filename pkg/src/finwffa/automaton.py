"""Weighted finite finance automata.

An automaton reads a finance word ``(a1, d1) ... (an, dn)``.  Each transition
carries an expression evaluated at the datum of the letter it reads; a run
multiplies its initial weight, the evaluated transition weights and its final
weight, and the behaviour sums over all runs.
"""
from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from . import semiring_core as sc
from .pwa import (
    Monomial, _is_zero, compile_pwa, pwa_to_monomials,
)
from .semiring_core import (
    ARCTIC, NEG_INF, ZERO_R, Bind, Const, Domain, Eq, ExtReal, FExpr, Kind, Neq,
    Plus, SemiringSpec, TROPICAL, Times, UnsupportedError, ext, is_monomial,
    parse_expr, plus_all, print_expr, summands,
)


class AutomatonError(ValueError):
    """Malformed automaton or incompatible operands."""


class PropernessError(ValueError):
    """The operation needs a behaviour that is zero on the empty word."""


Letter = tuple  # (symbol, Fraction)
FinanceWord = tuple  # tuple[Letter, ...]


def make_word(pairs: Iterable, spec: SemiringSpec = ARCTIC) -> FinanceWord:
    """Normalise ``[(sym, value), ...]`` into a finance word with exact data."""
    return tuple((str(a), spec.check_data(sc.ext(d) if isinstance(d, str) else d)) for a, d in pairs)


class Transition(NamedTuple):
    src: str
    sym: str
    dst: str
    weight: FExpr


class Wffa:
    """Immutable weighted finite finance automaton.

    Parallel transitions sharing source, symbol and target are merged into a
    single transition whose weight is the sum of their expressions, in the
    order given.
    """

    def __init__(self, spec: SemiringSpec, alphabet: Iterable[str], states: Iterable[str],
                 initials: Mapping[str, object] | Iterable, finals: Mapping[str, object] | Iterable,
                 transitions: Iterable):
        self.spec = spec
        self.alphabet = tuple(dict.fromkeys(str(a) for a in alphabet))
        self.states = tuple(str(q) for q in states)
        if len(set(self.states)) != len(self.states):
            raise AutomatonError("duplicate state names")
        self.index = {q: i for i, q in enumerate(self.states)}
        self.initials = self._weights(initials, "initial")
        self.finals = self._weights(finals, "final")
        merged: dict[tuple[str, str, str], FExpr] = {}
        syms = set(self.alphabet)
        for t in transitions:
            p, a, q, e = t
            if isinstance(e, str):
                e = parse_expr(e)
            sc.check_expr(spec, e)
            for s in (p, q):
                if s not in self.index:
                    raise AutomatonError(f"transition uses undeclared state {s!r}")
            if a not in syms:
                raise AutomatonError(f"transition symbol {a!r} not in the alphabet")
            key = (p, a, q)
            merged[key] = Plus(merged[key], e) if key in merged else e
        self.transitions = merged
        self._cache: dict = {}

    def _weights(self, ws, what: str) -> dict[str, ExtReal]:
        items = ws.items() if isinstance(ws, Mapping) else ws
        out: dict[str, ExtReal] = {}
        for q, w in items:
            if q not in self.index:
                raise AutomatonError(f"{what} weight on undeclared state {q!r}")
            out[q] = self.spec.check(w)
        return {q: out[q] for q in self.states if q in out}

    # -- views -------------------------------------------------------------------
    def iter_transitions(self) -> Iterator[Transition]:
        for (p, a, q), e in self.transitions.items():
            yield Transition(p, a, q, e)

    def out_transitions(self, p: str) -> list[Transition]:
        key = ("out", p)
        if key not in self._cache:
            outs = defaultdict(list)
            for t in self.iter_transitions():
                outs[t.src].append(t)
            for q in self.states:
                self._cache[("out", q)] = outs.get(q, [])
        return self._cache[key]

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def is_purely_transition_weighted(self) -> bool:
        one = self.spec.one
        return all(w == one for w in self.initials.values()) and all(w == one for w in self.finals.values())

    def weight_exprs(self) -> list[FExpr]:
        return list(self.transitions.values())

    def expr_size_total(self) -> int:
        return sum(sc.expr_size(e) for e in self.transitions.values())

    def __eq__(self, other):
        if not isinstance(other, Wffa):
            return NotImplemented
        return (self.spec == other.spec and self.alphabet == other.alphabet and self.states == other.states
                and self.initials == other.initials and self.finals == other.finals
                and list(self.transitions.items()) == list(other.transitions.items()))

    def __hash__(self):
        return hash((self.spec, self.states, tuple(self.transitions)))

    def __repr__(self):
        return (f"Wffa({self.spec.name()}, states={len(self.states)}, "
                f"transitions={len(self.transitions)})")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _check_word(A: Wffa, w: FinanceWord) -> list[tuple[str, Fraction]]:
    syms = set(A.alphabet)
    out = []
    for a, d in w:
        if a not in syms:
            raise AutomatonError(f"symbol {a!r} not in the alphabet")
        out.append((a, A.spec.check_data(d)))
    return out


def epsilon_value(A: Wffa) -> ExtReal:
    spec = A.spec
    return spec.sum(spec.mul(w, A.finals[q]) for q, w in A.initials.items() if q in A.finals)


def runs(A: Wffa, symbols: Sequence[str]) -> Iterator[tuple[str, list[Transition]]]:
    """Every path labelled by ``symbols`` from an initial to a final state."""
    def walk(q: str, k: int, path: list[Transition]):
        if k == len(symbols):
            if q in A.finals:
                yield list(path)
            return
        for t in A.out_transitions(q):
            if t.sym == symbols[k]:
                path.append(t)
                yield from walk(t.dst, k + 1, path)
                path.pop()

    for q0 in A.initials:
        for path in walk(q0, 0, []):
            yield q0, path


def run_weight(A: Wffa, q0: str, path: Sequence[Transition], w: FinanceWord) -> ExtReal:
    spec = A.spec
    acc = A.initials[q0]
    for t, (_, d) in zip(path, w):
        acc = spec.mul(acc, sc._eval(spec, t.weight, d))
    last = path[-1].dst if path else q0
    return spec.mul(acc, A.finals[last])


def behavior_bruteforce(A: Wffa, w: FinanceWord) -> ExtReal:
    """Sum of run weights, enumerating every run explicitly."""
    w = _check_word(A, w)
    symbols = [a for a, _ in w]
    return A.spec.sum(run_weight(A, q0, path, w) for q0, path in runs(A, symbols))


@dataclass(frozen=True)
class MatrixForm:
    states: tuple
    lam: tuple
    xi: dict
    nu: tuple

    @property
    def k(self) -> int:
        return len(self.states)


def to_matrix_form(A: Wffa) -> MatrixForm:
    if "matrix" in A._cache:
        return A._cache["matrix"]
    spec = A.spec
    k = A.n_states
    zero_e = Const(spec.zero)
    lam = tuple(A.initials.get(q, spec.zero) for q in A.states)
    nu = tuple(A.finals.get(q, spec.zero) for q in A.states)
    xi = {}
    for a in A.alphabet:
        rows = [[zero_e] * k for _ in range(k)]
        for (p, s, q), e in A.transitions.items():
            if s == a:
                rows[A.index[p]][A.index[q]] = e
        xi[a] = tuple(tuple(r) for r in rows)
    m = MatrixForm(A.states, lam, xi, nu)
    A._cache["matrix"] = m
    return m


def behavior_matrix(A: Wffa, w: FinanceWord) -> ExtReal:
    """Row vector times one evaluated matrix per letter times column vector.

    Matrix entries equal to the semiring zero are skipped.
    """
    w = _check_word(A, w)
    spec = A.spec
    zero = spec.zero
    m = to_matrix_form(A)
    sparse = _sparse_rows(A, m)
    k = m.k
    vec = list(m.lam)
    for a, d in w:
        rows = sparse[a]
        new = [zero] * k
        for i in range(k):
            vi = vec[i]
            if vi == zero:
                continue
            for j, e in rows[i]:
                new[j] = spec.add(new[j], spec.mul(vi, sc._eval(spec, e, d)))
        vec = new
    return spec.sum(spec.mul(vec[i], m.nu[i]) for i in range(k))


def _sparse_rows(A: Wffa, m: MatrixForm) -> dict:
    if "sparse" not in A._cache:
        zero_e = Const(A.spec.zero)
        A._cache["sparse"] = {a: tuple(tuple((j, e) for j, e in enumerate(row) if e != zero_e)
                                       for row in mat)
                              for a, mat in m.xi.items()}
    return A._cache["sparse"]


def behavior_batch(A: Wffa, words: Iterable[FinanceWord]) -> list[ExtReal]:
    """Matrix-engine values for many words, sharing work on common prefixes."""
    spec = A.spec
    zero = spec.zero
    m = to_matrix_form(A)
    sparse = _sparse_rows(A, m)
    k = m.k
    root = tuple(m.lam)
    vectors: dict = {(): root}

    def step(vec, a, d):
        rows = sparse[a]
        new = [zero] * k
        for i in range(k):
            vi = vec[i]
            if vi == zero:
                continue
            for j, e in rows[i]:
                new[j] = spec.add(new[j], spec.mul(vi, sc._eval(spec, e, d)))
        return tuple(new)

    codes: dict = {}
    letters: list = []
    out = []
    for w in words:
        key = []
        for letter in _check_word(A, w):
            # integer keys: hashing fractions is slow
            ck = (letter[0], letter[1].numerator, letter[1].denominator)
            code = codes.get(ck)
            if code is None:
                code = codes[ck] = len(letters)
                letters.append(letter)
            key.append(code)
        key = tuple(key)
        cut = len(key)
        while key[:cut] not in vectors:
            cut -= 1
        vec = vectors[key[:cut]]
        for i in range(cut, len(key)):
            vec = step(vec, *letters[key[i]])
            vectors[key[:i + 1]] = vec
        out.append(spec.sum(spec.mul(vec[i], m.nu[i]) for i in range(k)))
    return out


def behavior(A: Wffa, w: FinanceWord, engine: str = "matrix") -> ExtReal:
    if engine == "matrix":
        return behavior_matrix(A, w)
    if engine == "brute":
        return behavior_bruteforce(A, w)
    raise ValueError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------------------
# Helpers for constructions
# ---------------------------------------------------------------------------

def fresh(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    name = base
    while name in taken:
        name += "'"
    return name


def _pair(x: str, y: str) -> str:
    return f"({x},{y})"


def trim(A: Wffa) -> Wffa:
    """Drop states that lie on no path from an initial to a final state."""
    fwd = defaultdict(set)
    bwd = defaultdict(set)
    for p, _, q in A.transitions:
        fwd[p].add(q)
        bwd[q].add(p)

    def closure(start: Iterable[str], edges) -> set[str]:
        seen = set(start)
        stack = list(seen)
        while stack:
            p = stack.pop()
            for q in edges[p]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return seen

    useful = closure(A.initials, fwd) & closure(A.finals, bwd)
    if len(useful) == A.n_states:
        return A
    return Wffa(A.spec, A.alphabet, [q for q in A.states if q in useful],
                {q: w for q, w in A.initials.items() if q in useful},
                {q: w for q, w in A.finals.items() if q in useful},
                [t for t in A.iter_transitions() if t.src in useful and t.dst in useful])


def relabel(A: Wffa, fn) -> Wffa:
    return Wffa(A.spec, A.alphabet, [fn(q) for q in A.states],
                {fn(q): w for q, w in A.initials.items()},
                {fn(q): w for q, w in A.finals.items()},
                [(fn(t.src), t.sym, fn(t.dst), t.weight) for t in A.iter_transitions()])


def _same_spec(A: Wffa, B: Wffa) -> None:
    if A.spec != B.spec:
        raise AutomatonError(f"semiring mismatch: {A.spec.name()} vs {B.spec.name()}")


def _alphabet_union(A: Wffa, B: Wffa) -> tuple:
    return tuple(dict.fromkeys(A.alphabet + B.alphabet))


def unit_automaton(spec: SemiringSpec = ARCTIC, alphabet: Iterable[str] = ()) -> Wffa:
    """Behaviour one on the empty word and zero elsewhere."""
    return Wffa(spec, alphabet, ["u"], {"u": spec.one}, {"u": spec.one}, [])


def universal_automaton(spec: SemiringSpec = ARCTIC, alphabet: Iterable[str] = ()) -> Wffa:
    """Behaviour one on every word."""
    alphabet = tuple(alphabet)
    return Wffa(spec, alphabet, ["u"], {"u": spec.one}, {"u": spec.one},
                [("u", a, "u", Const(spec.one)) for a in alphabet])


def empty_automaton(spec: SemiringSpec = ARCTIC, alphabet: Iterable[str] = ()) -> Wffa:
    return Wffa(spec, alphabet, [], {}, {}, [])


# ---------------------------------------------------------------------------
# Normalisation
# ---------------------------------------------------------------------------

class Mode(enum.Enum):
    INITIAL = "initial"
    FINAL = "final"
    COMPLETE = "complete"


class Strategy(enum.Enum):
    WEIGHT_FOLDING = "folding"
    STATE_COPYING = "copying"


def is_initially_normalized(A: Wffa) -> bool:
    if len(A.initials) != 1:
        return False
    (q, w), = A.initials.items()
    return w == A.spec.one and all(dst != q for (_, _, dst) in A.transitions)


def is_finally_normalized(A: Wffa) -> bool:
    if len(A.finals) != 1:
        return False
    (q, w), = A.finals.items()
    return w == A.spec.one and all(src != q for (src, _, _) in A.transitions)


def sole_initial(A: Wffa) -> str:
    return next(iter(A.initials))


def sole_final(A: Wffa) -> str:
    return next(iter(A.finals))


def _scale_left(spec: SemiringSpec, w: ExtReal, e: FExpr, skip_one: bool) -> FExpr:
    return e if skip_one and w == spec.one else Times(Const(w), e)


def _scale_right(spec: SemiringSpec, e: FExpr, w: ExtReal, skip_one: bool) -> FExpr:
    return e if skip_one and w == spec.one else Times(e, Const(w))


def _fold_initial(A: Wffa) -> Wffa:
    spec = A.spec
    q_i = fresh("qI", A.states)
    groups: dict[tuple[str, str], list[FExpr]] = {}
    for i in A.initials:
        for t in A.out_transitions(i):
            groups.setdefault((t.sym, t.dst), []).append(Times(Const(A.initials[i]), t.weight))
    trans = list(A.iter_transitions()) + [(q_i, a, q, plus_all(es)) for (a, q), es in groups.items()]
    finals = dict(A.finals)
    eps = epsilon_value(A)
    if eps != spec.zero:
        finals[q_i] = eps
    return Wffa(spec, A.alphabet, (q_i,) + A.states, {q_i: spec.one}, finals, trans)


def _fold_final(A: Wffa) -> Wffa:
    spec = A.spec
    q_f = fresh("qF", A.states)
    groups: dict[tuple[str, str], list[FExpr]] = {}
    for t in A.iter_transitions():
        if t.dst in A.finals:
            groups.setdefault((t.src, t.sym), [])
    # summands ordered by final-state index
    for (p, a), es in groups.items():
        for f, wf in A.finals.items():
            e = A.transitions.get((p, a, f))
            if e is not None:
                es.append(Times(e, Const(wf)))
    trans = list(A.iter_transitions()) + [(p, a, q_f, plus_all(es)) for (p, a), es in groups.items()]
    initials = dict(A.initials)
    eps = epsilon_value(A)
    if eps != spec.zero:
        initials[q_f] = eps
    return Wffa(spec, A.alphabet, A.states + (q_f,), initials, {q_f: spec.one}, trans)


def _copy_initial(A: Wffa) -> Wffa:
    spec = A.spec
    inner = [_pair(i, q) for i in A.initials for q in A.states]
    q_i = fresh("qI", inner)
    trans = []
    for i in A.initials:
        for t in A.iter_transitions():
            trans.append((_pair(i, t.src), t.sym, _pair(i, t.dst), t.weight))
        for t in A.out_transitions(i):
            trans.append((q_i, t.sym, _pair(i, t.dst), t.weight))
    finals = {}
    eps = epsilon_value(A)
    if eps != spec.zero:
        finals[q_i] = eps
    for i, wi in A.initials.items():
        for f, wf in A.finals.items():
            finals[_pair(i, f)] = spec.mul(wi, wf)
    return Wffa(spec, A.alphabet, [q_i] + inner, {q_i: spec.one}, finals, trans)


def _copy_final(A: Wffa) -> Wffa:
    spec = A.spec
    inner = [_pair(q, f) for f in A.finals for q in A.states]
    q_f = fresh("qF", inner)
    trans = []
    for f in A.finals:
        for t in A.iter_transitions():
            trans.append((_pair(t.src, f), t.sym, _pair(t.dst, f), t.weight))
        for t in A.iter_transitions():
            if t.dst == f:
                trans.append((_pair(t.src, f), t.sym, q_f, t.weight))
    initials = {}
    for f, wf in A.finals.items():
        for i, wi in A.initials.items():
            initials[_pair(i, f)] = spec.mul(wi, wf)
    eps = epsilon_value(A)
    if eps != spec.zero:
        initials[q_f] = eps
    return Wffa(spec, A.alphabet, inner + [q_f], initials, {q_f: spec.one}, trans)


def _fold_complete(A: Wffa) -> Wffa:
    spec = A.spec
    q_i = fresh("qI", A.states)
    q_f = fresh("qF", list(A.states) + [q_i])
    t_i: dict[tuple[str, str], list[FExpr]] = {}
    t_f: dict[tuple[str, str], list[FExpr]] = {}
    t_if: dict[str, list[FExpr]] = {}
    for i, wi in A.initials.items():
        for t in A.out_transitions(i):
            t_i.setdefault((t.sym, t.dst), []).append(Times(Const(wi), t.weight))
    for f, wf in A.finals.items():
        for t in A.iter_transitions():
            if t.dst == f:
                t_f.setdefault((t.src, t.sym), []).append(Times(t.weight, Const(wf)))
    for i, wi in A.initials.items():
        for f, wf in A.finals.items():
            for a in A.alphabet:
                e = A.transitions.get((i, a, f))
                if e is not None:
                    t_if.setdefault(a, []).append(Times(Times(Const(wi), e), Const(wf)))
    trans = list(A.iter_transitions())
    trans += [(q_i, a, q, plus_all(es)) for (a, q), es in t_i.items()]
    trans += [(p, a, q_f, plus_all(es)) for (p, a), es in t_f.items()]
    trans += [(q_i, a, q_f, plus_all(es)) for a, es in t_if.items()]
    return Wffa(spec, A.alphabet, (q_i,) + A.states + (q_f,), {q_i: spec.one}, {q_f: spec.one}, trans)


def _copy_complete(A: Wffa) -> Wffa:
    """Both ends normalised by remembering the initial and the final state of a run.

    Inner states are triples ``(i, q, f)``; initial and final weights are folded
    into the first and last transition only when they differ from one, so a
    purely transition-weighted input keeps its weight expressions.
    """
    spec = A.spec

    def triple(i, q, f):
        return f"({i},{q},{f})"

    inner = [triple(i, q, f) for i in A.initials for f in A.finals for q in A.states]
    q_i = fresh("qI", inner)
    q_f = fresh("qF", inner + [q_i])
    trans = []
    direct: dict[str, list[FExpr]] = {}
    for i, wi in A.initials.items():
        for f, wf in A.finals.items():
            for t in A.iter_transitions():
                trans.append((triple(i, t.src, f), t.sym, triple(i, t.dst, f), t.weight))
                if t.src == i:
                    trans.append((q_i, t.sym, triple(i, t.dst, f), _scale_left(spec, wi, t.weight, True)))
                if t.dst == f:
                    trans.append((triple(i, t.src, f), t.sym, q_f, _scale_right(spec, t.weight, wf, True)))
                if t.src == i and t.dst == f:
                    e = _scale_right(spec, _scale_left(spec, wi, t.weight, True), wf, True)
                    direct.setdefault(t.sym, []).append(e)
    trans += [(q_i, a, q_f, plus_all(es)) for a, es in direct.items()]
    B = Wffa(spec, A.alphabet, [q_i] + inner + [q_f], {q_i: spec.one}, {q_f: spec.one}, trans)
    return _trim_keep(B, q_i, q_f)


def _trim_keep(A: Wffa, *keep: str) -> Wffa:
    """Trim but never drop the listed states."""
    T = trim(A)
    if all(k in T.index for k in keep):
        return T
    present = set(T.states) | set(keep)
    return Wffa(A.spec, A.alphabet, [q for q in A.states if q in present],
                {q: w for q, w in A.initials.items() if q in present},
                {q: w for q, w in A.finals.items() if q in present},
                [t for t in A.iter_transitions() if t.src in present and t.dst in present])


def normalize(A: Wffa, mode: Mode | str = Mode.INITIAL,
              strategy: Strategy | str = Strategy.STATE_COPYING) -> Wffa:
    """Behaviour-preserving normal form with a single weight-one initial and/or final state."""
    mode, strategy = Mode(mode), Strategy(strategy)
    if mode is Mode.INITIAL:
        if is_initially_normalized(A):
            return A
        return _fold_initial(A) if strategy is Strategy.WEIGHT_FOLDING else _copy_initial(A)
    if mode is Mode.FINAL:
        if is_finally_normalized(A):
            return A
        return _fold_final(A) if strategy is Strategy.WEIGHT_FOLDING else _copy_final(A)
    if epsilon_value(A) != A.spec.zero:
        raise PropernessError("complete normalisation needs a zero value on the empty word")
    if is_initially_normalized(A) and is_finally_normalized(A):
        return A
    return _fold_complete(A) if strategy is Strategy.WEIGHT_FOLDING else _copy_complete(A)


def make_purely_transition_weighted(A: Wffa) -> Wffa:
    """Equivalent automaton whose initial and final weights all equal one.

    Only possible when the empty-word value is zero or one.
    """
    spec = A.spec
    if A.is_purely_transition_weighted:
        return A
    eps = epsilon_value(A)
    if eps not in (spec.zero, spec.one):
        raise PropernessError(f"empty-word value {eps} cannot be carried by weight-one states")
    B = Wffa(spec, A.alphabet, A.states,
             {q: w for q, w in A.initials.items() if w != spec.zero},
             {q: w for q, w in A.finals.items() if w != spec.zero},
             A.iter_transitions())
    if B.is_purely_transition_weighted:
        return B
    B = _fold_initial(B) if not all(w == spec.one for w in B.initials.values()) else B
    if not all(w == spec.one for w in B.finals.values()):
        B = _fold_final(B)
    return B


# ---------------------------------------------------------------------------
# Closure operations
# ---------------------------------------------------------------------------

def op_sum(A: Wffa, B: Wffa) -> Wffa:
    """Disjoint union."""
    _same_spec(A, B)
    la = relabel(A, lambda q: f"L.{q}")
    rb = relabel(B, lambda q: f"R.{q}")
    return Wffa(A.spec, _alphabet_union(A, B), la.states + rb.states,
                {**la.initials, **rb.initials}, {**la.finals, **rb.finals},
                list(la.iter_transitions()) + list(rb.iter_transitions()))


def op_hadamard(A: Wffa, B: Wffa) -> Wffa:
    """Synchronous product; transition weights are multiplied syntactically."""
    _same_spec(A, B)
    spec = A.spec
    states = [_pair(p, q) for p in A.states for q in B.states]
    initials = {_pair(p, q): spec.mul(wp, wq) for p, wp in A.initials.items() for q, wq in B.initials.items()}
    finals = {_pair(p, q): spec.mul(wp, wq) for p, wp in A.finals.items() for q, wq in B.finals.items()}
    trans = []
    for s in A.iter_transitions():
        for t in B.iter_transitions():
            if s.sym == t.sym:
                trans.append((_pair(s.src, t.src), s.sym, _pair(s.dst, t.dst), Times(s.weight, t.weight)))
    alphabet = [a for a in A.alphabet if a in set(B.alphabet)]
    return Wffa(spec, alphabet or _alphabet_union(A, B), states, initials, finals, trans)


def op_cauchy(A: Wffa, B: Wffa, strategy: Strategy | str = Strategy.STATE_COPYING) -> Wffa:
    """Concatenation: the final state of normalised ``A`` is glued to the initial state of normalised ``B``."""
    _same_spec(A, B)
    spec = A.spec
    AF = normalize(A, Mode.FINAL, strategy)
    BI = normalize(B, Mode.INITIAL, strategy)
    q_f, q_i = sole_final(AF), sole_initial(BI)
    glue = f"L.{q_f}"

    def ren_a(q):
        return f"L.{q}"

    def ren_b(q):
        return glue if q == q_i else f"R.{q}"

    states = [ren_a(q) for q in AF.states] + [ren_b(q) for q in BI.states if q != q_i]
    initials = {ren_a(q): w for q, w in AF.initials.items()}
    finals = {ren_b(q): w for q, w in BI.finals.items()}
    trans = [(ren_a(t.src), t.sym, ren_a(t.dst), t.weight) for t in AF.iter_transitions()]
    trans += [(ren_b(t.src), t.sym, ren_b(t.dst), t.weight) for t in BI.iter_transitions()]
    C = Wffa(spec, _alphabet_union(A, B), states, initials, finals, trans)
    return trim(C)


def op_star(A: Wffa, strategy: Strategy | str = Strategy.STATE_COPYING) -> Wffa:
    """Kleene star of a proper behaviour."""
    spec = A.spec
    if epsilon_value(A) != spec.zero:
        raise PropernessError("star needs a zero value on the empty word")
    N = normalize(A, Mode.COMPLETE, strategy)
    q_i, q_f = sole_initial(N), sole_final(N)
    trans = []
    for t in N.iter_transitions():
        trans.append((t.src, t.sym, q_i if t.dst == q_f else t.dst, t.weight))
    S = Wffa(spec, N.alphabet, [q for q in N.states if q != q_f], {q_i: spec.one}, {q_i: spec.one}, trans)
    return trim(S)


# ---------------------------------------------------------------------------
# Sum expansion, monomial lowering, negation
# ---------------------------------------------------------------------------

def expand_oplus(A: Wffa) -> Wffa:
    """Split every transition with a top-level sum into one transition per summand."""
    parts = {k: summands(e) for k, e in A.transitions.items()}
    copies = {q: 1 for q in A.states}
    for (_, _, q), ss in parts.items():
        copies[q] = max(copies[q], len(ss))

    def name(q, i):
        return q if copies[q] == 1 else f"{q}#{i}"

    states = [name(q, i) for q in A.states for i in range(1, copies[q] + 1)]
    initials = {name(q, 1): w for q, w in A.initials.items()}
    finals = {name(q, i): w for q, w in A.finals.items() for i in range(1, copies[q] + 1)}
    trans = []
    for (p, a, q), ss in parts.items():
        for ip in range(1, copies[p] + 1):
            for iq, e in enumerate(ss, start=1):
                trans.append((name(p, ip), a, name(q, iq), e))
    return Wffa(A.spec, A.alphabet, states, initials, finals, trans)


def lower_to_monomials(A: Wffa) -> Wffa:
    """Equivalent automaton whose every transition weight is a monomial."""
    if not A.spec.is_arctic:
        raise UnsupportedError("monomial lowering is defined for the arctic semiring")
    trans = []
    for t in A.iter_transitions():
        ms = pwa_to_monomials(compile_pwa(t.weight, A.spec))
        trans.append((t.src, t.sym, t.dst, plus_all(m.expr for m in ms)))
    B = Wffa(A.spec, A.alphabet, A.states, A.initials, A.finals, trans)
    return expand_oplus(B)


def _affine_coeffs(alpha: FExpr) -> tuple[ExtReal, ExtReal]:
    if isinstance(alpha, Const):
        return ZERO_R, alpha.s
    if isinstance(alpha, Bind):
        return alpha.s, ZERO_R
    return alpha.l.s, alpha.r.s


def _trop_range_guard(lo: Fraction, lo_closed: bool, hi, hi_closed: bool) -> FExpr:
    """Min-plus indicator of a range of non-negative data."""
    x = Bind(ExtReal(1))
    if hi is not None and lo == hi:
        return Eq(x, Const(ExtReal(lo)))
    parts = []
    if lo > 0 or not lo_closed:
        c = Const(ExtReal(lo))
        parts.append(Eq(Plus(x, c), c) if lo_closed else Neq(Plus(x, c), x))
    if hi is not None:
        c = Const(ExtReal(hi))
        parts.append(Eq(Plus(x, c), x) if hi_closed else Neq(Plus(x, c), c))
    if not parts:
        return Eq(Const(ZERO_R), Const(ZERO_R))
    return parts[0] if len(parts) == 1 else Times(parts[0], parts[1])


def _true_ranges(constraint: FExpr) -> list[tuple]:
    """Maximal ranges of data where an arctic constraint holds, as (lo, lo_closed, hi, hi_closed)."""
    p = compile_pwa(constraint, ARCTIC)
    ranges: list[list] = []
    for i, lo, hi, pair in p.cells():
        if _is_zero(pair):
            continue
        if i % 2 == 0:
            cell = [lo, True, lo, True]
        else:
            cell = [lo, False, hi.value if hi.is_finite else None, False]
        if ranges and ranges[-1][2] == cell[0] and (ranges[-1][3] or cell[1]):
            ranges[-1][2], ranges[-1][3] = cell[2], cell[3]
        else:
            ranges.append(cell)
    return [tuple(r) for r in ranges]


def negate_to_tropical(A: Wffa) -> Wffa:
    """Min-plus automaton whose behaviour is the negated max-plus behaviour, with -inf sent to +inf.

    ``A`` must be monomial-weighted; weights that are not monomials are
    lowered first.
    """
    if not A.spec.is_arctic or A.spec.domain is not Domain.NONNEG:
        raise UnsupportedError("negation expects an arctic automaton over non-negative data")
    if not all(is_monomial(e) for e in A.transitions.values()):
        A = lower_to_monomials(A)
    trop = TROPICAL
    trans = []
    for t in A.iter_transitions():
        m = Monomial.from_expr(t.weight)
        a, b = _affine_coeffs(m.affine)
        if not (a.is_finite and b.is_finite):
            continue
        body = Times(Bind(-a), Const(-b))
        for r in _true_ranges(m.constraint):
            trans.append((t.src, t.sym, t.dst, Times(_trop_range_guard(*r), body)))
    initials = {q: -w for q, w in A.initials.items() if w.is_finite}
    finals = {q: -w for q, w in A.finals.items() if w.is_finite}
    return Wffa(trop, A.alphabet, A.states, initials, finals, trans)


def negate_value(v: ExtReal) -> ExtReal:
    """Negation on values, with -inf sent to +inf."""
    return -v


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------

FORMAT_VERSION = 1


def to_document(A: Wffa) -> dict:
    return {
        "format": "wffa",
        "version": FORMAT_VERSION,
        "semiring": {"kind": A.spec.kind.value, "domain": A.spec.domain.value},
        "alphabet": list(A.alphabet),
        "states": list(A.states),
        "initial": {q: sc.format_number(w) for q, w in A.initials.items()},
        "final": {q: sc.format_number(w) for q, w in A.finals.items()},
        "transitions": [[t.src, t.sym, t.dst, print_expr(t.weight)] for t in A.iter_transitions()],
    }


def from_document(doc: Mapping) -> Wffa:
    if doc.get("format") != "wffa":
        raise AutomatonError("not an automaton document")
    if doc.get("version") != FORMAT_VERSION:
        raise AutomatonError(f"unsupported automaton document version {doc.get('version')!r}")
    sr = doc.get("semiring", {})
    spec = SemiringSpec(Kind(sr.get("kind", "arctic")), Domain(sr.get("domain", "nonneg")))
    trans = []
    for row in doc.get("transitions", []):
        if len(row) != 4:
            raise AutomatonError(f"transition needs 4 fields: {row!r}")
        p, a, q, e = row
        trans.append((p, a, q, parse_expr(e)))
    return Wffa(spec, doc.get("alphabet", []), doc.get("states", []),
                {q: ext(w) for q, w in doc.get("initial", {}).items()},
                {q: ext(w) for q, w in doc.get("final", {}).items()}, trans)


def dumps(A: Wffa) -> str:
    return json.dumps(to_document(A), indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> Wffa:
    return from_document(json.loads(text))
