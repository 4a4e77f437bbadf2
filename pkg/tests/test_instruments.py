import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from finwffa import instruments as ins
from finwffa.automaton import behavior, make_word, op_hadamard
from finwffa.regex import regex_semantics_oracle
from finwffa.semiring_core import (ARCTIC, ARCTIC_REAL, NEG_INF, DomainError, ExprClass, ExtReal,
                                   classify_expr)

BOT = ins.BOT
ENGINES = ("matrix", "brute")
prices = st.fractions(min_value=0, max_value=120, max_denominator=4)


def both(A, w):
    vals = {behavior(A, w, e) for e in ENGINES}
    assert len(vals) == 1
    return vals.pop()


class TestBond:
    def test_default_free(self):
        A = ins.build_bond(5, 100, 95)
        assert both(A, ins.bond_word(["0.9", "0.8"])) == ExtReal("-6.5")

    def test_default(self):
        A = ins.build_bond(5, 100, 95)
        assert both(A, make_word([("cpn", "0.9"), ("dfl", "0.5")])) == ExtReal("-90.5")

    def test_zero_price_gives_present_value(self):
        A = ins.build_bond(5, 100)
        assert both(A, ins.bond_word([1, 1, 1])) == ExtReal(115)

    def test_words_must_end_with_maturity_or_default(self):
        A = ins.build_bond(5, 100, 95)
        assert both(A, make_word([("cpn", 1)])) == NEG_INF
        assert both(A, make_word([("fin", 1), ("cpn", 1)])) == NEG_INF

    def test_negative_coupon_is_rejected(self):
        with pytest.raises(ValueError):
            ins.build_bond(-1, 100)

    @given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=20), min_size=1, max_size=5),
           st.booleans())
    def test_matches_closed_form(self, factors, defaulted):
        A = ins.build_bond(5, 100, 95)
        want = ins.bond_payoff(5, 100, 95, factors, defaulted)
        assert both(A, ins.bond_word(factors, defaulted)) == ExtReal(want)

    def test_regex_agrees(self):
        R = ins.bond_regex(5, 100, 95)
        for f in (["0.9"], ["0.9", "0.8"], ["0.9", "0.8", "0.7"]):
            for d in (False, True):
                w = ins.bond_word(f, d)
                assert regex_semantics_oracle(ARCTIC, R, w) == ExtReal(ins.bond_payoff(5, 100, 95, f, d))


class TestCalls:
    def test_long(self):
        assert both(ins.build_euro_call("long", 2, 50), ins.price_word([55])) == ExtReal(3)

    def test_short(self):
        assert both(ins.build_euro_call("short", 2, 50), ins.price_word([55])) == ExtReal(-3)

    @given(prices)
    def test_long_and_short_cancel(self, s):
        H = op_hadamard(ins.build_euro_call("long", 2, 50), ins.build_euro_call("short", 2, 50))
        assert both(H, ins.price_word([s])) == ExtReal(0)

    @pytest.mark.parametrize("position", ["long", "short"])
    @given(s=prices)
    def test_closed_form(self, position, s):
        A = ins.build_euro_call(position, 2, 50)
        assert both(A, ins.price_word([s])) == ExtReal(ins.euro_call_payoff(position, 2, 50, s))

    def test_only_short_uses_guards(self):
        short = ins.build_euro_call("short", 2, 50).transitions.values()
        long = ins.build_euro_call("long", 2, 50).transitions.values()
        assert {classify_expr(e) for e in short} == {ExprClass.MONOMIAL}
        assert {classify_expr(e) for e in long} == {ExprClass.PRIMITIVE, ExprClass.CONSTANT}

    def test_long_regex(self):
        R = ins.euro_call_long_regex(2, 50)
        assert regex_semantics_oracle(ARCTIC, R, ins.price_word([55])) == ExtReal(3)

    def test_american(self):
        A = ins.build_american_call(2, 50)
        assert both(A, ins.price_word([40, 60, 55])) == ExtReal(8)
        assert both(A, ins.price_word([40])) == ExtReal(-2)

    @given(st.lists(prices, min_size=1, max_size=4), st.data())
    def test_american_closed_form_and_monotone(self, path, draw):
        A = ins.build_american_call(2, 50)
        v = both(A, ins.price_word(path))
        assert v == ExtReal(ins.american_call_payoff(2, 50, path))
        i = draw.draw(st.integers(0, len(path) - 1))
        bumped = list(path)
        bumped[i] += 5
        assert behavior(A, ins.price_word(bumped)) >= v

    def test_american_regex(self):
        R = ins.american_call_regex(2, 50)
        for path in ([40], [40, 60, 55], [70, 30]):
            want = ExtReal(ins.american_call_payoff(2, 50, path))
            assert regex_semantics_oracle(ARCTIC, R, ins.price_word(path)) == want

    def test_unknown_position(self):
        with pytest.raises(ValueError):
            ins.build_euro_call("sideways", 2, 50)


class TestBullSpread:
    @pytest.mark.parametrize("s, want", [(55, 7), (0, 2), (70, 12), (50, 2), (60, 12)])
    def test_examples(self, s, want):
        assert both(ins.build_bull_spread(1, 50, 3, 60), ins.price_word([s])) == ExtReal(want)

    def test_strike_order(self):
        with pytest.raises(ValueError):
            ins.build_bull_spread(1, 60, 3, 50)
        with pytest.raises(ValueError):
            ins.build_bull_spread(1, 50, 3, 50)

    @given(prices)
    def test_bounded(self, s):
        v = behavior(ins.build_bull_spread(1, 50, 3, 60), ins.price_word([s]))
        assert ExtReal(3 - 1) <= v <= ExtReal(3 - 1 + (60 - 50))


class TestOtherBuilders:
    def test_ddm(self):
        assert both(ins.build_ddm(), make_word([("div", 2), ("sell", 90)])) == ExtReal(92)

    @pytest.mark.parametrize("path, want", [
        ([51, 53, 48, 46], ExtReal(480)),
        ([51, 53, 51, 52], NEG_INF),
        ([], NEG_INF),
        ([50], ExtReal(500)),
    ])
    def test_limit_order(self, path, want):
        assert both(ins.build_limit_order(), ins.price_word(path, "a")) == want

    def test_cancelled_limit_order(self):
        w = make_word([("a", 51), ("c", 0)])
        assert both(ins.build_limit_order(), w) == NEG_INF

    def test_limit_order_parameters(self):
        A = ins.build_limit_order(limit=40, qty=3)
        assert both(A, ins.price_word([45, 39], "a")) == ExtReal(117)

    def test_builders_table(self):
        assert set(ins.BUILDERS) == {"bond", "ddm", "euro_call", "american_call", "limit_order", "bull_spread"}


class TestDuration:
    @staticmethod
    def float_duration(C, F, s, n, delta):
        def value(r):
            return sum(C / (1 + r) ** i for i in range(1, n + 1)) + F / (1 + r) ** n
        return (value(s - delta) - value(s + delta)) / (2 * value(s) * delta)

    def test_coupon_bond(self):
        A = ins.build_bond(5, 100)
        d = ins.effective_duration(A, ["0.05"] * 3, "0.001")
        assert d > 0
        assert abs(float(d) - self.float_duration(5, 100, 0.05, 3, 0.001)) < 1e-9

    def test_zero_coupon_one_period(self):
        A = ins.build_bond(0, 100)
        d = ins.effective_duration(A, ["0.05"], "0.0001")
        assert abs(float(d) - 1 / 1.05) < 1e-6

    def test_engines_agree(self):
        A = ins.build_bond(5, 100)
        spots = ["0.01", "0.02", "0.03"]
        assert ins.effective_duration(A, spots, "0.01", "matrix") == ins.effective_duration(A, spots, "0.01", "brute")

    def test_shift_flips_sign(self):
        up = ins.discount_factors(["0.05"] * 3, "0.01")
        down = ins.discount_factors(["0.05"] * 3, "-0.01")
        assert all(u < d for u, d in zip(up, down))

    def test_discount_factors_are_exact(self):
        assert ins.discount_factors(["0.25", "0.25"]) == [Fraction(4, 5), Fraction(16, 25)]

    def test_rate_domain(self):
        with pytest.raises(DomainError):
            ins.effective_duration(ins.build_bond(5, 100), ["0.05"], "1.05")

    def test_zero_value(self):
        with pytest.raises(ZeroDivisionError):
            ins.effective_duration(ins.build_bond(0, 0), ["0.05"], "0.01")

    @pytest.mark.parametrize("spots, delta", [([], "0.01"), (["0.05"], "0"), (["0.05"], "-0.01")])
    def test_bad_arguments(self, spots, delta):
        with pytest.raises(ValueError):
            ins.effective_duration(ins.build_bond(5, 100), spots, delta)


class TestScenarios:
    def test_limit_order_row(self):
        s = ins.parse_scenarios("w1, a:51, a:53, a:48, a:46\n", ("a", "c"))
        assert s.labels == ["w1"]
        assert s.rows == [ins.price_word([51, 53, 48, 46], "a")]

    def test_blank_line_is_empty_scenario(self):
        s = ins.parse_scenarios("x, a:1\n\n", ("a",))
        assert list(s) == [("x", make_word([("a", 1)])), ("", ())]

    def test_comments_and_fractions(self):
        s = ins.parse_scenarios("# header\nx, a:1/3, a:.5\n")
        assert s.rows == [make_word([("a", Fraction(1, 3)), ("a", Fraction(1, 2))])]
        assert s.alphabet == ("a",)

    def test_unknown_symbol(self):
        with pytest.raises(DomainError, match="line 2"):
            ins.parse_scenarios("x, a:1\nx, q:1\n", ("a",))

    def test_negative_data(self):
        with pytest.raises(DomainError, match="line 1"):
            ins.parse_scenarios("x, a:-1\n", ("a",))
        s = ins.parse_scenarios("x, a:-1\n", ("a",), ARCTIC_REAL)
        assert s.rows[0][0][1] == -1

    @pytest.mark.parametrize("text, line", [
        ("a:1, a:2\n", 1),
        ("x, a1\n", 1),
        ("ok, a:1\nx, a:abc\n", 2),
        ("x, :3\n", 1),
    ])
    def test_syntax_errors_carry_lines(self, text, line):
        with pytest.raises(ins.ScenarioSyntaxError) as info:
            ins.parse_scenarios(text)
        assert info.value.line == line

    def test_load_from_file(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("w1, a:51, a:53, a:48, a:46\nw2, a:51, a:53, a:51, a:52\n")
        s = ins.load_scenarios(p, ("a", "c"))
        A = ins.build_limit_order()
        assert [behavior(A, w) for _, w in s] == [ExtReal(480), NEG_INF]


class TestFixtures:
    def test_max_of_two(self):
        A = ins.max_of_two_automaton()
        rng = random.Random(5)
        for _ in range(20):
            x, y = rng.randint(0, 20), rng.randint(0, 20)
            assert both(A, ins.price_word([x, y])) == ExtReal(max(x, y))

    def test_parabola_needs_positive_size(self):
        with pytest.raises(ValueError):
            ins.parabola_envelope(0)
        assert ins.parabola_envelope(2).n_states == 4


class TestParams:
    def test_records_normalize_numbers(self):
        assert ins.BondParams("5", 100, "95.5").price == Fraction(191, 2)
        assert ins.CallParams(-1, 50).premium == -1
        assert ins.LimitOrderParams().limit == 50

    @pytest.mark.parametrize("make", [
        lambda: ins.CallParams(2, -1),
        lambda: ins.CallParams("inf", 50),
        lambda: ins.LimitOrderParams(qty=-1),
    ])
    def test_validation(self, make):
        with pytest.raises(ValueError):
            make()
