"""Weighted finite automata over finance semirings with exact arithmetic."""
from . import automaton, decide, instruments, pwa, regex, semiring_core
from .automaton import (Mode, Strategy, Wffa, behavior, behavior_bruteforce, behavior_matrix,
                        expand_oplus, lower_to_monomials, make_purely_transition_weighted,
                        make_word, negate_to_tropical, normalize, op_cauchy, op_hadamard, op_star,
                        op_sum)
from .decide import (behavior_sup, make_interval, support_nfa, support_nonempty, threshold_gt,
                     transition_sups)
from .pwa import Interval, PiecewiseAffine, compile_pwa, pwa_sup, reduce_primitive_sum
from .regex import (classify_regex, parse_regex, print_regex, regex_semantics_oracle,
                    regex_to_wffa, wffa_to_regex)
from .semiring_core import (ARCTIC, ARCTIC_REAL, NEG_INF, POS_INF, TROPICAL, Bind, Const, Eq,
                            ExtReal, Neq, Plus, SemiringSpec, Times, classify_expr, eval_expr, ext,
                            parse_expr, print_expr)

__version__ = "0.1.0"
