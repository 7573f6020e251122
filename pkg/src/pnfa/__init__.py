"""Backtracking analysis of regular expression matchers via prioritized NFAs."""

from .automaton import (ACC, REJ, BtrTree, MatchResult, Nfa, Pnfa, Run, Tree, accepting_run, btr,
                        btr_measure, btr_size, btr_steps, count_short_accepting_runs, match_run, nfa_membership,
                        succeeds, underlying_nfa)
from .ambiguity import BacktrackClass, Verdict, classify, classify_failure_backtracking, failure_pnfa
from .construct import compile_regex, java_pnfa, thompson_prioritized
from .regex import BudgetExceeded, RegexAst, RegexSyntaxError, java_match, parse, to_text
from .flatten import flatten
from .transducer import build_stt, decorate, run_stt

__version__ = "0.1.0"
