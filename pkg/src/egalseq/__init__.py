"""Egalitarian sequences of committees over multilevel elections."""

from .model import (
    CommitteeSequence,
    Election,
    Level,
    SatHistogram,
    ScoreTriple,
    agent_scores,
    lex_compare,
    read_election,
    sat_histogram,
    score_agent,
    score_agent_min,
    score_level,
    score_level_min,
    score_sum,
    score_triple,
    write_election,
)
from .rules import RULES, rule_greedy, rule_greedy_all, rule_sum, single_winner, winners
from .solver import Objective, SolveConfig, WinnerSet, solve_all, solve_one

__version__ = "0.1.0"
