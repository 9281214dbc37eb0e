"""Partial-order reduction for client/server systems.

Exact and polynomial tests for whether an action set includes a first set
of some maximal run, source-set constructions built on them, and
exploration engines that emit sound and complete reduced transition systems.
"""

from .explorer import PRESETS, ExploreConfig, count_full_paths, explore, explore_tree, preset
from .generators import (
    Cnf,
    builtin_model,
    gen_boolean_gates,
    gen_lowerbound,
    gen_multilocks,
    gen_philosophers,
    gen_sat_ifs,
    parse_dimacs,
)
from .heuristics import apifs, build_index, choose_action, closure, min_closure, p_set, pifs, rpifs
from .model import System, SystemBuilder, format_system, parse_system, validate_system
from .traces import first_set, ifs_bruteforce, ifs_exact, lex_normal_form
from .verifier import build_full_ts, check_completeness, check_soundness, check_trace_optimality, verify

__version__ = "0.1.0"

__all__ = [
    "PRESETS", "ExploreConfig", "count_full_paths", "explore", "explore_tree", "preset",
    "Cnf", "builtin_model", "gen_boolean_gates", "gen_lowerbound", "gen_multilocks",
    "gen_philosophers", "gen_sat_ifs", "parse_dimacs",
    "apifs", "build_index", "choose_action", "closure", "min_closure", "p_set", "pifs", "rpifs",
    "System", "SystemBuilder", "format_system", "parse_system", "validate_system",
    "first_set", "ifs_bruteforce", "ifs_exact", "lex_normal_form",
    "build_full_ts", "check_completeness", "check_soundness", "check_trace_optimality", "verify",
]
