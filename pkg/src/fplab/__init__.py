"""Exact-arithmetic Fictitious Play on two-player games."""

from .core import (
    BimatrixGame,
    MixedStrategy,
    best_response_set,
    expected_payoff,
    make_game,
    normalize_to_unit,
    payoff_vector,
    profile_epsilon,
    regret,
)
from .engine import FPConfig, FPState, Recorder, Trace, init, oracle_run, run, simulate, step
from .estimator import FictitiousPlay
from .generators import (
    GnParams,
    build_gn,
    build_matching_pennies,
    build_random,
    build_shapley,
    gn_params,
    read_game,
    write_game,
)

__version__ = "0.1.0"
