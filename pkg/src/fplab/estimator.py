"""scikit-learn style front end for the FP engine."""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_game
from .core import COL, ROW, make_game
from .engine import FPConfig, Recorder, init, run, state_probabilities


class FictitiousPlay(BaseEstimator):
    """Run Fictitious Play on a bimatrix game.

    Parameters
    ----------
    n_steps : int
        Number of FP steps ``T`` (step 1 is the initial assignment).
    tie_rule : str
        ``"lowest"``, ``"highest"`` or ``"incumbent"``.
    start : tuple of int
        0-based initial ``(row, column)`` actions.
    epsilon_schedule : str or iterable of int
        When to record exact regrets, see :class:`fplab.engine.Recorder`.

    Attributes
    ----------
    trace_ : Trace
    state_ : FPState
    epsilon_ : list of EpsilonSample
    row_strategy_, col_strategy_ : MixedStrategy
        Empirical mixes at ``n_steps``.
    n_ties_ : int
        Steps at which either player's argmax had several elements.
    """

    def __init__(self, n_steps=1000, tie_rule="lowest", start=(0, 0), epsilon_schedule="default"):
        self.n_steps = n_steps
        self.tie_rule = tie_rule
        self.start = start
        self.epsilon_schedule = epsilon_schedule

    def fit(self, X, y=None):
        """``X`` is a :class:`BimatrixGame` or an ``(R, C)`` pair of matrices."""
        game = X if not isinstance(X, tuple) else make_game(*X)
        check_game(game)
        if int(self.n_steps) < 1:
            raise ValueError(f"n_steps must be positive, got {self.n_steps}")
        config = FPConfig(self.tie_rule, self.start[0], self.start[1])
        recorder = Recorder(self.epsilon_schedule)
        state = init(game, config)
        run(state, int(self.n_steps), recorder)
        self.game_ = game
        self.state_ = state
        self.trace_ = state.trace
        self.epsilon_ = recorder.samples
        self.row_strategy_ = state_probabilities(state, ROW)
        self.col_strategy_ = state_probabilities(state, COL)
        self.n_ties_ = state.tie_steps
        return self

    def fit_transform(self, X, y=None):
        """Fit, then return the empirical ``(row_mix, col_mix)`` pair."""
        return self.fit(X).transform(X)

    def transform(self, X=None):
        check_is_fitted(self, "state_")
        return self.row_strategy_, self.col_strategy_

    def score(self, X=None, y=None):
        """Negated normalized epsilon of the final empirical profile (higher is better)."""
        check_is_fitted(self, "state_")
        from .engine import fast_regret

        return -float(max(fast_regret(self.state_, ROW)[1], fast_regret(self.state_, COL)[1]))
