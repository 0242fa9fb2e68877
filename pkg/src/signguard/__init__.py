"""Tamper detection for error-correction-coded smart road signs.

The pipeline: model the symbol-error channel, build the zero-sum game
between a tampering attacker and an error-count-based alert rule, and solve
the detector-commits-first equilibrium by linear programming.  `evaluate`
validates the result against exact small-instance oracles, Monte Carlo
simulation, and the published reference tables; `cli` is the batch front
end.
"""

from .codes import CodeParams, DecodeResult, rs_decode, rs_encode
from .channel import ChannelModel, RhoMatrix, build_transition_matrix
from .game import ExactQuotient, GameWeights, RelaxedGame, SignPrior, build_relaxed_game
from .lp import Equilibrium, LinearProgram, simplex_solve, solve_equilibrium

__version__ = "0.1.0"

__all__ = [
    "CodeParams",
    "ChannelModel",
    "DecodeResult",
    "Equilibrium",
    "ExactQuotient",
    "GameWeights",
    "LinearProgram",
    "RelaxedGame",
    "RhoMatrix",
    "SignPrior",
    "build_relaxed_game",
    "build_transition_matrix",
    "rs_decode",
    "rs_encode",
    "simplex_solve",
    "solve_equilibrium",
    "__version__",
]
