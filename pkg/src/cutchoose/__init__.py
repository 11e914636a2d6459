"""Workbench for finite cut-and-choose, poset, and Banach-Mazur games.

Build game instances over finite ground sets, monotone families, posets,
and Boolean algebras; solve them exactly; run the constructive strategy
transformations; and audit the characterization table at desk scale.
"""

from ._version import ENGINE_VERSION as __version__

from .errors import (CapacityError, CutChooseError, IllegalMoveError,
                     SigmaSearchError, StrategyError, TransformSoundnessError,
                     ValidationError)
from .structures import (FiniteBooleanAlgebra, FinitePoset, GroundSet,
                         Ideal, IPartition, MonotoneFamily, QuotientAlgebra,
                         enumerate_cut_moves, full_disjointification,
                         is_maximal_i_partition, is_positive, quotient_algebra,
                         validate_family)
from .engine import (GameInstance, GameState, Strategy, TableStrategy,
                     Transcript, apply_move, initial_state, legal_moves,
                     play_out, terminal_status, verify_winning_strategy)
from .solver import RefuteResult, SolveResult, refute, reference_winner, solve
