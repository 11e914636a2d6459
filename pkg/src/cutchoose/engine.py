"""Game instances, the referee, strategies, playouts, and verification.

Five game families share one engine:

* ``U``         -- one player repeatedly partitions a set, the other picks;
* ``G_ideal``   -- the cut moves are maximal almost-disjoint positive families;
* ``G_poset``   -- the cut moves are maximal antichains of a poset or algebra;
* ``BM_ideal``  -- both players shrink a positive set, weak inclusion;
* ``BM_poset``  -- both players descend in a poset.

A position is abstracted to ``(round, to_move, core, pending)``: the running
intersection (or lower-bound set / current set) plus the cut move awaiting a
pick.  Two histories with equal abstractions are game-equivalent; the solver
relies on this and the test suite cross-checks it against raw history search.

Legality comes in two tiers.  ``legal_moves`` is the canonical enumeration
used for solving and exhaustive verification; it omits dominated cut moves
with empty pieces.  ``apply_move`` accepts any *structurally* valid move, so
strategies produced by transformations may play degenerate partitions such as
``(X, {})`` and the referee tolerates them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

from .errors import (CapacityError, IllegalMoveError, StrategyError,
                     ValidationError)
from .structures import (DEFAULT_MOVE_BUDGET, FiniteBooleanAlgebra,
                         FinitePoset, GroundSet, IPartition, MonotoneFamily,
                         enumerate_algebra_antichains,
                         enumerate_disjoint_partitions, enumerate_i_partitions,
                         enumerate_poset_antichains, format_mask,
                         ipartition_violation, is_maximal_i_partition,
                         is_positive, mask_elements, mask_key, sorted_masks,
                         submasks)

# Roles
CUT = "Cut"
CHOOSE = "Choose"
EMPTY = "Empty"
NONEMPTY = "Nonempty"

# Game families
U = "U"
G_IDEAL = "G_ideal"
G_POSET = "G_poset"
BM_IDEAL = "BM_ideal"
BM_POSET = "BM_poset"

GAME_FAMILIES = (U, G_IDEAL, G_POSET, BM_IDEAL, BM_POSET)
MASK_GAMES = (U, G_IDEAL, BM_IDEAL)
POSET_GAMES = (G_POSET, BM_POSET)
BM_GAMES = (BM_IDEAL, BM_POSET)

# Variants
EXACT = "exact"
WEAK = "weak"
STRICT_PREFIX = "strict_prefix"
VARIANTS = (EXACT, WEAK, STRICT_PREFIX)


@dataclass(frozen=True)
class GameInstance:
    """A fully parameterized game.

    ``cut_current`` selects the partition convention: cut the running
    intersection (the chain form) or always cut the starting set.  For
    full-partition and maximal moves the winner is the same either way;
    the test corpus asserts this invariance.
    """

    game_family: str
    start: int
    rounds: int
    width: Optional[int]
    variant: str = EXACT
    maximal: bool = True
    cut_current: bool = True
    ground: Optional[GroundSet] = None
    family: Optional[MonotoneFamily] = None
    poset: Optional[FinitePoset] = None
    algebra: Optional[FiniteBooleanAlgebra] = None
    move_budget: int = DEFAULT_MOVE_BUDGET

    def __post_init__(self):
        if self.game_family not in GAME_FAMILIES:
            raise ValidationError(f"unknown game family {self.game_family!r}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if self.rounds < 1:
            raise ValidationError("rounds must be >= 1")
        if self.game_family in MASK_GAMES:
            if self.ground is None or self.family is None:
                raise ValidationError(
                    f"{self.game_family} needs a ground set and a family")
            self.ground.check_mask(self.start, "start")
            if not is_positive(self.family, self.start):
                raise ValidationError("start must be I-positive")
        else:
            if (self.poset is None) == (self.algebra is None):
                raise ValidationError(
                    f"{self.game_family} needs exactly one of poset/algebra")
            if self.poset is not None:
                if not (0 <= self.start < self.poset.size):
                    raise ValidationError("start element out of range")
            else:
                self.algebra.atoms.check_mask(self.start, "start")
                if self.start == 0:
                    raise ValidationError("start must be a nonzero element")
        if self.game_family in BM_GAMES:
            if self.width is not None:
                raise ValidationError("Banach-Mazur games take no width bound")
        elif self.game_family == U:
            if self.width is None:
                raise ValidationError("unbounded width is only for G/BM families")
            if self.width < 2:
                raise ValidationError("width must be >= 2")
        else:
            if self.width is not None and self.width < 2:
                raise ValidationError("width must be >= 2 or unbounded")

    @property
    def cutter(self) -> str:
        return EMPTY if self.game_family in BM_GAMES else CUT

    @property
    def picker(self) -> str:
        return NONEMPTY if self.game_family in BM_GAMES else CHOOSE

    def opponent(self, role: str) -> str:
        return self.picker if role == self.cutter else self.cutter

    @property
    def on_algebra(self) -> bool:
        return self.algebra is not None


Move = Union[int, tuple]


@dataclass(frozen=True)
class GameState:
    round: int
    to_move: str
    core: int
    pending: Optional[tuple] = None

    def key(self) -> tuple:
        return (self.round, self.to_move, self.core, self.pending)


def initial_state(inst: GameInstance) -> GameState:
    if inst.game_family == G_POSET and inst.algebra is None:
        core = inst.poset.down[inst.start]
    else:
        core = inst.start
    return GameState(0, inst.cutter, core, None)


def core_positive(inst: GameInstance, core: int) -> bool:
    """The picker-side survival condition on the running core."""
    if inst.game_family in (U, G_IDEAL, BM_IDEAL):
        return is_positive(inst.family, core)
    return core != 0


def core_nonempty(inst: GameInstance, core: int) -> bool:
    if inst.game_family == BM_POSET and inst.algebra is None:
        # The core is a poset element and is itself a lower bound of the
        # descending chain, whatever its index.
        return True
    return core != 0


def _poset_core_max(inst: GameInstance, core: int) -> int:
    """Unique maximal element of a lower-bound set of a descending chain."""
    for e in mask_elements(core):
        if core & ~inst.poset.down[e] == 0:
            return e
    raise IllegalMoveError("lower-bound set has no maximum", "chain-core")


def cut_target(inst: GameInstance, state: GameState) -> int:
    """The set (or poset element) the next cut move must partition."""
    if not inst.cut_current:
        return inst.start
    if inst.game_family in (U, G_IDEAL):
        return state.core
    if inst.algebra is not None:
        return state.core
    return _poset_core_max(inst, state.core)


# ---------------------------------------------------------------------------
# Terminal evaluation
# ---------------------------------------------------------------------------

ONGOING = "ongoing"


@dataclass(frozen=True)
class Outcome:
    status: str                      # "ongoing" or a role name
    reason: str = ""

    @property
    def ongoing(self) -> bool:
        return self.status == ONGOING


def terminal_status(inst: GameInstance, state: GameState) -> Outcome:
    fam = inst.game_family
    if fam in BM_GAMES:
        if state.round >= inst.rounds:
            if core_nonempty(inst, state.core):
                return Outcome(NONEMPTY, "final core nonempty")
            return Outcome(EMPTY, "final core empty")
        return Outcome(ONGOING)

    after_pick = state.pending is None and state.round >= 1
    finished = state.round >= inst.rounds and state.pending is None
    positive = core_positive(inst, state.core)
    if fam == G_POSET:
        fell = "lower-bound set vanished at round " + str(state.round)
        final_good = "choices have a common lower bound"
        final_bad = "choices have no common lower bound"
    else:
        fell = "running intersection fell into the family at round " + str(state.round)
        final_good = "final intersection positive"
        final_bad = "final intersection in the family"

    if inst.variant == WEAK:
        if after_pick and not positive:
            return Outcome(CUT, fell)
        if finished:
            return Outcome(CHOOSE, "survived every round")
        return Outcome(ONGOING)
    if inst.variant == STRICT_PREFIX:
        if after_pick and state.round <= inst.rounds - 1 and not positive:
            return Outcome(CUT, fell)
        if finished:
            return Outcome(CHOOSE, "every proper prefix stayed positive")
        return Outcome(ONGOING)
    # exact
    if finished:
        if positive:
            return Outcome(CHOOSE, final_good)
        return Outcome(CUT, final_bad)
    return Outcome(ONGOING)


# ---------------------------------------------------------------------------
# Moves
# ---------------------------------------------------------------------------

def legal_moves(inst: GameInstance, state: GameState) -> list:
    """Canonically ordered move list at a non-terminal position."""
    fam = inst.game_family
    if state.pending is not None:
        return list(state.pending)
    if fam == U:
        return enumerate_disjoint_partitions(cut_target(inst, state), inst.width,
                                             inst.move_budget)
    if fam == G_IDEAL:
        return enumerate_i_partitions(inst.family, cut_target(inst, state),
                                      inst.width, inst.maximal, inst.move_budget)
    if fam == G_POSET:
        target = cut_target(inst, state)
        if inst.algebra is not None:
            return enumerate_algebra_antichains(inst.algebra, target, inst.width,
                                                inst.maximal, inst.move_budget)
        return enumerate_poset_antichains(inst.poset, target, inst.width,
                                          inst.maximal, inst.move_budget)
    if fam == BM_IDEAL:
        return sorted_masks(s for s in submasks(state.core)
                            if is_positive(inst.family, s))
    # BM_poset
    if inst.algebra is not None:
        return sorted_masks(s for s in submasks(state.core) if s)
    return sorted(mask_elements(inst.poset.down[state.core]))


def validate_move(inst: GameInstance, state: GameState, move) -> None:
    """Structural legality: raises IllegalMoveError naming the violated rule.

    Wider than the canonical enumeration: partitions with empty pieces pass.
    """
    fam = inst.game_family
    if fam in BM_GAMES:
        if fam == BM_IDEAL:
            if not isinstance(move, int):
                raise IllegalMoveError("move must be a subset mask", "bm-move-shape")
            if move & ~state.core:
                raise IllegalMoveError("move must be a subset of the current set",
                                       "bm-decreasing")
            if not is_positive(inst.family, move):
                raise IllegalMoveError("move must be I-positive", "bm-positive")
        else:
            if inst.algebra is not None:
                if not isinstance(move, int) or move == 0:
                    raise IllegalMoveError("move must be a nonzero element",
                                           "bm-nonzero")
                if move & ~state.core:
                    raise IllegalMoveError("move must lie below the current element",
                                           "bm-decreasing")
            else:
                if not isinstance(move, int) or not (0 <= move < inst.poset.size):
                    raise IllegalMoveError("move must be a poset element",
                                           "bm-element")
                if not inst.poset.leq(move, state.core):
                    raise IllegalMoveError("move must lie below the current element",
                                           "bm-decreasing")
        return

    if state.pending is not None:
        if move not in state.pending:
            raise IllegalMoveError("pick must be a piece of the pending move",
                                   "pick-from-pending")
        return

    if not isinstance(move, tuple) or not move:
        raise IllegalMoveError("cut move must be a nonempty tuple of pieces",
                               "cut-shape")
    target = cut_target(inst, state)
    if fam == U:
        union = 0
        for p in move:
            if not isinstance(p, int):
                raise IllegalMoveError("pieces must be subset masks", "cut-shape")
            if p & ~target:
                raise IllegalMoveError("piece leaves the set being cut",
                                       "piece-inside-target")
            if p & union:
                raise IllegalMoveError("pieces must be pairwise disjoint",
                                       "pieces-disjoint")
            union |= p
        if union != target:
            raise IllegalMoveError("pieces must cover the set being cut",
                                   "pieces-cover")
        nonempty = sum(1 for p in move if p)
        if inst.width is not None and nonempty > inst.width:
            raise IllegalMoveError(f"more than {inst.width} nonempty pieces",
                                   "width")
        return
    if fam == G_IDEAL:
        if inst.width is not None and len(move) > inst.width:
            raise IllegalMoveError(f"more than {inst.width} pieces", "width")
        err = ipartition_violation(inst.family, target, move)
        if err:
            raise IllegalMoveError(err, "i-partition")
        if inst.maximal:
            ok, witness = is_maximal_i_partition(
                IPartition(target, tuple(sorted_masks(move)), inst.family))
            if not ok:
                raise IllegalMoveError(
                    f"family is not maximal; witness {format_mask(witness)}",
                    "maximality")
        return
    # G_poset
    if inst.width is not None and len(move) > inst.width:
        raise IllegalMoveError(f"more than {inst.width} elements", "width")
    if inst.algebra is not None:
        union = 0
        for p in move:
            if not isinstance(p, int) or p == 0:
                raise IllegalMoveError("antichain elements must be nonzero",
                                       "antichain-nonzero")
            if p & ~target:
                raise IllegalMoveError("element not below the target",
                                       "antichain-below")
            if p & union:
                raise IllegalMoveError("elements must be pairwise incompatible",
                                       "antichain")
            union |= p
        if inst.maximal and union != target:
            raise IllegalMoveError("antichain is not maximal below the target",
                                   "maximality")
    else:
        for p in move:
            if not (0 <= p < inst.poset.size) or not inst.poset.leq(p, target):
                raise IllegalMoveError("element not below the target",
                                       "antichain-below")
        seen = list(move)
        for i, a in enumerate(seen):
            for b in seen[i + 1:]:
                if a == b or inst.poset.compatible(a, b):
                    raise IllegalMoveError("elements must be pairwise incompatible",
                                           "antichain")
        if inst.maximal and not inst.poset.is_maximal_antichain_below(target, seen):
            raise IllegalMoveError("antichain is not maximal below the target",
                                   "maximality")


def apply_move(inst: GameInstance, state: GameState, move,
               check: bool = True) -> GameState:
    if check:
        validate_move(inst, state, move)
    fam = inst.game_family
    if fam in BM_GAMES:
        if state.to_move == EMPTY:
            return GameState(state.round, NONEMPTY, move, None)
        return GameState(state.round + 1, EMPTY, move, None)
    if state.pending is None:
        return GameState(state.round, CHOOSE, state.core, tuple(move))
    if fam == G_POSET and inst.algebra is None:
        core = state.core & inst.poset.down[move]
    else:
        core = state.core & move
    return GameState(state.round + 1, CUT, core, None)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

POSITIONAL_TABLE = "positional_table"
SIMULATION = "simulation"


class Strategy:
    """A deterministic decision procedure for one role.

    ``decide`` receives the abstract position and the full move history; it
    must be a pure function of them, so one strategy object can serve many
    concurrent playouts and tree branches.
    """

    def __init__(self, role: str, kind: str, name: str = ""):
        self.role = role
        self.kind = kind
        self.name = name or self.__class__.__name__

    def decide(self, inst: GameInstance, state: GameState, history: tuple):
        raise NotImplementedError


class TableStrategy(Strategy):
    """Positional strategy backed by an explicit state-to-move table."""

    def __init__(self, role: str, entries: dict, name: str = "table"):
        super().__init__(role, POSITIONAL_TABLE, name)
        self.entries = dict(entries)

    def decide(self, inst, state, history):
        key = state.key()
        if key not in self.entries:
            raise StrategyError(f"{self.name}: no entry for position {key}")
        return self.entries[key]


class FunctionStrategy(Strategy):
    def __init__(self, role: str, fn: Callable, kind: str = SIMULATION,
                 name: str = "fn"):
        super().__init__(role, kind, name)
        self.fn = fn

    def decide(self, inst, state, history):
        return self.fn(inst, state, history)


def sorted_pieces(inst: GameInstance, pieces: Iterable) -> list:
    if inst.game_family == G_POSET and inst.algebra is None:
        return sorted(pieces)
    return sorted(pieces, key=mask_key)


def greedy_picker_strategy(inst: GameInstance) -> Strategy:
    """Pick the first piece (canonical order) keeping the core positive.

    With maximal cut moves such a piece always exists; the fallback to the
    first piece only triggers on non-maximal move sets.  In Banach-Mazur
    games this degenerates to replaying the current set.
    """
    def fn(inst_, state, history):
        if state.pending is None:
            return state.core
        pieces = sorted_pieces(inst_, state.pending)
        for p in pieces:
            nxt = apply_move(inst_, state, p, check=False)
            if core_positive(inst_, nxt.core):
                return p
        return pieces[0]

    return FunctionStrategy(inst.picker, fn, SIMULATION, "greedy-positivity")


def copy_strategy(inst: GameInstance) -> Strategy:
    """Banach-Mazur survival by repetition: always replay the current set."""
    def fn(inst_, state, history):
        return state.core

    return FunctionStrategy(inst.picker, fn, SIMULATION, "copy")


def first_move_strategy(inst: GameInstance, role: str) -> Strategy:
    """Always play the canonically first legal move (a total baseline)."""
    def fn(inst_, state, history):
        moves = legal_moves(inst_, state)
        if not moves:
            raise StrategyError("no legal moves at position "
                                f"{state.key()}")
        return moves[0]

    return FunctionStrategy(role, fn, SIMULATION, "first-move")


def seeded_table_strategy(inst: GameInstance, role: str, seed: int) -> Strategy:
    """Deterministic pseudo-random move selection keyed by position and seed."""
    def fn(inst_, state, history):
        moves = legal_moves(inst_, state)
        if not moves:
            raise StrategyError(f"no legal moves at position {state.key()}")
        h = hash((seed, state.key())) & 0x7FFFFFFF
        return moves[h % len(moves)]

    return FunctionStrategy(role, fn, SIMULATION, f"seeded-{seed}")


def fixed_point_choose_strategy(alpha: int) -> Strategy:
    """Always pick the piece containing a fixed point of the ground set.

    Errs if the point has already been excluded, which is reachable only when
    cut moves need not cover the running core.
    """
    def fn(inst_, state, history):
        for p in state.pending:
            if (p >> alpha) & 1:
                return p
        raise StrategyError(f"fixed point {alpha} excluded by every piece")

    return FunctionStrategy(CHOOSE, fn, SIMULATION, f"fixed-point-{alpha}")


# ---------------------------------------------------------------------------
# Playouts and verification
# ---------------------------------------------------------------------------

@dataclass
class Transcript:
    instance: GameInstance
    moves: list
    states: list
    winner: str
    reason: str

    def picks(self, role: str) -> list:
        return [m for r, m in self.moves if r == role]


def play_out(inst: GameInstance, cut_side: Strategy,
             choose_side: Strategy) -> Transcript:
    """Run both strategies to the end under the referee; fully deterministic."""
    sides = {inst.cutter: cut_side, inst.picker: choose_side}
    state = initial_state(inst)
    moves: list = []
    states = [state]
    history: tuple = ()
    outcome = terminal_status(inst, state)
    while outcome.ongoing:
        role = state.to_move
        try:
            move = sides[role].decide(inst, state, history)
        except StrategyError as exc:
            raise StrategyError(f"{exc} (at position {state.key()})") from exc
        validate_move(inst, state, move)
        state = apply_move(inst, state, move, check=False)
        moves.append((role, move))
        history = history + ((role, move),)
        states.append(state)
        outcome = terminal_status(inst, state)
    return Transcript(inst, moves, states, outcome.status, outcome.reason)


@dataclass
class VerifyResult:
    verified: bool
    counterexample: Optional[Transcript]
    nodes: int

    def __bool__(self) -> bool:
        return self.verified


def verify_winning_strategy(inst: GameInstance, sigma: Strategy, role: str,
                            node_budget: int = 2_000_000) -> VerifyResult:
    """Exhaustively traverse every opposing line; verified iff ``role`` wins
    every leaf.  The first counterexample in canonical order is returned."""
    nodes = 0

    def walk(state: GameState, history: tuple, moves: list, states: list):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise CapacityError("adversary tree exceeded the node budget",
                                {"nodes": nodes})
        outcome = terminal_status(inst, state)
        if not outcome.ongoing:
            if outcome.status != role:
                return Transcript(inst, list(moves), list(states),
                                  outcome.status, outcome.reason)
            return None
        mover = state.to_move
        if mover == role:
            move = sigma.decide(inst, state, history)
            validate_move(inst, state, move)
            nxt = apply_move(inst, state, move, check=False)
            return walk(nxt, history + ((mover, move),),
                        moves + [(mover, move)], states + [nxt])
        for move in legal_moves(inst, state):
            nxt = apply_move(inst, state, move, check=False)
            bad = walk(nxt, history + ((mover, move),),
                       moves + [(mover, move)], states + [nxt])
            if bad is not None:
                return bad
        return None

    start = initial_state(inst)
    counter = walk(start, (), [], [start])
    return VerifyResult(counter is None, counter, nodes)


def tabulate_strategy(inst: GameInstance, sigma: Strategy, role: str,
                      node_budget: int = 2_000_000) -> TableStrategy:
    """Record a (possibly simulation-backed) strategy as a positional table
    over every position it can reach against canonical adversary lines."""
    table: dict[tuple, object] = {}
    nodes = 0

    def walk(state: GameState, history: tuple):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise CapacityError("tabulation exceeded the node budget",
                                {"nodes": nodes})
        if not terminal_status(inst, state).ongoing:
            return
        mover = state.to_move
        if mover == role:
            key = state.key()
            if key in table:
                move = table[key]
            else:
                move = sigma.decide(inst, state, history)
                validate_move(inst, state, move)
                table[key] = move
            walk(apply_move(inst, state, move, check=False),
                 history + ((mover, move),))
        else:
            for move in legal_moves(inst, state):
                walk(apply_move(inst, state, move, check=False),
                     history + ((mover, move),))

    walk(initial_state(inst), ())
    return TableStrategy(role, table, name=f"tabulated-{sigma.name}")


def enumerate_playouts(inst: GameInstance, sigma: Strategy, role: str,
                       node_budget: int = 2_000_000) -> list[Transcript]:
    """All playouts of ``sigma`` against every canonical adversary line."""
    out: list[Transcript] = []
    nodes = 0

    def walk(state, history, moves, states):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise CapacityError("playout enumeration exceeded the node budget",
                                {"nodes": nodes})
        outcome = terminal_status(inst, state)
        if not outcome.ongoing:
            out.append(Transcript(inst, list(moves), list(states),
                                  outcome.status, outcome.reason))
            return
        mover = state.to_move
        if mover == role:
            options = [sigma.decide(inst, state, history)]
            for move in options:
                validate_move(inst, state, move)
        else:
            options = legal_moves(inst, state)
        for move in options:
            nxt = apply_move(inst, state, move, check=False)
            walk(nxt, history + ((mover, move),),
                 moves + [(mover, move)], states + [nxt])

    start = initial_state(inst)
    walk(start, (), [], [start])
    return out
