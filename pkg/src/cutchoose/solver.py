"""Exact determinacy solving by memoized backward induction.

``solve`` computes the winner over canonical positions and, on request,
extracts the winner's positional strategy in a second deterministic pass
(first winning move in canonical order).  ``refute`` is the dual check: an
independent exists/forall search for a winning strategy for a *given* role.
``reference_winner`` is the deliberately naive oracle -- raw recursion over
positions with no memoization and no canonicalization -- kept around so the
main path can always be cross-checked.

Memo values are winner names only; strategies are never read out of the memo
fill, so evaluation order (including any concurrent fill) cannot perturb the
extracted strategy.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from ._version import ENGINE_VERSION
from .engine import (CHOOSE, CUT, STRICT_PREFIX, U, WEAK, GameInstance,
                     GameState, TableStrategy, apply_move, initial_state,
                     legal_moves, terminal_status)
from .errors import CapacityError, CutChooseError
from .serialize import (instance_hash, strategy_from_jsonable,
                        strategy_to_jsonable)
from .structures import SIZE_AT_MOST, popcount

DEFAULT_STATE_BUDGET = 10_000_000


@dataclass
class SolveStats:
    states_visited: int = 0
    memo_hits: int = 0
    elapsed: float = 0.0
    cached: bool = False

    def to_jsonable(self) -> dict:
        # elapsed is intentionally omitted: serialized outputs must be
        # byte-identical across runs.
        return {"states_visited": self.states_visited,
                "memo_hits": self.memo_hits,
                "cached": self.cached}


@dataclass
class SolveResult:
    instance: GameInstance
    winner: str
    strategy: Optional[TableStrategy]
    stats: SolveStats


# ---------------------------------------------------------------------------
# Generic backward induction
# ---------------------------------------------------------------------------

def _value_function(inst: GameInstance, stats: SolveStats,
                    state_budget: int) -> Callable[[GameState], str]:
    memo: dict[tuple, str] = {}

    def value(state: GameState) -> str:
        outcome = terminal_status(inst, state)
        if not outcome.ongoing:
            return outcome.status
        key = state.key()
        hit = memo.get(key)
        if hit is not None:
            stats.memo_hits += 1
            return hit
        stats.states_visited += 1
        if stats.states_visited > state_budget:
            raise CapacityError("state budget exceeded",
                                {"states_visited": stats.states_visited,
                                 "memo_hits": stats.memo_hits})
        mover = state.to_move
        result = inst.opponent(mover)
        for move in legal_moves(inst, state):
            if value(apply_move(inst, state, move, check=False)) == mover:
                result = mover
                break
        memo[key] = result
        return result

    return value


# ---------------------------------------------------------------------------
# Symmetric fast path for U-games with size-bounded families
# ---------------------------------------------------------------------------

def _symmetric_applicable(inst: GameInstance) -> bool:
    return (inst.game_family == U and inst.cut_current
            and inst.family.kind == SIZE_AT_MOST)


def _int_partitions(total: int, max_parts: int):
    """Partitions of ``total`` into 2..max_parts parts, parts descending."""
    def rec(remaining: int, cap: int, parts: list[int]):
        if remaining == 0:
            if len(parts) >= 2:
                yield tuple(parts)
            return
        if len(parts) >= max_parts:
            return
        for p in range(min(cap, remaining), 0, -1):
            parts.append(p)
            yield from rec(remaining - p, p, parts)
            parts.pop()

    yield from rec(total, total, [])


def _symmetric_winner(inst: GameInstance) -> str:
    """Winner via the size abstraction: fully symmetric families make the
    position depend only on the core's cardinality.  The exact, weak, and
    prefix variants coincide up to round bookkeeping because cores only
    shrink under a monotone family."""
    k = inst.family.bound
    width = inst.width

    @lru_cache(maxsize=None)
    def cut_wins(size: int, remaining: int) -> bool:
        # Entered with a positive core (size > k), cutter to move.
        if remaining == 0:
            return False
        if size == 1:
            return cut_wins(size, remaining - 1) if k < 1 else True
        for parts in _int_partitions(size, min(width, size)):
            if all(p <= k or cut_wins(p, remaining - 1) for p in parts):
                return True
        return False

    rounds = inst.rounds - 1 if inst.variant == STRICT_PREFIX else inst.rounds
    return CUT if cut_wins(popcount(inst.start), rounds) else CHOOSE


# ---------------------------------------------------------------------------
# Strategy extraction
# ---------------------------------------------------------------------------

def extract_strategy(inst: GameInstance, role: str,
                     value: Callable[[GameState], str],
                     state_budget: int = DEFAULT_STATE_BUDGET) -> TableStrategy:
    """Deterministic second pass: at the role's turn take the first move in
    canonical order that stays winning (first move overall as a best-effort
    fallback for a losing role); follow every opposing reply."""
    table: dict[tuple, object] = {}
    seen: set[tuple] = set()

    def visit(state: GameState) -> None:
        if not terminal_status(inst, state).ongoing:
            return
        key = state.key()
        if key in seen:
            return
        seen.add(key)
        if len(seen) > state_budget:
            raise CapacityError("extraction exceeded the state budget",
                                {"states_visited": len(seen)})
        moves = legal_moves(inst, state)
        if state.to_move == role:
            chosen = None
            for move in moves:
                if value(apply_move(inst, state, move, check=False)) == role:
                    chosen = move
                    break
            if chosen is None:
                chosen = moves[0]
            table[key] = chosen
            visit(apply_move(inst, state, chosen, check=False))
        else:
            for move in moves:
                visit(apply_move(inst, state, move, check=False))

    visit(initial_state(inst))
    return TableStrategy(role, table, name=f"solver-{role}")


# ---------------------------------------------------------------------------
# Solve / refute / oracle
# ---------------------------------------------------------------------------

def solve(inst: GameInstance, want_strategy: bool = True,
          state_budget: int = DEFAULT_STATE_BUDGET,
          cache_dir: Optional[str] = None) -> SolveResult:
    """Name the winner; optionally extract and return their strategy.

    Raises CapacityError (with partial stats) if the position space or a
    single enumeration outgrows its budget.
    """
    cached = _cache_load(inst, cache_dir, want_strategy)
    if cached is not None:
        return cached
    t0 = time.perf_counter()
    stats = SolveStats()
    strategy = None
    if _symmetric_applicable(inst) and not want_strategy:
        winner = _symmetric_winner(inst)
        stats.states_visited = 0
    else:
        value = _value_function(inst, stats, state_budget)
        winner = value(initial_state(inst))
        if want_strategy:
            strategy = extract_strategy(inst, winner, value, state_budget)
    stats.elapsed = time.perf_counter() - t0
    result = SolveResult(inst, winner, strategy, stats)
    _cache_store(result, cache_dir, want_strategy)
    return result


@dataclass
class RefuteResult:
    role: str
    has_winning_strategy: bool
    strategy: Optional[TableStrategy]
    nodes: int


def refute(inst: GameInstance, role: str,
           state_budget: int = DEFAULT_STATE_BUDGET) -> RefuteResult:
    """Exhaustive exists/forall search for a winning strategy for ``role``.

    Deliberately a separate code path from ``solve``: confirmation that the
    loser has nothing is computed by quantifier structure, not by reusing the
    minimax value.
    """
    memo: dict[tuple, bool] = {}
    nodes = 0

    def can_win(state: GameState) -> bool:
        nonlocal nodes
        outcome = terminal_status(inst, state)
        if not outcome.ongoing:
            return outcome.status == role
        key = state.key()
        if key in memo:
            return memo[key]
        nodes += 1
        if nodes > state_budget:
            raise CapacityError("refutation exceeded the state budget",
                                {"nodes": nodes})
        children = (apply_move(inst, state, m, check=False)
                    for m in legal_moves(inst, state))
        if state.to_move == role:
            result = any(can_win(c) for c in children)
        else:
            result = all(can_win(c) for c in children)
        memo[key] = result
        return result

    has = can_win(initial_state(inst))
    strategy = None
    if has:
        strategy = extract_strategy(
            inst, role,
            lambda s: role if can_win(s) else inst.opponent(role),
            state_budget)
    return RefuteResult(role, has, strategy, nodes)


def reference_winner(inst: GameInstance,
                     node_budget: int = 50_000_000) -> str:
    """Unmemoized minimax over raw positions: the independent oracle.

    Binary-width set games get a lean split loop; everything else walks the
    same positions through the regular move enumeration.  No memo table and
    no canonical abstraction are used on purpose.
    """
    if (inst.game_family == U and inst.width == 2 and inst.cut_current):
        return _reference_u2(inst, node_budget)
    nodes = 0

    def val(state: GameState) -> str:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise CapacityError("oracle exceeded the node budget",
                                {"nodes": nodes})
        outcome = terminal_status(inst, state)
        if not outcome.ongoing:
            return outcome.status
        mover = state.to_move
        for move in legal_moves(inst, state):
            if val(apply_move(inst, state, move, check=False)) == mover:
                return mover
        return inst.opponent(mover)

    return val(initial_state(inst))


def _reference_u2(inst: GameInstance, node_budget: int) -> str:
    family = inst.family
    variant = inst.variant
    rounds = inst.rounds
    nodes = 0

    def branch_cut_wins(piece: int, remaining: int) -> bool:
        # State right after a pick, before the next cut.
        if variant == WEAK:
            if piece in family:
                return True
            if remaining == 0:
                return False
            return cut_wins(piece, remaining)
        if variant == STRICT_PREFIX:
            if remaining >= 1 and piece in family:
                return True
            if remaining == 0:
                return False
            return cut_wins(piece, remaining)
        if remaining == 0:
            return piece in family
        return cut_wins(piece, remaining)

    def cut_wins(core: int, remaining: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise CapacityError("oracle exceeded the node budget",
                                {"nodes": nodes})
        low = core & -core
        rest = core ^ low
        if rest == 0:
            return branch_cut_wins(core, remaining - 1)
        sub = rest
        while True:
            sub = (sub - 1) & rest
            a = sub | low
            b = core ^ a
            if b == 0:
                if sub == 0:
                    break
                continue
            if branch_cut_wins(a, remaining - 1) and \
                    branch_cut_wins(b, remaining - 1):
                return True
            if sub == 0:
                break
        return False

    return CUT if cut_wins(inst.start, rounds) else CHOOSE


# ---------------------------------------------------------------------------
# On-disk memo cache
# ---------------------------------------------------------------------------

CACHE_ENV = "CUTCHOOSE_CACHE_DIR"


def _cache_path(inst: GameInstance, cache_dir: str, want_strategy: bool) -> str:
    tag = "full" if want_strategy else "winner"
    return os.path.join(cache_dir,
                        f"{instance_hash(inst, ENGINE_VERSION)}.{tag}.json")


def _cache_load(inst: GameInstance, cache_dir: Optional[str],
                want_strategy: bool) -> Optional[SolveResult]:
    if not cache_dir:
        return None
    path = _cache_path(inst, cache_dir, want_strategy)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        digest = doc.pop("digest", None)
        payload = json.dumps(doc, sort_keys=True)
        import hashlib
        if digest != hashlib.sha256(payload.encode()).hexdigest():
            return None
        if doc.get("engine_version") != ENGINE_VERSION:
            return None
        if doc.get("instance_hash") != instance_hash(inst, ENGINE_VERSION):
            return None
        strategy = None
        if doc.get("strategy") is not None:
            strategy = strategy_from_jsonable(inst, doc["strategy"])
        stats = SolveStats(states_visited=doc["stats"]["states_visited"],
                           memo_hits=doc["stats"]["memo_hits"], cached=True)
        return SolveResult(inst, doc["winner"], strategy, stats)
    except (OSError, ValueError, KeyError, CutChooseError):
        # Corruption of any shape is a miss.
        return None


def _cache_store(result: SolveResult, cache_dir: Optional[str],
                 want_strategy: bool) -> None:
    if not cache_dir:
        return
    os.makedirs(cache_dir, exist_ok=True)
    doc = {
        "engine_version": ENGINE_VERSION,
        "instance_hash": instance_hash(result.instance, ENGINE_VERSION),
        "winner": result.winner,
        "strategy": None if result.strategy is None
        else strategy_to_jsonable(result.instance, result.strategy),
        "stats": result.stats.to_jsonable(),
    }
    import hashlib
    payload = json.dumps(doc, sort_keys=True)
    doc["digest"] = hashlib.sha256(payload.encode()).hexdigest()
    path = _cache_path(result.instance, cache_dir, want_strategy)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
    os.replace(tmp, path)
