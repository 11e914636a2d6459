"""Constructive strategy transformations with machine-checkable certificates.

Each transformation turns a strategy for one game into a strategy for a
related game by replaying an auxiliary run of the source game inside every
playout of the target game.  Output strategies are pure functions of the
visible history (the referee hands the full history to ``decide``, including
the cut move currently awaiting a pick), so the auxiliary run is
reconstructed on demand.  A ``certify`` hook re-runs the reconstruction on a
finished transcript and checks the declared relation between the runs --
containment or equality of cores -- raising ``TransformSoundnessError`` only
for genuine bookkeeping violations, never for mere game losses.

Length bookkeeping is explicit: where an auxiliary move expands into several
target moves, round counts double or multiply, since the ordinal absorption
identities have no finite counterpart.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .engine import (BM_IDEAL, CHOOSE, CUT, EMPTY, EXACT, G_IDEAL, G_POSET,
                     NONEMPTY, SIMULATION, U, WEAK, FunctionStrategy,
                     GameInstance, GameState, Strategy, Transcript,
                     apply_move, core_positive, enumerate_playouts,
                     initial_state, sorted_pieces, terminal_status,
                     validate_move)
from .engine import fixed_point_choose_strategy  # re-exported: same toolbox
from .errors import (CapacityError, SigmaSearchError, TransformSoundnessError,
                     ValidationError)
from .structures import (FiniteBooleanAlgebra, GroundSet, IPartition,
                         MonotoneFamily, enumerate_i_partitions, format_mask,
                         full_disjointification, is_positive, mask_elements,
                         mask_key, popcount, sorted_masks, submasks)


__all__ = [
    "TransformCertificate", "TransformOutput", "certify_playouts",
    "digit_split_cut_strategy", "fixed_point_choose_strategy",
    "restrict_choose_strategy", "disjointify_cut_strategy",
    "disjointify_choose_strategy", "factor_antichain", "FactorResult",
    "transfer_cut_big_to_small", "transfer_choose_small_to_big",
    "witness_to_cut_strategy", "cut_strategy_to_witness",
    "witness_to_empty_strategy", "empty_to_cut_strategy",
    "nonempty_to_choose_strategy", "choose_to_nonempty_strategy",
]


@dataclass
class TransformCertificate:
    kind: str
    relation: str
    holds: bool
    output_run: Transcript
    aux_moves: list
    details: dict = field(default_factory=dict)


@dataclass
class TransformOutput:
    kind: str
    instance: GameInstance
    strategy: Strategy
    certify: Callable[[Transcript], TransformCertificate]
    aux_instance: Optional[GameInstance] = None
    details: dict = field(default_factory=dict)


def certify_playouts(out: TransformOutput,
                     node_budget: int = 2_000_000) -> list[TransformCertificate]:
    """Certificates for every playout of the output strategy against all
    canonical adversary lines."""
    runs = enumerate_playouts(out.instance, out.strategy, out.strategy.role,
                              node_budget)
    return [out.certify(t) for t in runs]


def _union(masks) -> int:
    u = 0
    for m in masks:
        u |= m
    return u


def _forced_pick(sigma: Strategy, inst: GameInstance, state: GameState,
                 history: tuple):
    """Query a picker, resolving degenerate one-piece pending moves without
    consulting it (table strategies only cover enumerated moves)."""
    nonempty = [p for p in state.pending if p]
    if len(nonempty) == 1:
        return nonempty[0]
    return sigma.decide(inst, state, history)


def _check_aux_run(inst: GameInstance, run: Sequence, sigma: Strategy,
                   sigma_role: str, details: dict) -> bool:
    """Legality of an auxiliary run plus consistency with its strategy."""
    st = initial_state(inst)
    hist: tuple = ()
    for role, move in run:
        try:
            validate_move(inst, st, move)
        except Exception as exc:
            details["illegal_aux"] = str(exc)
            return False
        if role == sigma_role and sigma.decide(inst, st, hist) != move:
            details["inconsistent_aux"] = True
            return False
        hist = hist + ((role, move),)
        st = apply_move(inst, st, move, check=False)
    details["aux_final_core"] = format_mask(st.core)
    return True


# ---------------------------------------------------------------------------
# Digit splitting
# ---------------------------------------------------------------------------

def digit_split_instance(m: int, nu: int, n: int) -> GameInstance:
    ground = GroundSet(m)
    return GameInstance(game_family=U, start=ground.full_mask, rounds=n,
                        width=nu, ground=ground,
                        family=MonotoneFamily.size_at_most(ground, 1))


def digit_split_cut_strategy(m: int, nu: int, n: int) -> TransformOutput:
    """Positional cutter: split the core by its least still-splitting base-nu
    digit; after all rounds the core holds at most one point.

    Rejects parameters beyond the counting threshold m <= nu**n.
    """
    if nu < 2 or n < 1:
        raise ValidationError("need nu >= 2 and n >= 1")
    if m > nu ** n:
        raise ValidationError(
            f"digit splitting needs m <= nu**n ({m} > {nu}**{n})")
    inst = digit_split_instance(m, nu, n)

    def decide(inst_, state, history):
        core = state.core
        elems = mask_elements(core)
        if len(elems) == 1:
            return (core,)
        for d in range(n):
            groups: dict[int, int] = {}
            for x in elems:
                groups.setdefault((x // nu ** d) % nu, 0)
                groups[(x // nu ** d) % nu] |= 1 << x
            if len(groups) >= 2:
                return tuple(sorted(groups.values(), key=mask_key))
        return (core,)

    strategy = FunctionStrategy(CUT, decide, "positional_table",
                                f"digit-split-{nu}")

    def certify(t: Transcript) -> TransformCertificate:
        final = t.states[-1].core
        holds = popcount(final) <= 1
        return TransformCertificate("digit_split", "final core has at most one point",
                                    holds, t, [], {"final": format_mask(final)})

    return TransformOutput("digit_split", inst, strategy, certify)


# ---------------------------------------------------------------------------
# Restriction along an embedding
# ---------------------------------------------------------------------------

def _embed_mask(embedding: Sequence[int], mask: int) -> int:
    out = 0
    for i, p in enumerate(embedding):
        if (mask >> i) & 1:
            out |= 1 << p
    return out


def _pullback_mask(embedding: Sequence[int], mask: int) -> int:
    out = 0
    for i, p in enumerate(embedding):
        if (mask >> p) & 1:
            out |= 1 << i
    return out


def restrict_choose_strategy(sigma: Strategy, inner: GameInstance,
                             outer: GameInstance,
                             embedding: Sequence[int]) -> TransformOutput:
    """Transplant a picker strategy to a larger ground: answer each cut by
    intersecting its pieces with the embedded copy and lifting the inner pick.

    Needs partition games with matching parameters and a family that
    restricts along the embedding (a subset is small on the inner ground
    exactly when its image is small on the outer one).
    """
    if inner.game_family != U or outer.game_family != U:
        raise ValidationError("restriction is defined for partition games")
    if (inner.rounds, inner.variant, inner.cut_current) != \
            (outer.rounds, outer.variant, outer.cut_current):
        raise ValidationError("instances must share rounds, variant, convention")
    if inner.width < outer.width:
        raise ValidationError("inner width must cover the outer width")
    emb = tuple(embedding)
    if len(emb) != inner.ground.size or len(set(emb)) != len(emb):
        raise ValidationError("embedding must be injective on the inner ground")
    if any(not (0 <= p < outer.ground.size) for p in emb):
        raise ValidationError("embedding leaves the outer ground")
    if _pullback_mask(emb, outer.start) != inner.start:
        raise ValidationError("outer start must pull back to the inner start")
    for s in range(1 << inner.ground.size):
        if (s in inner.family) != (_embed_mask(emb, s) in outer.family):
            raise ValidationError("family does not restrict along the embedding "
                                  f"(witness {format_mask(s)})")

    def pulled(move: tuple, inner_target: int) -> dict:
        return {p: _pullback_mask(emb, p) & inner_target for p in move}

    def reconstruct(history: Sequence):
        """Inner history implied by the completed (cut, pick) pairs."""
        inner_hist: tuple = ()
        inner_state = initial_state(inner)
        i = 0
        while i + 1 < len(history):
            move = history[i][1]
            target = inner_state.core if inner.cut_current else inner.start
            pb = pulled(move, target)
            nonempty = sorted({v for v in pb.values() if v}, key=mask_key)
            if len(nonempty) >= 2:
                inner_move = tuple(nonempty)
                st1 = apply_move(inner, inner_state, inner_move, check=False)
                pick = pb[history[i + 1][1]]
                inner_state = apply_move(inner, st1, pick, check=False)
                inner_hist = inner_hist + ((CUT, inner_move), (CHOOSE, pick))
            i += 2
        return inner_hist, inner_state

    def decide(inst_, state, history):
        inner_hist, inner_state = reconstruct(history[:-1])
        target = inner_state.core if inner.cut_current else inner.start
        pb = pulled(state.pending, target)
        nonempty = sorted({v for v in pb.values() if v}, key=mask_key)
        if not nonempty:
            return sorted_pieces(inst_, state.pending)[0]
        if len(nonempty) == 1:
            for p in sorted_pieces(inst_, state.pending):
                if pb[p] == nonempty[0]:
                    return p
        inner_move = tuple(nonempty)
        st1 = apply_move(inner, inner_state, inner_move, check=False)
        pick = sigma.decide(inner, st1, inner_hist + ((CUT, inner_move),))
        for p in sorted_pieces(inst_, state.pending):
            if pb[p] == pick:
                return p
        raise TransformSoundnessError("inner pick has no outer counterpart")

    strategy = FunctionStrategy(CHOOSE, decide, SIMULATION,
                                f"restricted-{sigma.name}")

    def certify(t: Transcript) -> TransformCertificate:
        inner_hist, inner_state = reconstruct(tuple(t.moves))
        details: dict = {}
        holds = _check_aux_run(inner, inner_hist, sigma, CHOOSE, details)
        outer_core = t.states[-1].core
        if _pullback_mask(emb, outer_core) != inner_state.core:
            holds = False
            details["pullback_mismatch"] = (format_mask(outer_core),
                                            format_mask(inner_state.core))
        details["outer_core"] = format_mask(outer_core)
        details["inner_core"] = format_mask(inner_state.core)
        return TransformCertificate(
            "restrict_choose", "outer core pulls back to the inner core",
            holds, t, list(inner_hist), details)

    return TransformOutput("restrict_choose", outer, strategy, certify, inner)


# ---------------------------------------------------------------------------
# Disjointification
# ---------------------------------------------------------------------------

def _doubled_instance(g_inst: GameInstance) -> GameInstance:
    size = popcount(g_inst.start)
    width = max(2, size if g_inst.width is None else min(g_inst.width, size))
    return GameInstance(game_family=U, start=g_inst.start,
                        rounds=2 * g_inst.rounds, width=width,
                        variant=g_inst.variant, cut_current=False,
                        ground=g_inst.ground, family=g_inst.family)


def _require_g_ideal(g_inst: GameInstance, op: str) -> None:
    if g_inst.game_family != G_IDEAL:
        raise ValidationError(f"{op} needs a generalized-cut ideal game")
    if g_inst.cut_current:
        raise ValidationError(f"{op} uses the cut-the-start convention")


def _disjointify_move(g_inst: GameInstance, w_move: tuple):
    """(sorted sources, refined pieces aligned with them, played partition,
    cover-versus-remainder split, cover).

    The split is canonically ordered when both pieces are nonempty so that it
    matches the move enumeration; a vacuous remainder stays in second place.
    """
    sources = sorted_masks(w_move)
    refined = full_disjointification(
        IPartition(g_inst.start, tuple(sources), g_inst.family))
    played = tuple(sorted_masks(p for p in refined if p))
    cover = _union(sources)
    rest = g_inst.start & ~cover
    split = tuple(sorted_masks((cover, rest))) if rest else (cover, rest)
    return sources, refined, played, split, cover


def _source_of(sources: list, refined: list, pick: int) -> Optional[int]:
    for alpha, piece in enumerate(refined):
        if piece == pick and piece:
            return sources[alpha]
    return None


def disjointify_cut_strategy(sigma_g: Strategy,
                             g_inst: GameInstance) -> TransformOutput:
    """Cutter transport into the doubled partition game: each generalized
    move becomes its full disjointification followed by the cover-versus-
    remainder split.

    Picking the remainder traps the core in the family, so the auxiliary run
    simply stops there; the certificate checks that the final partition-game
    core sits inside the intersection of the auxiliary picks.
    """
    _require_g_ideal(g_inst, "disjointify_cut_strategy")
    u_inst = _doubled_instance(g_inst)

    def reconstruct(history: Sequence):
        g_hist: tuple = ()
        g_state = initial_state(g_inst)
        blocks: list[dict] = []
        alive = True
        i = 0
        while i < len(history) and alive:
            w_move = sigma_g.decide(g_inst, g_state, g_hist)
            sources, refined, played, split, cover = \
                _disjointify_move(g_inst, w_move)
            rec = {"w": w_move, "played": played, "split": split,
                   "g_pick": None}
            blocks.append(rec)
            if i + 1 >= len(history):
                break
            rec["g_pick"] = _source_of(sources, refined, history[i + 1][1])
            if i + 3 >= len(history):
                break
            pick2 = history[i + 3][1]
            if pick2 == cover and rec["g_pick"] is not None:
                st1 = apply_move(g_inst, g_state, w_move, check=False)
                g_state = apply_move(g_inst, st1, rec["g_pick"], check=False)
                g_hist = g_hist + ((CUT, w_move), (CHOOSE, rec["g_pick"]))
            else:
                alive = False
            i += 4
        return g_hist, blocks, alive

    def decide(inst_, state, history):
        g_hist, blocks, alive = reconstruct(history)
        if not alive:
            return (g_inst.start,)
        if state.round % 2 == 1:
            return blocks[-1]["split"]
        st = initial_state(g_inst)
        for _, mv in g_hist:
            st = apply_move(g_inst, st, mv, check=False)
        w_move = sigma_g.decide(g_inst, st, g_hist)
        return _disjointify_move(g_inst, w_move)[2]

    strategy = FunctionStrategy(CUT, decide, SIMULATION,
                                f"disjointified-{sigma_g.name}")

    def certify(t: Transcript) -> TransformCertificate:
        g_hist, blocks, alive = reconstruct(tuple(t.moves))
        details: dict = {"aux_rounds": len(g_hist) // 2, "alive": alive}
        holds = _check_aux_run(g_inst, g_hist, sigma_g, CUT, details)
        final = t.states[-1].core
        inter = g_inst.start
        for role, mv in g_hist:
            if role == CHOOSE:
                inter &= mv
        if final & ~inter:
            holds = False
            details["core_escape"] = format_mask(final & ~inter)
        if not alive and core_positive(u_inst, final) and \
                not terminal_status(u_inst, t.states[-1]).ongoing:
            holds = False
            details["dead_but_positive"] = format_mask(final)
        details["u_core"] = format_mask(final)
        details["aux_pick_core"] = format_mask(inter)
        return TransformCertificate(
            "disjointify_cut",
            "final partition core inside the auxiliary picks",
            holds, t, list(g_hist), details)

    return TransformOutput("disjointify_cut", u_inst, strategy, certify, g_inst)


def disjointify_choose_strategy(sigma_u: Strategy,
                                g_inst: GameInstance) -> TransformOutput:
    """Picker transport out of the doubled partition game: feed the
    disjointification and the cover split to the partition picker, answer
    with the source piece of its first pick.

    A winning partition picker transports: its picks must go through the
    cover each round, and then the generalized core contains the auxiliary
    core outright.
    """
    _require_g_ideal(g_inst, "disjointify_choose_strategy")
    u_inst = _doubled_instance(g_inst)

    def reconstruct(history: Sequence):
        """Runs the auxiliary partition game over every cut entry (the
        trailing unanswered one included).

        Only real moves (two or more nonempty pieces) are fed; a one-piece
        move forces its pick without touching the auxiliary run, so table
        strategies are only consulted at positions the enumerated game can
        reach."""
        u_hist: tuple = ()
        u_state = initial_state(u_inst)
        blocks: list[dict] = []

        def feed(move):
            nonlocal u_hist, u_state
            u_hist = u_hist + ((u_state.to_move, move),)
            u_state = apply_move(u_inst, u_state, move, check=False)

        for role, entry in history:
            if role != CUT:
                continue
            sources, refined, played, split, cover = \
                _disjointify_move(g_inst, entry)
            if len(played) >= 2:
                feed(played)
                y = _forced_pick(sigma_u, u_inst, u_state, u_hist)
                feed(y)
            else:
                y = played[0]
            if 0 not in split:
                feed(split)
                p2 = _forced_pick(sigma_u, u_inst, u_state, u_hist)
                feed(p2)
            else:
                p2 = cover
            src = _source_of(sources, refined, y)
            if src is None:
                raise TransformSoundnessError(
                    "auxiliary pick is not a disjointification piece")
            blocks.append({"w": entry, "y": y, "p2": p2, "src": src,
                           "trim": y & cover, "cover": cover})
        return u_hist, u_state, blocks

    def decide(inst_, state, history):
        _, _, blocks = reconstruct(history)
        return blocks[-1]["src"]

    strategy = FunctionStrategy(CHOOSE, decide, SIMULATION,
                                f"disjointified-{sigma_u.name}")

    def certify(t: Transcript) -> TransformCertificate:
        u_hist, u_state, blocks = reconstruct(tuple(t.moves))
        details: dict = {"blocks": len(blocks)}
        holds = _check_aux_run_forced(u_inst, u_hist, sigma_u, details)
        g_core = t.states[-1].core
        trimmed = g_inst.start
        for b in blocks:
            trimmed &= b["trim"]
        if trimmed & ~g_core:
            holds = False
            details["relation_violated"] = format_mask(trimmed & ~g_core)
        details["g_core"] = format_mask(g_core)
        details["trimmed_aux_core"] = format_mask(trimmed)
        details["aux_core"] = format_mask(u_state.core)
        details["degenerate_cover_picks"] = sum(
            1 for b in blocks if b["p2"] != b["cover"])
        return TransformCertificate(
            "disjointify_choose",
            "generalized core contains the trimmed auxiliary picks",
            holds, t, list(u_hist), details)

    return TransformOutput("disjointify_choose", g_inst, strategy, certify,
                           u_inst)


def _check_aux_run_forced(inst: GameInstance, run: Sequence, sigma: Strategy,
                          details: dict) -> bool:
    """Like _check_aux_run but picker moves go through _forced_pick."""
    st = initial_state(inst)
    hist: tuple = ()
    for role, move in run:
        try:
            validate_move(inst, st, move)
        except Exception as exc:
            details["illegal_aux"] = str(exc)
            return False
        if role == inst.picker and _forced_pick(sigma, inst, st, hist) != move:
            details["inconsistent_aux"] = True
            return False
        hist = hist + ((role, move),)
        st = apply_move(inst, st, move, check=False)
    return True


# ---------------------------------------------------------------------------
# Antichain factorization and width transfer
# ---------------------------------------------------------------------------

@dataclass
class FactorResult:
    levels: list[tuple]      # beta maximal antichains of size <= nu
    codes: dict              # antichain element -> code tuple
    level_sup: list[dict]    # per level: digit -> sup of its code class

    def recover(self, code: Sequence[int]) -> int:
        out = -1
        for i, digit in enumerate(code):
            out &= self.level_sup[i].get(digit, 0)
        return max(out, 0) if out != -1 else 0


def factor_antichain(algebra: FiniteBooleanAlgebra, x: int, w: Sequence[int],
                     nu: int, beta: int) -> FactorResult:
    """Split one maximal antichain of size at most nu**beta below x into beta
    maximal antichains of size at most nu, recoverable by infima.

    Verifies the three identities on the spot: every level is a maximal
    antichain below x, infima recover the original elements (zero exactly on
    unused codes), and distinct codes give incompatible infima.
    """
    if beta < 1:
        raise ValidationError("beta must be >= 1")
    if nu < 2:
        raise ValidationError("nu must be >= 2")
    pieces = sorted_masks(w)
    if len(pieces) > nu ** beta:
        raise ValidationError(f"antichain of size {len(pieces)} exceeds "
                              f"nu**beta = {nu ** beta}")
    if not algebra.is_maximal_antichain_below(x, pieces):
        raise ValidationError("input is not a maximal antichain below x")
    codes = {piece: code for piece, code in
             zip(pieces, itertools.product(range(nu), repeat=beta))}
    level_sup: list[dict] = []
    levels: list[tuple] = []
    for i in range(beta):
        sups: dict[int, int] = {}
        for piece, code in codes.items():
            sups[code[i]] = sups.get(code[i], 0) | piece
        level_sup.append(sups)
        levels.append(tuple(sorted_masks(v for v in sups.values() if v)))
    result = FactorResult(levels, codes, level_sup)
    for level in levels:
        if not algebra.is_maximal_antichain_below(x, level):
            raise TransformSoundnessError(
                "factor level is not a maximal antichain below x")
    recovered = {}
    for code in itertools.product(range(nu), repeat=beta):
        rec = result.recover(code)
        recovered[code] = rec
        expected = next((p for p, c in codes.items() if c == code), 0)
        if rec != expected:
            raise TransformSoundnessError(
                f"recovery failed for code {code}: got {format_mask(rec)}, "
                f"expected {format_mask(expected)}")
    nonzero = [(c, r) for c, r in recovered.items() if r]
    for i, (c1, r1) in enumerate(nonzero):
        for c2, r2 in nonzero[i + 1:]:
            if r1 & r2:
                raise TransformSoundnessError(
                    f"codes {c1} and {c2} have compatible infima")
    return result


def _require_algebra_g(inst: GameInstance, op: str) -> None:
    if inst.game_family != G_POSET or inst.algebra is None:
        raise ValidationError(f"{op} needs an antichain game on an algebra")
    if inst.cut_current:
        raise ValidationError(f"{op} uses antichains below the start")


def _algebra_g_instance(base: GameInstance, width: Optional[int],
                        rounds: int) -> GameInstance:
    return GameInstance(game_family=G_POSET, start=base.start, rounds=rounds,
                        width=width, variant=base.variant, cut_current=False,
                        algebra=base.algebra)


def _code_of(factor: FactorResult, picks: Sequence[int]) -> Optional[tuple]:
    code = []
    for lvl, pick in enumerate(picks):
        digit = next((d for d, s in factor.level_sup[lvl].items()
                      if s == pick), None)
        if digit is None:
            return None
        code.append(digit)
    return tuple(code)


def transfer_cut_big_to_small(sigma_big: Strategy, big_inst: GameInstance,
                              nu: int, beta: int) -> TransformOutput:
    """Simulate one wide-antichain cutter move by beta narrow moves.

    The picks across a block recover, by infimum, a unique element of the
    wide antichain, fed back as the auxiliary pick.  A block whose picks have
    zero infimum already dooms the picker; the cutter fills the remaining
    rounds with the trivial antichain.
    """
    _require_algebra_g(big_inst, "transfer_cut_big_to_small")
    if big_inst.width != nu ** beta:
        raise ValidationError("wide instance must have width nu**beta")
    small_inst = _algebra_g_instance(big_inst, nu, big_inst.rounds * beta)
    algebra = big_inst.algebra

    def reconstruct(history: Sequence):
        big_hist: tuple = ()
        big_state = initial_state(big_inst)
        blocks: list[dict] = []
        alive = True
        picks: list[int] = []
        current: Optional[dict] = None
        for idx, (role, move) in enumerate(history):
            if not alive:
                break
            if role == CUT:
                if current is None:
                    w_big = sigma_big.decide(big_inst, big_state, big_hist)
                    current = {"w": w_big,
                               "factor": factor_antichain(
                                   algebra, big_inst.start, w_big, nu, beta),
                               "picks": [], "rec": None}
                    blocks.append(current)
                continue
            current["picks"].append(move)
            if len(current["picks"]) == beta:
                code = _code_of(current["factor"], current["picks"])
                rec = current["factor"].recover(code) if code else 0
                current["rec"] = rec
                if rec:
                    st1 = apply_move(big_inst, big_state, current["w"],
                                     check=False)
                    big_state = apply_move(big_inst, st1, rec, check=False)
                    big_hist = big_hist + ((CUT, current["w"]), (CHOOSE, rec))
                else:
                    alive = False
                current = None
        return big_hist, blocks, alive, current

    def decide(inst_, state, history):
        big_hist, blocks, alive, current = reconstruct(history)
        if not alive:
            return (small_inst.start,)
        if current is not None:
            return current["factor"].levels[len(current["picks"])]
        st = initial_state(big_inst)
        for _, mv in big_hist:
            st = apply_move(big_inst, st, mv, check=False)
        w_big = sigma_big.decide(big_inst, st, big_hist)
        return factor_antichain(algebra, big_inst.start, w_big, nu,
                                beta).levels[0]

    strategy = FunctionStrategy(CUT, decide, SIMULATION,
                                f"narrowed-{sigma_big.name}")

    def certify(t: Transcript) -> TransformCertificate:
        big_hist, blocks, alive, _ = reconstruct(tuple(t.moves))
        details: dict = {"blocks": len(blocks), "alive": alive}
        holds = _check_aux_run(big_inst, big_hist, sigma_big, CUT, details)
        small_core = small_inst.start
        big_core = big_inst.start
        for b in blocks:
            if b["rec"] is None:
                break
            for p in b["picks"]:
                small_core &= p
            if b["rec"]:
                big_core &= b["rec"]
                if small_core != big_core:
                    holds = False
                    details["boundary_mismatch"] = (format_mask(small_core),
                                                    format_mask(big_core))
            else:
                if small_core != 0:
                    holds = False
                    details["dead_block_nonzero"] = format_mask(small_core)
                break
        details["small_core"] = format_mask(small_core)
        details["big_core"] = format_mask(big_core)
        return TransformCertificate(
            "transfer_cut_big_to_small",
            "narrow and auxiliary cores agree at block boundaries",
            holds, t, list(big_hist), details)

    return TransformOutput("transfer_cut_big_to_small", small_inst, strategy,
                           certify, big_inst)


def transfer_choose_small_to_big(sigma_small: Strategy,
                                 small_inst: GameInstance, nu: int,
                                 beta: int) -> TransformOutput:
    """Answer one wide antichain by running the narrow-game picker through
    the beta factored levels and replying with the recovered element.

    A winning narrow picker transports: its final meet is nonzero, so every
    block infimum is nonzero and every recovered reply legal; the cores agree
    at block boundaries.
    """
    _require_algebra_g(small_inst, "transfer_choose_small_to_big")
    if small_inst.width != nu:
        raise ValidationError("narrow instance must have width nu")
    if small_inst.rounds % beta:
        raise ValidationError("narrow round count must be divisible by beta")
    big_inst = _algebra_g_instance(small_inst, nu ** beta,
                                   small_inst.rounds // beta)
    algebra = small_inst.algebra

    def reconstruct(history: Sequence):
        small_hist: tuple = ()
        small_state = initial_state(small_inst)
        blocks: list[dict] = []
        for role, entry in history:
            if role != CUT:
                continue
            factor = factor_antichain(algebra, big_inst.start, entry, nu, beta)
            picks = []
            for lvl in range(beta):
                move = factor.levels[lvl]
                small_hist = small_hist + ((CUT, move),)
                st1 = apply_move(small_inst, small_state, move, check=False)
                pick = sigma_small.decide(small_inst, st1, small_hist)
                small_hist = small_hist + ((CHOOSE, pick),)
                small_state = apply_move(small_inst, st1, pick, check=False)
                picks.append(pick)
            code = _code_of(factor, picks)
            rec = factor.recover(code) if code else 0
            reply = rec if rec else sorted_masks(entry)[0]
            blocks.append({"w": entry, "picks": picks, "rec": rec,
                           "reply": reply})
        return small_hist, small_state, blocks

    def decide(inst_, state, history):
        _, _, blocks = reconstruct(history)
        return blocks[-1]["reply"]

    strategy = FunctionStrategy(CHOOSE, decide, SIMULATION,
                                f"widened-{sigma_small.name}")

    def certify(t: Transcript) -> TransformCertificate:
        small_hist, small_state, blocks = reconstruct(tuple(t.moves))
        details: dict = {"blocks": len(blocks),
                         "dead_blocks": sum(1 for b in blocks if not b["rec"])}
        holds = _check_aux_run(small_inst, small_hist, sigma_small, CHOOSE,
                               details)
        small_core = small_state.core
        big_core = t.states[-1].core
        if details["dead_blocks"]:
            if small_core & ~big_core:
                holds = False
                details["relation_violated"] = True
        elif small_core != big_core:
            holds = False
            details["boundary_mismatch"] = (format_mask(small_core),
                                            format_mask(big_core))
        details["small_core"] = format_mask(small_core)
        details["big_core"] = format_mask(big_core)
        return TransformCertificate(
            "transfer_choose_small_to_big",
            "wide core equals narrow core at block boundaries",
            holds, t, list(small_hist), details)

    return TransformOutput("transfer_choose_small_to_big", big_inst, strategy,
                           certify, small_inst)


# ---------------------------------------------------------------------------
# Witness sequences vs cutter strategies
# ---------------------------------------------------------------------------

def witness_to_cut_strategy(seq: Sequence[tuple],
                            inst: GameInstance) -> TransformOutput:
    """Play a fixed move sequence regardless of the picks.

    Winning exactly when the sequence admits no surviving branch; the
    equivalence is referee-checked in tests against the branch search.
    """
    if inst.cut_current:
        raise ValidationError("witness strategies use the cut-the-start convention")
    if len(seq) < inst.rounds:
        raise ValidationError("sequence shorter than the game")
    probe = initial_state(inst)
    for move in seq[:inst.rounds]:
        validate_move(inst, probe, tuple(move))

    def decide(inst_, state, history):
        return tuple(seq[state.round])

    strategy = FunctionStrategy(CUT, decide, SIMULATION, "witness-sequence")

    def certify(t: Transcript) -> TransformCertificate:
        played = [move for role, move in t.moves if role == CUT]
        holds = played == [tuple(seq[i]) for i in range(len(played))]
        return TransformCertificate("witness_to_cut",
                                    "moves follow the sequence", holds, t,
                                    played, {})

    return TransformOutput("witness_to_cut", inst, strategy, certify)


def cut_strategy_to_witness(sigma: Strategy, inst: GameInstance,
                            state_budget: int = 200_000) -> list[tuple]:
    """Collapse a cutter strategy into one non-adaptive move sequence.

    Level r collects the meets of every consistent pick history with the
    pieces of the strategy's response there; a surviving branch through the
    output corresponds exactly to a pick line defeating the strategy
    (checked exhaustively in tests at small scale).
    """
    if inst.cut_current:
        raise ValidationError("witness construction uses the cut-the-start convention")
    if inst.variant != EXACT:
        raise ValidationError("witness construction is defined for the exact variant")
    if inst.game_family == G_POSET and inst.algebra is None:
        raise ValidationError("witness construction needs meets "
                              "(set or algebra structure)")
    frontier: list[tuple] = [((), initial_state(inst))]
    positional = sigma.kind == "positional_table"
    seq: list[tuple] = []
    nodes = 0
    for _ in range(inst.rounds):
        pieces: set = set()
        nxt: list[tuple] = []
        nxt_seen: set = set()
        for hist, st in frontier:
            nodes += 1
            if nodes > state_budget:
                raise CapacityError("witness construction exceeded its budget",
                                    {"nodes": nodes})
            move = sigma.decide(inst, st, hist)
            validate_move(inst, st, move)
            st1 = apply_move(inst, st, move, check=False)
            for y in move:
                st2 = apply_move(inst, st1, y, check=False)
                if st2.core:
                    pieces.add(st2.core)
                key = st2.key()
                if positional and key in nxt_seen:
                    continue
                nxt_seen.add(key)
                nxt.append((hist + ((CUT, move), (CHOOSE, y)), st2))
        seq.append(tuple(sorted_masks(pieces)))
        frontier = nxt
    return seq


# ---------------------------------------------------------------------------
# Banach-Mazur bridges
# ---------------------------------------------------------------------------

def _require_bm_ideal(inst: GameInstance, op: str) -> None:
    if inst.game_family != BM_IDEAL:
        raise ValidationError(f"{op} needs a set Banach-Mazur game")


def _replay(inst: GameInstance, history: Sequence) -> GameState:
    st = initial_state(inst)
    for _, move in history:
        st = apply_move(inst, st, move, check=False)
    return st


def witness_to_empty_strategy(seq: Sequence[tuple],
                              bm_inst: GameInstance) -> TransformOutput:
    """Walk the emptier along a sequence of positive families: at each stage
    intersect the opponent's set with a family piece meeting it positively.

    Maximal families always provide such a piece; when the sequence drops
    maximality the walk can detach (the strategy falls back to copying),
    which the certificate reports -- the finite shadow of why maximality
    matters.
    """
    _require_bm_ideal(bm_inst, "witness_to_empty_strategy")
    if len(seq) < bm_inst.rounds - 1:
        raise ValidationError("sequence too short for the game")
    fam = bm_inst.family

    def walk_pick(idx: int, y: int) -> Optional[int]:
        for x in sorted_masks(seq[idx]):
            if is_positive(fam, y & x):
                return x
        return None

    def decide(inst_, state, history):
        if not history:
            return bm_inst.start
        idx = sum(1 for role, _ in history if role == EMPTY) - 1
        y = history[-1][1]
        x = walk_pick(idx, y)
        return y & x if x is not None else y

    strategy = FunctionStrategy(EMPTY, decide, SIMULATION, "witness-walk")

    def certify(t: Transcript) -> TransformCertificate:
        picks: list[Optional[int]] = []
        detach = None
        idx = 0
        for i, (role, move) in enumerate(t.moves):
            if role != EMPTY or i == 0:
                continue
            x = walk_pick(idx, t.moves[i - 1][1])
            picks.append(x)
            if x is None and detach is None:
                detach = idx
            idx += 1
        holds = True
        details: dict = {"detach_stage": detach,
                         "walk": [None if p is None else format_mask(p)
                                  for p in picks]}
        final = t.states[-1].core
        inter = bm_inst.start
        for p in picks:
            if p is None:
                break
            inter &= p
        if detach is None and final & ~inter:
            holds = False
            details["core_escape"] = format_mask(final & ~inter)
        details["walk_core"] = format_mask(inter)
        details["final"] = format_mask(final)
        return TransformCertificate(
            "witness_to_empty", "final core inside the realized walk",
            holds, t, picks, details)

    return TransformOutput("witness_to_empty", bm_inst, strategy, certify)


def empty_to_cut_strategy(sigma_e: Strategy,
                          bm_inst: GameInstance) -> TransformOutput:
    """From an emptier strategy, a cutter for the unbounded-width weak
    generalized game on the emptier's opening set.

    Each cut move is a maximal positive family assembled from the emptier's
    responses below the current auxiliary set, extended greedily (largest
    positive sets first) to a maximal family over the opening set.  Picks in
    the response part advance the auxiliary run -- so the picker's choices
    are exactly the emptier's moves -- and picks in the extension meet the
    running core in the family, losing on the spot.

    The emptier must answer one stage beyond the nominal round count
    (simulation strategies do; finite bookkeeping in place of the absorption
    of one extra round).
    """
    _require_bm_ideal(bm_inst, "empty_to_cut_strategy")
    fam = bm_inst.family
    x0 = sigma_e.decide(bm_inst, initial_state(bm_inst), ())
    g_inst = GameInstance(game_family=G_IDEAL, start=x0,
                          rounds=bm_inst.rounds, width=None, variant=WEAK,
                          cut_current=False, ground=bm_inst.ground, family=fam)

    def positives_desc(limit: int) -> list[int]:
        # Descending mask value: the whole set leads, so the response family
        # starts from the largest positive sets.
        return sorted((s for s in submasks(limit)
                       if s and is_positive(fam, s)), reverse=True)

    def response_partition(bm_hist: tuple, x_last: int):
        """Greedy maximal positive family from emptier responses plus its
        canonical extension over the opening set."""
        responses: list[int] = []
        sources: dict[int, int] = {}
        while True:
            witness = next(
                (a for a in positives_desc(x_last)
                 if all((a & w) in fam for w in responses)), None)
            if witness is None:
                break
            st = _replay(bm_inst, bm_hist)
            st = apply_move(bm_inst, st, witness, check=False)
            r = sigma_e.decide(bm_inst, st, bm_hist + ((NONEMPTY, witness),))
            if r in sources:
                raise TransformSoundnessError(
                    "emptier repeated a response across distinct dense calls")
            responses.append(r)
            sources[r] = witness
        extension: list[int] = []
        while True:
            witness = next(
                (b for b in positives_desc(x0)
                 if all((b & w) in fam for w in responses + extension)), None)
            if witness is None:
                break
            extension.append(witness)
        move = tuple(sorted_masks(responses + extension))
        return move, set(responses), sources

    def reconstruct(history: Sequence):
        bm_hist: tuple = ((EMPTY, x0),)
        records: list[dict] = []
        alive = True
        i = 0
        while i < len(history) and alive:
            x_last = bm_hist[-1][1]
            move, resp, sources = response_partition(bm_hist, x_last)
            rec = {"move": move, "responses": resp, "sources": sources,
                   "pick": None, "in_responses": None}
            records.append(rec)
            if i + 1 >= len(history):
                break
            pick = history[i + 1][1]
            rec["pick"] = pick
            if pick in resp:
                rec["in_responses"] = True
                bm_hist = bm_hist + ((NONEMPTY, sources[pick]), (EMPTY, pick))
            else:
                rec["in_responses"] = False
                alive = False
            i += 2
        return bm_hist, records, alive

    def decide(inst_, state, history):
        bm_hist, records, alive = reconstruct(history[:-1])
        if not alive:
            raise TransformSoundnessError(
                "cutter consulted after an extension pick ended the game")
        x_last = bm_hist[-1][1]
        move, _, _ = response_partition(bm_hist, x_last)
        return move

    strategy = FunctionStrategy(CUT, decide, SIMULATION,
                                f"emptier-cut-{sigma_e.name}")

    def certify(t: Transcript) -> TransformCertificate:
        bm_hist, records, alive = reconstruct(tuple(t.moves))
        details: dict = {"alive": alive,
                         "aux_rounds": (len(bm_hist) - 1) // 2,
                         "extensions_played": sum(
                             1 for r in records
                             if r["in_responses"] is False)}
        holds = _check_aux_run(bm_inst, bm_hist, sigma_e, EMPTY, details)
        empties = [mv for role, mv in bm_hist if role == EMPTY][1:]
        picks = [r["pick"] for r in records if r["in_responses"]]
        if picks != empties:
            holds = False
            details["choices_not_emptier_moves"] = True
        if not alive and t.winner != CUT:
            holds = False
            details["extension_pick_not_fatal"] = True
        return TransformCertificate(
            "empty_to_cut",
            "picks are the emptier's moves; extension picks lose",
            holds, t, list(bm_hist), details)

    return TransformOutput("empty_to_cut", g_inst, strategy, certify, bm_inst)


def nonempty_to_choose_strategy(sigma_n: Strategy, bm_inst: GameInstance,
                                start: int) -> TransformOutput:
    """From a survivor strategy for the set Banach-Mazur game, a picker for
    the unbounded-width weak generalized game on any positive start.

    Maximality hands the picker a piece meeting the survivor's current set
    positively; the auxiliary run interleaves the trimmed piece with the
    survivor's responses, so the generalized core contains the auxiliary
    core, and a winning survivor transports to a winning picker.
    """
    _require_bm_ideal(bm_inst, "nonempty_to_choose_strategy")
    fam = bm_inst.family
    if not is_positive(fam, start):
        raise ValidationError("start must be I-positive")
    g_inst = GameInstance(game_family=G_IDEAL, start=start,
                          rounds=bm_inst.rounds, width=None, variant=WEAK,
                          cut_current=False, ground=bm_inst.ground, family=fam)

    def reconstruct(history: Sequence):
        """Aux run, the survivor's current set, and the trimmed sets the
        emptier plays; the survivor is not consulted after the final pick."""
        bm_hist: tuple = ((EMPTY, start),)
        y = sigma_n.decide(bm_inst, _replay(bm_inst, bm_hist), bm_hist)
        bm_hist = bm_hist + ((NONEMPTY, y),)
        trimmed: list[int] = []
        pairs = 0
        i = 0
        while i + 1 < len(history):
            pick = history[i + 1][1]
            trimmed.append(pick & y)
            pairs += 1
            if pairs < g_inst.rounds:
                bm_hist = bm_hist + ((EMPTY, pick & y),)
                y = sigma_n.decide(bm_inst, _replay(bm_inst, bm_hist), bm_hist)
                bm_hist = bm_hist + ((NONEMPTY, y),)
            i += 2
        return bm_hist, y, trimmed

    def decide(inst_, state, history):
        _, y, _ = reconstruct(history[:-1])
        for w in sorted_pieces(inst_, state.pending):
            if is_positive(fam, w & y):
                return w
        raise TransformSoundnessError(
            "maximal family offered no piece meeting the survivor's set "
            "positively")

    strategy = FunctionStrategy(CHOOSE, decide, SIMULATION,
                                f"survivor-pick-{sigma_n.name}")

    def certify(t: Transcript) -> TransformCertificate:
        bm_hist, _, trimmed = reconstruct(tuple(t.moves))
        details: dict = {}
        holds = _check_aux_run(bm_inst, bm_hist, sigma_n, NONEMPTY, details)
        g_core = t.states[-1].core
        inter = start
        for s in trimmed:
            inter &= s
        if inter & ~g_core:
            holds = False
            details["relation_violated"] = format_mask(inter & ~g_core)
        details["g_core"] = format_mask(g_core)
        details["trimmed_core"] = format_mask(inter)
        return TransformCertificate(
            "nonempty_to_choose",
            "generalized core contains the trimmed auxiliary sets",
            holds, t, list(bm_hist), details)

    return TransformOutput("nonempty_to_choose", g_inst, strategy, certify,
                           bm_inst)


def choose_to_nonempty_strategy(provider: Callable[[int], Strategy],
                                bm_inst: GameInstance) -> TransformOutput:
    """From picker strategies (one per opening set) a survivor strategy.

    The survivor always moves to a set all of whose positive subsets are
    reachable picker responses; the search runs over positive subsets in
    decreasing canonical order and its exhaustion is a loud proof-violation
    error, never a game move.  The opening set is fixed by the opponent's
    first move; the quantifier over opening sets lives in the audit layer.
    """
    _require_bm_ideal(bm_inst, "choose_to_nonempty_strategy")
    fam = bm_inst.family
    cache: dict = {}

    def g_for(x0: int) -> GameInstance:
        return GameInstance(game_family=G_IDEAL, start=x0,
                            rounds=bm_inst.rounds, width=None, variant=WEAK,
                            cut_current=False, ground=bm_inst.ground,
                            family=fam)

    def all_moves(x0: int) -> list:
        key = ("moves", x0)
        if key not in cache:
            cache[key] = enumerate_i_partitions(fam, x0, None, True,
                                                bm_inst.move_budget)
        return cache[key]

    def response(x0: int, vec: tuple) -> int:
        """The picker's answer to the cut prefix ``vec`` (earlier picks its
        own)."""
        key = ("resp", x0, vec)
        if key in cache:
            return cache[key]
        g_inst = g_for(x0)
        sigma = provider(x0)
        st = initial_state(g_inst)
        hist: tuple = ()
        pick = None
        for w in vec:
            hist = hist + ((CUT, w),)
            st = apply_move(g_inst, st, w, check=False)
            pick = sigma.decide(g_inst, st, hist)
            hist = hist + ((CHOOSE, pick),)
            st = apply_move(g_inst, st, pick, check=False)
        cache[key] = pick
        return pick

    def response_set(x0: int, vec: tuple) -> frozenset:
        key = ("set", x0, vec)
        if key not in cache:
            cache[key] = frozenset(response(x0, vec + (w,))
                                   for w in all_moves(x0))
        return cache[key]

    def reconstruct(history: Sequence):
        """(opening set, reconstructed cut prefix)."""
        if not history:
            return None, ()
        x0 = history[0][1]
        vec: tuple = ()
        for i, (role, move) in enumerate(history):
            if role != EMPTY or i == 0:
                continue
            found = next((w for w in all_moves(x0)
                          if response(x0, vec + (w,)) == move), None)
            if found is None:
                raise TransformSoundnessError(
                    f"opposing move {format_mask(move)} is not a picker "
                    "response")
            vec = vec + (found,)
        return x0, vec

    def decide(inst_, state, history):
        x0, vec = reconstruct(history)
        x_last = history[-1][1]
        responses = response_set(x0, vec)
        for y in sorted((s for s in submasks(x_last)
                         if s and is_positive(fam, s)), reverse=True):
            if all(z in responses for z in submasks(y)
                   if z and is_positive(fam, z)):
                return y
        raise SigmaSearchError(
            "no positive set below the opposing move has all its positive "
            "subsets among the picker's responses")

    strategy = FunctionStrategy(NONEMPTY, decide, SIMULATION,
                                "picker-survivor")

    def certify(t: Transcript) -> TransformCertificate:
        try:
            x0, vec = reconstruct(tuple(t.moves))
        except TransformSoundnessError as exc:
            return TransformCertificate(
                "choose_to_nonempty", "opposing moves are picker responses",
                False, t, [], {"error": str(exc)})
        holds = True
        details: dict = {"stages": len(vec)}
        empties = [mv for role, mv in t.moves if role == EMPTY]
        aux: list = []
        for j, w in enumerate(vec):
            pick = response(x0, vec[:j + 1])
            aux.append((w, pick))
            if pick != empties[j + 1]:
                holds = False
                details["pick_mismatch"] = j
        return TransformCertificate(
            "choose_to_nonempty",
            "opposing moves are exactly the picker's responses",
            holds, t, aux, details)

    return TransformOutput("choose_to_nonempty", bm_inst, strategy, certify)
