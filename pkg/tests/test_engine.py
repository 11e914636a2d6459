import pytest

from cutchoose.engine import (BM_IDEAL, BM_POSET, CHOOSE, CUT, EMPTY, EXACT,
                              G_IDEAL, G_POSET, NONEMPTY, STRICT_PREFIX, U,
                              WEAK, FunctionStrategy, GameInstance, GameState,
                              TableStrategy, apply_move, copy_strategy,
                              core_positive, first_move_strategy,
                              fixed_point_choose_strategy,
                              greedy_picker_strategy, initial_state,
                              legal_moves, play_out, seeded_table_strategy,
                              terminal_status, validate_move,
                              verify_winning_strategy)
from cutchoose.errors import (IllegalMoveError, StrategyError,
                              ValidationError)
from cutchoose.solver import reference_winner, solve
from cutchoose.structures import (FiniteBooleanAlgebra, FinitePoset,
                                  GroundSet, Ideal, MonotoneFamily,
                                  format_mask, is_positive, sorted_masks,
                                  submasks)
from cutchoose.transforms import digit_split_cut_strategy
from cutchoose import analysis


def u_instance(m, rounds, width=2, variant=EXACT, bound=1, cut_current=True):
    g = GroundSet(m)
    return GameInstance(game_family=U, start=g.full_mask, rounds=rounds,
                        width=width, variant=variant, cut_current=cut_current,
                        ground=g, family=MonotoneFamily.size_at_most(g, bound))


# ---------------------------------------------------------------------------
# Instance invariants
# ---------------------------------------------------------------------------

def test_instance_invariants():
    g = GroundSet(3)
    fam = MonotoneFamily.size_at_most(g, 1)
    with pytest.raises(ValidationError):
        GameInstance(game_family=U, start=0b001, rounds=1, width=2,
                     ground=g, family=fam)  # start not positive
    with pytest.raises(ValidationError):
        GameInstance(game_family=U, start=0b111, rounds=1, width=None,
                     ground=g, family=fam)  # unbounded width for U
    with pytest.raises(ValidationError):
        GameInstance(game_family=U, start=0b111, rounds=1, width=1,
                     ground=g, family=fam)
    with pytest.raises(ValidationError):
        GameInstance(game_family=BM_IDEAL, start=0b111, rounds=1, width=4,
                     ground=g, family=fam)  # BM games take no width


# ---------------------------------------------------------------------------
# Legal moves
# ---------------------------------------------------------------------------

def test_legal_moves_u_round0():
    inst = u_instance(3, 1)
    moves = legal_moves(inst, initial_state(inst))
    assert len(moves) == 3


def test_legal_moves_bm_ideal():
    g = GroundSet(3)
    inst = GameInstance(game_family=BM_IDEAL, start=0b111, rounds=1,
                        width=None, ground=g,
                        family=MonotoneFamily.size_at_most(g, 1))
    state = GameState(0, NONEMPTY, 0b011, None)
    assert legal_moves(inst, state) == [0b011]


def test_legal_moves_g_ideal_includes_all_pairs():
    g = GroundSet(4)
    fam = MonotoneFamily.size_at_most(g, 1)
    inst = GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=1,
                        width=6, ground=g, family=fam)
    moves = legal_moves(inst, initial_state(inst))
    assert tuple(sorted_masks([3, 5, 9, 6, 10, 12])) in moves


# ---------------------------------------------------------------------------
# Apply and terminal rules
# ---------------------------------------------------------------------------

def test_apply_move_examples():
    inst = u_instance(3, 2)
    st = initial_state(inst)
    st = apply_move(inst, st, (0b001, 0b110))
    assert st.pending == (0b001, 0b110)
    st = apply_move(inst, st, 0b110)
    assert st.core == 0b110 and st.round == 1 and st.pending is None

    alg = FiniteBooleanAlgebra(GroundSet(4))
    gp = GameInstance(game_family=G_POSET, start=alg.top, rounds=2, width=4,
                      cut_current=False, algebra=alg)
    st = initial_state(gp)
    st = apply_move(inst=gp, state=st, move=(0b0011, 0b1100))
    st = apply_move(gp, st, 0b0011)          # a v b
    st = apply_move(gp, st, (0b0101, 0b1010))
    st = apply_move(gp, st, 0b0101)          # a v c
    assert st.core == 0b0001                 # meet is the atom a

    g = GroundSet(3)
    bm = GameInstance(game_family=BM_IDEAL, start=0b111, rounds=1, width=None,
                      ground=g, family=MonotoneFamily.size_at_most(g, 1))
    st = initial_state(bm)
    st = apply_move(bm, st, 0b011)
    assert st.core == 0b011 and st.to_move == NONEMPTY and st.round == 0
    st = apply_move(bm, st, 0b011)
    assert st.round == 1


def test_terminal_examples():
    inst = u_instance(3, 1)
    final = GameState(1, CUT, 0b110, None)
    assert terminal_status(inst, final).status == CHOOSE

    weak = u_instance(6, 3, variant=WEAK)
    mid = GameState(1, CUT, 0b000010, None)
    out = terminal_status(weak, mid)
    assert out.status == CUT and "round 1" in out.reason

    g = GroundSet(4)
    bm = GameInstance(game_family=BM_IDEAL, start=g.full_mask, rounds=2,
                      width=None, ground=g,
                      family=MonotoneFamily.size_at_most(g, 1))
    t = play_out(bm, copy_strategy(bm), copy_strategy(bm))
    assert t.winner == NONEMPTY


def test_strict_prefix_is_shifted_exact():
    # implemented literally; equals the exact game one round shorter
    for m in (3, 4, 5, 6):
        for n in (1, 2, 3):
            strict = u_instance(m, n, variant=STRICT_PREFIX)
            winner = solve(strict, want_strategy=False).winner
            if n == 1:
                assert winner == CHOOSE
            else:
                exact = u_instance(m, n - 1)
                assert winner == solve(exact, want_strategy=False).winner


# ---------------------------------------------------------------------------
# Structural move validation
# ---------------------------------------------------------------------------

def test_validate_move_rules():
    inst = u_instance(3, 1)
    st = initial_state(inst)
    with pytest.raises(IllegalMoveError) as err:
        validate_move(inst, st, (0b001, 0b010))  # does not cover
    assert err.value.rule == "pieces-cover"
    with pytest.raises(IllegalMoveError) as err:
        validate_move(inst, st, (0b011, 0b110))  # overlap
    assert err.value.rule == "pieces-disjoint"
    # empty pieces are tolerated
    validate_move(inst, st, (0b111, 0))

    g = GroundSet(4)
    fam = MonotoneFamily.size_at_most(g, 1)
    gi = GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=1,
                      width=6, ground=g, family=fam)
    with pytest.raises(IllegalMoveError) as err:
        validate_move(gi, initial_state(gi), (0b0011, 0b1100))
    assert err.value.rule == "maximality"
    loose = GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=1,
                         width=6, maximal=False, ground=g, family=fam)
    validate_move(loose, initial_state(loose), (0b0011, 0b1100))


def test_choose_may_pick_family_member():
    # losing by the win condition, not by legality
    inst = u_instance(3, 1)
    st = initial_state(inst)
    st = apply_move(inst, st, (0b001, 0b110))
    st = apply_move(inst, st, 0b001)
    assert terminal_status(inst, st).status == CUT


# ---------------------------------------------------------------------------
# Playouts
# ---------------------------------------------------------------------------

def test_play_out_digit_split_vs_greedy():
    out = digit_split_cut_strategy(4, 2, 2)
    t = play_out(out.instance, out.strategy,
                 greedy_picker_strategy(out.instance))
    assert t.winner == CUT


def test_play_out_fixed_point_nonempty_family():
    g = GroundSet(4)
    inst = GameInstance(game_family=U, start=g.full_mask, rounds=3, width=2,
                        ground=g, family=MonotoneFamily.size_at_most(g, 0))
    v = verify_winning_strategy(inst, fixed_point_choose_strategy(0), CHOOSE)
    assert v.verified


def test_weak_two_points_one_round_always_cut():
    inst = u_instance(2, 1, variant=WEAK)
    moves = legal_moves(inst, initial_state(inst))
    assert moves == [(0b01, 0b10)]
    for sigma in (greedy_picker_strategy(inst), fixed_point_choose_strategy(0)):
        t = play_out(inst, FunctionStrategy(CUT, lambda i, s, h: (0b01, 0b10)),
                     sigma)
        assert t.winner == CUT


def test_fixed_point_counterexample_in_weak_variant():
    inst = u_instance(2, 1, variant=WEAK)
    v = verify_winning_strategy(inst, fixed_point_choose_strategy(0), CHOOSE)
    assert not v.verified
    # the counterexample splits off the fixed point
    cut_move = v.counterexample.moves[0][1]
    assert 0b01 in cut_move


def test_greedy_wins_every_maximal_generalized_game():
    corpus = analysis.generate_corpus(7, per_family=6)
    for item in corpus:
        inst = item.instance
        if inst.game_family != G_IDEAL:
            continue
        v = verify_winning_strategy(inst, greedy_picker_strategy(inst), CHOOSE)
        assert v.verified, item.instance_id


def test_strategy_error_carries_position():
    inst = u_instance(3, 1)

    def broken(inst_, state, history):
        raise StrategyError("no move")

    with pytest.raises(StrategyError) as err:
        play_out(inst, FunctionStrategy(CUT, broken),
                 greedy_picker_strategy(inst))
    assert "position" in str(err.value)


# ---------------------------------------------------------------------------
# Engine-level invariants
# ---------------------------------------------------------------------------

def test_canonicalization_soundness():
    # state-abstracted solving equals raw history recursion
    for m in (3, 4, 5, 6):
        for n in (1, 2, 3):
            for variant in (EXACT, WEAK):
                for cc in (True, False):
                    inst = u_instance(m, n, variant=variant, cut_current=cc)
                    assert solve(inst, want_strategy=False).winner == \
                        reference_winner(inst), (m, n, variant, cc)
    g = GroundSet(4)
    fam = MonotoneFamily.size_at_most(g, 1)
    for n in (1, 2):
        gi = GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=n,
                          width=6, cut_current=False, ground=g, family=fam)
        assert solve(gi, want_strategy=False).winner == reference_winner(gi)
    alg = FiniteBooleanAlgebra(GroundSet(3))
    gp = GameInstance(game_family=G_POSET, start=alg.top, rounds=2, width=3,
                      cut_current=False, algebra=alg)
    assert solve(gp, want_strategy=False).winner == reference_winner(gp)


def test_convention_invariance_small():
    corpus = analysis.generate_corpus(11, per_family=8)
    for item in corpus:
        inst = item.instance
        if inst.game_family not in (U, G_IDEAL, G_POSET):
            continue
        flipped = analysis._replace(inst, cut_current=not inst.cut_current)
        assert solve(inst, want_strategy=False).winner == \
            solve(flipped, want_strategy=False).winner, item.instance_id


def test_monotone_prefix_property_on_transcripts():
    # cores shrink; with a monotone family, final positivity forces
    # positivity of every prefix
    corpus = analysis.generate_corpus(3, per_family=8)
    for item in corpus:
        inst = item.instance
        if inst.game_family not in (U, G_IDEAL):
            continue
        sigma_cut = seeded_table_strategy(inst, CUT, 5)
        t = play_out(inst, sigma_cut, greedy_picker_strategy(inst))
        cores = [s.core for s in t.states if s.pending is None]
        for a, b in zip(cores, cores[1:]):
            assert b & ~a == 0
        if core_positive(inst, cores[-1]):
            assert all(core_positive(inst, c) for c in cores)


def test_table_strategy_round_trips_and_misses():
    inst = u_instance(4, 2)
    result = solve(inst)
    table = result.strategy
    assert isinstance(table, TableStrategy)
    with pytest.raises(StrategyError):
        table.decide(inst, GameState(9, CUT, 0b1, None), ())


def test_bm_poset_descent_to_least_element():
    # regression: a chain can bottom out at element index 0, which is still
    # a lower bound of everything played
    chain = FinitePoset.chain(3)
    inst = GameInstance(game_family=BM_POSET, start=2, rounds=2, width=None,
                        poset=chain)

    def drop(inst_, state, history):
        return 0

    t = play_out(inst, FunctionStrategy(EMPTY, drop), copy_strategy(inst))
    assert t.winner == NONEMPTY
    assert t.states[-1].core == 0


def test_poset_game_chain_convention():
    # under the chain convention antichains sit below the previous choice,
    # so choices descend and the picker trivially survives
    p = FinitePoset.from_subsets([0b001, 0b010, 0b011, 0b101, 0b111], 4)
    inst = GameInstance(game_family=G_POSET, start=4, rounds=2, width=2,
                        cut_current=True, poset=p)
    st = initial_state(inst)
    assert st.core == p.down[4]
    moves = legal_moves(inst, st)
    assert (4,) in moves
    t = play_out(inst, first_move_strategy(inst, CUT),
                 greedy_picker_strategy(inst))
    assert t.winner == CHOOSE
    assert solve(inst, want_strategy=False).winner == CHOOSE


from hypothesis import given, settings, strategies as st


@st.composite
def small_instances(draw):
    from cutchoose.structures import FiniteBooleanAlgebra
    kind = draw(st.sampled_from([U, G_IDEAL, BM_IDEAL, G_POSET]))
    variant = draw(st.sampled_from([EXACT, WEAK, STRICT_PREFIX]))
    rounds = draw(st.integers(1, 2))
    cut_current = draw(st.booleans())
    if kind == G_POSET:
        alg = FiniteBooleanAlgebra(GroundSet(draw(st.integers(2, 3))))
        return GameInstance(game_family=kind, start=alg.top, rounds=rounds,
                            width=draw(st.sampled_from([2, 3, None])),
                            variant=variant, cut_current=cut_current,
                            algebra=alg)
    m = draw(st.integers(2, 5))
    g = GroundSet(m)
    bound = draw(st.integers(0, 1))
    fam = MonotoneFamily.size_at_most(g, bound)
    if bound >= m:
        fam = MonotoneFamily.size_at_most(g, 0)
    width = None if kind != U else draw(st.integers(2, 3))
    if kind == BM_IDEAL:
        cut_current = True
    return GameInstance(game_family=kind, start=g.full_mask, rounds=rounds,
                        width=width, variant=variant, cut_current=cut_current,
                        ground=g, family=fam)


@given(small_instances(), st.integers(0, 5))
@settings(max_examples=60, deadline=None)
def test_random_playout_invariants(inst, seed):
    # every canonical move is structurally valid; playouts are deterministic;
    # the winner is one of the instance's two roles
    state = initial_state(inst)
    for move in legal_moves(inst, state)[:20]:
        validate_move(inst, state, move)
    cut_side = seeded_table_strategy(inst, inst.cutter, seed)
    choose_side = seeded_table_strategy(inst, inst.picker, seed + 1)
    t1 = play_out(inst, cut_side, choose_side)
    t2 = play_out(inst, cut_side, choose_side)
    assert t1.moves == t2.moves and t1.winner == t2.winner
    assert t1.winner in (inst.cutter, inst.picker)
    assert t1.reason
    # mask-game cores weakly shrink across picks
    if inst.game_family in (U, G_IDEAL):
        cores = [s.core for s in t1.states if s.pending is None]
        for a, b in zip(cores, cores[1:]):
            assert b & ~a == 0
