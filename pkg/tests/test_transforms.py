import pytest

from cutchoose import analysis, transforms as tr
from cutchoose.engine import (BM_IDEAL, CHOOSE, CUT, EMPTY, G_IDEAL, G_POSET,
                              NONEMPTY, U, WEAK, FunctionStrategy,
                              GameInstance, copy_strategy, first_move_strategy,
                              greedy_picker_strategy, initial_state, play_out,
                              seeded_table_strategy, verify_winning_strategy)
from cutchoose.errors import (SigmaSearchError, TransformSoundnessError,
                              ValidationError)
from cutchoose.solver import solve
from cutchoose.structures import (FiniteBooleanAlgebra, GroundSet,
                                  MonotoneFamily, enumerate_i_partitions,
                                  format_mask, is_positive, mask_of,
                                  sorted_masks, submasks)


def u_instance(m, rounds, width=2, bound=1):
    g = GroundSet(m)
    return GameInstance(game_family=U, start=g.full_mask, rounds=rounds,
                        width=width, ground=g,
                        family=MonotoneFamily.size_at_most(g, bound))


def g_ideal(m, rounds, width, bound=1):
    g = GroundSet(m)
    return GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=rounds,
                        width=width, cut_current=False, ground=g,
                        family=MonotoneFamily.size_at_most(g, bound))


def bm_ideal(m, rounds, bound=1):
    g = GroundSet(m)
    return GameInstance(game_family=BM_IDEAL, start=g.full_mask,
                        rounds=rounds, width=None, ground=g,
                        family=MonotoneFamily.size_at_most(g, bound))


def assert_all_hold(out, budget=500_000):
    certs = tr.certify_playouts(out, node_budget=budget)
    assert certs, "no playouts enumerated"
    bad = [c for c in certs if not c.holds]
    assert not bad, bad[0].details
    return certs


# ---------------------------------------------------------------------------
# Digit splitting
# ---------------------------------------------------------------------------

def test_digit_split_binary_and_ternary():
    for m, nu, n in ((4, 2, 2), (2, 2, 1), (9, 3, 2), (8, 2, 3)):
        out = tr.digit_split_cut_strategy(m, nu, n)
        assert verify_winning_strategy(out.instance, out.strategy,
                                       CUT).verified, (m, nu, n)


def test_digit_split_threshold_sharpness():
    for nu, n in ((2, 1), (2, 2), (3, 1), (3, 2)):
        ok = nu ** n
        tr.digit_split_cut_strategy(ok, nu, n)
        with pytest.raises(ValidationError):
            tr.digit_split_cut_strategy(ok + 1, nu, n)
        inst = u_instance(ok + 1, n, width=nu)
        assert solve(inst, want_strategy=False).winner == CHOOSE


# ---------------------------------------------------------------------------
# Restriction along an embedding
# ---------------------------------------------------------------------------

def test_restrict_choose_strategy_transfers_win():
    inner = u_instance(5, 2)
    res = solve(inner)
    outer = u_instance(8, 2)
    for emb in ((0, 1, 2, 3, 4), (1, 3, 5, 6, 7)):
        out = tr.restrict_choose_strategy(res.strategy, inner, outer, emb)
        assert verify_winning_strategy(outer, out.strategy, CHOOSE).verified
        assert_all_hold(out)


def test_restrict_rejects_incompatible_families():
    inner = u_instance(3, 1)
    g = GroundSet(5)
    outer = GameInstance(game_family=U, start=g.full_mask, rounds=1, width=2,
                         ground=g, family=MonotoneFamily.size_at_most(g, 2))
    res = solve(inner)
    with pytest.raises(ValidationError):
        tr.restrict_choose_strategy(res.strategy, inner, outer, (0, 1, 2))


# ---------------------------------------------------------------------------
# Disjointification
# ---------------------------------------------------------------------------

def test_disjointify_choose_transports_win():
    g_inst = g_ideal(5, 1, width=2)
    u_inst = tr._doubled_instance(g_inst)
    res = solve(u_inst)
    assert res.winner == CHOOSE
    out = tr.disjointify_choose_strategy(res.strategy, g_inst)
    assert verify_winning_strategy(g_inst, out.strategy, CHOOSE).verified
    assert_all_hold(out)


def test_disjointify_choose_fixed_point_nonempty_family():
    # the picker that protects one point keeps it through the simulation
    g_inst = g_ideal(4, 2, width=None, bound=0)
    from cutchoose.transforms import fixed_point_choose_strategy
    out = tr.disjointify_choose_strategy(fixed_point_choose_strategy(0),
                                         g_inst)
    t = play_out(g_inst, first_move_strategy(g_inst, CUT), out.strategy)
    assert t.states[-1].core & 1
    assert_all_hold(out)


def test_disjointify_choose_random_tables_certify():
    g_inst = g_ideal(4, 2, width=6)
    u_inst = tr._doubled_instance(g_inst)
    for seed in range(3):
        sigma = seeded_table_strategy(u_inst, CHOOSE, seed)
        out = tr.disjointify_choose_strategy(sigma, g_inst)
        assert_all_hold(out)


def test_disjointify_cut_certificates_and_containment():
    g_inst = g_ideal(4, 2, width=6)
    sigma = first_move_strategy(g_inst, CUT)
    out = tr.disjointify_cut_strategy(sigma, g_inst)
    certs = assert_all_hold(out)
    # containment is strict on at least one playout of some instance
    strict = [c for c in certs
              if c.details["u_core"] != c.details["aux_pick_core"]]
    assert strict


def test_disjointify_cut_identity_like():
    g_inst = g_ideal(4, 2, width=None)

    def always_whole(inst_, state, history):
        return (g_inst.start,)

    out = tr.disjointify_cut_strategy(
        FunctionStrategy(CUT, always_whole, name="whole"), g_inst)
    t = play_out(out.instance, out.strategy,
                 greedy_picker_strategy(out.instance))
    played = [m for role, m in t.moves if role == CUT]
    assert played[0] == (g_inst.start,)
    assert played[1] == (g_inst.start, 0)
    cert = out.certify(t)
    assert cert.holds
    assert cert.details["u_core"] == cert.details["aux_pick_core"]


# ---------------------------------------------------------------------------
# Factorization and width transfer
# ---------------------------------------------------------------------------

def test_factor_antichain_atoms():
    alg = FiniteBooleanAlgebra(GroundSet(4))
    fr = tr.factor_antichain(alg, alg.top, [1, 2, 4, 8], 2, 2)
    assert fr.levels[0] == tuple(sorted_masks([0b0011, 0b1100]))
    assert fr.levels[1] == tuple(sorted_masks([0b0101, 0b1010]))
    assert fr.recover((0, 0)) == 1  # (a v b) ^ (a v c) = a


def test_factor_antichain_rejects_degenerate():
    alg = FiniteBooleanAlgebra(GroundSet(4))
    with pytest.raises(ValidationError):
        tr.factor_antichain(alg, alg.top, [alg.top], 2, 0)
    with pytest.raises(ValidationError):
        tr.factor_antichain(alg, alg.top, [1, 2, 4, 8, 3], 2, 2)


def test_factor_antichain_random_partitions():
    import random
    rng = random.Random(99)
    alg = FiniteBooleanAlgebra(GroundSet(16))
    for _ in range(20):
        # random partition of the 16 atoms into 8 pieces
        atoms = list(range(16))
        rng.shuffle(atoms)
        pieces = [0] * 8
        for i, a in enumerate(atoms):
            pieces[i % 8] |= 1 << a
        tr.factor_antichain(alg, alg.top, pieces, 2, 3)


def test_transfer_cut_and_choose():
    alg = FiniteBooleanAlgebra(GroundSet(4))
    big = GameInstance(game_family=G_POSET, start=alg.top, rounds=1, width=4,
                       cut_current=False, algebra=alg)
    small = GameInstance(game_family=G_POSET, start=alg.top, rounds=2,
                         width=2, cut_current=False, algebra=alg)

    res_small = solve(small)
    out_choose = tr.transfer_choose_small_to_big(res_small.strategy, small,
                                                 2, 2)
    assert verify_winning_strategy(out_choose.instance, out_choose.strategy,
                                   CHOOSE).verified
    assert_all_hold(out_choose)

    def atoms_move(inst_, state, history):
        return (1, 2, 4, 8)

    out_cut = tr.transfer_cut_big_to_small(
        FunctionStrategy(CUT, atoms_move, name="atoms"), big, 2, 2)
    certs = assert_all_hold(out_cut)
    t = play_out(out_cut.instance, out_cut.strategy,
                 greedy_picker_strategy(out_cut.instance))
    played = [m for role, m in t.moves if role == CUT]
    assert played[0] == tuple(sorted_masks([0b0011, 0b1100]))
    assert played[1] == tuple(sorted_masks([0b0101, 0b1010]))
    # block boundary: the recovered element is the picker's meet
    cert = out_cut.certify(t)
    assert cert.holds and cert.details["small_core"] == cert.details["big_core"]


def test_transfer_random_sigmas_certify():
    alg = FiniteBooleanAlgebra(GroundSet(4))
    big = GameInstance(game_family=G_POSET, start=alg.top, rounds=1, width=4,
                       cut_current=False, algebra=alg)
    small = GameInstance(game_family=G_POSET, start=alg.top, rounds=2,
                         width=2, cut_current=False, algebra=alg)
    for seed in range(4):
        out = tr.transfer_cut_big_to_small(
            seeded_table_strategy(big, CUT, seed), big, 2, 2)
        assert_all_hold(out)
        out2 = tr.transfer_choose_small_to_big(
            seeded_table_strategy(small, CHOOSE, seed), small, 2, 2)
        assert_all_hold(out2)


# ---------------------------------------------------------------------------
# Witness sequences
# ---------------------------------------------------------------------------

def test_witness_to_cut_ablation_sequence_wins():
    # without the maximality filter, the two bit-split families admit no
    # positive branch: every pick pair meets in at most one point
    g = GroundSet(4)
    fam = MonotoneFamily.size_at_most(g, 1)
    inst = GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=2,
                        width=6, maximal=False, cut_current=False,
                        ground=g, family=fam)
    seq = [(0b0011, 0b1100), (0b0101, 0b1010)]
    branch = analysis.find_branch(fam, g.full_mask, seq, analysis.PLAIN)
    out = tr.witness_to_cut_strategy(seq, inst)
    verified = verify_winning_strategy(inst, out.strategy, CUT).verified
    assert branch is None and verified
    assert_all_hold(out)
    # the same families in either order keep a branch when one is repeated
    rep = [(0b0011, 0b1100), (0b0011, 0b1100)]
    assert analysis.find_branch(fam, g.full_mask, rep,
                                analysis.PLAIN) is not None
    out_rep = tr.witness_to_cut_strategy(rep, inst)
    assert not verify_winning_strategy(inst, out_rep.strategy, CUT).verified


def test_witness_with_branch_loses():
    g = GroundSet(4)
    fam = MonotoneFamily.size_at_most(g, 1)
    inst = GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=2,
                        width=6, maximal=True, cut_current=False,
                        ground=g, family=fam)
    seq = [(g.full_mask,), (g.full_mask,)]
    branch = analysis.find_branch(fam, g.full_mask, seq, analysis.PLAIN)
    assert branch == [g.full_mask, g.full_mask]
    out = tr.witness_to_cut_strategy(seq, inst)
    assert not verify_winning_strategy(inst, out.strategy, CUT).verified


def test_cut_strategy_to_witness_round_trip():
    # solver strategies on small exact partition games, recast over the
    # powerset: every branch of the witness is a defeating pick line
    for m, n in ((4, 2), (5, 2), (3, 1)):
        inst = GameInstance(
            game_family=U, start=(1 << m) - 1, rounds=n, width=2,
            cut_current=False, ground=GroundSet(m),
            family=MonotoneFamily.size_at_most(GroundSet(m), 1))
        res = solve(inst)
        sigma = res.strategy if res.winner == CUT else None
        if sigma is None:
            continue
        seq = tr.cut_strategy_to_witness(sigma, inst)
        branch = analysis.find_branch(inst.family, inst.start, seq,
                                      analysis.PLAIN)
        assert branch is None  # winning strategy <=> branchless sequence
    # and a losing cutter yields a sequence with a branch
    inst = GameInstance(
        game_family=U, start=(1 << 5) - 1, rounds=1, width=2,
        cut_current=False, ground=GroundSet(5),
        family=MonotoneFamily.size_at_most(GroundSet(5), 1))
    sigma = first_move_strategy(inst, CUT)
    seq = tr.cut_strategy_to_witness(sigma, inst)
    assert analysis.find_branch(inst.family, inst.start, seq,
                                analysis.PLAIN) is not None


def test_witness_branch_equivalence_exhaustive_small():
    # bidirectional: over all fixed sequences of two binary partitions of a
    # 4-point set, the referee's verdict on the sequence-playing cutter
    # matches branchlessness
    g = GroundSet(4)
    fam = MonotoneFamily.size_at_most(g, 1)
    inst = GameInstance(game_family=U, start=g.full_mask, rounds=2, width=2,
                        cut_current=False, ground=g, family=fam)
    from cutchoose.structures import enumerate_disjoint_partitions
    moves = enumerate_disjoint_partitions(g.full_mask, 2)
    for w0 in moves[:4]:
        for w1 in moves:
            seq = [w0, w1]
            out = tr.witness_to_cut_strategy(seq, inst)
            verified = verify_winning_strategy(inst, out.strategy,
                                               CUT).verified
            branch = analysis.find_branch(fam, g.full_mask, seq,
                                          analysis.PLAIN)
            assert verified == (branch is None), seq


# ---------------------------------------------------------------------------
# Banach-Mazur bridges
# ---------------------------------------------------------------------------

def test_witness_to_empty_maximal_walk():
    bm = bm_ideal(4, 2)
    fam = bm.family
    seqs = enumerate_i_partitions(fam, bm.start, None, True)
    out = tr.witness_to_empty_strategy([seqs[-1]], bm)
    certs = assert_all_hold(out)
    assert all(c.details["detach_stage"] is None for c in certs)
    # finite runs always end nonempty, matching the existence of a branch
    assert all(c.output_run.winner == NONEMPTY for c in certs)


def test_witness_to_empty_ablation_detaches():
    bm = bm_ideal(4, 2)
    out = tr.witness_to_empty_strategy([(0b0011,)], bm)
    certs = assert_all_hold(out)
    assert any(c.details["detach_stage"] is not None for c in certs)


def test_empty_to_cut_copy_strategy():
    bm = bm_ideal(4, 2)

    def copy_e(inst_, state, history):
        return state.core

    out = tr.empty_to_cut_strategy(
        FunctionStrategy(EMPTY, copy_e, name="copy"), bm)
    assert out.instance.variant == WEAK and out.instance.width is None
    assert_all_hold(out)
    # both sides of the bridge are false at finite scale
    assert not verify_winning_strategy(out.instance, out.strategy,
                                       CUT).verified
    assert solve(bm, want_strategy=False).winner == NONEMPTY


def test_empty_to_cut_trivial_one_round():
    g = GroundSet(3)
    bm1 = GameInstance(game_family=BM_IDEAL, start=g.full_mask, rounds=1,
                       width=None, ground=g,
                       family=MonotoneFamily.size_at_most(g, 0))

    def copy_e(inst_, state, history):
        return state.core

    out = tr.empty_to_cut_strategy(
        FunctionStrategy(EMPTY, copy_e, name="copy"), bm1)
    move = out.strategy.decide(out.instance, initial_state(out.instance), ())
    assert move == (g.full_mask,)


def test_nonempty_to_choose_transports_win():
    for m, rounds, bound in ((4, 2, 1), (5, 2, 1), (4, 3, 0)):
        bm = bm_ideal(m, rounds, bound)
        out = tr.nonempty_to_choose_strategy(copy_strategy(bm), bm, bm.start)
        assert verify_winning_strategy(out.instance, out.strategy,
                                       CHOOSE).verified, (m, rounds)
        assert_all_hold(out)


def test_choose_to_nonempty_greedy_provider():
    bm = bm_ideal(4, 2)

    def provider(x0):
        g_inst = GameInstance(game_family=G_IDEAL, start=x0, rounds=bm.rounds,
                              width=None, variant=WEAK, cut_current=False,
                              ground=bm.ground, family=bm.family)
        return greedy_picker_strategy(g_inst)

    out = tr.choose_to_nonempty_strategy(provider, bm)
    assert verify_winning_strategy(bm, out.strategy, NONEMPTY,
                                   node_budget=500_000).verified
    assert_all_hold(out)


def test_choose_to_nonempty_forced_single_piece():
    # one-round game: the survivor's first move keeps all positive subsets
    # inside the picker's response set
    g = GroundSet(3)
    bm1 = GameInstance(game_family=BM_IDEAL, start=g.full_mask, rounds=1,
                       width=None, ground=g,
                       family=MonotoneFamily.size_at_most(g, 1))

    def provider(x0):
        g_inst = GameInstance(game_family=G_IDEAL, start=x0, rounds=1,
                              width=None, variant=WEAK, cut_current=False,
                              ground=g, family=bm1.family)
        return greedy_picker_strategy(g_inst)

    out = tr.choose_to_nonempty_strategy(provider, bm1)
    st = initial_state(bm1)
    from cutchoose.engine import apply_move
    st1 = apply_move(bm1, st, g.full_mask)
    y = out.strategy.decide(bm1, st1, ((EMPTY, g.full_mask),))
    assert is_positive(bm1.family, y)


def test_choose_to_nonempty_sigma_search_failure_is_loud():
    # a picker that always answers with the whole set starves the response
    # set; the search must fail loudly, not play a move
    bm = bm_ideal(4, 2)

    def provider(x0):
        return FunctionStrategy(
            CHOOSE, lambda i, s, h: x0, name="constant-whole")

    out = tr.choose_to_nonempty_strategy(provider, bm)
    st = initial_state(bm)
    from cutchoose.engine import apply_move
    st1 = apply_move(bm, st, bm.start)
    with pytest.raises(SigmaSearchError):
        out.strategy.decide(bm, st1, ((EMPTY, bm.start),))


def test_choose_to_nonempty_rejects_foreign_moves():
    bm = bm_ideal(4, 2)
    fam = bm.family

    def provider(x0):
        g_inst = GameInstance(game_family=G_IDEAL, start=x0, rounds=bm.rounds,
                              width=None, variant=WEAK, cut_current=False,
                              ground=bm.ground, family=bm.family)
        return greedy_picker_strategy(g_inst)

    out = tr.choose_to_nonempty_strategy(provider, bm)
    # compute the stage-one response set and pick a positive non-member
    responses = set()
    for w in enumerate_i_partitions(fam, bm.start, None, True):
        g_inst = GameInstance(game_family=G_IDEAL, start=bm.start,
                              rounds=bm.rounds, width=None, variant=WEAK,
                              cut_current=False, ground=bm.ground, family=fam)
        sigma = provider(bm.start)
        st = initial_state(g_inst)
        from cutchoose.engine import apply_move
        st = apply_move(g_inst, st, w, check=False)
        responses.add(sigma.decide(g_inst, st, ((CUT, w),)))
    foreign = next(s for s in sorted_masks(submasks(bm.start))
                   if s and is_positive(fam, s) and s not in responses)
    history = ((EMPTY, bm.start), (NONEMPTY, bm.start), (EMPTY, foreign))
    with pytest.raises(TransformSoundnessError):
        from cutchoose.engine import GameState
        out.strategy.decide(bm, GameState(1, NONEMPTY, foreign, None), history)


def test_transfer_choose_beta_three():
    alg = FiniteBooleanAlgebra(GroundSet(8))
    small = GameInstance(game_family=G_POSET, start=alg.top, rounds=3,
                         width=2, cut_current=False, algebra=alg)
    res = solve(small)
    assert res.winner == CHOOSE
    out = tr.transfer_choose_small_to_big(res.strategy, small, 2, 3)
    assert out.instance.width == 8 and out.instance.rounds == 1
    assert verify_winning_strategy(out.instance, out.strategy, CHOOSE,
                                   node_budget=1_000_000).verified


def test_disjointify_on_weak_variant_games():
    # the doubled game inherits the weak variant; early terminations leave
    # auxiliary prefixes that must still certify
    g = GroundSet(4)
    fam = MonotoneFamily.size_at_most(g, 1)
    g_inst = GameInstance(game_family=G_IDEAL, start=g.full_mask, rounds=2,
                          width=6, variant=WEAK, cut_current=False,
                          ground=g, family=fam)
    out = tr.disjointify_cut_strategy(first_move_strategy(g_inst, CUT), g_inst)
    assert out.instance.variant == WEAK and out.instance.rounds == 4
    assert_all_hold(out)
    u_inst = tr._doubled_instance(g_inst)
    out2 = tr.disjointify_choose_strategy(greedy_picker_strategy(u_inst),
                                          g_inst)
    assert_all_hold(out2)


def test_restrict_choose_cut_the_start_convention():
    def u(m, rounds):
        g = GroundSet(m)
        return GameInstance(game_family=U, start=g.full_mask, rounds=rounds,
                            width=2, cut_current=False, ground=g,
                            family=MonotoneFamily.size_at_most(g, 1))

    inner = u(5, 2)
    res = solve(inner)
    assert res.winner == CHOOSE
    outer = u(7, 2)
    out = tr.restrict_choose_strategy(res.strategy, inner, outer,
                                      (0, 2, 3, 5, 6))
    assert verify_winning_strategy(outer, out.strategy, CHOOSE).verified
    assert_all_hold(out)


def test_cut_strategy_to_witness_on_algebra_game():
    alg = FiniteBooleanAlgebra(GroundSet(3))
    inst = GameInstance(game_family=G_POSET, start=alg.top, rounds=2,
                        width=3, cut_current=False, algebra=alg)
    sigma = first_move_strategy(inst, CUT)
    seq = tr.cut_strategy_to_witness(sigma, inst)
    assert len(seq) == 2
    # the losing cutter's sequence has a branch; find it both ways
    from cutchoose import analysis
    branch = analysis.find_branch(alg, alg.top, seq, analysis.PLAIN)
    assert branch is not None
    out = tr.witness_to_cut_strategy(seq, inst)
    assert not verify_winning_strategy(inst, out.strategy, CUT).verified
