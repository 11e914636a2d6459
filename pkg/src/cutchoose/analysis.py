"""Distributivity checkers, threshold scans, audits, and the seeded corpus.

The checkers search branch spaces directly, never through the solver, so the
audit rows genuinely compute both sides of each characterization by
independent means: game values come from backward induction, distributivity
verdicts from exhaustive sequence search, thresholds from the closed-form
counting law or the naive oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import engine
from .engine import (BM_IDEAL, BM_POSET, CHOOSE, CUT, EMPTY, EXACT, G_IDEAL,
                     G_POSET, NONEMPTY, STRICT_PREFIX, U, WEAK,
                     FunctionStrategy, GameInstance, verify_winning_strategy)
from .errors import CapacityError, ValidationError
from .solver import reference_winner, solve
from .structures import (DEFAULT_MOVE_BUDGET, FiniteBooleanAlgebra,
                         FinitePoset, GroundSet, Ideal, MonotoneFamily,
                         enumerate_algebra_antichains, enumerate_i_partitions,
                         enumerate_poset_antichains, is_positive, popcount,
                         sorted_masks, submasks, validate_family)

PLAIN = "plain"
UNIFORM = "uniform"
IDEAL_WEAK = "ideal_weak"

NOT_APPLICABLE = "n/a"


# ---------------------------------------------------------------------------
# Branch search over move sequences
# ---------------------------------------------------------------------------

class _IdealContext:
    def __init__(self, family: MonotoneFamily, x: int):
        self.family = family
        self.x = x

    def initial(self):
        return self.x

    def step(self, acc: int, pick: int) -> int:
        return acc & pick

    def prefix_ok(self, acc: int) -> bool:
        return is_positive(self.family, acc)

    def final_ok(self, acc: int, variant: str) -> bool:
        if variant == IDEAL_WEAK:
            return acc != 0
        return is_positive(self.family, acc)

    def moves(self, width, maximal, budget):
        return enumerate_i_partitions(self.family, self.x, width, maximal,
                                      budget)


class _AlgebraContext:
    def __init__(self, algebra: FiniteBooleanAlgebra, x: int):
        self.algebra = algebra
        self.x = x

    def initial(self):
        return self.x

    def step(self, acc: int, pick: int) -> int:
        return acc & pick

    def prefix_ok(self, acc: int) -> bool:
        return acc != 0

    def final_ok(self, acc: int, variant: str) -> bool:
        return acc != 0

    def moves(self, width, maximal, budget):
        return enumerate_algebra_antichains(self.algebra, self.x, width,
                                            maximal, budget)


class _PosetContext:
    def __init__(self, poset: FinitePoset, x: int):
        self.poset = poset
        self.x = x

    def initial(self):
        return self.poset.down[self.x]

    def step(self, acc: int, pick: int) -> int:
        return acc & self.poset.down[pick]

    def prefix_ok(self, acc: int) -> bool:
        return acc != 0

    def final_ok(self, acc: int, variant: str) -> bool:
        return acc != 0

    def moves(self, width, maximal, budget):
        return enumerate_poset_antichains(self.poset, self.x, width, maximal,
                                          budget)


def _context(structure, x):
    if isinstance(structure, MonotoneFamily):
        return _IdealContext(structure, x)
    if isinstance(structure, FiniteBooleanAlgebra):
        return _AlgebraContext(structure, x)
    if isinstance(structure, FinitePoset):
        return _PosetContext(structure, x)
    raise ValidationError("unsupported structure for distributivity check")


def find_branch(structure, x, seq: Sequence[tuple],
                variant: str = PLAIN) -> Optional[list]:
    """A branch through a fixed move sequence, or None.

    ``plain`` needs the whole pick set bounded/positive, ``uniform`` only the
    proper prefixes, ``ideal_weak`` positive prefixes plus a nonempty total.
    """
    ctx = _context(structure, x)
    n = len(seq)

    def dfs(level: int, acc, picks: list):
        if level == n:
            if variant == UNIFORM or ctx.final_ok(acc, variant):
                return list(picks)
            return None
        for pick in seq[level]:
            nxt = ctx.step(acc, pick)
            if variant == PLAIN:
                # cores only shrink, so prefix pruning is sound
                if not ctx.prefix_ok(nxt):
                    continue
            elif level < n - 1 and not ctx.prefix_ok(nxt):
                # proper prefixes are constrained, the full pick set is not
                continue
            picks.append(pick)
            got = dfs(level + 1, nxt, picks)
            if got is not None:
                return got
            picks.pop()
        return None

    return dfs(0, ctx.initial(), [])


@dataclass
class DistributivityResult:
    holds: bool
    failing_sequence: Optional[list] = None
    sequences_checked: int = 0

    def __bool__(self) -> bool:
        return self.holds


def check_distributivity(structure, x, rounds: int, width: Optional[int],
                         variant: str = PLAIN, maximal: bool = True,
                         budget: int = DEFAULT_MOVE_BUDGET) -> DistributivityResult:
    """Exhaustive search over length-``rounds`` move sequences; holds iff
    every sequence admits a branch.

    The ablation mode (``maximal=False``) admits non-maximal families, where
    branchless sequences exist at finite scale.
    """
    ctx = _context(structure, x)
    moves = ctx.moves(width, maximal, budget)
    checked = 0
    seq: list = []

    def rec(level: int):
        nonlocal checked
        if level == rounds:
            checked += 1
            if checked > budget:
                raise CapacityError("sequence search exceeded the budget",
                                    {"sequences_checked": checked})
            if find_branch(structure, x, seq, variant) is None:
                return list(seq)
            return None
        for move in moves:
            seq.append(move)
            bad = rec(level + 1)
            if bad is not None:
                return bad
            seq.pop()
        return None

    failing = rec(0)
    return DistributivityResult(failing is None, failing, checked)


def precipitous_analog(ideal: MonotoneFamily, rounds: int,
                       budget: int = DEFAULT_MOVE_BUDGET) -> bool:
    """Weak unbounded-width distributivity over every positive starting set."""
    report = validate_family(ideal)
    if isinstance(ideal, Ideal) and not report.ok:
        raise ValidationError(f"not a proper ideal: {report.violation}")
    full = ideal.ground.full_mask
    for x in sorted_masks(s for s in submasks(full)
                          if s and is_positive(ideal, s)):
        if not check_distributivity(ideal, x, rounds, None, IDEAL_WEAK,
                                    True, budget):
            return False
    return True


# ---------------------------------------------------------------------------
# Threshold scans
# ---------------------------------------------------------------------------

@dataclass
class ThresholdRow:
    rounds: int
    minimal_choose_win: Optional[int]


def threshold_scan(nu: int, n_range: Iterable[int], m_range: Iterable[int],
                   variant: str = EXACT, bound: int = 1) -> list[ThresholdRow]:
    """Minimal ground size where the picker wins the width-``nu`` partition
    game with the size-at-most-``bound`` family, per round count."""
    ms = sorted(m_range)
    rows = []
    for n in sorted(n_range):
        minimal = None
        for m in ms:
            ground = GroundSet(m)
            family = MonotoneFamily.size_at_most(ground, bound)
            if not is_positive(family, ground.full_mask):
                continue
            inst = GameInstance(game_family=U, start=ground.full_mask,
                                rounds=n, width=nu, variant=variant,
                                ground=ground, family=family)
            if solve(inst, want_strategy=False).winner == CHOOSE:
                minimal = m
                break
        rows.append(ThresholdRow(n, minimal))
    return rows


# ---------------------------------------------------------------------------
# Equivalence audit
# ---------------------------------------------------------------------------

@dataclass
class AuditRow:
    row_id: str
    description: str
    left: object
    right: object
    left_provenance: str
    right_provenance: str
    note: str = ""

    @property
    def applicable(self) -> bool:
        return self.left != NOT_APPLICABLE

    @property
    def agree(self) -> Optional[bool]:
        if not self.applicable:
            return None
        return self.left == self.right


@dataclass
class AuditReport:
    instance: GameInstance
    rows: list[AuditRow] = field(default_factory=list)

    @property
    def disagreements(self) -> list[AuditRow]:
        return [r for r in self.rows if r.agree is False]


def _positive_starts(family: MonotoneFamily) -> list[int]:
    full = family.ground.full_mask
    return sorted_masks(s for s in submasks(full)
                        if s and is_positive(family, s))


def _poset_elements(inst: GameInstance) -> list:
    if inst.algebra is not None:
        return sorted_masks(s for s in submasks(inst.algebra.top) if s)
    return list(range(inst.poset.size))


def _solve_winner(inst: GameInstance) -> str:
    return solve(inst, want_strategy=False).winner


def _replace(inst: GameInstance, **kw) -> GameInstance:
    base = dict(game_family=inst.game_family, start=inst.start,
                rounds=inst.rounds, width=inst.width, variant=inst.variant,
                maximal=inst.maximal, cut_current=inst.cut_current,
                ground=inst.ground, family=inst.family, poset=inst.poset,
                algebra=inst.algebra, move_budget=inst.move_budget)
    base.update(kw)
    return GameInstance(**base)


def equivalence_audit(inst: GameInstance,
                      budget: int = DEFAULT_MOVE_BUDGET) -> AuditReport:
    """Evaluate every applicable characterization row on both sides by
    independent computation, and report the agreements."""
    report = AuditReport(inst)
    rows = report.rows
    if inst.game_family in engine.MASK_GAMES:
        _audit_mask_instance(inst, rows, budget)
    else:
        _audit_poset_instance(inst, rows, budget)
    return report


def _audit_mask_instance(inst: GameInstance, rows: list, budget: int) -> None:
    family = inst.family
    ground = inst.ground
    singleton_family = family.kind == "size_at_most" and family.bound == 1

    # Counting-law rows for the singleton family.
    if inst.game_family == U and singleton_family:
        exact = _replace(inst, variant=EXACT)
        left = _solve_winner(exact) == CUT
        right = popcount(inst.start) <= inst.width ** inst.rounds
        rows.append(AuditRow("cutter_threshold_exact",
                             "cutter wins the exact partition game iff the "
                             "ground fits width**rounds",
                             left, right, "solver", "formula"))
        weak = _replace(inst, variant=WEAK)
        rows.append(AuditRow("cutter_threshold_weak",
                             "weak-variant winner agrees with the naive "
                             "oracle",
                             _solve_winner(weak) == CUT,
                             reference_winner(weak) == CUT,
                             "solver", "checker"))
    else:
        rows.append(AuditRow("cutter_threshold_exact",
                             "counting law needs the singleton family",
                             NOT_APPLICABLE, NOT_APPLICABLE, "-", "-"))

    # Generalized-game distributivity (weak form) at the instance's width.
    g_weak = _replace(inst, game_family=G_IDEAL, variant=WEAK,
                      maximal=True, cut_current=False)
    left = _solve_winner(g_weak) == CUT
    dist = check_distributivity(family, inst.start, inst.rounds, inst.width,
                                IDEAL_WEAK, True, budget)
    rows.append(AuditRow("ideal_distributivity_weak",
                         "cutter wins the weak generalized game iff the "
                         "family fails weak distributivity at this width",
                         left, not dist.holds, "solver", "checker"))

    # Banach-Mazur bridge rows; one solve per positive start feeds both.
    bm = _replace(inst, game_family=BM_IDEAL, variant=EXACT, width=None,
                  start=ground.full_mask if
                  is_positive(family, ground.full_mask) else inst.start,
                  cut_current=True, maximal=True)
    bm_winner = _solve_winner(bm)
    winners = [
        _solve_winner(_replace(inst, game_family=G_IDEAL, variant=WEAK,
                               width=None, start=x, cut_current=False,
                               maximal=True))
        for x in _positive_starts(family)]
    rows.append(AuditRow("bm_empty_vs_cutter",
                         "emptier wins the set game iff the cutter wins the "
                         "weak unbounded generalized game somewhere",
                         bm_winner == EMPTY, any(w == CUT for w in winners),
                         "solver", "solver"))
    rows.append(AuditRow("bm_nonempty_vs_picker",
                         "survivor wins the set game iff the picker wins the "
                         "weak unbounded generalized game everywhere",
                         bm_winner == NONEMPTY,
                         all(w == CHOOSE for w in winners),
                         "solver", "solver"))

    # Precipitousness analog and the quotient consistency (proper ideals).
    if isinstance(family, Ideal) and validate_family(family).ok:
        rows.append(AuditRow("precipitous_analog",
                             "weak unbounded distributivity iff the emptier "
                             "does not win the set game",
                             precipitous_analog(family, inst.rounds, budget),
                             bm_winner != EMPTY, "checker", "solver"))
        from .structures import quotient_algebra
        quotient = quotient_algebra(ground, family)
        g_exact = _replace(inst, game_family=G_IDEAL, variant=EXACT,
                           cut_current=False, maximal=True)
        q_start = quotient.project(inst.start)
        q_inst = GameInstance(game_family=G_POSET, start=q_start,
                              rounds=inst.rounds, width=inst.width,
                              variant=EXACT, cut_current=False,
                              algebra=quotient.algebra)
        rows.append(AuditRow("quotient_same_game",
                             "generalized game on the family and on its "
                             "quotient algebra have the same winner",
                             _solve_winner(g_exact),
                             {CHOOSE: CHOOSE, CUT: CUT}[_solve_winner(q_inst)],
                             "solver", "solver"))
    else:
        rows.append(AuditRow("precipitous_analog",
                             "needs a proper ideal", NOT_APPLICABLE,
                             NOT_APPLICABLE, "-", "-"))

    rows.append(AuditRow("weak_compactness_row",
                         "full-length games have no finite content",
                         NOT_APPLICABLE, NOT_APPLICABLE, "-", "-"))


def _audit_poset_instance(inst: GameInstance, rows: list, budget: int) -> None:
    structure = inst.algebra if inst.algebra is not None else inst.poset
    elements = _poset_elements(inst)

    g_exact = _replace(inst, game_family=G_POSET, variant=EXACT,
                       cut_current=False, maximal=True,
                       width=inst.width if inst.width is not None else None)
    left = _solve_winner(g_exact) == CUT
    dist = check_distributivity(structure, inst.start, inst.rounds,
                                inst.width, PLAIN, True, budget)
    rows.append(AuditRow("poset_distributivity",
                         "cutter wins the antichain game iff distributivity "
                         "fails at this width",
                         left, not dist.holds, "solver", "checker"))

    g_strict = _replace(inst, game_family=G_POSET, variant=STRICT_PREFIX,
                        cut_current=False, maximal=True)
    udist = check_distributivity(structure, inst.start, inst.rounds,
                                 inst.width, UNIFORM, True, budget)
    rows.append(AuditRow("poset_uniform_distributivity",
                         "cutter wins the prefix-variant game iff uniform "
                         "distributivity fails",
                         _solve_winner(g_strict) == CUT, not udist.holds,
                         "solver", "checker"))

    bm = _replace(inst, game_family=BM_POSET, variant=EXACT, width=None,
                  cut_current=True, maximal=True,
                  start=(inst.algebra.top if inst.algebra is not None
                         else (inst.poset.top if inst.poset.top is not None
                               else inst.start)))
    bm_winner = _solve_winner(bm)
    winners = [
        _solve_winner(_replace(inst, game_family=G_POSET, variant=EXACT,
                               width=None, start=x, cut_current=False,
                               maximal=True))
        for x in elements]
    rows.append(AuditRow("bm_empty_vs_cutter",
                         "emptier wins the descent game iff the cutter wins "
                         "the unbounded antichain game somewhere",
                         bm_winner == EMPTY, any(w == CUT for w in winners),
                         "solver", "solver"))
    rows.append(AuditRow("strategic_closure",
                         "survivor wins the descent game iff the picker wins "
                         "the unbounded antichain game everywhere",
                         bm_winner == NONEMPTY,
                         all(w == CHOOSE for w in winners),
                         "solver", "solver"))


# ---------------------------------------------------------------------------
# Maximality ablation
# ---------------------------------------------------------------------------

@dataclass
class AblationReport:
    instance: GameInstance
    pieces: tuple
    cutter_verified: bool
    restored_winner: str


def _disjoint_positive_pair(family: MonotoneFamily,
                            x: int) -> Optional[tuple[int, int]]:
    positives = sorted_masks(s for s in submasks(x)
                             if s and is_positive(family, s))
    for a in positives:
        rest = x & ~a
        for b in sorted_masks(s for s in submasks(rest)
                              if s and is_positive(family, s)):
            return a, b
    return None


def maximality_ablation(inst: GameInstance) -> AblationReport:
    """With the maximality filter off, the cutter splits off two disjoint
    positive pieces and then forces the one the picker avoided; the running
    intersection dies in two rounds.  Restoring the filter flips the winner.
    """
    if inst.game_family != G_IDEAL or inst.maximal:
        raise ValidationError("ablation needs a generalized ideal game with "
                              "the maximality filter off")
    if inst.cut_current:
        raise ValidationError("ablation uses the cut-the-start convention")
    if inst.rounds < 2:
        raise ValidationError("the forcing construction needs two rounds")
    pair = _disjoint_positive_pair(inst.family, inst.start)
    if pair is None:
        raise ValidationError("start does not split into two disjoint "
                              "positive pieces")
    a, b = pair
    family = inst.family

    def decide(inst_, state, history):
        if state.round == 0:
            return tuple(sorted_masks((a, b)))
        if (a & state.core) in family:
            return (a,)
        if (b & state.core) in family:
            return (b,)
        return tuple(sorted_masks((a, b)))

    sigma = FunctionStrategy(CUT, decide, "simulation", "ablation-forcing")
    verified = verify_winning_strategy(inst, sigma, CUT).verified
    restored = _replace(inst, maximal=True)
    return AblationReport(inst, (a, b), verified,
                          solve(restored, want_strategy=False).winner)


# ---------------------------------------------------------------------------
# Seeded corpus
# ---------------------------------------------------------------------------

@dataclass
class CorpusInstance:
    instance_id: str
    instance: GameInstance


def _random_family(rng: random.Random, ground: GroundSet,
                   want_ideal: bool) -> MonotoneFamily:
    m = ground.size
    if not want_ideal and rng.random() < 0.5:
        k = rng.choice([1, 1, 2])
        if k >= m:
            k = 1
        return MonotoneFamily.size_at_most(ground, k)
    cls = Ideal if want_ideal else MonotoneFamily
    while True:
        count = rng.randint(1, 2)
        gens = []
        for _ in range(count):
            size = rng.randint(1, max(1, m // 2))
            gens.append(sum(1 << p for p in rng.sample(range(m), size)))
        union = 0
        for g in gens:
            union |= g
        if want_ideal:
            # Principal closure keeps union closure; properness needs slack.
            if union != ground.full_mask:
                return cls.generated_by(ground, [union])
        else:
            if union != ground.full_mask:
                return cls.generated_by(ground, gens)


def _random_poset(rng: random.Random):
    """Either a small powerset algebra or a set-labelled poset with a top."""
    if rng.random() < 0.5:
        atoms = rng.randint(2, 4)
        return FiniteBooleanAlgebra(GroundSet(atoms))
    base = rng.randint(3, 4)
    full = (1 << base) - 1
    count = rng.randint(3, min(10, (1 << base) - 2))
    labels = rng.sample([s for s in range(1, full)], count)
    labels = sorted(set(labels))
    labels.append(full)
    return FinitePoset.from_subsets(labels, len(labels) - 1)


def _instance_fits(inst: GameInstance, budget: int) -> bool:
    """Capacity probe: root move count, the audit's unbounded-width move
    space, and the sequence space the distributivity checkers will walk."""
    try:
        moves = engine.legal_moves(inst, engine.initial_state(inst))
        if inst.game_family in engine.MASK_GAMES:
            checker_moves = enumerate_i_partitions(
                inst.family, inst.start, inst.width, True, budget)
            enumerate_i_partitions(inst.family, inst.start, None, True, budget)
        elif inst.algebra is not None:
            checker_moves = enumerate_algebra_antichains(
                inst.algebra, inst.start, inst.width, True, budget)
        else:
            checker_moves = enumerate_poset_antichains(
                inst.poset, inst.start, inst.width, True, budget)
    except CapacityError:
        return False
    if not moves:
        return False
    if len(moves) ** inst.rounds > budget:
        return False
    if len(checker_moves) ** inst.rounds > budget:
        return False
    return True


def generate_corpus(seed: int, per_family: int = 25,
                    budget: int = 3_000) -> list[CorpusInstance]:
    """Deterministic seeded instance corpus, ``per_family`` instances for
    each game family, capacity-probed so audits stay inside budget."""
    rng = random.Random(seed)
    out: list[CorpusInstance] = []
    for game_family in (U, G_IDEAL, G_POSET, BM_IDEAL, BM_POSET):
        made = 0
        while made < per_family:
            inst = _draw_instance(rng, game_family)
            if inst is None or not _instance_fits(inst, budget):
                continue
            out.append(CorpusInstance(f"{game_family}-{made:03d}", inst))
            made += 1
    return out


def _draw_instance(rng: random.Random, game_family: str):
    try:
        if game_family == U:
            m = rng.randint(3, 8)
            ground = GroundSet(m)
            family = _random_family(rng, ground, want_ideal=rng.random() < 0.4)
            start = ground.full_mask
            if not is_positive(family, start):
                return None
            return GameInstance(
                game_family=U, start=start, rounds=rng.randint(1, 3),
                width=rng.choice([2, 2, 3]),
                variant=rng.choice([EXACT, EXACT, WEAK, STRICT_PREFIX]),
                ground=ground, family=family)
        if game_family == G_IDEAL:
            m = rng.randint(3, 6)
            ground = GroundSet(m)
            family = _random_family(rng, ground, want_ideal=rng.random() < 0.4)
            start = ground.full_mask
            if not is_positive(family, start):
                return None
            rounds = rng.randint(1, 2)
            return GameInstance(
                game_family=G_IDEAL, start=start, rounds=rounds,
                width=rng.choice([2, 3, None if m <= 5 else 3]),
                variant=rng.choice([EXACT, EXACT, WEAK]),
                ground=ground, family=family,
                cut_current=rng.random() < 0.5)
        if game_family == BM_IDEAL:
            m = rng.randint(3, 5)
            ground = GroundSet(m)
            family = _random_family(rng, ground, want_ideal=rng.random() < 0.6)
            start = ground.full_mask
            if not is_positive(family, start):
                return None
            return GameInstance(game_family=BM_IDEAL, start=start,
                                rounds=rng.randint(1, 3), width=None,
                                ground=ground, family=family)
        structure = _random_poset(rng)
        if isinstance(structure, FiniteBooleanAlgebra):
            start = structure.top
            kw = {"algebra": structure}
        else:
            start = structure.top
            kw = {"poset": structure}
        if game_family == G_POSET:
            return GameInstance(
                game_family=G_POSET, start=start, rounds=rng.randint(1, 2),
                width=rng.choice([2, 3, None]),
                variant=rng.choice([EXACT, EXACT, WEAK]),
                cut_current=rng.random() < 0.5, **kw)
        return GameInstance(game_family=BM_POSET, start=start,
                            rounds=rng.randint(1, 3), width=None, **kw)
    except ValidationError:
        return None
