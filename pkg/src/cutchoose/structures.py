"""Finite ground sets, monotone families, ideals, posets, and Boolean algebras.

Subsets of a ground set are plain Python ints used as bitmasks (bit i set
means point i is in the subset).  The canonical order on masks used by every
enumeration in the package is lexicographic on the sorted element tuple, so
``{0,3}`` precedes ``{1,2}``.

Partition and antichain enumeration lives here too, since every game module
consumes it: disjoint partitions (the binary/width-bounded cut moves),
almost-disjoint positive families with a maximality filter (the generalized
cut moves), and maximal antichains of posets and Boolean algebras.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .errors import CapacityError, ValidationError

# Hard cap on ground-set size; acceptance suites run well below it.
MAX_GROUND = 24

# Default cap on the number of moves a single enumeration may produce.
DEFAULT_MOVE_BUDGET = 200_000


# ---------------------------------------------------------------------------
# Masks
# ---------------------------------------------------------------------------

def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << e
    return m


def mask_elements(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def mask_key(mask: int) -> tuple[int, ...]:
    """Canonical sort key for a mask: its sorted element tuple."""
    return mask_elements(mask)


def popcount(mask: int) -> int:
    return mask.bit_count()


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def sorted_masks(masks: Iterable[int]) -> list[int]:
    return sorted(masks, key=mask_key)


def format_mask(mask: int) -> str:
    return "{" + ",".join(str(e) for e in mask_elements(mask)) + "}"


def parse_mask(text: str, size: int) -> int:
    """Parse a subset from ``{0,2,3}`` or a hex literal like ``0xb``."""
    text = text.strip()
    if text.startswith("0x") or text.startswith("0X"):
        try:
            mask = int(text, 16)
        except ValueError:
            raise ValidationError(f"bad hex mask literal: {text!r}")
    elif text.startswith("{") and text.endswith("}"):
        body = text[1:-1].strip()
        if not body:
            return 0
        try:
            elems = [int(tok) for tok in body.split(",")]
        except ValueError:
            raise ValidationError(f"bad element list: {text!r}")
        if any(e < 0 for e in elems):
            raise ValidationError(f"negative element in {text!r}")
        mask = mask_of(elems)
    else:
        raise ValidationError(f"mask must be '{{0,2}}' or hex literal, got {text!r}")
    if mask >> size:
        raise ValidationError(f"mask {text!r} has points outside ground of size {size}")
    return mask


@dataclass(frozen=True)
class GroundSet:
    """A finite set of points identified with 0..size-1."""

    size: int

    def __post_init__(self):
        if not (1 <= self.size <= MAX_GROUND):
            raise ValidationError(
                f"ground size must be in 1..{MAX_GROUND}, got {self.size}")

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def check_mask(self, mask: int, what: str = "mask") -> int:
        if mask < 0 or (mask >> self.size):
            raise ValidationError(f"{what} has bits outside the ground set")
        return mask


# ---------------------------------------------------------------------------
# Monotone families and ideals
# ---------------------------------------------------------------------------

SIZE_AT_MOST = "size_at_most"
GENERATED_BY = "generated_by"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class MonotoneFamily:
    """A family of subsets of a ground set, the game's notion of smallness.

    Three generator descriptors are supported:

    * ``size_at_most k``: all subsets of at most k points,
    * ``generated_by masks``: all subsets of any of the listed masks,
    * ``explicit``: a literal member set (validated, not completed).

    Downward closure and ``0 in family`` are invariants; ``validate_family``
    reports the first violation with a witness instead of raising.
    """

    ground: GroundSet
    kind: str
    bound: int = 0
    generators: tuple[int, ...] = ()
    members: frozenset[int] = frozenset()

    @staticmethod
    def size_at_most(ground: GroundSet, k: int) -> "MonotoneFamily":
        if k < 0:
            raise ValidationError("size_at_most bound must be >= 0")
        return MonotoneFamily(ground, SIZE_AT_MOST, bound=k)

    @staticmethod
    def generated_by(ground: GroundSet, masks: Iterable[int]) -> "MonotoneFamily":
        gens = tuple(sorted_masks(ground.check_mask(m, "generator") for m in masks))
        return MonotoneFamily(ground, GENERATED_BY, generators=gens)

    @staticmethod
    def explicit(ground: GroundSet, masks: Iterable[int]) -> "MonotoneFamily":
        mem = frozenset(ground.check_mask(m, "member") for m in masks)
        return MonotoneFamily(ground, EXPLICIT, members=mem)

    def __contains__(self, mask: int) -> bool:
        if self.kind == SIZE_AT_MOST:
            return popcount(mask) <= self.bound
        if self.kind == GENERATED_BY:
            return mask == 0 or any(mask & ~g == 0 for g in self.generators)
        return mask in self.members or mask == 0 and 0 in self.members

    def explicit_members(self) -> frozenset[int]:
        """Materialize the member set (exponential; use at small grounds)."""
        if self.kind == EXPLICIT:
            return self.members
        full = self.ground.full_mask
        if self.kind == SIZE_AT_MOST:
            return frozenset(s for s in submasks(full) if popcount(s) <= self.bound)
        out: set[int] = {0}
        for g in self.generators:
            out.update(submasks(g))
        return frozenset(out)

    def describe(self) -> str:
        if self.kind == SIZE_AT_MOST:
            return f"size_at_most {self.bound}"
        if self.kind == GENERATED_BY:
            return "generated_by " + ",".join(format_mask(g) for g in self.generators)
        return "explicit " + ",".join(format_mask(m) for m in sorted_masks(self.members))


@dataclass(frozen=True)
class Ideal(MonotoneFamily):
    """A monotone family additionally closed under unions and proper.

    Finite completeness is automatic at this scale; nothing extra is stored.
    """

    @staticmethod
    def size_at_most(ground: GroundSet, k: int) -> "Ideal":
        if k < 0:
            raise ValidationError("size_at_most bound must be >= 0")
        return Ideal(ground, SIZE_AT_MOST, bound=k)

    @staticmethod
    def generated_by(ground: GroundSet, masks: Iterable[int]) -> "Ideal":
        gens = tuple(sorted_masks(ground.check_mask(m, "generator") for m in masks))
        return Ideal(ground, GENERATED_BY, generators=gens)

    @staticmethod
    def explicit(ground: GroundSet, masks: Iterable[int]) -> "Ideal":
        mem = frozenset(ground.check_mask(m, "member") for m in masks)
        return Ideal(ground, EXPLICIT, members=mem)

    def max_member(self) -> int:
        """Union of all members; equals the largest member of a valid ideal."""
        if self.kind == SIZE_AT_MOST:
            return 0 if self.bound == 0 else self.ground.full_mask
        if self.kind == GENERATED_BY:
            u = 0
            for g in self.generators:
                u |= g
            return u
        u = 0
        for m in self.members:
            u |= m
        return u


def is_positive(family: MonotoneFamily, mask: int) -> bool:
    """True iff ``mask`` is not a member of the family (an I-positive set)."""
    return mask not in family


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: Optional[str] = None
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_family(family: MonotoneFamily) -> ValidationReport:
    """Check the type invariants, returning the first violation with a witness.

    Total: never raises on bad input, only reports.
    """
    if 0 not in family:
        return ValidationReport(False, "empty set missing", (0,))

    if family.kind == EXPLICIT:
        for s in sorted_masks(family.members):
            for e in mask_elements(s):
                t = s & ~(1 << e)
                if t not in family:
                    return ValidationReport(False, "downward closure", (s, t))
    # size_at_most and generated_by are downward closed by construction.

    if isinstance(family, Ideal):
        full = family.ground.full_mask
        if family.kind == SIZE_AT_MOST:
            if family.bound >= family.ground.size:
                return ValidationReport(False, "proper", (full,))
            if family.bound >= 1 and family.ground.size > family.bound:
                s = (1 << family.bound) - 1
                t = 1 << family.bound
                return ValidationReport(False, "union closure", (s, t))
        elif family.kind == GENERATED_BY:
            gens = family.generators
            for i, g in enumerate(gens):
                for h in gens[i:]:
                    if (g | h) not in family:
                        return ValidationReport(False, "union closure", (g, h))
            if full in family:
                return ValidationReport(False, "proper", (full,))
        else:
            mem = sorted_masks(family.members)
            for i, s in enumerate(mem):
                for t in mem[i:]:
                    if (s | t) not in family:
                        return ValidationReport(False, "union closure", (s, t))
            if full in family:
                return ValidationReport(False, "proper", (full,))
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# I-partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IPartition:
    """An almost-disjoint family of positive subsets of a designated set.

    Maximality is a property checked by ``is_maximal_i_partition``, not an
    invariant of the type: the ablation experiments work with non-maximal
    families on purpose.
    """

    of: int
    pieces: tuple[int, ...]
    family: MonotoneFamily

    def __post_init__(self):
        err = ipartition_violation(self.family, self.of, self.pieces)
        if err:
            raise ValidationError(err)

    @staticmethod
    def make(family: MonotoneFamily, of: int, pieces: Iterable[int]) -> "IPartition":
        return IPartition(of, tuple(sorted_masks(pieces)), family)


def ipartition_violation(family: MonotoneFamily, of: int,
                         pieces: Sequence[int]) -> Optional[str]:
    """Structural check for an almost-disjoint positive family; None if fine."""
    if not pieces:
        return "family of pieces is empty"
    if len(set(pieces)) != len(pieces):
        return "duplicate pieces"
    for p in pieces:
        if p & ~of:
            return f"piece {format_mask(p)} not contained in {format_mask(of)}"
        if p in family:
            return f"piece {format_mask(p)} is not positive"
    for i, p in enumerate(pieces):
        for q in pieces[i + 1:]:
            if (p & q) not in family:
                return (f"pieces {format_mask(p)} and {format_mask(q)} "
                        "have a positive intersection")
    return None


def is_maximal_i_partition(w: IPartition) -> tuple[bool, Optional[int]]:
    """Maximality by brute force: search for a positive witness A inside W.of.

    Returns ``(True, None)`` or ``(False, A)`` where A is the first positive
    subset of ``W.of`` (canonical order) meeting every piece in a small set.
    """
    fam = w.family
    for a in sorted_masks(s for s in submasks(w.of) if s):
        if a in fam:
            continue
        if all((a & b) in fam for b in w.pieces):
            return False, a
    return True, None


def full_disjointification(w: IPartition,
                           order: Optional[Sequence[int]] = None) -> list[int]:
    """Pairwise-disjoint refinement covering ``w.of``; empty pieces permitted.

    Piece 0 absorbs the part of ``w.of`` outside the union of the family;
    every later output piece is contained in its source piece.  The default
    enumeration is canonical order.
    """
    pieces = list(order) if order is not None else sorted_masks(w.pieces)
    if sorted(pieces) != sorted(w.pieces):
        raise ValidationError("order must be a bijective enumeration of the pieces")
    union = 0
    for p in pieces:
        union |= p
    out: list[int] = []
    used = 0
    for i, p in enumerate(pieces):
        if i == 0:
            piece = p | (w.of & ~union)
        else:
            piece = p & ~used
        out.append(piece)
        used |= p
    return out


# ---------------------------------------------------------------------------
# Posets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FinitePoset:
    """A finite partial order on elements 0..size-1 with an optional top.

    ``down[i]`` is the mask of elements <= i (including i).  Compatibility is
    the forcing notion: two elements are compatible iff they have a common
    lower bound in the poset.
    """

    size: int
    down: tuple[int, ...]
    top: Optional[int] = None

    def __post_init__(self):
        if not (1 <= self.size <= MAX_GROUND):
            raise ValidationError(f"poset size must be in 1..{MAX_GROUND}")
        if len(self.down) != self.size:
            raise ValidationError("down-set table length mismatch")
        for i, d in enumerate(self.down):
            if d >> self.size:
                raise ValidationError("down-set has bits outside the poset")
            if not (d >> i) & 1:
                raise ValidationError(f"order not reflexive at {i}")
        for i in range(self.size):
            for j in mask_elements(self.down[i]):
                if i != j and (self.down[j] >> i) & 1:
                    raise ValidationError(f"order not antisymmetric at ({i},{j})")
                if self.down[j] & ~self.down[i]:
                    raise ValidationError(f"order not transitive below ({j},{i})")
        if self.top is not None:
            if not (0 <= self.top < self.size):
                raise ValidationError("top element out of range")
            if self.down[self.top] != (1 << self.size) - 1:
                raise ValidationError("declared top is not above every element")

    @staticmethod
    def from_leq_matrix(leq: Sequence[Sequence[bool]],
                        top: Optional[int] = None) -> "FinitePoset":
        n = len(leq)
        down = []
        for i in range(n):
            m = 0
            for j in range(n):
                if leq[j][i]:
                    m |= 1 << j
            down.append(m)
        return FinitePoset(n, tuple(down), top)

    @staticmethod
    def from_subsets(masks: Sequence[int], top_index: Optional[int] = None) -> "FinitePoset":
        """Poset of distinct set labels ordered by inclusion."""
        n = len(masks)
        if len(set(masks)) != n:
            raise ValidationError("subset labels must be distinct")
        down = []
        for i in range(n):
            m = 0
            for j in range(n):
                if masks[j] & ~masks[i] == 0:
                    m |= 1 << j
            down.append(m)
        return FinitePoset(n, tuple(down), top_index)

    @staticmethod
    def chain(n: int) -> "FinitePoset":
        return FinitePoset(n, tuple((1 << (i + 1)) - 1 for i in range(n)), n - 1)

    def leq(self, a: int, b: int) -> bool:
        return bool((self.down[b] >> a) & 1)

    def below(self, x: int) -> int:
        return self.down[x]

    def compatible(self, a: int, b: int) -> bool:
        return (self.down[a] & self.down[b]) != 0

    def lower_bounds(self, elements: Iterable[int]) -> int:
        """Mask of all q below every listed element (full mask for empty input)."""
        m = (1 << self.size) - 1
        for e in elements:
            m &= self.down[e]
        return m

    def is_maximal_antichain_below(self, x: int, chain: Sequence[int]) -> bool:
        """Pairwise incompatible elements <= x, extendable by nothing <= x."""
        members = list(chain)
        if not members:
            return False
        for a in members:
            if not self.leq(a, x):
                return False
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                if a == b or self.compatible(a, b):
                    return False
        for q in mask_elements(self.down[x]):
            if not any(self.compatible(q, a) for a in members):
                return False
        return True


# ---------------------------------------------------------------------------
# Boolean algebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteBooleanAlgebra:
    """The powerset algebra over a set of atoms; elements are atom masks."""

    atoms: GroundSet

    @property
    def top(self) -> int:
        return self.atoms.full_mask

    def sup(self, elements: Iterable[int]) -> int:
        m = 0
        for e in elements:
            m |= e
        return m

    def inf(self, elements: Iterable[int]) -> int:
        m = self.top
        for e in elements:
            m &= e
        return m

    def complement(self, element: int) -> int:
        return self.top & ~element

    def leq(self, a: int, b: int) -> bool:
        return a & ~b == 0

    def compatible(self, a: int, b: int) -> bool:
        return (a & b) != 0

    def is_maximal_antichain_below(self, x: int, chain: Sequence[int]) -> bool:
        members = list(chain)
        if not members:
            return False
        union = 0
        for a in members:
            if a == 0 or a & ~x:
                return False
            if a & union:
                return False
            union |= a
        return union == x


@dataclass(frozen=True)
class QuotientAlgebra:
    """P(ground)/I for a proper ideal, with its projection homomorphism.

    Finite proper ideals are principal (the union of all members is a
    member), so the quotient is the powerset of the points outside that
    maximum member.
    """

    algebra: FiniteBooleanAlgebra
    atom_points: tuple[int, ...]
    removed: int

    def project(self, mask: int) -> int:
        out = 0
        for i, p in enumerate(self.atom_points):
            if (mask >> p) & 1:
                out |= 1 << i
        return out


def quotient_algebra(ground: GroundSet, ideal: MonotoneFamily) -> QuotientAlgebra:
    """Quotient of the powerset by a proper ideal; rejects non-ideals."""
    if not isinstance(ideal, Ideal):
        raise ValidationError("quotient is defined only for ideals "
                              "(monotone family lacks union closure)")
    report = validate_family(ideal)
    if not report.ok:
        raise ValidationError(f"not a valid ideal: {report.violation}")
    removed = ideal.max_member()
    points = tuple(p for p in range(ground.size) if not (removed >> p) & 1)
    if not points:
        raise ValidationError("ideal is improper; quotient undefined")
    return QuotientAlgebra(FiniteBooleanAlgebra(GroundSet(len(points))), points, removed)


# ---------------------------------------------------------------------------
# Move enumeration
# ---------------------------------------------------------------------------

MODE_DISJOINT = "disjoint_partition"
MODE_IPARTITION = "i_partition"
MODE_ANTICHAIN = "maximal_antichain"


def _check_budget(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise CapacityError(f"{what} exceeded the move budget of {budget}",
                            {"budget": budget, "reached": count})


def enumerate_disjoint_partitions(state: int, width: Optional[int],
                                  budget: int = DEFAULT_MOVE_BUDGET) -> list[tuple[int, ...]]:
    """All unordered partitions of ``state`` into 2..width nonempty pieces.

    Emitted in canonical order.  A one-element state has no proper split, so
    the trivial single-piece partition is emitted there (and only there) to
    keep the game playable.
    """
    elems = mask_elements(state)
    if not elems:
        raise ValidationError("cannot partition the empty set")
    if len(elems) == 1:
        return [(state,)]
    cap = len(elems) if width is None else min(width, len(elems))
    if cap < 2:
        raise ValidationError("width must be >= 2")
    out: list[tuple[int, ...]] = []
    first = elems[0]
    rest = elems[1:]

    def assign(idx: int, blocks: list[int]) -> None:
        if idx == len(rest):
            if len(blocks) >= 2:
                out.append(tuple(sorted(blocks, key=mask_key)))
                _check_budget(len(out), budget, "disjoint partition enumeration")
            return
        e = rest[idx]
        for i in range(len(blocks)):
            blocks[i] |= 1 << e
            assign(idx + 1, blocks)
            blocks[i] &= ~(1 << e)
        if len(blocks) < cap:
            blocks.append(1 << e)
            assign(idx + 1, blocks)
            blocks.pop()

    assign(0, [1 << first])
    out.sort(key=lambda move: tuple(mask_key(p) for p in move))
    return out


def enumerate_i_partitions(family: MonotoneFamily, of: int, width: Optional[int],
                           maximal: bool = True,
                           budget: int = DEFAULT_MOVE_BUDGET) -> list[tuple[int, ...]]:
    """Almost-disjoint positive families inside ``of``, canonically ordered.

    With the maximality filter on (the default), only families with no
    positive extension are emitted; a family is extendable exactly when it is
    non-maximal, so the filter doubles as the maximality check.
    """
    if of == 0:
        raise ValidationError("cannot partition the empty set")
    if width is not None and width < 1:
        raise ValidationError("width must be >= 1")
    candidates = sorted_masks(s for s in submasks(of)
                              if s and is_positive(family, s))
    out: list[tuple[int, ...]] = []
    nodes = 0

    def extendable(current: tuple[int, ...]) -> bool:
        for a in candidates:
            if all((a & b) in family for b in current):
                return True
        return False

    def grow(start: int, current: list[int]) -> None:
        nonlocal nodes
        nodes += 1
        _check_budget(nodes, budget, "positive-family enumeration")
        if current:
            if maximal:
                if not extendable(tuple(current)):
                    out.append(tuple(current))
                    _check_budget(len(out), budget, "positive-family enumeration")
            else:
                out.append(tuple(current))
                _check_budget(len(out), budget, "positive-family enumeration")
        if width is not None and len(current) >= width:
            return
        for i in range(start, len(candidates)):
            c = candidates[i]
            if all((c & b) in family for b in current):
                current.append(c)
                grow(i + 1, current)
                current.pop()

    grow(0, [])
    out.sort(key=lambda move: tuple(mask_key(p) for p in move))
    return out


def enumerate_poset_antichains(poset: FinitePoset, below: int, width: Optional[int],
                               maximal: bool = True,
                               budget: int = DEFAULT_MOVE_BUDGET) -> list[tuple[int, ...]]:
    """Antichains of the poset below an element, maximal unless disabled."""
    candidates = mask_elements(poset.down[below])
    out: list[tuple[int, ...]] = []
    nodes = 0

    def extendable(current: Sequence[int]) -> bool:
        for q in candidates:
            if not any(poset.compatible(q, a) for a in current):
                return True
        return False

    def grow(start: int, current: list[int]) -> None:
        nonlocal nodes
        nodes += 1
        _check_budget(nodes, budget, "antichain enumeration")
        if current:
            if maximal:
                if not extendable(current):
                    out.append(tuple(current))
            else:
                out.append(tuple(current))
            _check_budget(len(out), budget, "antichain enumeration")
        if width is not None and len(current) >= width:
            return
        for i in range(start, len(candidates)):
            q = candidates[i]
            if not any(poset.compatible(q, a) for a in current):
                current.append(q)
                grow(i + 1, current)
                current.pop()

    grow(0, [])
    out.sort()
    return out


def enumerate_algebra_antichains(algebra: FiniteBooleanAlgebra, below: int,
                                 width: Optional[int], maximal: bool = True,
                                 budget: int = DEFAULT_MOVE_BUDGET) -> list[tuple[int, ...]]:
    """Antichains of nonzero elements below ``below``; maximal ones are
    exactly the partitions of ``below`` into nonzero disjoint pieces."""
    if below == 0:
        raise ValidationError("no antichains below zero")
    if maximal:
        out = [(below,)]
        if popcount(below) >= 2:
            out.extend(enumerate_disjoint_partitions(below, width, budget))
        out.sort(key=lambda move: tuple(mask_key(p) for p in move))
        return out
    candidates = sorted_masks(s for s in submasks(below) if s)
    out = []
    nodes = 0

    def grow(start: int, current: list[int], used: int) -> None:
        nonlocal nodes
        nodes += 1
        _check_budget(nodes, budget, "antichain enumeration")
        if current:
            out.append(tuple(current))
            _check_budget(len(out), budget, "antichain enumeration")
        if width is not None and len(current) >= width:
            return
        for i in range(start, len(candidates)):
            c = candidates[i]
            if c & used == 0:
                current.append(c)
                grow(i + 1, current, used | c)
                current.pop()

    grow(0, [], 0)
    out.sort(key=lambda move: tuple(mask_key(p) for p in move))
    return out


def enumerate_cut_moves(structure, state, mode: str, width: Optional[int],
                        maximal: bool = True,
                        budget: int = DEFAULT_MOVE_BUDGET) -> list[tuple[int, ...]]:
    """Dispatch to the mode-specific enumeration; see the mode constants.

    ``structure`` is a MonotoneFamily for ``i_partition`` mode, a FinitePoset
    or FiniteBooleanAlgebra for ``maximal_antichain`` mode, and ignored for
    ``disjoint_partition`` mode.
    """
    if mode == MODE_DISJOINT:
        return enumerate_disjoint_partitions(state, width, budget)
    if mode == MODE_IPARTITION:
        if not isinstance(structure, MonotoneFamily):
            raise ValidationError("i_partition mode needs a monotone family")
        return enumerate_i_partitions(structure, state, width, maximal, budget)
    if mode == MODE_ANTICHAIN:
        if isinstance(structure, FiniteBooleanAlgebra):
            return enumerate_algebra_antichains(structure, state, width, maximal, budget)
        if isinstance(structure, FinitePoset):
            return enumerate_poset_antichains(structure, state, width, maximal, budget)
        raise ValidationError("maximal_antichain mode needs a poset or algebra")
    raise ValidationError(f"unknown enumeration mode {mode!r}")
