"""Structured-text (JSON) schemas: instance, strategy, transcript, report.

All emitters build plain dicts with a fixed insertion order and serialize via
``dumps``; outputs are byte-stable across runs, which the golden tests pin.
Subset masks appear in text form as element lists like ``{0,2,3}``; hex
literals are accepted on input.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Optional

from . import engine
from .engine import GameInstance, GameState, TableStrategy, Transcript
from .errors import ValidationError
from .structures import (FiniteBooleanAlgebra, FinitePoset, GroundSet,
                         Ideal, MonotoneFamily, format_mask, parse_mask,
                         sorted_masks)

SCHEMA_VERSION = 1


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# Families and structures
# ---------------------------------------------------------------------------

def family_to_jsonable(family: MonotoneFamily) -> dict:
    out: dict[str, Any] = {"kind": family.kind}
    if family.kind == "size_at_most":
        out["bound"] = family.bound
    elif family.kind == "generated_by":
        out["generators"] = [format_mask(g) for g in family.generators]
    else:
        out["members"] = [format_mask(m) for m in sorted_masks(family.members)]
    return out


def family_from_jsonable(obj: dict, ground: GroundSet, ideal: bool,
                         path: str) -> MonotoneFamily:
    cls = Ideal if ideal else MonotoneFamily
    kind = _req(obj, "kind", str, path)
    if kind == "size_at_most":
        return cls.size_at_most(ground, _req(obj, "bound", int, path))
    if kind == "generated_by":
        gens = _req(obj, "generators", list, path)
        return cls.generated_by(ground, [parse_mask(g, ground.size) for g in gens])
    if kind == "explicit":
        members = _req(obj, "members", list, path)
        return cls.explicit(ground, [parse_mask(m, ground.size) for m in members])
    raise ValidationError(f"unknown family kind {kind!r}", path + ".kind")


def instance_to_jsonable(inst: GameInstance) -> dict:
    if inst.game_family in engine.MASK_GAMES:
        structure: dict[str, Any] = {
            "kind": "family",
            "ground": inst.ground.size,
            "ideal": isinstance(inst.family, Ideal),
            "family": family_to_jsonable(inst.family),
        }
        start: Any = format_mask(inst.start)
    elif inst.poset is not None:
        structure = {
            "kind": "poset",
            "elements": inst.poset.size,
            "down": [format_mask(d) for d in inst.poset.down],
            "top": inst.poset.top,
        }
        start = inst.start
    else:
        structure = {"kind": "algebra", "atoms": inst.algebra.atoms.size}
        start = format_mask(inst.start)
    return {
        "schema_version": SCHEMA_VERSION,
        "structure": structure,
        "game": {
            "family": inst.game_family,
            "start": start,
            "rounds": inst.rounds,
            "width": "unbounded" if inst.width is None else inst.width,
            "variant": inst.variant,
            "maximal": inst.maximal,
            "cut_current": inst.cut_current,
        },
    }


def _req(obj: dict, key: str, typ, path: str):
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", path)
    val = obj[key]
    if typ is not None and not isinstance(val, typ):
        raise ValidationError(f"field {key!r} must be {typ.__name__}",
                              f"{path}.{key}")
    return val


def instance_from_jsonable(obj: dict, path: str = "instance") -> GameInstance:
    if not isinstance(obj, dict):
        raise ValidationError("instance document must be an object", path)
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}",
                              path + ".schema_version")
    sobj = _req(obj, "structure", dict, path)
    gobj = _req(obj, "game", dict, path)
    spath, gpath = path + ".structure", path + ".game"
    kind = _req(sobj, "kind", str, spath)
    game_family = _req(gobj, "family", str, gpath)
    rounds = _req(gobj, "rounds", int, gpath)
    width_raw = _req(gobj, "width", None, gpath)
    if width_raw == "unbounded" or width_raw is None:
        width: Optional[int] = None
    elif isinstance(width_raw, int) and not isinstance(width_raw, bool):
        width = width_raw
    else:
        raise ValidationError("width must be an integer or 'unbounded'",
                              gpath + ".width")
    variant = gobj.get("variant", engine.EXACT)
    maximal = gobj.get("maximal", True)
    cut_current = gobj.get("cut_current", True)

    ground = family = poset = algebra = None
    if kind == "family":
        ground = GroundSet(_req(sobj, "ground", int, spath))
        family = family_from_jsonable(_req(sobj, "family", dict, spath),
                                      ground, bool(sobj.get("ideal", False)),
                                      spath + ".family")
        start = parse_mask(str(_req(gobj, "start", None, gpath)), ground.size)
    elif kind == "poset":
        n = _req(sobj, "elements", int, spath)
        down = tuple(parse_mask(d, n) for d in _req(sobj, "down", list, spath))
        poset = FinitePoset(n, down, sobj.get("top"))
        start = _req(gobj, "start", int, gpath)
    elif kind == "algebra":
        algebra = FiniteBooleanAlgebra(GroundSet(_req(sobj, "atoms", int, spath)))
        start = parse_mask(str(_req(gobj, "start", None, gpath)),
                           algebra.atoms.size)
    else:
        raise ValidationError(f"unknown structure kind {kind!r}", spath + ".kind")

    try:
        return GameInstance(game_family=game_family, start=start, rounds=rounds,
                            width=width, variant=variant, maximal=maximal,
                            cut_current=cut_current, ground=ground,
                            family=family, poset=poset, algebra=algebra)
    except ValidationError as exc:
        raise ValidationError(str(exc), gpath)


def parse_instance(text: str) -> GameInstance:
    """Parse an instance document; diagnostics carry line or field positions."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc.msg}",
                              f"line {exc.lineno} column {exc.colno}")
    return instance_from_jsonable(obj)


def serialize_instance(inst: GameInstance) -> str:
    return dumps(instance_to_jsonable(inst))


def instance_hash(inst: GameInstance, engine_version: str) -> str:
    payload = json.dumps(instance_to_jsonable(inst), sort_keys=True)
    return hashlib.sha256((engine_version + "\n" + payload).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Moves, states, strategies, transcripts
# ---------------------------------------------------------------------------

def _mask_moves(inst: GameInstance) -> bool:
    return inst.game_family in engine.MASK_GAMES or inst.algebra is not None


def move_to_jsonable(inst: GameInstance, move) -> Any:
    if isinstance(move, tuple):
        return [move_to_jsonable(inst, p) for p in move]
    return format_mask(move) if _mask_moves(inst) else move


def move_from_jsonable(inst: GameInstance, obj) -> Any:
    size = (inst.ground.size if inst.ground is not None
            else inst.algebra.atoms.size if inst.algebra is not None else 0)
    if isinstance(obj, list):
        return tuple(move_from_jsonable(inst, p) for p in obj)
    if _mask_moves(inst):
        return parse_mask(str(obj), size)
    if not isinstance(obj, int):
        raise ValidationError("poset move must be an element index")
    return obj


def state_to_jsonable(inst: GameInstance, state: GameState) -> dict:
    core: Any = state.core
    if inst.game_family in engine.MASK_GAMES or inst.algebra is not None \
            or inst.game_family == engine.G_POSET:
        core = format_mask(state.core)
    return {
        "round": state.round,
        "to_move": state.to_move,
        "core": core,
        "pending": None if state.pending is None
        else move_to_jsonable(inst, state.pending),
    }


def transcript_to_jsonable(t: Transcript) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "game": instance_to_jsonable(t.instance),
        "moves": [{"role": role, "move": move_to_jsonable(t.instance, move)}
                  for role, move in t.moves],
        "states": [state_to_jsonable(t.instance, s) for s in t.states],
        "winner": t.winner,
        "reason": t.reason,
    }


def serialize_transcript(t: Transcript) -> str:
    return dumps(transcript_to_jsonable(t))


def _state_key_to_jsonable(inst: GameInstance, key: tuple) -> dict:
    rnd, to_move, core, pending = key
    state = GameState(rnd, to_move, core, pending)
    return state_to_jsonable(inst, state)


def strategy_to_jsonable(inst: GameInstance, strategy: TableStrategy) -> dict:
    entries = []
    for key in sorted(strategy.entries, key=_key_sort_key):
        entries.append({
            "state": _state_key_to_jsonable(inst, key),
            "move": move_to_jsonable(inst, strategy.entries[key]),
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "role": strategy.role,
        "kind": strategy.kind,
        "entries": entries,
    }


def _key_sort_key(key: tuple):
    rnd, to_move, core, pending = key
    return (rnd, to_move, core, pending if pending is not None else ())


def strategy_from_jsonable(inst: GameInstance, obj: dict) -> TableStrategy:
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError("unsupported strategy schema_version")
    role = _req(obj, "role", str, "strategy")
    entries = {}
    for i, e in enumerate(_req(obj, "entries", list, "strategy")):
        sobj = _req(e, "state", dict, f"strategy.entries[{i}]")
        pending = sobj.get("pending")
        size = (inst.ground.size if inst.ground is not None
                else inst.algebra.atoms.size if inst.algebra is not None else 0)
        if inst.game_family in engine.MASK_GAMES or inst.algebra is not None \
                or inst.game_family == engine.G_POSET:
            core = parse_mask(str(sobj["core"]), max(size, inst.poset.size if inst.poset else 0))
        else:
            core = sobj["core"]
        key = (sobj["round"], sobj["to_move"], core,
               None if pending is None else move_from_jsonable(inst, pending))
        entries[key] = move_from_jsonable(inst, e["move"])
    return TableStrategy(role, entries)


def serialize_strategy(inst: GameInstance, strategy: TableStrategy) -> str:
    return dumps(strategy_to_jsonable(inst, strategy))

# ---------------------------------------------------------------------------
# Certificates, audit reports, threshold tables
# ---------------------------------------------------------------------------

def certificate_to_jsonable(cert) -> dict:
    inst = cert.output_run.instance

    def enc(move):
        if move is None:
            return None
        if isinstance(move, (tuple, list)):
            return [enc(p) for p in move]
        return move_to_jsonable(inst, move)

    return {
        "schema_version": SCHEMA_VERSION,
        "kind": cert.kind,
        "relation": cert.relation,
        "holds": cert.holds,
        "output_run": transcript_to_jsonable(cert.output_run),
        "aux_moves": [enc(m) for m in cert.aux_moves],
        "details": {k: _plain(v) for k, v in sorted(cert.details.items())},
    }


def _plain(v):
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


def audit_report_to_jsonable(report) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "instance": instance_to_jsonable(report.instance),
        "rows": [{
            "id": r.row_id,
            "description": r.description,
            "left": _plain(r.left),
            "right": _plain(r.right),
            "left_provenance": r.left_provenance,
            "right_provenance": r.right_provenance,
            "agree": r.agree,
            "note": r.note,
        } for r in report.rows],
        "disagreements": len(report.disagreements),
    }


def audit_report_text(report) -> str:
    """Fixed-width table mirroring the characterization-table layout."""
    header = f"{'row':34} {'left':>10} {'right':>10} {'agree':>6}  provenance"
    lines = [header, "-" * len(header)]
    for r in report.rows:
        agree = "-" if r.agree is None else ("yes" if r.agree else "NO")
        lines.append(f"{r.row_id:34} {str(r.left):>10} {str(r.right):>10} "
                     f"{agree:>6}  {r.left_provenance}/{r.right_provenance}")
    return "\n".join(lines) + "\n"


def threshold_table_to_jsonable(rows) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "rows": [{"rounds": r.rounds, "minimal_choose_win": r.minimal_choose_win}
                 for r in rows],
    }
