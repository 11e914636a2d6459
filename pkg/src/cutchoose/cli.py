"""Command-line workbench: solve, verify, transform, audit, scan, play.

Exit codes: 0 success, 1 validation failure, 2 capacity/budget exceeded.
With ``--json`` the machine-readable document goes to stdout; human-oriented
progress goes to stderr.  All emitted documents are byte-stable given equal
inputs, seeds, and flags (worker counts never change output bytes).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import analysis, serialize, transforms
from ._version import ENGINE_VERSION
from .engine import (CHOOSE, CUT, EMPTY, NONEMPTY, GameInstance, apply_move,
                     initial_state, legal_moves, terminal_status,
                     verify_winning_strategy)
from .errors import CapacityError, CutChooseError, ValidationError
from .solver import CACHE_ENV, solve
from .structures import format_mask
from .transforms import TransformOutput

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CAPACITY = 2


def _read_instance(path: str) -> GameInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return serialize.parse_instance(fh.read())


def _emit(doc, args) -> None:
    text = serialize.dumps(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.json:
        sys.stdout.write(text)


def _cache_dir(args) -> str | None:
    return getattr(args, "cache_dir", None) or os.environ.get(CACHE_ENV)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    result = solve(inst, want_strategy=not args.no_strategy,
                   cache_dir=_cache_dir(args))
    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "winner": result.winner,
        "stats": result.stats.to_jsonable(),
    }
    if result.strategy is not None:
        doc["strategy"] = serialize.strategy_to_jsonable(inst, result.strategy)
        if args.strategy_out:
            with open(args.strategy_out, "w", encoding="utf-8") as fh:
                fh.write(serialize.serialize_strategy(inst, result.strategy))
    _emit(doc, args)
    if not args.json:
        print(f"winner: {result.winner}")
        print(f"states visited: {result.stats.states_visited}  "
              f"memo hits: {result.stats.memo_hits}")
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _read_instance(args.instance)
    with open(args.strategy, "r", encoding="utf-8") as fh:
        strategy = serialize.strategy_from_jsonable(inst, json.load(fh))
    role = args.role or strategy.role
    result = verify_winning_strategy(inst, strategy, role)
    doc = {"schema_version": serialize.SCHEMA_VERSION,
           "role": role, "verified": result.verified,
           "nodes": result.nodes}
    if result.counterexample is not None:
        doc["counterexample"] = serialize.transcript_to_jsonable(
            result.counterexample)
    _emit(doc, args)
    if not args.json:
        print(f"verified: {result.verified} ({result.nodes} nodes)")
    return EXIT_OK if result.verified else EXIT_VALIDATION


def _sigma_for(args, inst: GameInstance, role: str):
    from .engine import (copy_strategy, first_move_strategy,
                         greedy_picker_strategy, seeded_table_strategy)
    name = args.sigma
    if name == "solver":
        result = solve(inst, cache_dir=_cache_dir(args))
        if result.winner == role:
            return result.strategy
        from .solver import extract_strategy, _value_function, SolveStats
        value = _value_function(inst, SolveStats(), 10_000_000)
        value(initial_state(inst))
        return extract_strategy(inst, role, value)
    if name == "greedy":
        return greedy_picker_strategy(inst)
    if name == "copy":
        return copy_strategy(inst)
    if name == "first":
        return first_move_strategy(inst, role)
    if name.startswith("seed:"):
        return seeded_table_strategy(inst, role, int(name.split(":", 1)[1]))
    if name.startswith("file:"):
        with open(name.split(":", 1)[1], "r", encoding="utf-8") as fh:
            return serialize.strategy_from_jsonable(inst, json.load(fh))
    raise ValidationError(f"unknown sigma source {name!r}")


def cmd_transform(args) -> int:
    name = args.name
    out: TransformOutput
    if name == "digit_split":
        out = transforms.digit_split_cut_strategy(args.m, args.nu, args.rounds)
    elif name == "fixed_point":
        inst = _read_instance(args.instance)
        sigma = transforms.fixed_point_choose_strategy(args.alpha)

        def certify_fp(t):
            picks = [m for r, m in t.moves if r == inst.picker]
            holds = all((p >> args.alpha) & 1 for p in picks)
            return transforms.TransformCertificate(
                "fixed_point", "every pick contains the fixed point",
                holds, t, [], {"alpha": args.alpha})

        out = transforms.TransformOutput("fixed_point", inst, sigma,
                                         certify_fp)
    elif name in ("disjointify_cut", "disjointify_choose"):
        g_inst = _read_instance(args.instance)
        if name == "disjointify_cut":
            sigma = _sigma_for(args, g_inst, CUT)
            out = transforms.disjointify_cut_strategy(sigma, g_inst)
        else:
            u_inst = transforms._doubled_instance(g_inst)
            sigma = _sigma_for(args, u_inst, CHOOSE)
            out = transforms.disjointify_choose_strategy(sigma, g_inst)
    elif name in ("transfer_cut", "transfer_choose"):
        inst = _read_instance(args.instance)
        if name == "transfer_cut":
            sigma = _sigma_for(args, inst, CUT)
            out = transforms.transfer_cut_big_to_small(sigma, inst, args.nu,
                                                       args.beta)
        else:
            sigma = _sigma_for(args, inst, CHOOSE)
            out = transforms.transfer_choose_small_to_big(sigma, inst,
                                                          args.nu, args.beta)
    elif name == "empty_to_cut":
        bm = _read_instance(args.instance)
        out = transforms.empty_to_cut_strategy(_sigma_for(args, bm, EMPTY), bm)
    elif name == "nonempty_to_choose":
        bm = _read_instance(args.instance)
        out = transforms.nonempty_to_choose_strategy(
            _sigma_for(args, bm, NONEMPTY), bm, bm.start)
    elif name == "choose_to_nonempty":
        bm = _read_instance(args.instance)

        def provider(x0):
            from .engine import greedy_picker_strategy
            from .engine import G_IDEAL, WEAK
            g_inst = GameInstance(game_family=G_IDEAL, start=x0,
                                  rounds=bm.rounds, width=None, variant=WEAK,
                                  cut_current=False, ground=bm.ground,
                                  family=bm.family)
            return greedy_picker_strategy(g_inst)

        out = transforms.choose_to_nonempty_strategy(provider, bm)
    else:
        raise ValidationError(f"unknown transform {name!r}")

    certs = transforms.certify_playouts(out, node_budget=args.budget)
    from .engine import tabulate_strategy
    table = tabulate_strategy(out.instance, out.strategy, out.strategy.role,
                              args.budget)
    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "transform": out.kind,
        "game": serialize.instance_to_jsonable(out.instance),
        "strategy": serialize.strategy_to_jsonable(out.instance, table),
        "playouts": len(certs),
        "all_hold": all(c.holds for c in certs),
        "certificates": [serialize.certificate_to_jsonable(c) for c in certs],
    }
    if args.strategy_out:
        with open(args.strategy_out, "w", encoding="utf-8") as fh:
            fh.write(serialize.serialize_strategy(out.instance, table))
    if args.game_out:
        with open(args.game_out, "w", encoding="utf-8") as fh:
            fh.write(serialize.serialize_instance(out.instance))
    _emit(doc, args)
    if not args.json:
        print(f"transform {out.kind}: {len(certs)} playouts, "
              f"all certificates hold: {all(c.holds for c in certs)}")
    return EXIT_OK if all(c.holds for c in certs) else EXIT_VALIDATION


def cmd_check(args) -> int:
    inst = _read_instance(args.instance)
    if inst.ground is not None:
        structure = inst.family
    elif inst.algebra is not None:
        structure = inst.algebra
    else:
        structure = inst.poset
    result = analysis.check_distributivity(
        structure, inst.start, inst.rounds, inst.width,
        args.variant, inst.maximal)
    doc = {"schema_version": serialize.SCHEMA_VERSION,
           "variant": args.variant,
           "holds": result.holds,
           "sequences_checked": result.sequences_checked}
    if result.failing_sequence is not None:
        doc["failing_sequence"] = [
            serialize.move_to_jsonable(inst, tuple(m))
            for m in result.failing_sequence]
    _emit(doc, args)
    if not args.json:
        print(f"distributivity ({args.variant}): "
              f"{'holds' if result.holds else 'fails'}")
    return EXIT_OK


def cmd_scan(args) -> int:
    n_lo, n_hi = (int(x) for x in args.rounds.split(":"))
    m_lo, m_hi = (int(x) for x in args.ground.split(":"))
    rows = analysis.threshold_scan(args.nu, range(n_lo, n_hi + 1),
                                   range(m_lo, m_hi + 1), args.variant)
    doc = serialize.threshold_table_to_jsonable(rows)
    _emit(doc, args)
    if not args.json:
        for r in rows:
            print(f"rounds {r.rounds}: minimal picker win at "
                  f"{r.minimal_choose_win}")
    return EXIT_OK


def _audit_one(item):
    report = analysis.equivalence_audit(item.instance)
    return {
        "instance_id": item.instance_id,
        "report": serialize.audit_report_to_jsonable(report),
    }


def cmd_audit(args) -> int:
    if args.instance:
        inst = _read_instance(args.instance)
        report = analysis.equivalence_audit(inst)
        doc = serialize.audit_report_to_jsonable(report)
        _emit(doc, args)
        if not args.json:
            print(serialize.audit_report_text(report))
        return EXIT_OK if not report.disagreements else EXIT_VALIDATION
    corpus = analysis.generate_corpus(args.seed, args.per_family)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(_audit_one, corpus))
    disagreements = sum(r["report"]["disagreements"] for r in results)
    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "seed": args.seed,
        "instances": len(results),
        "disagreements": disagreements,
        "reports": results,
    }
    _emit(doc, args)
    if not args.json:
        print(f"audited {len(results)} instances "
              f"(seed {args.seed}): {disagreements} disagreements")
    return EXIT_OK if disagreements == 0 else EXIT_VALIDATION


def cmd_ablate(args) -> int:
    inst = _read_instance(args.instance)
    report = analysis.maximality_ablation(inst)
    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "pieces": [format_mask(p) for p in report.pieces],
        "cutter_verified": report.cutter_verified,
        "restored_winner": report.restored_winner,
    }
    _emit(doc, args)
    if not args.json:
        print(f"forcing pieces {doc['pieces']}; cutter verified: "
              f"{report.cutter_verified}; with maximality restored the "
              f"winner is {report.restored_winner}")
    return EXIT_OK if report.cutter_verified else EXIT_VALIDATION


def _corpus_worker(item):
    from .solver import refute
    inst = item.instance
    out = {"instance_id": item.instance_id,
           "game_family": inst.game_family}
    result = solve(inst)
    out["winner"] = result.winner
    out["strategy_verified"] = verify_winning_strategy(
        inst, result.strategy, result.winner).verified
    out["loser_refuted"] = not refute(
        inst, inst.opponent(result.winner)).has_winning_strategy
    report = analysis.equivalence_audit(inst)
    out["audit_disagreements"] = len(report.disagreements)
    return out


def cmd_corpus(args) -> int:
    corpus = analysis.generate_corpus(args.seed, args.per_family)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(_corpus_worker, corpus))
    degeneracy_ok = all(
        r["winner"] == CHOOSE for r in results
        if r["game_family"].startswith("G_")) and all(
        r["winner"] == NONEMPTY for r in results
        if r["game_family"].startswith("BM_"))
    determinacy_ok = all(r["strategy_verified"] and r["loser_refuted"]
                         for r in results)
    disagreements = sum(r["audit_disagreements"] for r in results)
    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "seed": args.seed,
        "instances": len(results),
        "degeneracy_laws_hold": degeneracy_ok,
        "determinacy_verified": determinacy_ok,
        "audit_disagreements": disagreements,
        "results": results,
    }
    _emit(doc, args)
    if not args.json:
        print(f"corpus seed {args.seed}: {len(results)} instances; "
              f"degeneracy laws hold: {degeneracy_ok}; determinacy "
              f"verified: {determinacy_ok}; "
              f"audit disagreements: {disagreements}")
    ok = degeneracy_ok and determinacy_ok and disagreements == 0
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_cache(args) -> int:
    cache_dir = _cache_dir(args)
    if not cache_dir:
        print("no cache directory configured "
              f"(flag --cache-dir or ${CACHE_ENV})", file=sys.stderr)
        return EXIT_VALIDATION
    if args.action == "info":
        entries = [f for f in sorted(os.listdir(cache_dir))
                   if f.endswith(".json")] if os.path.isdir(cache_dir) else []
        doc = {"schema_version": serialize.SCHEMA_VERSION,
               "cache_dir": cache_dir, "entries": len(entries)}
        _emit(doc, args)
        if not args.json:
            print(f"{cache_dir}: {len(entries)} entries")
        return EXIT_OK
    if args.action == "clear":
        removed = 0
        if os.path.isdir(cache_dir):
            for f in os.listdir(cache_dir):
                if f.endswith(".json"):
                    os.unlink(os.path.join(cache_dir, f))
                    removed += 1
        if not args.json:
            print(f"removed {removed} entries")
        return EXIT_OK
    raise ValidationError(f"unknown cache action {args.action!r}")


# ---------------------------------------------------------------------------
# Interactive play
# ---------------------------------------------------------------------------

def _show_move(inst: GameInstance, move) -> str:
    if isinstance(move, tuple):
        return " | ".join(_show_move(inst, p) for p in move)
    if inst.game_family in ("U", "G_ideal", "BM_ideal") or inst.algebra is not None:
        return format_mask(move)
    return str(move)


def cmd_play(args) -> int:
    inst = _read_instance(args.instance)
    human_role = {"cut": inst.cutter, "choose": inst.picker}[args.role]
    machine_role = inst.opponent(human_role)
    result = solve(inst, cache_dir=_cache_dir(args))
    machine = result.strategy if result.winner == machine_role else None
    if machine is None:
        from .solver import extract_strategy, _value_function, SolveStats
        value = _value_function(inst, SolveStats(), 10_000_000)
        value(initial_state(inst))
        from .solver import extract_strategy as _ex
        machine = _ex(inst, machine_role, value)

    replay_inputs = None
    if args.replay:
        with open(args.replay, "r", encoding="utf-8") as fh:
            log_doc = json.load(fh)
        if log_doc.get("instance") != serialize.instance_to_jsonable(inst):
            raise ValidationError("replay log belongs to another instance")
        if log_doc.get("human_role") != human_role:
            raise ValidationError("replay log uses the other role")
        replay_inputs = list(log_doc["inputs"])

    state = initial_state(inst)
    history: tuple = ()
    inputs: list[int] = []
    out = sys.stderr if args.json else sys.stdout
    print(f"you play {human_role}; the table plays {machine_role} "
          f"(solved winner: {result.winner})", file=out)
    outcome = terminal_status(inst, state)
    while outcome.ongoing:
        role = state.to_move
        if role == machine_role:
            move = machine.decide(inst, state, history)
            print(f"[{role}] plays {_show_move(inst, move)}", file=out)
        else:
            moves = legal_moves(inst, state)
            print(f"round {state.round}, core "
                  f"{_show_move(inst, state.core)}; your moves:", file=out)
            for i, mv in enumerate(moves):
                print(f"  {i}: {_show_move(inst, mv)}", file=out)
            if replay_inputs is not None:
                idx = replay_inputs.pop(0)
            else:
                try:
                    idx = int(input("move index> "))
                except (EOFError, ValueError):
                    print("no input; resigning", file=out)
                    return EXIT_VALIDATION
            if not (0 <= idx < len(moves)):
                raise ValidationError(f"move index {idx} out of range")
            inputs.append(idx)
            move = moves[idx]
        state = apply_move(inst, state, move)
        history = history + ((role, move),)
        outcome = terminal_status(inst, state)
    print(f"winner: {outcome.status} ({outcome.reason})", file=out)
    session = {
        "schema_version": serialize.SCHEMA_VERSION,
        "instance": serialize.instance_to_jsonable(inst),
        "human_role": human_role,
        "inputs": inputs,
        "winner": outcome.status,
    }
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(serialize.dumps(session))
    if args.json:
        sys.stdout.write(serialize.dumps(session))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cutchoose",
        description="exact solving, strategy transformations, and audits for "
                    "finite cut-and-choose, poset, and Banach-Mazur games")
    parser.add_argument("--version", action="version", version=ENGINE_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true",
                       help="machine-readable JSON on stdout")
        p.add_argument("--output", help="also write the JSON document here")
        p.add_argument("--cache-dir", help=f"memo cache (or ${CACHE_ENV})")

    p = sub.add_parser("solve", help="name the winner, extract the strategy")
    p.add_argument("instance")
    p.add_argument("--no-strategy", action="store_true")
    p.add_argument("--strategy-out")
    common(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify", help="check a strategy file exhaustively")
    p.add_argument("instance")
    p.add_argument("--strategy", required=True)
    p.add_argument("--role", choices=[CUT, CHOOSE, EMPTY, NONEMPTY])
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("transform", help="apply a named strategy transform")
    p.add_argument("--name", required=True,
                   choices=["digit_split", "fixed_point", "disjointify_cut",
                            "disjointify_choose", "transfer_cut",
                            "transfer_choose", "empty_to_cut",
                            "nonempty_to_choose", "choose_to_nonempty"])
    p.add_argument("instance", nargs="?")
    p.add_argument("--sigma", default="solver",
                   help="solver|greedy|copy|first|seed:N|file:PATH")
    p.add_argument("--m", type=int)
    p.add_argument("--nu", type=int)
    p.add_argument("--beta", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--strategy-out", help="write the tabulated strategy here")
    p.add_argument("--game-out", help="write the output game instance here")
    common(p)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("check", help="distributivity by direct search")
    p.add_argument("instance")
    p.add_argument("--variant", default=analysis.PLAIN,
                   choices=[analysis.PLAIN, analysis.UNIFORM,
                            analysis.IDEAL_WEAK])
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("scan", help="threshold scan over ground sizes")
    p.add_argument("--nu", type=int, default=2)
    p.add_argument("--rounds", default="1:3", help="lo:hi")
    p.add_argument("--ground", default="2:12", help="lo:hi")
    p.add_argument("--variant", default="exact",
                   choices=["exact", "weak", "strict_prefix"])
    common(p)
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("audit", help="two-sided characterization audit")
    p.add_argument("instance", nargs="?")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--per-family", type=int, default=25)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("ablate", help="maximality ablation demonstration")
    p.add_argument("instance")
    common(p)
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("play", help="interactive terminal session")
    p.add_argument("instance")
    p.add_argument("--role", choices=["cut", "choose"], default="choose")
    p.add_argument("--log")
    p.add_argument("--replay")
    common(p)
    p.set_defaults(fn=cmd_play)

    p = sub.add_parser("corpus", help="generate and run the seeded corpus")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--per-family", type=int, default=25)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(fn=cmd_corpus)

    p = sub.add_parser("cache", help="manage the on-disk memo store")
    p.add_argument("action", choices=["info", "clear"])
    common(p)
    p.set_defaults(fn=cmd_cache)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, CutChooseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
