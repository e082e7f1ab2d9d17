"""Command-line interface.

Exit codes: 0 success, 1 failure (failed corpus case, readout error,
counterexample), 2 out-of-vocabulary word, 3 ill-formed clause structure or
bad input file, 4 inconclusive PDA search.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from importlib import resources
from typing import List, Optional

from . import bridges
from .corpus import CorpusError, bench, load_corpus, run_corpus
from .fba import FBA, FBAError, anbn_fba, load_fba, split_word
from .lexicon import OutOfVocabulary, ReadoutError
from .parser import ParserConfig, StructureError, parse, readout_constituency

EXIT_OK, EXIT_FAIL, EXIT_OOV, EXIT_STRUCTURE, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
SEED_ENV = "ASMPARSE_SEED"
BUILTIN_MACHINES = {"anbn": anbn_fba}
SHIPPED_MACHINES = {"dyck1": "dyck1.json"}


def _default_seed() -> int:
    try:
        return int(os.environ.get(SEED_ENV, "0"))
    except ValueError:
        return 0


def _emit(obj, out=None):
    out = out or sys.stdout
    out.write(json.dumps(obj, indent=1, ensure_ascii=False) + "\n")


def _config(args, **extra) -> ParserConfig:
    kw = dict(seed=args.seed)
    for name in ("n", "k", "rounds"):
        if getattr(args, name, None) is not None:
            kw[name] = getattr(args, name)
    kw.update(extra)
    return ParserConfig(**kw)


# -- parser commands -------------------------------------------------------------

def cmd_parse(args) -> int:
    config = _config(args, constituency_enabled=args.constituency,
                     embedding_enabled=args.embedding)
    record = parse(args.sentence, config)
    dep = record.dependency_tree()
    con = readout_constituency(record, dependencies=dep) if args.constituency else None
    if args.format == "dot":
        sys.stdout.write(con.to_dot() if con is not None else dep.to_dot())
    else:
        out = {"sentence": args.sentence, "config": config.to_json(), "dependency": dep.to_json()}
        if con is not None:
            out["constituency"] = con.to_json()
        _emit(out)
    return EXIT_OK


def cmd_corpus(args) -> int:
    corpus = load_corpus(args.corpus)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed]
    overrides = {}
    if args.constituency:
        overrides["constituency_enabled"] = True
    if args.embedding:
        overrides["embedding_enabled"] = True
    reports = []
    for seed in seeds:
        cfg = corpus.config(seed=seed, **overrides)
        if args.n is not None or args.k is not None:
            cfg = replace(cfg, n=args.n or cfg.n, k=args.k or cfg.k)
        report = run_corpus(corpus, cfg, workers=args.workers)
        reports.append(report)
        print(f"{corpus.name} seed={seed}: {report.passed}/{len(report.results)} passed",
              file=sys.stderr)
        for f in report.failures():
            print(f"  FAIL {f.id} {f.sentence!r}: {f.error or '; '.join(f.diffs)}", file=sys.stderr)
    data = {"corpus": corpus.name, "runs": [r.to_json() for r in reports],
            "ok": all(r.ok for r in reports)}
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(data, fh, indent=1)
    else:
        _emit({"corpus": corpus.name, "ok": data["ok"],
               "runs": [{"seed": r.config["seed"], "passed": r.passed, "total": len(r.results),
                         "timing": r.timing()} for r in reports]})
    return EXIT_OK if data["ok"] else EXIT_FAIL


def cmd_bench(args) -> int:
    corpus = load_corpus(args.corpus)
    embedded = load_corpus(args.embedded) if args.embedded else None
    sentences = [c.sentence for c in corpus.cases][: args.limit or None]
    inner = [c.sentence for c in embedded.cases if c.tags.get("depth", 1) > 0] if embedded else []
    report = bench(sentences, inner[: args.limit or None], _config(args))
    if args.json:
        _emit(report.to_json())
    else:
        print(report.table())
    return EXIT_OK if all(report.checks.values()) else EXIT_FAIL


# -- automata commands -----------------------------------------------------------

def _machine(ref: str) -> FBA:
    if ref in BUILTIN_MACHINES:
        return BUILTIN_MACHINES[ref]()
    if ref in SHIPPED_MACHINES and not os.path.exists(ref):
        text = resources.files("asmparse.data").joinpath(SHIPPED_MACHINES[ref]).read_text("utf-8")
        return FBA.from_json(json.loads(text))
    try:
        return load_fba(ref)
    except OSError as exc:
        raise FBAError(f"cannot read {ref}: {exc}") from exc


def _write_or_emit(obj, path: Optional[str]):
    if path:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=1, ensure_ascii=False)
            fh.write("\n")
    else:
        _emit(obj)


def cmd_fba_run(args) -> int:
    fba = _machine(args.machine)
    word = split_word(fba.sigma, args.word)
    out = {"word": list(word)}
    if args.pda:
        pda = bridges.fba_to_pda(bridges.s_determinize(fba))
        run = bridges.pda_run(pda, word)
        out.update(accepted=run.accepted, via="pda", max_stack=run.max_stack, max_eps=run.max_eps)
        if not run.accepted and run.hit_bound:
            out["accepted"] = None
            _emit(out)
            return EXIT_INCONCLUSIVE
    elif args.witness:
        ok, trace = fba.accepts(word, witness=True)
        out.update(accepted=ok, run=[c.show() for c in trace] if trace else None)
    else:
        out["accepted"] = fba.accepts(word, consume=not args.prefix)
    _emit(out)
    return EXIT_OK


def cmd_fba_weak_check(args) -> int:
    fba = _machine(args.machine)
    _emit({"weak": fba.is_weak(), "s_deterministic": fba.is_s_deterministic(),
           "states": len(fba.states), "rules": len(fba.rules), "mark_mode": fba.mark_mode})
    return EXIT_OK


def cmd_fba_determinize(args) -> int:
    det = bridges.s_determinize(_machine(args.machine))
    _write_or_emit(det.to_json(), args.out)
    return EXIT_OK


def cmd_fba_to_pda(args) -> int:
    pda = bridges.fba_to_pda(bridges.s_determinize(_machine(args.machine)))
    _write_or_emit(pda.to_json(), args.out)
    return EXIT_OK


def cmd_fba_pda_run(args) -> int:
    try:
        with open(args.pda) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FBAError(f"cannot read {args.pda}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FBAError(f"cannot parse {args.pda}: {exc}") from exc
    if data.get("kind") == "compiled-from-fba":
        pda = bridges.fba_to_pda(FBA.from_json(data["fba"]))
    else:
        pda = bridges.PDA.from_json(data)
    word = split_word(pda.sigma, args.word)
    bounds = None
    if args.max_stack is not None or args.max_eps is not None:
        default = pda.default_bounds(word)
        bounds = bridges.Bounds(args.max_stack if args.max_stack is not None else default.max_stack,
                                args.max_eps if args.max_eps is not None else default.max_eps)
    try:
        ok = bridges.pda_accepts(pda, word, bounds)
    except bridges.Inconclusive as exc:
        _emit({"word": list(word), "accepted": None, "inconclusive": str(exc)})
        return EXIT_INCONCLUSIVE
    _emit({"word": list(word), "accepted": ok})
    return EXIT_OK


def cmd_fba_cs_build(args) -> int:
    inst = bridges.load_cs_instance(args.instance)
    fba = bridges.cs_weak_fba(inst)
    relabeled, _ = fba.relabeled()
    _write_or_emit(relabeled.to_json(), args.out)
    return EXIT_OK


def cmd_fba_equiv_sweep(args) -> int:
    report = bridges.equivalence_sweep(args.machines, args.maxlen, args.seed,
                                       args.max_states, args.max_sigma, args.max_rules)
    out = report.to_json()
    out["mismatches"] = out["mismatches"][:10]
    out["counterexamples"] = len(report.mismatches)
    _emit(out)
    if report.mismatches:
        return EXIT_FAIL
    if report.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asmparse", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    def ac_flags(p):
        p.add_argument("--seed", type=int, default=seed,
                       help=f"random seed (default ${SEED_ENV} or 0)")
        p.add_argument("--n", type=int, help="neurons per area")
        p.add_argument("--k", type=int, help="assembly size")

    p = sub.add_parser("parse", help="parse one sentence and print its tree")
    p.add_argument("sentence")
    p.add_argument("--constituency", action="store_true")
    p.add_argument("--embedding", action="store_true")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--rounds", type=int)
    ac_flags(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("corpus", help="run a reference corpus")
    p.add_argument("corpus", help="corpus JSON file, or 'constituency' / 'embedding'")
    p.add_argument("--seeds", help="comma-separated seeds (overrides --seed)")
    p.add_argument("--report", help="write the full JSON report here")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--constituency", action="store_true")
    p.add_argument("--embedding", action="store_true")
    ac_flags(p)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("bench", help="timing and firing-round counts")
    p.add_argument("corpus", nargs="?", default="constituency")
    p.add_argument("--embedded", default="embedding",
                   help="corpus with embedded clauses for the touch measurement ('' to skip)")
    p.add_argument("--limit", type=int, default=0, help="use only the first N sentences")
    p.add_argument("--json", action="store_true")
    ac_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fba", help="fallback automata toolkit")
    fsub = p.add_subparsers(dest="fba_command", required=True)
    machine_help = "FBA JSON file, or a built-in: anbn, dyck1"

    q = fsub.add_parser("run", help="decide membership")
    q.add_argument("machine", help=machine_help)
    q.add_argument("word")
    q.add_argument("--witness", action="store_true", help="print an accepting run")
    q.add_argument("--prefix", action="store_true", help="accept without consuming the input")
    q.add_argument("--pda", action="store_true", help="decide through the compiled PDA")
    q.set_defaults(func=cmd_fba_run)

    q = fsub.add_parser("weak-check", help="is the machine weak?")
    q.add_argument("machine", help=machine_help)
    q.set_defaults(func=cmd_fba_weak_check)

    q = fsub.add_parser("determinize", help="s-determinize a machine")
    q.add_argument("machine", help=machine_help)
    q.add_argument("--out")
    q.set_defaults(func=cmd_fba_determinize)

    q = fsub.add_parser("to-pda", help="compile to a pushdown automaton")
    q.add_argument("machine", help=machine_help)
    q.add_argument("--out")
    q.set_defaults(func=cmd_fba_to_pda)

    q = fsub.add_parser("pda-run", help="run a PDA file (explicit or compiled)")
    q.add_argument("pda")
    q.add_argument("word")
    q.add_argument("--max-stack", type=int)
    q.add_argument("--max-eps", type=int)
    q.set_defaults(func=cmd_fba_pda_run)

    q = fsub.add_parser("cs-build", help="weak-FBA for R ∩ h(D_k)")
    q.add_argument("instance", help="CS instance JSON {k, h, R}")
    q.add_argument("--out")
    q.set_defaults(func=cmd_fba_cs_build)

    q = fsub.add_parser("equiv-sweep", help="FBA vs compiled PDA on random machines")
    q.add_argument("--machines", type=int, default=50)
    q.add_argument("--maxlen", type=int, default=6)
    q.add_argument("--seed", type=int, default=seed)
    q.add_argument("--max-states", type=int, default=3)
    q.add_argument("--max-sigma", type=int, default=2)
    q.add_argument("--max-rules", type=int, default=12)
    q.set_defaults(func=cmd_fba_equiv_sweep)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OutOfVocabulary as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OOV
    except (StructureError, CorpusError, FBAError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except ReadoutError as exc:
        print(f"readout error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except bridges.Inconclusive as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
