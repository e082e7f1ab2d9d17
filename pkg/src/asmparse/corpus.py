"""Reference corpora: loading, running and benchmarking."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .lexicon import LexiconError, OutOfVocabulary, ReadoutError
from .parser import ParserConfig, StructureError, parse
from .trees import ConstituencyTree, DependencyTree, TreeError

SHIPPED = {"constituency": "constituency_corpus.json", "embedding": "embedding_corpus.json"}


class CorpusError(ValueError):
    """Malformed corpus file."""


@dataclass
class CorpusCase:
    id: str
    sentence: str
    expected_dependency: Optional[DependencyTree]
    expected_constituency: Optional[ConstituencyTree] = None
    tags: Dict = field(default_factory=dict)


@dataclass
class Corpus:
    name: str
    cases: List[CorpusCase]
    constituency: bool = False
    embedding: bool = False

    def config(self, **overrides) -> ParserConfig:
        base = dict(constituency_enabled=self.constituency, embedding_enabled=self.embedding)
        base.update(overrides)
        return ParserConfig(**base)


def corpus_from_json(data, name: str = "corpus") -> Corpus:
    if not isinstance(data, dict) or not isinstance(data.get("cases"), list):
        raise CorpusError("a corpus is an object with a 'cases' list")
    modes = data.get("modes", {})
    cases = []
    for i, c in enumerate(data["cases"]):
        try:
            dep = c.get("expected_dependency")
            con = c.get("expected_constituency")
            case = CorpusCase(
                id=str(c.get("id", i)),
                sentence=c["sentence"] if isinstance(c["sentence"], str) else " ".join(c["sentence"]),
                expected_dependency=DependencyTree.from_json(dep) if dep else None,
                expected_constituency=ConstituencyTree.from_json(con) if con else None,
                tags=dict(c.get("tags", {})))
            if case.expected_dependency is not None:
                case.expected_dependency.validate()
            if case.expected_constituency is not None:
                case.expected_constituency.validate()
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise CorpusError(f"case {i}: {exc!r}") from exc
        cases.append(case)
    return Corpus(data.get("name", name), cases, bool(modes.get("constituency", False)),
                  bool(modes.get("embedding", False)))


def load_corpus(path) -> Corpus:
    """Load a corpus file, or a shipped corpus by name ('constituency', 'embedding')."""
    if str(path) in SHIPPED:
        text = resources.files("asmparse.data").joinpath(SHIPPED[str(path)]).read_text("utf-8")
        name = str(path)
    else:
        try:
            text = Path(path).read_text("utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read {path}: {exc}") from exc
        name = Path(path).stem
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: invalid JSON ({exc})") from exc
    return corpus_from_json(data, name)


@dataclass
class CaseResult:
    id: str
    sentence: str
    passed: bool
    error: Optional[str] = None
    diffs: List[str] = field(default_factory=list)
    dependency: Optional[dict] = None
    constituency: Optional[str] = None
    words: int = 0
    seconds: float = 0.0
    timing: Optional[dict] = None

    def to_json(self) -> dict:
        return {"id": self.id, "sentence": self.sentence, "passed": self.passed,
                "error": self.error, "diffs": self.diffs, "dependency": self.dependency,
                "constituency": self.constituency, "words": self.words,
                "seconds": round(self.seconds, 4)}


@dataclass
class RunReport:
    corpus: str
    config: dict
    results: List[CaseResult]

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> List[CaseResult]:
        return [r for r in self.results if not r.passed]

    def timing(self) -> dict:
        words = sum(r.words for r in self.results)
        secs = sum(r.seconds for r in self.results)
        out = {"words": words, "seconds": round(secs, 3),
               "seconds_per_word": round(secs / words, 4) if words else None}
        for phase in ("parse", "touch", "link"):
            w = sum(r.timing[phase]["words"] for r in self.results if r.timing)
            rounds = sum(r.timing[phase]["rounds"] for r in self.results if r.timing)
            s = sum(r.timing[phase]["seconds"] for r in self.results if r.timing)
            out[phase] = {"words": w, "rounds": rounds, "seconds": round(s, 3)}
        return out

    def to_json(self) -> dict:
        return {"corpus": self.corpus, "config": self.config, "passed": self.passed,
                "total": len(self.results), "ok": self.ok, "timing": self.timing(),
                "cases": [r.to_json() for r in self.results]}


def _diff_dependency(expected: DependencyTree, got: DependencyTree) -> List[str]:
    out = []
    if expected.words != got.words:
        out.append(f"words: expected {expected.words}, got {got.words}")
        return out
    if expected.root != got.root:
        out.append(f"root: expected {expected.words[expected.root]}, got {got.words[got.root]}")
    w = expected.words
    for h, d, l in sorted(expected.edge_set() - got.edge_set()):
        out.append(f"missing {w[h]} -{l}-> {w[d]}")
    for h, d, l in sorted(got.edge_set() - expected.edge_set()):
        out.append(f"extra {w[h]} -{l}-> {w[d]}")
    return out


def run_case(case: CorpusCase, config: ParserConfig) -> CaseResult:
    t0 = time.perf_counter()
    res = CaseResult(case.id, case.sentence, False)
    try:
        record = parse(case.sentence, config)
        res.words = len(record.words)
        res.timing = record.timing()
        dep = record.dependency_tree()
        res.dependency = dep.to_json()
        if case.expected_dependency is not None:
            res.diffs += _diff_dependency(case.expected_dependency, dep)
        if config.constituency_enabled:
            from .parser import readout_constituency
            con = readout_constituency(record, dependencies=dep)
            res.constituency = str(con)
            exp = case.expected_constituency
            if exp is not None and (con.subject, con.verb, con.obj) != (exp.subject, exp.verb, exp.obj):
                res.diffs.append(f"constituency: expected {exp}, got {con}")
        res.passed = not res.diffs
    except (StructureError, ReadoutError, OutOfVocabulary, LexiconError, TreeError) as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    res.seconds = time.perf_counter() - t0
    return res


def _run_one(args):
    return run_case(*args)


def run_corpus(corpus: Corpus, config: Optional[ParserConfig] = None,
               workers: int = 1) -> RunReport:
    """Run every case with its own Brain; results keep the corpus order."""
    config = config or corpus.config()
    jobs = [(case, config) for case in corpus.cases]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return RunReport(corpus.name, config.to_json(), results)


# -- benchmark ----------------------------------------------------------------

@dataclass
class BenchReport:
    sentences: int
    dependency: dict
    constituency: dict
    touch: dict
    checks: Dict[str, bool]
    notes: List[str]

    def to_json(self) -> dict:
        return {"sentences": self.sentences, "dependency": self.dependency,
                "constituency": self.constituency, "touch": self.touch,
                "checks": self.checks, "notes": self.notes}

    def table(self) -> str:
        d, c, t = self.dependency, self.constituency, self.touch
        rows = [
            ("mode", "s/word", "rounds/word", "synaptic events/word"),
            ("dependency", f"{d['seconds_per_word']:.3f}", f"{d['rounds_per_word']:.1f}",
             f"{d['events_per_word']:.0f}"),
            ("constituency", f"{c['seconds_per_word']:.3f}", f"{c['rounds_per_word']:.1f}",
             f"{c['events_per_word']:.0f}"),
        ]
        if t["words"]:
            rows.append(("parse (embedding)", f"{t['parse_seconds_per_word']:.3f}",
                         f"{t['parse_rounds_per_word']:.1f}", ""))
            rows.append(("touch", f"{t['touch_seconds_per_word']:.4f}",
                         f"{t['touch_rounds_per_word']:.1f}", ""))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
        lines += [f"{k}: {'ok' if v else 'FAILED'}" for k, v in self.checks.items()]
        return "\n".join(lines + self.notes)


def _mode_stats(sentences: Sequence[str], config: ParserConfig) -> dict:
    words = rounds = events = 0
    secs = 0.0
    for s in sentences:
        t0 = time.perf_counter()
        rec = parse(s, config)
        secs += time.perf_counter() - t0
        words += len(rec.words)
        rounds += rec.parse.rounds
        events += rec.parse.synaptic_events
    return {"words": words, "seconds": secs, "seconds_per_word": secs / max(words, 1),
            "rounds_per_word": rounds / max(words, 1), "events_per_word": events / max(words, 1)}


def bench(sentences: Sequence[str], embedded: Sequence[str] = (),
          config: Optional[ParserConfig] = None) -> BenchReport:
    """Dependency-only vs constituency cost on ``sentences``; parse vs touch
    cost on ``embedded`` (sentences with embedded clauses).

    Round and synaptic-event counts are asserted structurally; wall-clock
    ratios are only reported.
    """
    base = config or ParserConfig()
    dep = _mode_stats(sentences, replace(base, constituency_enabled=False, embedding_enabled=False))
    con = _mode_stats(sentences, replace(base, constituency_enabled=True, embedding_enabled=False))
    tw = tr = pw = pr = 0
    ts = ps = 0.0
    for s in embedded:
        rec = parse(s, replace(base, embedding_enabled=True, constituency_enabled=False))
        tw += rec.touch.words
        tr += rec.touch.rounds
        ts += rec.touch.seconds
        pw += rec.parse.words
        pr += rec.parse.rounds
        ps += rec.parse.seconds
    touch = {"words": tw, "touch_rounds_per_word": tr / tw if tw else 0.0,
             "parse_rounds_per_word": pr / pw if pw else 0.0,
             "touch_seconds_per_word": ts / tw if tw else 0.0,
             "parse_seconds_per_word": ps / pw if pw else 0.0}
    checks = {
        "constituency does more synaptic work per word": con["events_per_word"] > dep["events_per_word"],
        "parse rounds per word == rounds": (not sentences) or dep["rounds_per_word"] == base.rounds,
    }
    notes = []
    if tw:
        checks["touch rounds per word == 1"] = tr == tw
        checks[f"parse/touch round ratio == {base.rounds}"] = pr * tw == base.rounds * pw * tr
        touch["round_ratio"] = (pr / pw) / (tr / tw)
        touch["wall_clock_ratio"] = touch["parse_seconds_per_word"] / max(touch["touch_seconds_per_word"], 1e-12)
        notes.append(f"parse/touch wall-clock ratio per word: {touch['wall_clock_ratio']:.1f}x")
    ratio = con["seconds_per_word"] / max(dep["seconds_per_word"], 1e-12)
    con["slowdown_vs_dependency"] = ratio
    band = "inside" if 1.5 <= ratio <= 4.0 else "OUTSIDE"
    notes.append(f"constituency/dependency wall-clock ratio: {ratio:.2f}x "
                 f"(published figure 2.5x; {band} the [1.5, 4.0] band, informational)")
    return BenchReport(len(sentences), dep, con, touch, checks, notes)
