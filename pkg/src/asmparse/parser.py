"""The enhanced Parser: word-by-word parsing with project*, optional
constituency areas (VP, S), and embedded-clause handling through the DS area,
a working memory of processed words, and touching.

A parse runs over one :class:`Brain`.  Each word's action set opens exactly one
role area to LEX; LEX is clamped to the word's assembly and ``rounds`` steps of
project* form (or re-form) the word's assembly there and strengthen links to
whatever else is active.  The trees are read back afterwards purely from the
weights, by firing stored assemblies across fibers.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .brain import (AreaParams, Assembly, Brain, DEFAULT_BETA, DEFAULT_K, DEFAULT_N,
                    DEFAULT_P, DEFAULT_ROUNDS)
from .lexicon import (ADJ, ADV, CONSTITUENCY_FIBERS, DEPENDENCY_AREAS, DEPENDENCY_FIBERS, DET,
                      DS, EMBEDDING_FIBERS, LEX, OBJ, PREP, PREP_P, S, SUBJ, VERB, VP,
                      Lexicon, OutOfVocabulary, ReadoutError, WordEntry, load_lexicon)
from .trees import ConstituencyTree, DependencyTree, Edge

__all__ = [
    "ParserConfig", "Clause", "WorkingMemory", "SignatureLink", "ParseRecord", "Parser",
    "StructureError", "ReadoutError", "OutOfVocabulary", "ParserInternalError",
    "tokenize", "segment", "parse", "READOUT_GRAPH", "READOUT_THRESHOLD",
]

READOUT_THRESHOLD = 0.75

# Which areas the dependency readout fires into from a head in a given area.
READOUT_GRAPH: Dict[str, Tuple[str, ...]] = {
    VERB: (SUBJ, OBJ, ADV, PREP_P),
    SUBJ: (DET, ADJ, DS),
    OBJ: (DET, ADJ, DS),
    PREP_P: (PREP, DET, ADJ, DS),
}
# Areas whose assembly can act as a clause signature (they have a DS fiber).
SIGNATURE_AREAS = (SUBJ, OBJ, PREP_P)
ROLE_AREAS = tuple(a for a in DEPENDENCY_AREAS if a != LEX)
# Dependents that make up a constituent together with their head.
_MODIFIERS = (DET, ADJ, PREP, PREP_P, ADV)


class StructureError(ValueError):
    """Ill-formed clause structure, or a word the grammar cannot place."""


class ParserInternalError(RuntimeError):
    """Broken parser invariant (e.g. touching a word that was never parsed)."""


@dataclass(frozen=True)
class ParserConfig:
    """Parser switches and AC parameters.

    ``form_rounds`` of the ``rounds`` firing rounds spent on each word pick
    its assembly from LEX input alone; the remaining rounds run with the
    whole disinhibited subgraph (see ``_Run._project``).  ``form_rounds=0``
    projects everything together from the first round.
    """

    constituency_enabled: bool = False
    embedding_enabled: bool = False
    rounds: int = DEFAULT_ROUNDS
    n: int = DEFAULT_N
    k: int = DEFAULT_K
    p: float = DEFAULT_P
    beta: float = DEFAULT_BETA
    form_rounds: int = 1
    seed: int = 0
    plasticity_during_touch: bool = True
    tie_break: str = "random"

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if not 0 <= self.form_rounds <= self.rounds:
            raise ValueError("form_rounds must lie in [0, rounds]")
        if not (0 < self.p <= 1):
            raise ValueError("p must lie in (0, 1]")
        if self.k > self.n or self.k < 1:
            raise ValueError("need 1 <= k <= n")

    def to_json(self) -> dict:
        return dict(constituency=self.constituency_enabled, embedding=self.embedding_enabled,
                    rounds=self.rounds, n=self.n, k=self.k, p=self.p, beta=self.beta,
                    form_rounds=self.form_rounds,
                    seed=self.seed,
                    tie_break=self.tie_break)


# -- segmentation -----------------------------------------------------------

_TOKEN = re.compile(r"[A-Za-z']+|,")


def tokenize(sentence) -> List[str]:
    """Lower-cased words and commas; a sentence may also be given as a list."""
    if isinstance(sentence, str):
        text = sentence.strip()
        if text.endswith((".", "!", "?")):
            text = text[:-1]
        bad = re.sub(r"[A-Za-z',\s]", "", text)
        if bad:
            raise StructureError(f"unsupported characters {bad!r}")
        return [t.lower() for t in _TOKEN.findall(text)]
    return [str(t).lower() for t in sentence if str(t) not in (".", "")]


@dataclass
class Clause:
    id: int
    depth: int
    parent: Optional[int]
    signature: Optional[int] = None   # outer word the clause is linked to
    words: List[int] = field(default_factory=list)
    verb: Optional[int] = None        # first verb of the clause

    @property
    def has_verb(self) -> bool:
        return self.verb is not None


@dataclass
class WorkingMemory:
    """Processed words in order, with their clause depth and clause id.

    ``opens[i]`` is the clause that word ``i`` begins, ``link_after[i]`` the
    clause that begins right after word ``i`` (so ``i`` is its signature),
    ``closes_before[i]`` the clauses (innermost first) that end right before
    word ``i`` and ``end_closes`` those that are still open at the end.
    """

    words: List[str]
    depths: List[int]
    clause_of: List[int]
    clauses: List[Clause]
    opens: Dict[int, int] = field(default_factory=dict)
    link_after: Dict[int, int] = field(default_factory=dict)
    closes_before: Dict[int, List[int]] = field(default_factory=dict)
    end_closes: List[int] = field(default_factory=list)

    @property
    def max_depth(self) -> int:
        return max(self.depths) if self.depths else 0

    def boundaries(self) -> List[Tuple[int, int, int]]:
        """(clause id, first word, last word) per clause."""
        return [(c.id, c.words[0], c.words[-1]) for c in self.clauses if c.words]


def segment(tokens: Sequence[str], lexicon: Lexicon, embedding: bool = True) -> WorkingMemory:
    """Purely lexical clause segmentation.

    A clause-marker word opens a clause one level deeper (a comma just before
    it is absorbed).  A bare comma closes the innermost clause, and keeps
    closing while the resumed clause already has its verb and the next word
    is a verb.  End of input closes everything.
    """
    entries = [None if t == "," else lexicon.action_set(t) for t in tokens]
    words: List[str] = []
    depths: List[int] = []
    clause_of: List[int] = []
    clauses = [Clause(0, 0, None)]
    stack = [0]
    wm_opens: Dict[int, int] = {}
    link_after: Dict[int, int] = {}
    closes_before: Dict[int, List[int]] = {}
    pending: List[int] = []

    def next_entry(i) -> Optional[WordEntry]:
        return entries[i + 1] if i + 1 < len(entries) else None

    for i, (tok, entry) in enumerate(zip(tokens, entries)):
        if entry is None:
            nxt = next_entry(i)
            if nxt is None:
                raise StructureError("sentence ends with a comma" if i else "empty sentence")
            if nxt.opens_clause and embedding:
                continue
            if len(stack) == 1:
                raise StructureError(f"comma at token {i} closes no clause")
            if pending:
                raise StructureError(f"two commas in a row at token {i}")
            pending.append(stack.pop())
            if not clauses[pending[-1]].has_verb:
                raise StructureError(f"comma at token {i} closes a clause without a verb")
            while len(stack) > 1 and clauses[stack[-1]].has_verb and nxt.is_verb:
                pending.append(stack.pop())
            if len(stack) > 1 and not clauses[stack[-1]].has_verb:
                raise StructureError(
                    "resuming an embedded clause before its verb is not supported")
            continue
        idx = len(words)
        if entry.opens_clause:
            if not embedding:
                raise StructureError(
                    f"{tok!r} opens a dependent clause but embedding is disabled")
            if idx == 0:
                raise StructureError(f"sentence-initial {tok!r} has no outer clause to attach to")
            if pending:
                raise StructureError(f"{tok!r} directly after a closing comma")
            clause = Clause(len(clauses), len(stack), stack[-1], signature=idx - 1)
            clauses.append(clause)
            link_after[idx - 1] = clause.id
            wm_opens[idx] = clause.id
            stack.append(clause.id)
        if pending:
            closes_before[idx] = pending
            pending = []
        cl = clauses[stack[-1]]
        words.append(tok)
        depths.append(cl.depth)
        clause_of.append(cl.id)
        cl.words.append(idx)
        if entry.is_verb and not cl.has_verb:
            cl.verb = idx
    if not words:
        raise StructureError("empty sentence")
    end_closes = list(reversed(stack[1:]))
    for cid in end_closes:
        if not clauses[cid].has_verb:
            raise StructureError("the sentence ends inside a clause without a verb")
    return WorkingMemory(words, depths, clause_of, clauses, wm_opens, link_after,
                         closes_before, end_closes)


# -- records ------------------------------------------------------------------

@dataclass
class SignatureLink:
    signature: int          # word index of the outer-clause signature
    area: str               # its role area
    clause: int             # id of the clause it links to
    ds_assembly: Optional[Assembly] = None
    verb: Optional[int] = None   # inner verb word index, once parsed


@dataclass
class PhaseCounters:
    words: int = 0
    rounds: int = 0
    synaptic_events: int = 0
    seconds: float = 0.0

    def add(self, words, rounds, events, seconds):
        self.words += words
        self.rounds += rounds
        self.synaptic_events += events
        self.seconds += seconds

    def to_json(self) -> dict:
        return dict(words=self.words, rounds=self.rounds,
                    synaptic_events=self.synaptic_events, seconds=self.seconds)


@dataclass
class ParseRecord:
    config: ParserConfig
    tokens: List[str]
    memory: WorkingMemory
    brain: Brain
    lexicon: Lexicon
    role_areas: List[str]
    assemblies: List[Optional[Assembly]]
    links: List[SignatureLink]
    word_seconds: List[float]
    parse: PhaseCounters
    touch: PhaseCounters
    link: PhaseCounters
    # (word, rounds used, overlap of the reactivated winners with the stored assembly / k)
    touch_log: List[Tuple[int, int, float]] = field(default_factory=list)
    inhibition_log: List[Tuple[str, str, str]] = field(default_factory=list)
    touch_passes: int = 0

    @property
    def words(self) -> List[str]:
        return self.memory.words

    def dependency_tree(self) -> DependencyTree:
        return readout_dependencies(self)

    def constituency_tree(self) -> ConstituencyTree:
        return readout_constituency(self)

    def timing(self) -> dict:
        return {"parse": self.parse.to_json(), "touch": self.touch.to_json(),
                "link": self.link.to_json(), "word_seconds": list(self.word_seconds)}


# -- the parser ---------------------------------------------------------------

class Parser:
    def __init__(self, config: ParserConfig = ParserConfig(), lexicon: Optional[Lexicon] = None):
        self.config = config
        if lexicon is None:
            lexicon = load_lexicon(n=config.n, k=config.k, seed=config.seed)
        if lexicon.n != config.n or lexicon.k != config.k:
            raise ValueError("lexicon was built for a different n or k")
        self.lexicon = lexicon

    # brain layout
    def areas(self) -> List[str]:
        names = list(DEPENDENCY_AREAS)
        if self.config.embedding_enabled:
            names.append(DS)
        if self.config.constituency_enabled:
            names += [VP, S]
        return names

    def fibers(self) -> List[Tuple[str, str]]:
        fibers = list(DEPENDENCY_FIBERS)
        if self.config.embedding_enabled:
            fibers += EMBEDDING_FIBERS
        if self.config.constituency_enabled:
            fibers += CONSTITUENCY_FIBERS
        return fibers

    def initial_pattern(self) -> Tuple[List[str], List[Tuple[str, str]]]:
        open_areas = [LEX, SUBJ, VERB]
        open_fibers: List[Tuple[str, str]] = []
        if self.config.constituency_enabled:
            open_areas += [VP, S]
            open_fibers += list(CONSTITUENCY_FIBERS)
        return open_areas, open_fibers

    def new_brain(self) -> Brain:
        c = self.config
        specs = [AreaParams(a, c.n, c.k, c.beta) for a in self.areas()]
        brain = Brain(specs, self.fibers(), p=c.p, seed=c.seed, tie_break=c.tie_break)
        brain.clamp(LEX)
        self.clear_slate(brain)
        return brain

    def clear_slate(self, brain: Brain):
        """Winners cleared, initial inhibition pattern restored, weights kept.

        DS keeps its winners: the signature link formed just before a clause
        opens must still be active when that clause's verb is parsed.
        """
        areas, fibers = self.initial_pattern()
        keep = (DS,) if DS in brain.areas else ()
        brain.reset(areas, fibers, keep_winners=keep)

    def parse(self, sentence) -> ParseRecord:
        tokens = tokenize(sentence)
        if not tokens:
            raise StructureError("empty sentence")
        memory = segment(tokens, self.lexicon, self.config.embedding_enabled)
        return _Run(self, tokens, memory).execute()


class _Run:
    """State of one parse; keeps the main loop readable."""

    def __init__(self, parser: Parser, tokens, memory: WorkingMemory):
        self.parser = parser
        self.cfg = parser.config
        self.lex = parser.lexicon
        self.memory = memory
        self.brain = parser.new_brain()
        n = len(memory.words)
        self.entries = [self.lex.action_set(w) for w in memory.words]
        self.record = ParseRecord(
            self.cfg, list(tokens), memory, self.brain, self.lex,
            role_areas=[""] * n, assemblies=[None] * n, links=[],
            word_seconds=[0.0] * n, parse=PhaseCounters(), touch=PhaseCounters(),
            link=PhaseCounters())
        # area -> ("w", word) or ("l", link index): whose assembly it holds now
        self.holder: Dict[str, Tuple[str, int]] = {}
        self.link_of_clause: Dict[int, SignatureLink] = {}

    # bookkeeping
    def _refresh(self):
        for area, (kind, idx) in self.holder.items():
            w = self.brain.winners(area)
            if w is None:
                continue
            if kind == "w":
                self.record.assemblies[idx] = w
            else:
                self.record.links[idx].ds_assembly = w

    def _clear(self):
        self.parser.clear_slate(self.brain)
        self.holder = {a: h for a, h in self.holder.items() if a == DS}

    def _apply(self, rules, word: int):
        for action in rules:
            action.apply(self.brain)
            self.record.inhibition_log.append((self.memory.words[word], str(action), "rule"))

    def _role_area(self, word: int) -> str:
        b = self.brain
        found = [a for a in ROLE_AREAS
                 if not b.is_inhibited(a) and not b.is_inhibited((LEX, a))]
        if len(found) != 1:
            w = self.memory.words[word]
            where = "no role area" if not found else f"several role areas {found}"
            raise StructureError(f"cannot place {w!r} (word {word}): {where} open")
        return found[0]

    def _measure(self, counters: PhaseCounters, words: int, fn):
        r0, e0, t0 = self.brain.rounds, self.brain.synaptic_events, time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        counters.add(words, self.brain.rounds - r0, self.brain.synaptic_events - e0, dt)
        return dt

    def _freeze(self, moving: Sequence[str]):
        """Only ``moving`` (and the merges fed by it) may change winners.

        Every other area holding an assembly is clamped, so earlier words act
        as fixed stimuli; left free they would keep firing recurrently and
        their strengthened recurrent weights would capture the next assembly
        formed in the same area.  Open areas without winners are silenced for
        the projection so that nothing spreads into them by a detour (e.g.
        SUBJ -> S -> VP -> VERB before any verb was read).  VP moves with VERB
        or OBJ, S with SUBJ, VERB or OBJ.
        """
        b = self.brain
        free = set(moving)
        if free & {VERB, OBJ}:
            free.add(VP)
        if free & {SUBJ, VERB, OBJ}:
            free.add(S)
        frozen, silenced = [], []
        for name, area in b.areas.items():
            if name in free or area.clamped or area.inhibited:
                continue
            if len(area.winners):
                frozen.append(name)
                b.clamp(name, True)
            else:
                silenced.append(name)
                area.inhibited = True
        # a fiber between two clamped areas would only keep potentiating
        # the same pairs of assemblies, word after word
        idle = [key for key, f in b.fibers.items()
                if not f.inhibited and all(b.areas[x].clamped for x in key)]
        for key in idle:
            b.fibers[key].inhibited = True
        return frozen, silenced, idle

    def _thaw(self, state):
        frozen, silenced, idle = state
        b = self.brain
        for a in frozen:
            b.clamp(a, False)
        for a in silenced:
            b.areas[a].inhibited = False
        for key in idle:
            b.fibers[key].inhibited = False

    # phases
    def _project_word(self, i: int):
        entry = self.entries[i]
        b = self.brain
        link = self.link_of_clause.get(self.memory.clause_of[i])
        self._apply(entry.pre_rules, i)
        area = self._role_area(i)
        self.record.role_areas[i] = area
        linked = (self.cfg.embedding_enabled and self.memory.depths[i] > 0
                  and area == VERB and link is not None and link.verb is None
                  and link.ds_assembly is not None)
        if linked:
            b.set_winners(DS, link.ds_assembly)
            b.disinhibit(DS)
            b.disinhibit((DS, VERB))
        b.clear_winners(area)
        self.holder[area] = ("w", i)
        b.set_winners(LEX, entry.lex_assembly)

        def run():
            self._project(area, LEX)

        self.record.word_seconds[i] = self._measure(self.record.parse, 1, run)
        self._refresh()
        if linked:
            link.verb = i
            b.inhibit((DS, VERB))
            b.inhibit(DS)
        self._apply(entry.post_rules, i)

    def _project(self, area: str, source: str):
        """project* into ``area``: formed from ``source``, then held fixed.

        The first ``form_rounds`` rounds run with only ``source`` firing into
        ``area``, so the new assembly is picked by that input alone.  It is
        then clamped while the rest of the open subgraph fires into and out of
        it for the remaining rounds.  If the other areas took part in picking
        it, cells shared with earlier assemblies (through their strengthened
        synapses) would steer the new one onto an old one, and that overlap
        compounds clause by clause.
        """
        b = self.brain
        form = self.cfg.form_rounds
        if form:
            state = b.inhibition_state()
            held = b.areas[source].clamped
            b.set_inhibition(((source, area), ((source, area),)))
            b.clamp(source, True)
            try:
                b.project_star(form)
            finally:
                b.clamp(source, held)
                b.set_inhibition(state)
        rest = self.cfg.rounds - form
        if rest:
            frozen = self._freeze([area])
            b.clamp(area, form > 0)
            b.project_star(rest)
            b.clamp(area, False)
            self._thaw(frozen)

    def _signature(self, i: int) -> int:
        # last word up to i (same clause) holding a linkable assembly
        clause = self.memory.clause_of[i]
        for j in range(i, -1, -1):
            if self.memory.clause_of[j] == clause and self.record.role_areas[j] in SIGNATURE_AREAS:
                return j
        raise StructureError(
            f"no subject, object or prepositional noun before {self.memory.words[i + 1]!r} "
            "to attach the dependent clause to")

    def _link(self, i: int, clause_id: int):
        """Project the signature assembly into DS."""
        sig = self._signature(i)
        area = self.record.role_areas[sig]
        b = self.brain
        was_inhibited = b.is_inhibited(area)
        saved = b.winners(area)
        b.set_winners(area, self.record.assemblies[sig])
        b.clear_winners(DS)
        b.disinhibit(DS)
        b.disinhibit(area)
        b.disinhibit((DS, area))
        frozen = self._freeze([DS])
        link = SignatureLink(sig, area, clause_id)
        self.record.links.append(link)
        self.link_of_clause[clause_id] = link
        self.holder[DS] = ("l", len(self.record.links) - 1)
        self._measure(self.record.link, 0, lambda: self._project(DS, area))
        link.ds_assembly = b.winners(DS)
        self._thaw(frozen)
        if saved is not None:
            b.set_winners(area, saved)
        b.inhibit((DS, area))
        b.inhibit(DS)
        if was_inhibited:
            b.inhibit(area)

    def touch(self, prefix: Sequence[int]):
        """Re-apply each word's action set and fire exactly once."""
        b = self.brain
        b.plasticity = self.cfg.plasticity_during_touch
        try:
            for i in prefix:
                if self.record.assemblies[i] is None:
                    raise ParserInternalError(
                        f"touching {self.memory.words[i]!r} which has no assembly")
                entry = self.entries[i]
                self._apply(entry.pre_rules, i)
                area = self._role_area(i)
                if area != self.record.role_areas[i]:
                    raise ParserInternalError(
                        f"touch of {self.memory.words[i]!r} opened {area}, "
                        f"parse used {self.record.role_areas[i]}")
                b.clear_winners(area)
                self.holder[area] = ("w", i)
                b.set_winners(LEX, entry.lex_assembly)
                frozen = self._freeze([area])
                r0 = b.rounds
                self._measure(self.record.touch, 1, b.step)
                self._thaw(frozen)
                back = b.winners(area)
                ratio = back.overlap(self.record.assemblies[i]) / self.cfg.k if back else 0.0
                self.record.touch_log.append((i, b.rounds - r0, ratio))
                self._refresh()
                self._apply(entry.post_rules, i)
        finally:
            b.plasticity = True

    def _close(self, clause_id: int, before: int):
        """End an embedded clause: clear, then touch the outer clause so far."""
        outer = self.memory.clauses[self.memory.clauses[clause_id].parent]
        self._clear()
        self.record.touch_passes += 1
        self.touch([j for j in outer.words if j < before])

    def execute(self) -> ParseRecord:
        mem = self.memory
        for i in range(len(mem.words)):
            for cid in mem.closes_before.get(i, ()):
                self._close(cid, i)
            if i in mem.opens:
                self._clear()
            self._project_word(i)
            if i in mem.link_after:
                self._link(i, mem.link_after[i])
        for cid in mem.end_closes:
            self._close(cid, len(mem.words))
        self.record.assemblies = list(self.record.assemblies)
        return self.record


def parse(sentence, config: ParserConfig = ParserConfig(),
          lexicon: Optional[Lexicon] = None) -> ParseRecord:
    return Parser(config, lexicon).parse(sentence)


# -- readout ------------------------------------------------------------------

def _pick(record: ParseRecord, surface: str, area: str, react: Assembly, head: int,
          used, need: float) -> Optional[int]:
    cands = []
    for j, w in enumerate(record.memory.words):
        if j in used or w != surface or record.role_areas[j] != area:
            continue
        stored = record.assemblies[j]
        if stored is not None and stored.overlap(react) >= need:
            cands.append((abs(j - head), j > head, j))
    return min(cands)[2] if cands else None


def readout_dependencies(record: ParseRecord,
                         threshold: float = READOUT_THRESHOLD) -> DependencyTree:
    """Recover the dependency tree from the weights, rooted in the main verb."""
    mem = record.memory
    brain, lex = record.brain, record.lexicon
    need = threshold * record.config.k
    root = mem.clauses[0].verb
    if root is None:
        raise ReadoutError("main clause has no verb")
    used = {root}
    edges: List[Edge] = []
    queue = [root]
    while queue:
        head = queue.pop(0)
        area = record.role_areas[head]
        asm = record.assemblies[head]
        for dst in READOUT_GRAPH.get(area, ()):
            if dst not in brain.areas:
                continue
            react = brain.fire_into(area, asm.neurons, dst)
            if react is None:
                continue
            if dst == DS:
                dep = _follow_link(record, react, head, used, need)
                label = DS
            else:
                word = lex.identify(brain.fire_into(dst, react.neurons, LEX).neurons, threshold)
                if word is None:
                    continue
                dep = _pick(record, word, dst, react, head, used, need)
                label = dst
            if dep is None:
                continue
            used.add(dep)
            edges.append(Edge(head, dep, label))
            queue.append(dep)
    missing = [f"{mem.words[j]}@{j}" for j in range(len(mem.words)) if j not in used]
    if missing:
        raise ReadoutError(f"disconnected word(s): {', '.join(missing)}")
    tree = DependencyTree(list(mem.words), edges, root)
    tree.validate()
    return tree


def _follow_link(record: ParseRecord, ds_react: Assembly, head: int, used, need) -> Optional[int]:
    if not any(l.ds_assembly is not None and l.ds_assembly.overlap(ds_react) >= need
               for l in record.links):
        return None
    brain = record.brain
    v = brain.fire_into(DS, ds_react.neurons, VERB)
    if v is None:
        return None
    word = record.lexicon.identify(brain.fire_into(VERB, v.neurons, LEX).neurons)
    if word is None:
        return None
    return _pick(record, word, VERB, v, head, used, need)


def _subtree(tree: DependencyTree, node: int, labels) -> List[int]:
    out = [node]
    for e in tree.children(node):
        if e.label in labels:
            out += _subtree(tree, e.dep, _MODIFIERS)
    return out


def readout_constituency(record: ParseRecord, threshold: float = READOUT_THRESHOLD,
                         dependencies: Optional[DependencyTree] = None) -> ConstituencyTree:
    """(S (Subj ..) (VP (Verb ..) (Obj ..))) read from the final S assembly."""
    if not record.config.constituency_enabled:
        raise ReadoutError("parse ran without constituency areas")
    brain, lex = record.brain, record.lexicon
    need = threshold * record.config.k
    s = brain.winners(S)
    if s is None:
        raise ReadoutError("S is empty: no complete clause was parsed")
    main = record.memory.clauses[0]
    verb = main.verb
    if verb is None:
        raise ReadoutError("main clause has no verb")
    used: set = set()

    def head_in(src_area, src, dst) -> Optional[int]:
        react = brain.fire_into(src_area, src.neurons, dst)
        if react is None:
            return None
        word = lex.identify(brain.fire_into(dst, react.neurons, LEX).neurons, threshold)
        if word is None:
            return None
        return _pick(record, word, dst, react, verb, used, need)

    subj = head_in(S, s, SUBJ)
    vp = brain.fire_into(S, s.neurons, VP)
    if subj is None or vp is None:
        raise ReadoutError("S does not reach a subject and a verb phrase")
    v = head_in(VP, vp, VERB)
    if v is None:
        raise ReadoutError("VP does not reach a verb")
    obj = head_in(VP, vp, OBJ)
    dep = dependencies if dependencies is not None else readout_dependencies(record, threshold)
    words = record.memory.words
    tree = ConstituencyTree(
        list(words),
        tuple(_subtree(dep, subj, _MODIFIERS)),
        tuple(_subtree(dep, v, (ADV, PREP_P))),
        tuple(_subtree(dep, obj, _MODIFIERS)) if obj is not None else None)
    return tree
