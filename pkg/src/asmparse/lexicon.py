"""Word store: fixed LEX assemblies plus per-word action sets.

A lexicon file is JSON.  Rule templates keyed by part of speech keep the file
short; a word entry may override either rule list::

    {
      "templates": {"det": {"pre_rules": [...], "post_rules": [...]}},
      "words": [{"surface": "the", "pos": "det"}, ...]
    }

A bare list of fully spelled-out entries is accepted as well, which is also
what :func:`save_lexicon` writes.  Rules look like
``{"op": "disinhibit_fiber", "a": "LEX", "b": "VERB"}`` or
``{"op": "inhibit_area", "area": "SUBJ"}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from .brain import Assembly, DEFAULT_K, DEFAULT_N


class RoleArea(str, Enum):
    LEX = "LEX"
    SUBJ = "SUBJ"
    VERB = "VERB"
    OBJ = "OBJ"
    DET = "DET"
    ADJ = "ADJ"
    ADV = "ADV"
    PREP = "PREP"
    PREP_P = "PREP_P"
    DS = "DS"
    VP = "VP"
    S = "S"


LEX = RoleArea.LEX.value
SUBJ, VERB, OBJ = "SUBJ", "VERB", "OBJ"
DET, ADJ, ADV = "DET", "ADJ", "ADV"
PREP, PREP_P = "PREP", "PREP_P"
DS, VP, S = "DS", "VP", "S"

DEPENDENCY_AREAS = (LEX, SUBJ, VERB, OBJ, DET, ADJ, ADV, PREP, PREP_P)

DEPENDENCY_FIBERS = (
    (LEX, SUBJ), (LEX, OBJ), (LEX, VERB), (LEX, DET), (LEX, ADJ), (LEX, ADV),
    (LEX, PREP), (LEX, PREP_P),
    (DET, SUBJ), (DET, OBJ), (DET, PREP_P),
    (ADJ, SUBJ), (ADJ, OBJ), (ADJ, PREP_P),
    (VERB, SUBJ), (VERB, OBJ), (VERB, ADV), (VERB, PREP_P),
    (PREP, PREP_P),
)
EMBEDDING_FIBERS = ((DS, SUBJ), (DS, OBJ), (DS, PREP_P), (DS, VERB))
CONSTITUENCY_FIBERS = ((VERB, VP), (OBJ, VP), (SUBJ, S), (VP, S))

ALL_FIBERS: FrozenSet[FrozenSet[str]] = frozenset(
    frozenset(f) for f in DEPENDENCY_FIBERS + EMBEDDING_FIBERS + CONSTITUENCY_FIBERS)

NONE = "none"
OPENS_CLAUSE = "opens_dependent_clause"
VERB_POS = ("transitive-verb", "intransitive-verb")

_OPS = ("disinhibit_area", "inhibit_area", "disinhibit_fiber", "inhibit_fiber")


class LexiconError(ValueError):
    pass


class ReadoutError(RuntimeError):
    """A readout could not identify a word unambiguously."""


class OutOfVocabulary(KeyError):
    def __init__(self, word: str):
        super().__init__(word)
        self.word = word

    def __str__(self):
        return f"out of vocabulary: {self.word!r}"


@dataclass(frozen=True)
class Action:
    kind: str
    target: Tuple[str, ...]

    @property
    def on_fiber(self) -> bool:
        return self.kind.endswith("fiber")

    @property
    def opens(self) -> bool:
        return self.kind.startswith("disinhibit")

    def apply(self, brain):
        target = self.target if self.on_fiber else self.target[0]
        if self.opens:
            brain.disinhibit(target)
        else:
            brain.inhibit(target)

    def to_json(self) -> dict:
        if self.on_fiber:
            return {"op": self.kind, "a": self.target[0], "b": self.target[1]}
        return {"op": self.kind, "area": self.target[0]}

    @classmethod
    def from_json(cls, rule: dict, where: str = "") -> "Action":
        op = rule.get("op")
        if op not in _OPS:
            raise LexiconError(f"{where}: unknown rule op {op!r}")
        if op.endswith("fiber"):
            target = (rule.get("a"), rule.get("b"))
        else:
            target = (rule.get("area"),)
        for name in target:
            if name not in RoleArea.__members__:
                raise LexiconError(f"{where}: unknown area {name!r}")
        if op.endswith("fiber") and frozenset(target) not in ALL_FIBERS:
            raise LexiconError(f"{where}: no fiber between {target[0]} and {target[1]}")
        return cls(op, target)

    def __str__(self):
        return f"{self.kind}({','.join(self.target)})"


@dataclass(frozen=True)
class WordEntry:
    surface: str
    pos: str
    pre_rules: Tuple[Action, ...]
    post_rules: Tuple[Action, ...]
    clause_marker: str = NONE
    lex_assembly: Optional[Assembly] = field(default=None, compare=False)

    @property
    def is_verb(self) -> bool:
        return self.pos in VERB_POS

    @property
    def opens_clause(self) -> bool:
        return self.clause_marker == OPENS_CLAUSE

    def to_json(self) -> dict:
        return {
            "surface": self.surface,
            "pos": self.pos,
            "clause_marker": self.clause_marker,
            "pre_rules": [a.to_json() for a in self.pre_rules],
            "post_rules": [a.to_json() for a in self.post_rules],
        }


class Lexicon:
    """Immutable map surface -> WordEntry with LEX assemblies attached."""

    def __init__(self, entries: Iterable[WordEntry], n: int = DEFAULT_N,
                 k: int = DEFAULT_K, seed: int = 0):
        self.n, self.k, self.seed = n, k, seed
        self.entries: Dict[str, WordEntry] = {}
        for entry in entries:
            if entry.surface in self.entries:
                raise LexiconError(f"duplicate surface form {entry.surface!r}")
            self.entries[entry.surface] = entry
        if not self.entries:
            raise LexiconError("lexicon is empty")
        self._assign_assemblies()

    def _assign_assemblies(self):
        # Disjoint random k-subsets of LEX while they fit.  Even a few shared
        # cells matter: a role assembly is selected for strong input from its
        # word's cells, so shared cells bias a later word towards it.
        # Beyond capacity, random subsets overlapping any earlier word by less
        # than k/2 are drawn instead.
        words = list(self.entries.items())
        perm = np.random.default_rng([self.seed, 0x1E8]).permutation(self.n)
        disjoint = len(words) * self.k <= self.n
        taken: List[set] = []
        for idx, (surface, entry) in enumerate(words):
            if disjoint:
                cells = set(int(i) for i in perm[idx * self.k:(idx + 1) * self.k])
            else:
                cells = self._draw(idx, taken)
            taken.append(cells)
            self.entries[surface] = WordEntry(
                entry.surface, entry.pos, entry.pre_rules, entry.post_rules,
                entry.clause_marker, Assembly.of(LEX, cells))

    def _draw(self, idx: int, taken: List[set]) -> set:
        for attempt in range(101):
            rng = np.random.default_rng([self.seed, 0x1E8, idx, attempt])
            cells = set(int(i) for i in rng.choice(self.n, self.k, replace=False))
            if all(len(cells & other) < self.k / 2 for other in taken):
                return cells
        raise LexiconError("LEX too small to hold distinct assemblies")

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.values())

    def action_set(self, word: str) -> WordEntry:
        try:
            return self.entries[word]
        except KeyError:
            raise OutOfVocabulary(word) from None

    def identify(self, neurons: Iterable[int], threshold: float = 0.75) -> Optional[str]:
        """Word whose LEX assembly best overlaps ``neurons`` (None below threshold)."""
        cells = set(int(i) for i in neurons)
        need = threshold * self.k
        hits = [(len(cells.intersection(e.lex_assembly.neurons)), s)
                for s, e in self.entries.items()]
        above = [(o, s) for o, s in hits if o >= need]
        if not above:
            return None
        if len(above) > 1:
            raise ReadoutError(f"ambiguous LEX readout: {sorted(s for _, s in above)}")
        return above[0][1]

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries.values()]


def _parse_entries(data) -> List[WordEntry]:
    if isinstance(data, list):
        templates, words = {}, data
    elif isinstance(data, dict) and "words" in data:
        templates, words = data.get("templates", {}), data["words"]
    else:
        raise LexiconError("lexicon must be a list of entries or an object with 'words'")
    entries = []
    for raw in words:
        surface = raw.get("surface")
        if not surface:
            raise LexiconError(f"entry without surface: {raw!r}")
        pos = raw.get("pos")
        template = templates.get(pos, {})
        where = f"entry {surface!r}"
        pre = raw.get("pre_rules", template.get("pre_rules"))
        post = raw.get("post_rules", template.get("post_rules"))
        if pre is None or post is None:
            raise LexiconError(f"{where}: no rules and no template for pos {pos!r}")
        marker = raw.get("clause_marker", template.get("clause_marker", NONE))
        if marker not in (NONE, OPENS_CLAUSE):
            raise LexiconError(f"{where}: bad clause_marker {marker!r}")
        entries.append(WordEntry(
            surface, pos,
            tuple(Action.from_json(r, where) for r in pre),
            tuple(Action.from_json(r, where) for r in post),
            marker))
    return entries


def lexicon_from_json(data, n: int = DEFAULT_N, k: int = DEFAULT_K, seed: int = 0) -> Lexicon:
    return Lexicon(_parse_entries(data), n=n, k=k, seed=seed)


def load_lexicon(path=None, n: int = DEFAULT_N, k: int = DEFAULT_K, seed: int = 0) -> Lexicon:
    """Load and validate a lexicon; ``path=None`` loads the shipped English one."""
    if path is None:
        text = resources.files("asmparse.data").joinpath("lexicon.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LexiconError(f"cannot parse lexicon: {exc}") from exc
    return lexicon_from_json(data, n=n, k=k, seed=seed)


def save_lexicon(lexicon: Lexicon, path):
    with open(path, "w") as fh:
        json.dump(lexicon.to_json(), fh, indent=1)
