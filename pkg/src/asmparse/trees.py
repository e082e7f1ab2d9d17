"""Dependency and constituency trees recovered from a parse, with JSON/DOT export."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    head: int
    dep: int
    label: str


@dataclass
class DependencyTree:
    """Words are addressed by their position among the non-punctuation tokens."""

    words: List[str]
    edges: List[Edge] = field(default_factory=list)
    root: int = -1

    def edge_set(self) -> FrozenSet[Tuple[int, int, str]]:
        return frozenset((e.head, e.dep, e.label) for e in self.edges)

    def __eq__(self, other):
        if not isinstance(other, DependencyTree):
            return NotImplemented
        return (self.words == other.words and self.root == other.root
                and self.edge_set() == other.edge_set())

    def head_of(self, dep: int) -> Optional[Edge]:
        for e in self.edges:
            if e.dep == dep:
                return e
        return None

    def children(self, head: int) -> List[Edge]:
        return sorted((e for e in self.edges if e.head == head), key=lambda e: e.dep)

    def validate(self):
        """Single root, every other word has exactly one head, all reachable."""
        n = len(self.words)
        if not 0 <= self.root < n:
            raise TreeError(f"root {self.root} out of range")
        heads: Dict[int, int] = {}
        for e in self.edges:
            if not (0 <= e.head < n and 0 <= e.dep < n):
                raise TreeError(f"edge {e} out of range")
            if e.dep in heads:
                raise TreeError(f"word {e.dep} ({self.words[e.dep]}) has two heads")
            heads[e.dep] = e.head
        if self.root in heads:
            raise TreeError("root has a head")
        seen, todo = {self.root}, [self.root]
        while todo:
            h = todo.pop()
            for e in self.children(h):
                if e.dep not in seen:
                    seen.add(e.dep)
                    todo.append(e.dep)
        missing = [self.words[i] for i in range(n) if i not in seen]
        if missing:
            raise TreeError(f"words not connected to the root: {missing}")

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": i, "word": w} for i, w in enumerate(self.words)],
            "root": self.root,
            "edges": [{"head": e.head, "dep": e.dep, "label": e.label}
                      for e in sorted(self.edges, key=lambda e: (e.head, e.dep))],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DependencyTree":
        words = [n["word"] for n in sorted(data["nodes"], key=lambda n: n["id"])]
        edges = [Edge(e["head"], e["dep"], e["label"]) for e in data["edges"]]
        return cls(words, edges, data["root"])

    def to_dot(self) -> str:
        lines = ["digraph dependencies {"]
        for i, w in enumerate(self.words):
            shape = ', shape=box' if i == self.root else ''
            lines.append(f'  n{i} [label="{w}"{shape}];')
        for e in sorted(self.edges, key=lambda e: (e.head, e.dep)):
            lines.append(f'  n{e.head} -> n{e.dep} [label="{e.label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def describe(self) -> List[str]:
        return [f"{self.words[e.head]} -{e.label}-> {self.words[e.dep]}"
                for e in sorted(self.edges, key=lambda e: (e.head, e.dep))]


@dataclass
class ConstituencyTree:
    """(S (Subj ...) (VP (Verb ...) (Obj ...))); spans are word positions."""

    words: List[str]
    subject: Tuple[int, ...]
    verb: Tuple[int, ...]
    obj: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        self.subject = tuple(sorted(self.subject))
        self.verb = tuple(sorted(self.verb))
        if self.obj is not None:
            self.obj = tuple(sorted(self.obj))

    def validate(self, clause: Optional[Sequence[int]] = None):
        spans = [self.subject, self.verb] + ([self.obj] if self.obj is not None else [])
        if any(not s for s in spans):
            raise TreeError("empty constituent")
        flat = [i for s in spans for i in s]
        if len(flat) != len(set(flat)):
            raise TreeError("constituents overlap")
        expected = set(range(len(self.words))) if clause is None else set(clause)
        if set(flat) != expected:
            raise TreeError("constituents do not partition the clause")

    def _span(self, idx) -> str:
        return " ".join(self.words[i] for i in idx)

    def __str__(self):
        vp = f"(Verb {self._span(self.verb)})"
        if self.obj is not None:
            vp += f" (Obj {self._span(self.obj)})"
        return f"(S (Subj {self._span(self.subject)}) (VP {vp}))"

    def to_json(self) -> dict:
        vp = [{"label": "Verb", "span": list(self.verb)}]
        if self.obj is not None:
            vp.append({"label": "Obj", "span": list(self.obj)})
        return {
            "words": list(self.words),
            "label": "S",
            "children": [
                {"label": "Subj", "span": list(self.subject)},
                {"label": "VP", "children": vp},
            ],
            "bracketed": str(self),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConstituencyTree":
        subj, vp = data["children"]
        spans = {c["label"]: tuple(c["span"]) for c in vp["children"]}
        return cls(list(data["words"]), tuple(subj["span"]), spans["Verb"], spans.get("Obj"))

    def to_dot(self) -> str:
        lines = ["digraph constituency {", '  S [label="S"];', '  Subj [label="Subj"];',
                 '  VP [label="VP"];', '  Verb [label="Verb"];', "  S -> Subj;", "  S -> VP;",
                 "  VP -> Verb;"]
        leaves = [("Subj", self.subject), ("Verb", self.verb)]
        if self.obj is not None:
            lines += ['  Obj [label="Obj"];', "  VP -> Obj;"]
            leaves.append(("Obj", self.obj))
        for name, span in leaves:
            for i in span:
                lines.append(f'  w{i} [label="{self.words[i]}", shape=plaintext];')
                lines.append(f"  {name} -> w{i};")
        lines.append("}")
        return "\n".join(lines) + "\n"
