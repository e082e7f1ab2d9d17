"""Fallback automata (FBA) and weak-FBAs.

A tape cell carries a symbol and a type: ``"f"`` (fresh), ``"s"`` (seen) or a
state of the machine (a mark).  A rule ``(sym, type, state) -> (next, action)``
has action ``"s"``, ``"mark"`` or ``"fallback"``.  A fallback returns the head
to the rightmost marked cell left of the head; a machine whose tape has no
such cell cannot take the step.

States may be any hashable value except the strings ``"f"`` and ``"s"``,
which are reserved for the two plain cell types.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import (Dict, FrozenSet, Hashable, Iterable, Iterator, List, Mapping,
                    Optional, Sequence, Set, Tuple)

FRESH, SEEN = "f", "s"
S, MARK, FALLBACK = "s", "mark", "fallback"
ACTIONS = (S, MARK, FALLBACK)
MARK_MODES = ("result", "current")

State = Hashable


class FBAError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    sym: Hashable
    type: Hashable      # FRESH, SEEN or a state
    state: State
    next: State
    action: str

    @property
    def lhs(self) -> Tuple[Hashable, Hashable, State]:
        return (self.sym, self.type, self.state)

    @property
    def on_fresh(self) -> bool:
        return self.type == FRESH

    @property
    def on_seen(self) -> bool:
        return self.type == SEEN

    @property
    def on_mark(self) -> bool:
        return self.type not in (FRESH, SEEN)


@dataclass(frozen=True)
class TapeCell:
    symbol: Hashable
    type: Hashable = FRESH


@dataclass(frozen=True)
class Configuration:
    """``position`` is 1-based; ``len(tape) + 1`` means past the end."""

    tape: Tuple[TapeCell, ...]
    state: State
    position: int

    @classmethod
    def initial(cls, word: Sequence, state: State) -> "Configuration":
        return cls(tuple(TapeCell(a) for a in word), state, 1)

    @property
    def at_end(self) -> bool:
        return self.position == len(self.tape) + 1

    def marked_positions(self) -> List[int]:
        return [i + 1 for i, c in enumerate(self.tape) if c.type not in (FRESH, SEEN)]

    def show(self) -> str:
        cells = []
        for i, c in enumerate(self.tape, start=1):
            t = c.type if c.type in (FRESH, SEEN) else f"[{_label(c.type)}]"
            cell = f"{c.symbol}:{t}"
            cells.append(f">{cell}" if i == self.position else cell)
        if self.at_end:
            cells.append(">|")
        return f"{_label(self.state)}  " + " ".join(cells)


def _label(state) -> str:
    if isinstance(state, frozenset):
        return "{" + ",".join(sorted(_label(q) for q in state)) + "}"
    if isinstance(state, tuple):
        return "(" + ",".join(_label(q) for q in state) + ")"
    return str(state)


@dataclass(frozen=True)
class FBA:
    """A fallback automaton.

    ``mark_mode`` says which state a mark stores: ``"result"`` (default) the
    state the marking rule moves to, ``"current"`` the state it was taken in.
    """

    sigma: FrozenSet[Hashable]
    states: FrozenSet[State]
    initial: FrozenSet[State]
    accepting: FrozenSet[State]
    rules: Tuple[Rule, ...]
    mark_mode: str = "result"
    _index: Dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("sigma", "states", "initial", "accepting"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        object.__setattr__(self, "rules", tuple(dict.fromkeys(self.rules)))
        self.validate()
        index: Dict[Tuple, List[Rule]] = {}
        for r in self.rules:
            index.setdefault(r.lhs, []).append(r)
        object.__setattr__(self, "_index", index)

    def validate(self):
        if not self.sigma:
            raise FBAError("alphabet is empty")
        if self.mark_mode not in MARK_MODES:
            raise FBAError(f"mark_mode must be one of {MARK_MODES}")
        for q in self.states:
            if q in (FRESH, SEEN):
                raise FBAError(f"{q!r} is reserved for a cell type and cannot name a state")
        if not self.initial <= self.states:
            raise FBAError("initial states must be states")
        if not self.accepting <= self.states:
            raise FBAError("accepting states must be states")
        for r in self.rules:
            if r.sym not in self.sigma:
                raise FBAError(f"{r}: symbol not in the alphabet")
            if r.state not in self.states or r.next not in self.states:
                raise FBAError(f"{r}: unknown state")
            if r.action not in ACTIONS:
                raise FBAError(f"{r}: unknown action {r.action!r}")
            if r.type == SEEN and r.action != S:
                raise FBAError(f"{r}: a seen cell can only be passed with action s")
            if r.on_mark:
                if r.type not in self.states:
                    raise FBAError(f"{r}: type must be 'f', 's' or a state")
                if r.action == MARK:
                    raise FBAError(f"{r}: a marked cell cannot be marked again")

    def rules_for(self, sym, typ, state) -> List[Rule]:
        return self._index.get((sym, typ, state), [])

    def mark_of(self, rule: Rule) -> State:
        return rule.next if self.mark_mode == "result" else rule.state

    # -- structure ------------------------------------------------------
    def is_weak(self) -> bool:
        """Seen cells never change the state and marked cells never fall back."""
        for r in self.rules:
            if r.on_seen and r.next != r.state:
                return False
            if r.on_mark and r.action != S:
                return False
        return True

    def has_marks(self) -> bool:
        return any(r.action in (MARK, FALLBACK) for r in self.rules)

    def is_s_deterministic(self) -> bool:
        return all(len(v) <= 1 for (sym, typ, q), v in self._index.items() if typ == SEEN)

    def s_step(self, state: State, sym) -> Optional[State]:
        """The unique s-transition (requires an s-deterministic machine)."""
        rs = self.rules_for(sym, SEEN, state)
        if len(rs) > 1:
            raise FBAError(f"several s-rules for ({sym!r}, s, {_label(state)})")
        return rs[0].next if rs else None

    def underlying_nfa(self) -> "NFA":
        """The NFA given by the rules on fresh cells with action s."""
        delta: Dict[Tuple, Set] = {}
        for r in self.rules:
            if r.on_fresh and r.action == S:
                delta.setdefault((r.state, r.sym), set()).add(r.next)
        return NFA(self.sigma, self.states, self.initial, self.accepting, delta)

    # -- runs -----------------------------------------------------------
    def successors(self, config: Configuration) -> Set[Configuration]:
        return {c for _, c in self._moves(config)}

    def _moves(self, config: Configuration) -> Iterator[Tuple[Rule, Configuration]]:
        i = config.position
        if i > len(config.tape):
            return
        cell = config.tape[i - 1]
        for rule in self.rules_for(cell.symbol, cell.type, config.state):
            if rule.action == MARK:
                new_type = self.mark_of(rule)
            else:
                new_type = SEEN
            tape = config.tape[:i - 1] + (TapeCell(cell.symbol, new_type),) + config.tape[i:]
            if rule.action == FALLBACK:
                j = _last_mark(tape, i - 1)
                if j is None:
                    continue
            else:
                j = i + 1
            yield rule, Configuration(tape, rule.next, j)

    def accepts(self, word: Sequence, witness: bool = False, consume: bool = True):
        """Decide membership by exhaustive search of the configuration graph.

        With ``consume`` (default) a run must end past the last symbol in an
        accepting state; otherwise reaching an accepting state anywhere is
        enough.  With ``witness`` the result is ``(accepted, run)`` where run
        is the list of configurations of an accepting run (or None).
        """
        word = tuple(word)
        for a in word:
            if a not in self.sigma:
                raise FBAError(f"symbol {a!r} not in the alphabet")
        starts = [Configuration.initial(word, q) for q in sorted(self.initial, key=_label)]
        parent: Dict[Configuration, Optional[Configuration]] = {c: None for c in starts}
        queue = deque(starts)
        found = None
        while queue:
            c = queue.popleft()
            if c.state in self.accepting and (c.at_end or not consume):
                found = c
                break
            for _, nxt in self._moves(c):
                if nxt not in parent:
                    parent[nxt] = c
                    queue.append(nxt)
        if not witness:
            return found is not None
        if found is None:
            return False, None
        run = []
        while found is not None:
            run.append(found)
            found = parent[found]
        return True, run[::-1]

    def language(self, max_len: int, alphabet: Optional[Sequence] = None) -> Set[Tuple]:
        """All accepted words up to ``max_len`` (brute force)."""
        letters = sorted(self.sigma, key=str) if alphabet is None else list(alphabet)
        return {w for n in range(max_len + 1)
                for w in itertools.product(letters, repeat=n) if self.accepts(w)}

    # -- serialization --------------------------------------------------
    def relabeled(self) -> Tuple["FBA", Dict[State, str]]:
        """Same machine with states renamed q0, q1, ... (stable order)."""
        names = {q: f"q{i}" for i, q in enumerate(sorted(self.states, key=_label))}
        return self.map_states(names), names

    def map_states(self, names: Mapping[State, State]) -> "FBA":
        def t(typ):
            return typ if typ in (FRESH, SEEN) else names[typ]
        return FBA(self.sigma, {names[q] for q in self.states}, {names[q] for q in self.initial},
                   {names[q] for q in self.accepting},
                   tuple(Rule(r.sym, t(r.type), names[r.state], names[r.next], r.action)
                         for r in self.rules), self.mark_mode)

    def to_json(self) -> dict:
        m = self
        if not all(isinstance(q, str) for q in self.states):
            m, _ = self.relabeled()
        def key(r):
            return (str(r.sym), str(r.type), str(r.state), str(r.next), r.action)
        out = {
            "sigma": sorted(m.sigma, key=str),
            "states": sorted(m.states),
            "initial": sorted(m.initial),
            "accepting": sorted(m.accepting),
            "rules": [{"sym": r.sym, "type": r.type, "state": r.state, "next": r.next,
                       "action": r.action} for r in sorted(m.rules, key=key)],
        }
        if m.mark_mode != "result":
            out["mark_mode"] = m.mark_mode
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "FBA":
        try:
            rules = tuple(Rule(r["sym"], r["type"], r["state"], r["next"], r["action"])
                          for r in data["rules"])
            return cls(frozenset(data["sigma"]), frozenset(data["states"]),
                       frozenset(data["initial"]), frozenset(data["accepting"]), rules,
                       data.get("mark_mode", "result"))
        except (KeyError, TypeError) as exc:
            raise FBAError(f"malformed FBA description: {exc!r}") from exc

    def describe(self) -> str:
        lines = [f"sigma={sorted(map(str, self.sigma))} states={len(self.states)} "
                 f"initial={sorted(map(_label, self.initial))} "
                 f"accepting={sorted(map(_label, self.accepting))}"]
        for r in self.rules:
            lines.append(f"  ({r.sym}, {_label(r.type)}, {_label(r.state)}) -> "
                         f"({_label(r.next)}, {r.action})")
        return "\n".join(lines)


def _last_mark(tape: Sequence[TapeCell], before: int) -> Optional[int]:
    """Largest 1-based marked position strictly left of 1-based ``before + 1``."""
    for j in range(before, 0, -1):
        if tape[j - 1].type not in (FRESH, SEEN):
            return j
    return None


def load_fba(path) -> FBA:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FBAError(f"cannot parse {path}: {exc}") from exc
    return FBA.from_json(data)


def save_fba(fba: FBA, path):
    with open(path, "w") as fh:
        json.dump(fba.to_json(), fh, indent=1, ensure_ascii=False)


def split_word(fba_sigma: Iterable, text: str) -> Tuple:
    """Turn command-line text into symbols.

    Whitespace-separated tokens if any symbol is longer than one character,
    otherwise one symbol per character (whitespace ignored).
    """
    sigma = set(fba_sigma)
    if all(isinstance(a, str) and len(a) == 1 for a in sigma):
        return tuple(ch for ch in text if not ch.isspace())
    return tuple(text.split())


# -- finite automata ---------------------------------------------------------

@dataclass(frozen=True)
class NFA:
    sigma: FrozenSet[Hashable]
    states: FrozenSet[State]
    initial: FrozenSet[State]
    accepting: FrozenSet[State]
    delta: Mapping[Tuple[State, Hashable], FrozenSet[State]]

    def __post_init__(self):
        for name in ("sigma", "states", "initial", "accepting"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        object.__setattr__(self, "delta", {k: frozenset(v) for k, v in self.delta.items() if v})
        if not self.initial <= self.states or not self.accepting <= self.states:
            raise FBAError("NFA initial/accepting states must be states")
        for (q, a), targets in self.delta.items():
            if q not in self.states or not targets <= self.states:
                raise FBAError(f"NFA transition from {q!r} uses unknown states")
            if a not in self.sigma:
                raise FBAError(f"NFA transition on {a!r} outside the alphabet")

    def step(self, q: State, a) -> FrozenSet[State]:
        return self.delta.get((q, a), frozenset())

    def accepts(self, word: Sequence) -> bool:
        current = set(self.initial)
        for a in word:
            current = {r for q in current for r in self.step(q, a)}
            if not current:
                return False
        return bool(current & self.accepting)

    @classmethod
    def universal(cls, sigma: Iterable) -> "NFA":
        """One accepting state looping on every symbol (Sigma*)."""
        sigma = frozenset(sigma)
        return cls(sigma, {"r"}, {"r"}, {"r"}, {("r", a): {"r"} for a in sigma})

    def to_json(self) -> dict:
        names = {q: (q if isinstance(q, str) else f"r{i}")
                 for i, q in enumerate(sorted(self.states, key=_label))}
        return {
            "sigma": sorted(self.sigma, key=str),
            "states": sorted(names.values()),
            "initial": sorted(names[q] for q in self.initial),
            "accepting": sorted(names[q] for q in self.accepting),
            "delta": [{"state": names[q], "sym": a, "next": names[r]}
                      for (q, a), rs in sorted(self.delta.items(), key=lambda kv: (_label(kv[0][0]), str(kv[0][1])))
                      for r in sorted(rs, key=_label)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "NFA":
        try:
            delta: Dict[Tuple, Set] = {}
            for t in data["delta"]:
                delta.setdefault((t["state"], t["sym"]), set()).add(t["next"])
            return cls(frozenset(data["sigma"]), frozenset(data["states"]),
                       frozenset(data["initial"]), frozenset(data["accepting"]), delta)
        except (KeyError, TypeError) as exc:
            raise FBAError(f"malformed NFA description: {exc!r}") from exc


# -- the alpha^n x beta^n example -------------------------------------------

ALPHA, BETA = "α", "β"


def anbn_fba() -> FBA:
    """FBA for { α^n x β^n : x in {0,1}* }: mark every α, fall back on every β.

    The first α is marked with ``bottom``, later ones with ``more``, so that
    matching the bottom α tells the machine no α is left unmatched.

    ``start``/``x0``: no α read yet (accepting: n = 0).  ``bottom``/``more``:
    reading α's.  ``x``: reading the middle part.  ``back``: a β was read and
    the head is going back to the last unmatched α.  ``rescan``: an α was
    matched and more are open; ``done``: all α's are matched.
    """
    sigma = {ALPHA, BETA, "0", "1"}
    rules = [
        Rule(ALPHA, FRESH, "start", "bottom", MARK),
        Rule(ALPHA, FRESH, "bottom", "more", MARK),
        Rule(ALPHA, FRESH, "more", "more", MARK),
    ]
    for d in "01":
        rules += [Rule(d, FRESH, "start", "x0", S), Rule(d, FRESH, "x0", "x0", S),
                  Rule(d, FRESH, "bottom", "x", S), Rule(d, FRESH, "more", "x", S),
                  Rule(d, FRESH, "x", "x", S)]
    for q in ("bottom", "more", "x", "rescan"):
        rules.append(Rule(BETA, FRESH, q, "back", FALLBACK))
    rules += [Rule(ALPHA, "bottom", "back", "done", S),
              Rule(ALPHA, "more", "back", "rescan", S)]
    for a in sigma:
        rules += [Rule(a, SEEN, "rescan", "rescan", S), Rule(a, SEEN, "done", "done", S)]
    states = {"start", "x0", "bottom", "more", "x", "back", "rescan", "done"}
    return FBA(frozenset(sigma), frozenset(states), frozenset({"start"}),
               frozenset({"start", "x0", "done"}), tuple(rules))
