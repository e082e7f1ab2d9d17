"""Machinery relating fallback automata to context-free languages.

* :func:`s_determinize` makes a machine deterministic on seen cells (subset
  construction; states become frozensets of original states).
* :func:`fba_to_pda` compiles an s-deterministic FBA into a pushdown automaton
  whose stack holds ``(symbol, mark, vector)`` triples; the vector records,
  for every state, where the s-transitions take it across the seen cells
  after that mark.
* :func:`pda_accepts` decides acceptance for compiled and explicit PDAs.
* :func:`cs_weak_fba` builds a weak-FBA for ``R ∩ h(D_k)`` (a language in
  Chomsky–Schützenberger form).
* :func:`equivalence_sweep` and :func:`check_trace_invariants` check the
  FBA/PDA correspondence on concrete machines and runs.
"""

from __future__ import annotations

import itertools
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import (Dict, FrozenSet, Hashable, Iterable, Iterator, List, Mapping,
                    Optional, Sequence, Set, Tuple)

from .fba import (FALLBACK, FRESH, MARK, NFA, S, SEEN, FBA, FBAError, Configuration,
                  Rule, State, _label)


class Inconclusive(RuntimeError):
    """The PDA search hit a bound before it could reject."""


# -- mark normalization and s-determinization -------------------------------

def _tag(current: State, result: State) -> Tuple:
    return ("mark", current, result)


def normalize_marks(fba: FBA) -> FBA:
    """Equivalent machine whose marks store the result state.

    For ``mark_mode="current"`` every marking rule ``(a,f,q) -> (n,mark)``
    moves to a tagged copy ``("mark", q, n)`` of ``n``.  The copy behaves
    exactly like ``n``, and since the mark now stores the tag it still knows
    ``q``.
    """
    if fba.mark_mode == "result":
        return fba
    tags = sorted({_tag(r.state, r.next) for r in fba.rules if r.action == MARK}, key=_label)
    aliases: Dict[State, List[State]] = {}
    for t in tags:
        aliases.setdefault(t[2], []).append(t)
    by_mark: Dict[State, List[State]] = {}
    for t in tags:
        by_mark.setdefault(t[1], []).append(t)

    def sources(q):
        return [q] + aliases.get(q, [])

    rules = []
    for r in fba.rules:
        if r.action == MARK:
            for src in sources(r.state):
                rules.append(Rule(r.sym, r.type, src, _tag(r.state, r.next), MARK))
            continue
        types = [r.type] if r.type in (FRESH, SEEN) else by_mark.get(r.type, [])
        for typ in types:
            for src in sources(r.state):
                rules.append(Rule(r.sym, typ, src, r.next, r.action))
    states = set(fba.states) | set(tags)
    accepting = set(fba.accepting) | {t for t in tags if t[2] in fba.accepting}
    return FBA(fba.sigma, states, fba.initial, accepting, tuple(rules), "result")


def s_determinize(fba: FBA) -> FBA:
    """Equivalent FBA with exactly one rule per (symbol, s, state).

    States are frozensets of the original states.  Rules on fresh and on
    marked cells apply the original rules of any member and lead to
    singletons; marks are therefore singletons too.  On seen cells the set
    moves to the set of all s-successors, the empty set acting as a dead
    state, so the s-transition is total.  A set accepts iff it contains an
    accepting state.
    """
    fba = normalize_marks(fba)
    sigma = sorted(fba.sigma, key=str)
    todo = deque(frozenset({q}) for q in sorted(fba.states, key=_label))
    seen: Set[FrozenSet] = set(todo)
    rules: List[Rule] = []
    marked_rules = [r for r in fba.rules if r.on_mark]
    while todo:
        group = todo.popleft()
        for a in sigma:
            nxt = frozenset(r.next for q in group for r in fba.rules_for(a, SEEN, q))
            rules.append(Rule(a, SEEN, group, nxt, S))
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
        for q in group:
            for r in fba.rules:
                if r.on_fresh and r.state == q:
                    rules.append(Rule(r.sym, FRESH, group, frozenset({r.next}), r.action))
        for r in marked_rules:
            if r.state in group:
                rules.append(Rule(r.sym, frozenset({r.type}), group, frozenset({r.next}),
                                  r.action))
    accepting = {g for g in seen if g & fba.accepting}
    initial = {frozenset({q}) for q in fba.initial}
    return FBA(fba.sigma, seen, initial, accepting, tuple(rules), "result")


# -- pushdown automata --------------------------------------------------------

@dataclass(frozen=True)
class Bounds:
    """Search limits: stack height and consecutive non-reading moves."""

    max_stack: Optional[int] = None
    max_eps: Optional[int] = None


@dataclass
class PDARun:
    accepted: bool
    hit_bound: bool
    max_stack: int
    max_eps: int
    explored: int


class PDABase:
    """Common search over configurations ``(state, position, stack)``."""

    sigma: FrozenSet
    initial: FrozenSet
    accepting: FrozenSet

    def moves(self, state, stack: Tuple, sym) -> Iterator[Tuple[bool, Hashable, Tuple]]:
        """Yield ``(reads, next_state, next_stack)``; ``sym`` is None at the end."""
        raise NotImplementedError

    def default_bounds(self, word: Sequence) -> Bounds:
        return Bounds(max_stack=max(len(word), 1) * 4 + 8, max_eps=max(len(word), 1) * 8 + 8)


def pda_run(pda: PDABase, word: Sequence, bounds: Optional[Bounds] = None) -> PDARun:
    word = tuple(word)
    for a in word:
        if a not in pda.sigma:
            raise FBAError(f"symbol {a!r} not in the alphabet")
    if bounds is None:
        bounds = pda.default_bounds(word)
    best: Dict[Tuple, int] = {}
    queue = deque()
    for q in sorted(pda.initial, key=_label):
        key = (q, 0, ())
        best[key] = 0
        queue.append((key, 0))
    hit = False
    max_stack = max_eps = 0
    n = len(word)
    while queue:
        (state, pos, stack), eps = queue.popleft()
        if eps > best.get((state, pos, stack), eps):
            continue
        if pos == n and state in pda.accepting:
            return PDARun(True, hit, max_stack, max_eps, len(best))
        sym = word[pos] if pos < n else None
        for reads, nxt, nstack in pda.moves(state, stack, sym):
            npos, neps = (pos + 1, 0) if reads else (pos, eps + 1)
            if bounds.max_stack is not None and len(nstack) > bounds.max_stack:
                hit = True
                continue
            if bounds.max_eps is not None and neps > bounds.max_eps:
                hit = True
                continue
            max_stack = max(max_stack, len(nstack))
            max_eps = max(max_eps, neps)
            key = (nxt, npos, nstack)
            if key in best and best[key] <= neps:
                continue
            best[key] = neps
            queue.append((key, neps))
    return PDARun(False, hit, max_stack, max_eps, len(best))


def pda_accepts(pda: PDABase, word: Sequence, bounds: Optional[Bounds] = None) -> bool:
    """Acceptance by final state with the input consumed.

    Raises :class:`Inconclusive` if no accepting run was found but part of
    the search was cut off by ``bounds``.
    """
    run = pda_run(pda, word, bounds)
    if not run.accepted and run.hit_bound:
        raise Inconclusive(f"search bound reached on {''.join(map(str, word))!r}")
    return run.accepted


@dataclass(frozen=True)
class PDATransition:
    state: Hashable
    read: Optional[Hashable]      # None: does not read input
    pop: Optional[Hashable]       # None: leaves the stack alone
    next: Hashable
    push: Tuple = ()              # bottom to top


class PDA(PDABase):
    """A PDA given by an explicit transition list."""

    def __init__(self, states: Iterable, sigma: Iterable, initial: Iterable,
                 accepting: Iterable, transitions: Iterable[PDATransition]):
        self.states = frozenset(states)
        self.sigma = frozenset(sigma)
        self.initial = frozenset(initial)
        self.accepting = frozenset(accepting)
        self.transitions = tuple(transitions)
        for t in self.transitions:
            if t.state not in self.states or t.next not in self.states:
                raise FBAError(f"{t}: unknown state")
            if t.read is not None and t.read not in self.sigma:
                raise FBAError(f"{t}: symbol outside the alphabet")
        self._by_state: Dict[Hashable, List[PDATransition]] = {}
        for t in self.transitions:
            self._by_state.setdefault(t.state, []).append(t)

    def moves(self, state, stack, sym):
        for t in self._by_state.get(state, ()):
            if t.read is not None and t.read != sym:
                continue
            rest = stack
            if t.pop is not None:
                if not stack or stack[-1] != t.pop:
                    continue
                rest = stack[:-1]
            yield t.read is not None, t.next, rest + tuple(t.push)

    def to_json(self) -> dict:
        return {
            "kind": "explicit",
            "states": sorted(map(str, self.states)),
            "sigma": sorted(map(str, self.sigma)),
            "initial": sorted(map(str, self.initial)),
            "accepting": sorted(map(str, self.accepting)),
            "transitions": [{"state": t.state, "read": t.read, "pop": t.pop,
                             "next": t.next, "push": list(t.push)} for t in self.transitions],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PDA":
        try:
            ts = [PDATransition(t["state"], t.get("read"), t.get("pop"), t["next"],
                                tuple(t.get("push", ()))) for t in data["transitions"]]
            return cls(data["states"], data["sigma"], data["initial"], data["accepting"], ts)
        except (KeyError, TypeError) as exc:
            raise FBAError(f"malformed PDA description: {exc!r}") from exc


RUN, FB = "run", "fb"


class CompiledPDA(PDABase):
    """PDA simulating an s-deterministic FBA.

    Control states are ``("run", q)`` (reading fresh input in FBA state q)
    and ``("fb", q)`` (the FBA is on a marked cell in state q, reached by a
    fallback).  Stack symbols are ``(symbol, mark, vector)`` with ``vector``
    indexed like :attr:`order`; an entry is None where the s-transitions die.
    Moves are generated on demand: the stack alphabet is far too large to
    list.
    """

    def __init__(self, fba: FBA):
        if fba.mark_mode != "result":
            raise FBAError("compile a machine with result-state marks (see normalize_marks)")
        if not fba.is_s_deterministic():
            raise FBAError("FBA must be deterministic on seen cells; run s_determinize first")
        self.fba = fba
        self.order: Tuple[State, ...] = tuple(sorted(fba.states, key=_label))
        self.index = {q: i for i, q in enumerate(self.order)}
        self.identity = self.order
        self.sigma = fba.sigma
        self.states = frozenset((m, q) for q in fba.states for m in (RUN, FB))
        self.initial = frozenset((RUN, q) for q in fba.initial)
        self.accepting = frozenset((RUN, q) for q in fba.accepting)
        self._s = {(q, a): fba.s_step(q, a) for q in fba.states for a in fba.sigma}

    def default_bounds(self, word):
        # every push marks a distinct input cell, and every non-reading move
        # pops; so height <= |x| and chains <= |x| (the bound below is looser)
        n = max(len(word), 1)
        return Bounds(max_stack=len(word), max_eps=len(self.order) * n)

    def stack_alphabet_bound(self) -> int:
        k = len(self.order)
        return len(self.sigma) * k * k ** k

    # single moves, also used by the trace checker
    def _advance(self, vec: Tuple, sym) -> Tuple:
        return tuple(None if v is None else self._s[(v, sym)] for v in vec)

    def fresh_move(self, stack: Tuple, rule: Rule) -> Optional[Tuple[Hashable, Tuple]]:
        """Steps 1-5 for a rule on a fresh cell: new control state and stack."""
        if stack:
            sym, mark, vec = stack[-1]
            stack = stack[:-1] + ((sym, mark, self._advance(vec, rule.sym)),)
        if rule.action == S:
            return (RUN, rule.next), stack
        if rule.action == MARK:
            return (RUN, rule.next), stack + ((rule.sym, rule.next, self.identity),)
        if not stack:
            return None          # nothing to fall back to
        return (FB, rule.next), stack

    def marked_move(self, stack: Tuple, rule: Rule) -> Optional[Tuple[Hashable, Tuple]]:
        """Step 5.1/5.2 for a rule on the marked cell on top of the stack."""
        (_, _, r), rest = stack[-1], stack[:-1]
        if rest:
            gsym, gmark, u = rest[-1]
            merged = tuple(None if ui is None else r[self.index[ui]] for ui in u)
            rest = rest[:-1] + ((gsym, gmark, merged),)
        if rule.action == FALLBACK:
            if not rest:
                return None
            return (FB, rule.next), rest
        q = r[self.index[rule.next]]
        if q is None:
            return None
        return (RUN, q), rest

    def moves(self, state, stack, sym):
        mode, q = state
        if mode == RUN:
            if sym is None:
                return
            for rule in self.fba.rules_for(sym, FRESH, q):
                out = self.fresh_move(stack, rule)
                if out is not None:
                    yield True, out[0], out[1]
        else:
            if not stack:
                return
            beta, mark, _ = stack[-1]
            for rule in self.fba.rules_for(beta, mark, q):
                out = self.marked_move(stack, rule)
                if out is not None:
                    yield False, out[0], out[1]

    def to_json(self) -> dict:
        """Schematic description: the generating FBA plus the move schema."""
        fba, names = self.fba.relabeled()
        return {
            "kind": "compiled-from-fba",
            "fba": fba.to_json(),
            "states": sorted(f"{m}:{names[q]}" for m, q in self.states),
            "initial": sorted(f"{RUN}:{names[q]}" for _, q in self.initial),
            "accepting": sorted(f"{RUN}:{names[q]}" for _, q in self.accepting),
            "stack_symbol": "[symbol, mark state, vector over states in 'order']",
            "order": [names[q] for q in self.order],
            "stack_alphabet_bound": self.stack_alphabet_bound(),
            "moves": [
                "run:q on fresh a, rule (a,f,q)->(r,act): advance the top vector by the "
                "s-transitions on a; act=s: go to run:r; act=mark: push [a, r, order] and go "
                "to run:r; act=fallback: go to fb:r",
                "fb:q without input, top [b, p, v], rule (b,p,q)->(r,act): pop, compose v into "
                "the new top vector; act=fallback: go to fb:r; act=s: go to run:v[index(r)]",
            ],
            "acceptance": "final state with the input consumed",
        }


def fba_to_pda(fba: FBA) -> CompiledPDA:
    """Compile an s-deterministic FBA (see :func:`s_determinize`)."""
    return CompiledPDA(normalize_marks(fba))


def stack_alphabet_bound(fba: FBA) -> int:
    """|Σ|·|K|·|K|^|K| for the machine's state set K."""
    k = len(fba.states)
    return len(fba.sigma) * k * k ** k


# -- trace invariants -----------------------------------------------------------

class InvariantViolation(AssertionError):
    pass


def _rule_between(fba: FBA, a: Configuration, b: Configuration) -> Rule:
    for rule, nxt in fba._moves(a):
        if nxt == b:
            return rule
    raise FBAError("consecutive configurations are not one step apart")


def random_run(fba: FBA, word: Sequence, rng: random.Random,
               max_steps: int = 10_000) -> List[Configuration]:
    """A run chosen uniformly step by step until it gets stuck or ends."""
    starts = sorted(fba.initial, key=_label)
    c = Configuration.initial(tuple(word), rng.choice(starts))
    run = [c]
    for _ in range(max_steps):
        nxt = [n for _, n in fba._moves(c)]
        if not nxt:
            break
        nxt.sort(key=lambda x: (x.position, _label(x.state), repr(x.tape)))
        c = rng.choice(nxt)
        run.append(c)
    return run


def check_trace_invariants(pda: CompiledPDA, run: Sequence[Configuration]) -> int:
    """Replay an FBA run on the PDA and check the simulation invariants.

    After every strong step (one on a fresh or marked cell) and the seen
    cells passed before the next one:

    (a) the PDA control state is the FBA state, in ``fb`` mode iff the FBA
        is on a marked cell, and the PDA has read up to the last fresh cell;
    (b) the stack height equals the number of marked cells;
    (c) stack entry k holds the k-th marked cell's symbol and mark, and its
        vector maps each state to the result of the s-transitions over the
        cells after that mark up to and including the next mark or the head.

    Returns the number of strong steps checked; raises InvariantViolation.
    """
    fba = pda.fba
    if not run:
        return 0
    state: Hashable = (RUN, run[0].state)
    stack: Tuple = ()
    read = 0
    strong = 0
    for idx in range(len(run) - 1):
        a, b = run[idx], run[idx + 1]
        rule = _rule_between(fba, a, b)
        if rule.on_seen:
            continue
        strong += 1
        if rule.on_fresh:
            out = pda.fresh_move(stack, rule)
            read = a.position
        else:
            out = pda.marked_move(stack, rule)
        if out is None:
            # legitimate only if the FBA dies in the scan of seen cells too
            rest = [_rule_between(fba, run[j], run[j + 1]) for j in range(idx + 1, len(run) - 1)]
            last = run[-1]
            if all(r.on_seen for r in rest) and not fba.successors(last) and \
                    not (last.at_end and last.state in fba.accepting):
                return strong
            raise InvariantViolation(f"PDA cannot mirror step {idx}: {rule}")
        state, stack = out
        # the configuration before the next strong step (or the last one)
        j = idx + 1
        while j < len(run) - 1 and _rule_between(fba, run[j], run[j + 1]).on_seen:
            j += 1
        _check_point(pda, run[j], state, stack, read, strong)
    return strong


def _check_point(pda: CompiledPDA, c: Configuration, state, stack, read: int, step: int):
    def fail(msg):
        raise InvariantViolation(f"after strong step {step}: {msg}\n  FBA {c.show()}")

    on_mark = not c.at_end and c.tape[c.position - 1].type not in (FRESH, SEEN)
    if state != (FB if on_mark else RUN, c.state):
        fail(f"PDA state {state} != FBA state {_label(c.state)}")
    fresh_left = [i + 1 for i, cell in enumerate(c.tape) if cell.type == FRESH]
    last_fresh_read = (fresh_left[0] - 1) if fresh_left else len(c.tape)
    if read != last_fresh_read:
        fail(f"PDA read {read} cells, FBA last fresh cell {last_fresh_read}")
    marks = c.marked_positions()
    if len(stack) != len(marks):
        fail(f"stack height {len(stack)} != {len(marks)} marked cells")
    for k, (pos, entry) in enumerate(zip(marks, stack)):
        cell = c.tape[pos - 1]
        if entry[0] != cell.symbol or entry[1] != cell.type:
            fail(f"stack entry {k} {entry[:2]} != marked cell {cell}")
        end = marks[k + 1] if k + 1 < len(marks) else read
        for q, v in zip(pda.order, entry[2]):
            r = q
            for p in range(pos + 1, end + 1):
                if r is None:
                    break
                r = pda._s[(r, c.tape[p - 1].symbol)]
            if r != v:
                fail(f"vector entry for {_label(q)} in stack entry {k}: {v} != {r}")


# -- Chomsky–Schützenberger construction ---------------------------------------

DEFAULT_PAIRS = (("(", ")"), ("[", "]"), ("{", "}"), ("<", ">"))


@dataclass(frozen=True)
class CSInstance:
    """``R ∩ h(D_k)``: k bracket pairs, images ``h`` and a regular language R."""

    pairs: Tuple[Tuple[str, str], ...]
    h: Mapping[str, Tuple]
    R: NFA

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        object.__setattr__(self, "h", {b: tuple(v) for b, v in self.h.items()})
        brackets = [b for p in self.pairs for b in p]
        if not self.pairs:
            raise FBAError("need at least one bracket pair")
        if len(set(brackets)) != len(brackets):
            raise FBAError("bracket names must be distinct")
        for b in brackets:
            if b not in self.h:
                raise FBAError(f"h is not defined on bracket {b!r}")
            if not self.h[b]:
                raise FBAError(f"h({b}) is empty; erasing images are not supported")
        extra = set(self.h) - set(brackets)
        if extra:
            raise FBAError(f"h defined on unknown brackets {sorted(extra)}")

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def sigma(self) -> FrozenSet:
        return frozenset(self.R.sigma) | {a for img in self.h.values() for a in img}

    @classmethod
    def from_json(cls, data: Mapping) -> "CSInstance":
        try:
            k = int(data["k"])
            pairs = data.get("pairs") or DEFAULT_PAIRS[:k]
            if len(pairs) != k:
                raise FBAError(f"k={k} but {len(pairs)} bracket pairs given")
            h = {b: _image(v) for b, v in data["h"].items()}
            sigma = {a for img in h.values() for a in img}
            R = NFA.from_json(data["R"]) if data.get("R") else NFA.universal(sigma)
        except (KeyError, TypeError, ValueError) as exc:
            raise FBAError(f"malformed CS instance: {exc!r}") from exc
        return cls(tuple(pairs), h, R)

    def to_json(self) -> dict:
        return {"k": self.k, "pairs": [list(p) for p in self.pairs],
                "h": {b: list(v) for b, v in self.h.items()}, "R": self.R.to_json()}


def _image(v) -> Tuple:
    return tuple(v) if isinstance(v, (list, tuple)) else tuple(str(v))


def cs_weak_fba(inst: CSInstance) -> FBA:
    """Weak-FBA accepting ``R ∩ h(D_k)``.

    The machine guesses the bracket each block of input spells.  An opening
    image is checked symbol by symbol and its last cell is marked with
    ``("opened", i, d, r)``: the bracket kind i, whether some bracket was
    already open (d), and the R-state.  A closing image is checked and its
    last cell falls back; the rule on the marked cell exists only for a mark
    of the same kind and restores d from it.  The R-state advances only on
    fresh cells, seen cells are skipped, and marked cells never fall back
    again, so the machine is weak.  Accepting: nothing open and R accepting.
    """
    R = inst.R
    sigma = sorted(inst.sigma, key=str)
    rules: List[Rule] = []
    opens = [inst.h[o] for o, _ in inst.pairs]
    closes = [inst.h[c] for _, c in inst.pairs]
    rstates = sorted(R.states, key=_label)

    def idle(d, r):
        return ("idle", d, r)

    def start_bracket(src, depth, r, c):
        for i, img in enumerate(opens):
            if img[0] == c:
                for r2 in R.step(r, c):
                    if len(img) == 1:
                        rules.append(Rule(c, FRESH, src, ("opened", i, depth, r2), MARK))
                    else:
                        rules.append(Rule(c, FRESH, src, ("open", i, 1, depth, r2), S))
        if depth == 1:
            for i, img in enumerate(closes):
                if img[0] == c:
                    for r2 in R.step(r, c):
                        if len(img) == 1:
                            rules.append(Rule(c, FRESH, src, ("check", i, r2), FALLBACK))
                        else:
                            rules.append(Rule(c, FRESH, src, ("close", i, 1, r2), S))

    for r in rstates:
        for c in sigma:
            for d in (0, 1):
                start_bracket(idle(d, r), d, r, c)
            for i in range(inst.k):
                for d in (0, 1):
                    start_bracket(("opened", i, d, r), 1, r, c)
        for i, img in enumerate(opens):
            for pos in range(1, len(img)):
                for d in (0, 1):
                    for r2 in R.step(r, img[pos]):
                        if pos + 1 == len(img):
                            nxt, act = ("opened", i, d, r2), MARK
                        else:
                            nxt, act = ("open", i, pos + 1, d, r2), S
                        rules.append(Rule(img[pos], FRESH, ("open", i, pos, d, r), nxt, act))
        for i, img in enumerate(closes):
            for pos in range(1, len(img)):
                for r2 in R.step(r, img[pos]):
                    if pos + 1 == len(img):
                        nxt, act = ("check", i, r2), FALLBACK
                    else:
                        nxt, act = ("close", i, pos + 1, r2), S
                    rules.append(Rule(img[pos], FRESH, ("close", i, pos, r), nxt, act))
        # matching a close against the mark of its opening bracket
        for i, img in enumerate(opens):
            for d in (0, 1):
                for rp in rstates:
                    rules.append(Rule(img[-1], ("opened", i, d, rp), ("check", i, r),
                                      idle(d, r), S))
        for c in sigma:
            for d in (0, 1):
                rules.append(Rule(c, SEEN, idle(d, r), idle(d, r), S))

    states = {q for rule in rules for q in (rule.state, rule.next)}
    states |= {rule.type for rule in rules if rule.on_mark}
    initial = {idle(0, r) for r in R.initial}
    accepting = {idle(0, r) for r in R.accepting}
    states |= initial | accepting
    return FBA(frozenset(sigma), frozenset(states), frozenset(initial), frozenset(accepting),
               tuple(rules))


def dyck_instance(k: int = 1) -> CSInstance:
    """D_k itself: identity images, R = Σ*."""
    pairs = DEFAULT_PAIRS[:k]
    h = {b: (b,) for p in pairs for b in p}
    return CSInstance(pairs, h, NFA.universal({b for p in pairs for b in p}))


# -- random machines and the equivalence sweep ---------------------------------

def random_fba(rng: random.Random, max_states: int = 3, max_sigma: int = 2,
               max_rules: int = 12, mark_mode: str = "result") -> FBA:
    """A random small FBA with at least one rule usable from an initial state."""
    while True:
        states = [f"q{i}" for i in range(rng.randint(1, max_states))]
        sigma = ["a", "b"][: rng.randint(1, max_sigma)]
        rules = set()
        for _ in range(rng.randint(1, max_rules)):
            typ = rng.choice([FRESH, FRESH, SEEN] + states)
            if typ == SEEN:
                act = S
            elif typ == FRESH:
                act = rng.choice([S, MARK, FALLBACK])
            else:
                act = rng.choice([S, FALLBACK])
            rules.add(Rule(rng.choice(sigma), typ, rng.choice(states), rng.choice(states), act))
        initial = {q for q in states if rng.random() < 0.5} or {states[0]}
        accepting = {q for q in states if rng.random() < 0.5}
        if not any(r.on_fresh and r.state in initial for r in rules):
            continue
        return FBA(frozenset(sigma), frozenset(states), frozenset(initial),
                   frozenset(accepting), tuple(sorted(rules, key=repr)), mark_mode)


@dataclass
class SweepReport:
    machines: int = 0
    words: int = 0
    mismatches: List[dict] = field(default_factory=list)
    inconclusive: List[dict] = field(default_factory=list)
    max_stack: int = 0
    max_eps: int = 0
    bound_hits: int = 0

    def to_json(self) -> dict:
        return {"machines": self.machines, "words": self.words,
                "mismatches": self.mismatches, "inconclusive": self.inconclusive,
                "max_stack": self.max_stack, "max_eps": self.max_eps,
                "bound_hits": self.bound_hits}


def all_words(sigma: Iterable, max_len: int) -> Iterator[Tuple]:
    letters = sorted(sigma, key=str)
    for n in range(max_len + 1):
        yield from itertools.product(letters, repeat=n)


def equivalence_sweep(machines: int = 50, max_len: int = 6, seed: int = 1,
                      max_states: int = 3, max_sigma: int = 2, max_rules: int = 12) -> SweepReport:
    """accepts(fba, x) vs pda_accepts(fba_to_pda(s_determinize(fba)), x)."""
    rng = random.Random(seed)
    report = SweepReport()
    for m in range(machines):
        fba = random_fba(rng, max_states, max_sigma, max_rules)
        pda = fba_to_pda(s_determinize(fba))
        report.machines += 1
        for w in all_words(fba.sigma, max_len):
            report.words += 1
            expected = fba.accepts(w)
            run = pda_run(pda, w)
            report.max_stack = max(report.max_stack, run.max_stack)
            report.max_eps = max(report.max_eps, run.max_eps)
            report.bound_hits += int(run.hit_bound)
            case = {"machine": m, "word": "".join(w), "fba": expected, "pda": run.accepted,
                    "definition": fba.to_json()}
            if not run.accepted and run.hit_bound:
                report.inconclusive.append(case)
            elif run.accepted != expected:
                report.mismatches.append(case)
    return report


def load_cs_instance(path) -> CSInstance:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FBAError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FBAError(f"cannot parse {path}: {exc}") from exc
    return CSInstance.from_json(data)
