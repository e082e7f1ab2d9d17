import json
from collections import Counter

import pytest

from asmparse.fba import (ALPHA, BETA, FALLBACK, FRESH, MARK, NFA, S, SEEN, FBA, FBAError,
                          Configuration, Rule, anbn_fba, load_fba, save_fba, split_word)

from oracles import all_strings, in_anbn


def machine(rules, states=("p", "q", "r"), initial=("p",), accepting=("q",), sigma="ab", **kw):
    return FBA(frozenset(sigma), frozenset(states), frozenset(initial), frozenset(accepting),
               tuple(Rule(*r) for r in rules), **kw)


@pytest.fixture(scope="module")
def anbn():
    return anbn_fba()


# -- validation ---------------------------------------------------------------------

@pytest.mark.parametrize("rules, kw", [
    ([("c", FRESH, "p", "q", S)], {}),                 # symbol outside the alphabet
    ([("a", FRESH, "p", "z", S)], {}),                 # unknown state
    ([("a", FRESH, "p", "q", "jump")], {}),            # unknown action
    ([("a", SEEN, "p", "q", MARK)], {}),               # seen cell, strong action
    ([("a", "z", "p", "q", S)], {}),                   # mark type that is not a state
    ([("a", "q", "p", "q", MARK)], {}),                # re-marking a marked cell
    ([], dict(mark_mode="previous")),
    ([], dict(sigma="")),
    ([], dict(states=("p", "q", "s"))),                # reserved name
    ([], dict(initial=("x",))),
    ([], dict(accepting=("x",))),
])
def test_invalid_machines(rules, kw):
    with pytest.raises(FBAError):
        machine(rules, **kw)


def test_from_json_rejects_malformed_input():
    with pytest.raises(FBAError):
        FBA.from_json({"sigma": ["a"]})


# -- semantics ------------------------------------------------------------------------

def test_plain_nfa_behaviour():
    m = machine([("a", FRESH, "p", "q", S), ("b", FRESH, "q", "p", S)])
    assert m.accepts("a") and m.accepts("aba") and not m.accepts("ab") and not m.accepts("")
    nfa = m.underlying_nfa()
    for w in all_strings("ab", 5):
        assert nfa.accepts(w) == m.accepts(w)


def test_fallback_returns_to_the_last_mark_and_turns_cells_seen():
    # mark a, read b, fall back on the second b, accept on the marked a
    m = machine([("a", FRESH, "p", "p", MARK), ("b", FRESH, "p", "p", S),
                 ("b", FRESH, "p", "r", FALLBACK), ("a", "p", "r", "q", S),
                 ("b", SEEN, "q", "q", S)])
    ok, run = m.accepts("abb", witness=True)
    assert ok
    tapes = [c.show() for c in run]
    assert tapes[0] == "p  >a:f b:f b:f"
    assert "r  >a:[p] b:s b:s" in tapes        # head back on the mark, b turned seen
    assert run[-1].at_end and run[-1].state == "q"
    assert [c.type for c in run[-1].tape] == [SEEN, SEEN, SEEN]


def test_fallback_without_mark_dies():
    m = machine([("a", FRESH, "p", "q", FALLBACK)])
    assert not m.accepts("a")
    assert m.successors(Configuration.initial("a", "p")) == set()


def test_fallback_goes_to_the_nearest_of_several_marks():
    m = machine([("a", FRESH, "p", "p", MARK), ("b", FRESH, "p", "r", FALLBACK)])
    c = Configuration.initial("aab", "p")
    for _ in range(3):
        (c,) = m.successors(c)
    assert c.position == 2 and c.marked_positions() == [1, 2]


def test_mark_modes_store_different_states():
    rules = [("a", FRESH, "p", "q", MARK)]
    res = machine(rules)
    cur = machine(rules, mark_mode="current")
    (c1,) = res.successors(Configuration.initial("a", "p"))
    (c2,) = cur.successors(Configuration.initial("a", "p"))
    assert c1.tape[0].type == "q" and c2.tape[0].type == "p"


def test_prefix_acceptance():
    m = machine([("a", FRESH, "p", "q", S)])
    assert not m.accepts("ab") and m.accepts("ab", consume=False)


def test_unknown_symbol_is_an_error():
    with pytest.raises(FBAError):
        anbn_fba().accepts("αγ")


# -- the alpha^n x beta^n machine ------------------------------------------------------------------

def test_anbn_matches_the_oracle_up_to_length_6(anbn):
    for w in all_strings(sorted(anbn.sigma), 6):
        assert anbn.accepts(w) == in_anbn(w), "".join(w)


@pytest.mark.parametrize("word, expected", [
    ("", True), ("01", True), ("αβ", True), ("αα01ββ", True), ("ααβ", False),
    ("αββ", False), ("βα", False), ("α0β1", False), ("αβαβ", False), ("α0ββ", False),
])
def test_anbn_examples(anbn, word, expected):
    assert anbn.accepts(word) == expected


def test_anbn_is_weak(anbn):
    assert anbn.is_weak() and anbn.has_marks() and anbn.is_s_deterministic()


def test_weak_runs_make_at_most_two_strong_steps_per_cell(anbn):
    for w in ["αα01ββ", "αααβββ", "α1β"]:
        ok, run = anbn.accepts(w, witness=True)
        assert ok
        strong = Counter()
        for a, b in zip(run, run[1:]):
            cell = a.tape[a.position - 1]
            if cell.type != SEEN:
                strong[a.position] += 1
        assert max(strong.values()) <= 2


def test_non_weak_machine_detected():
    m = machine([("a", SEEN, "p", "q", S)])
    assert not m.is_weak()
    m = machine([("a", FRESH, "p", "p", MARK), ("a", "p", "p", "q", FALLBACK)])
    assert not m.is_weak()


def test_language_helper(anbn):
    lang = anbn.language(2)
    assert {"".join(w) for w in lang} == {"", "0", "1", "00", "01", "10", "11", "αβ"}


# -- serialization ------------------------------------------------------------------------

def test_json_round_trip(tmp_path, anbn):
    path = tmp_path / "anbn.json"
    save_fba(anbn, path)
    again = load_fba(path)
    assert set(again.rules) == set(anbn.rules)
    assert (again.sigma, again.states, again.initial, again.accepting) == \
        (anbn.sigma, anbn.states, anbn.initial, anbn.accepting)
    assert json.loads(path.read_text())["initial"] == ["start"]


def test_structured_states_are_relabelled_for_json():
    m = FBA(frozenset("a"), frozenset({("x", 1), ("y", 2)}), frozenset({("x", 1)}),
            frozenset({("y", 2)}), (Rule("a", FRESH, ("x", 1), ("y", 2), S),))
    data = m.to_json()
    assert set(data["states"]) == {"q0", "q1"}
    back = FBA.from_json(data)
    for w in all_strings("a", 3):
        assert back.accepts(w) == m.accepts(w)


def test_load_fba_reports_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(FBAError):
        load_fba(p)


def test_split_word():
    assert split_word({"a", "b"}, "a b ab") == ("a", "b", "a", "b")
    assert split_word({"ab", "c"}, "ab c") == ("ab", "c")


def test_nfa_basics():
    n = NFA({"a"}, {0, 1}, {0}, {1}, {(0, "a"): {1}, (1, "a"): {0}})
    assert n.accepts("a") and not n.accepts("aa")
    assert NFA.universal("ab").accepts("abba")
    back = NFA.from_json(json.loads(json.dumps(NFA.universal("ab").to_json())))
    assert back.accepts("ba")
    with pytest.raises(FBAError):
        NFA({"a"}, {0}, {1}, set(), {})
    with pytest.raises(FBAError):
        NFA({"a"}, {0}, {0}, set(), {(0, "b"): {0}})
    with pytest.raises(FBAError):
        NFA.from_json({"sigma": []})
