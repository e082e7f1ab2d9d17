import json
import random
from importlib import resources

import pytest

from asmparse.bridges import (Bounds, CSInstance, Inconclusive, InvariantViolation,
                              PDA, PDATransition, check_trace_invariants, cs_weak_fba,
                              dyck_instance, equivalence_sweep, fba_to_pda, normalize_marks,
                              pda_accepts, pda_run, random_fba, random_run, s_determinize,
                              stack_alphabet_bound)
from asmparse.fba import FALLBACK, FRESH, MARK, NFA, S, SEEN, FBA, FBAError, Rule, anbn_fba

from oracles import all_strings, cs_language, in_anbn, is_dyck


def instance(name):
    text = resources.files("asmparse.data").joinpath(name).read_text("utf-8")
    return CSInstance.from_json(json.loads(text))


def same_language(a, b, max_len, sigma=None):
    sigma = sorted(sigma or a.sigma)
    return [w for w in all_strings(sigma, max_len) if a.accepts(w) != b.accepts(w)]


@pytest.fixture(scope="module")
def dyck1():
    return cs_weak_fba(dyck_instance(1))


# -- mark normalization and s-determinization ---------------------------------------------

@pytest.mark.parametrize("seed", range(15))
def test_normalize_marks_preserves_language(seed):
    fba = random_fba(random.Random(seed), mark_mode="current")
    norm = normalize_marks(fba)
    assert norm.mark_mode == "result"
    assert same_language(fba, norm, 5) == []


def test_s_determinize_of_deterministic_machine(dyck1):
    assert dyck1.is_s_deterministic()
    det = s_determinize(dyck1)
    assert det.is_s_deterministic()
    # the seen-cell step is total: one rule per (symbol, s, state)
    for q in det.states:
        for a in det.sigma:
            assert len(det.rules_for(a, SEEN, q)) == 1
    assert same_language(dyck1, det, 10) == []


def test_s_determinize_branching_machine():
    # on a seen cell, p may go to p or q: the subset construction needs {p, q}
    rules = (Rule("a", FRESH, "p", "p", MARK), Rule("b", FRESH, "p", "r", FALLBACK),
             Rule("a", "p", "r", "p", S), Rule("a", SEEN, "p", "p", S),
             Rule("a", SEEN, "p", "q", S), Rule("b", SEEN, "q", "q", S),
             Rule("b", SEEN, "p", "p", S), Rule("a", FRESH, "q", "q", S))
    fba = FBA(frozenset("ab"), frozenset("pqr"), frozenset("p"), frozenset("q"), rules)
    assert not fba.is_s_deterministic()
    det = s_determinize(fba)
    assert det.is_s_deterministic()
    sizes = {len(s) for s in det.states}
    assert {1, 2} <= sizes
    assert same_language(fba, det, 6) == []
    assert any(fba.accepts(w) for w in all_strings("ab", 6))


# -- compiled PDAs ---------------------------------------------------------------------------------

def test_pda_without_marks_never_pushes_and_equals_the_nfa():
    rules = (Rule("a", FRESH, "p", "q", S), Rule("b", FRESH, "q", "p", S),
             Rule("a", FRESH, "q", "q", S))
    fba = FBA(frozenset("ab"), frozenset("pq"), frozenset("p"), frozenset("q"), rules)
    pda = fba_to_pda(s_determinize(fba))
    nfa = fba.underlying_nfa()
    for w in all_strings("ab", 6):
        run = pda_run(pda, w)
        assert run.accepted == nfa.accepts(w) and run.max_stack == 0


def test_anbn_compiled():
    fba = anbn_fba()
    pda = fba_to_pda(s_determinize(fba))
    assert pda_accepts(pda, "αα01ββ")
    assert not pda_accepts(pda, "αββ")
    for w in all_strings(sorted(fba.sigma), 6):
        assert pda_accepts(pda, w) == fba.accepts(w) == in_anbn(w), "".join(w)


def test_compiled_pda_requires_s_determinism():
    rules = (Rule("a", SEEN, "p", "p", S), Rule("a", SEEN, "p", "q", S))
    fba = FBA(frozenset("a"), frozenset("pq"), frozenset("p"), frozenset("q"), rules)
    with pytest.raises(FBAError):
        fba_to_pda(fba)


def test_stack_vectors_and_alphabet_bound(dyck1):
    det = s_determinize(dyck1)
    pda = fba_to_pda(det)
    k = len(det.states)
    assert pda.stack_alphabet_bound() == stack_alphabet_bound(det) == 2 * k * k ** k
    stack = ()
    rule = next(r for r in det.rules if r.on_fresh and r.action == MARK)
    state, stack = pda.fresh_move(stack, rule)
    assert len(stack) == 1 and len(stack[0][2]) == k


def test_compiled_pda_json_is_self_describing(dyck1):
    data = fba_to_pda(s_determinize(dyck1)).to_json()
    assert data["kind"] == "compiled-from-fba"
    again = fba_to_pda(FBA.from_json(data["fba"]))
    for w in all_strings("()", 6):
        assert pda_accepts(again, w) == is_dyck(w, [("(", ")")])


def test_compiled_pdas_stay_within_the_input_bound():
    report = equivalence_sweep(machines=15, max_len=5, seed=7)
    assert report.mismatches == [] and report.inconclusive == []
    assert report.bound_hits == 0 and report.max_stack <= 5


# -- trace invariants --------------------------------------------------------------------------------

@pytest.mark.parametrize("word", ["()", "(())", "()()", "(()())", "((()))()"])
def test_invariants_along_dyck_runs(dyck1, word):
    pda = fba_to_pda(s_determinize(dyck1))
    det = pda.fba
    ok, run = det.accepts(word, witness=True)
    assert ok
    strong = check_trace_invariants(pda, run)
    assert strong == len(word) + word.count(")")   # every ")" also revisits its mark


def test_invariants_on_random_runs():
    rng = random.Random(11)
    checked = 0
    for _ in range(40):
        pda = fba_to_pda(s_determinize(random_fba(rng)))
        for _ in range(5):
            w = [rng.choice(sorted(pda.sigma)) for _ in range(rng.randint(0, 6))]
            checked += check_trace_invariants(pda, random_run(pda.fba, w, rng))
    assert checked > 100


def test_invariant_checker_detects_a_broken_simulation(dyck1):
    pda = fba_to_pda(s_determinize(dyck1))
    ok, run = pda.fba.accepts("(())", witness=True)
    original = pda.fresh_move

    def forgetful(stack, rule):    # never pushes
        state, _ = original(stack, rule)
        return state, stack

    pda.fresh_move = forgetful
    with pytest.raises(InvariantViolation):
        check_trace_invariants(pda, run)


# -- explicit PDAs and bounds -----------------------------------------------------------------------

def textbook_d1():
    # acceptance is by final state, so a bottom marker detects the empty stack
    return PDA({"s", "q", "f"}, "()", {"s"}, {"f"},
               [PDATransition("s", None, None, "q", ("Z",)),
                PDATransition("q", "(", None, "q", ("X",)),
                PDATransition("q", ")", "X", "q", ()),
                PDATransition("q", None, "Z", "f", ())])


@pytest.mark.parametrize("word", ["", "()", "(())", "()(())", "(()", "())", ")(", "((("])
def test_textbook_d1_pda(word):
    assert pda_accepts(textbook_d1(), word, Bounds(20, 5)) == is_dyck(word, [("(", ")")])


def test_pda_with_empty_stack_is_an_nfa():
    pda = PDA({0, 1}, "a", {0}, {1}, [PDATransition(0, "a", None, 1), PDATransition(1, "a", None, 0)])
    nfa = NFA({"a"}, {0, 1}, {0}, {1}, {(0, "a"): {1}, (1, "a"): {0}})
    for w in all_strings("a", 6):
        assert pda_accepts(pda, w) == nfa.accepts(w)


def test_bound_exhaustion_is_inconclusive_not_reject():
    # pushes forever without reading: can only accept after an unbounded climb
    pda = PDA({"p", "q"}, "a", {"p"}, {"q"},
              [PDATransition("p", None, None, "p", ("X",)),
               PDATransition("p", "a", "X", "q", ())])
    with pytest.raises(Inconclusive):
        pda_accepts(pda, "aa", Bounds(max_stack=3, max_eps=3))
    assert pda_accepts(pda, "a", Bounds(max_stack=3, max_eps=3))


def test_explicit_pda_json_round_trip():
    pda = textbook_d1()
    again = PDA.from_json(json.loads(json.dumps(pda.to_json())))
    assert pda_accepts(again, "(())", Bounds(10, 2))
    assert not pda_accepts(again, "(()", Bounds(10, 2))
    with pytest.raises(FBAError):
        PDA.from_json({"states": []})
    with pytest.raises(FBAError):
        PDA({"q"}, "a", {"q"}, set(), [PDATransition("q", "b", None, "q")])


# -- Chomsky–Schützenberger construction -------------------------------------------------------

def test_dyck1_up_to_length_10(dyck1):
    assert dyck1.is_weak()
    for w in all_strings("()", 10):
        assert dyck1.accepts(w) == is_dyck(w, [("(", ")")]), "".join(w)


def test_dyck2_up_to_length_6():
    inst = dyck_instance(2)
    fba = cs_weak_fba(inst)
    assert fba.is_weak()
    for w in all_strings("()[]", 6):
        assert fba.accepts(w) == is_dyck(w, inst.pairs), "".join(w)


@pytest.mark.parametrize("name, max_len", [("cs_k2_images.json", 10), ("cs_k1_ends_in_a.json", 10),
                                           ("cs_k2_ambiguous.json", 10)])
def test_cs_instances_match_the_enumeration(name, max_len):
    inst = instance(name)
    fba = cs_weak_fba(inst)
    assert fba.is_weak()
    lang = cs_language(inst.pairs, inst.h, inst.R.accepts, max_len)
    assert lang
    for w in all_strings(sorted(fba.sigma), max_len):
        assert fba.accepts(w) == (w in lang), "".join(w)


def test_empty_r_gives_empty_language():
    empty = NFA(frozenset("()"), {"r"}, {"r"}, set(), {("r", "("): {"r"}, ("r", ")"): {"r"}})
    fba = cs_weak_fba(CSInstance((("(", ")"),), {"(": "(", ")": ")"}, empty))
    assert not any(fba.accepts(w) for w in all_strings("()", 6))


@pytest.mark.parametrize("pairs, h", [
    ((("(", ")"),), {"(": "", ")": ")"}),            # erasing image
    ((("(", ")"),), {"(": "("}),                     # h not total
    ((("(", ")"),), {"(": "(", ")": ")", "[": "x"}),  # unknown bracket
    ((("(", "("),), {"(": "("}),                     # repeated bracket name
    ((), {}),
])
def test_invalid_cs_instances(pairs, h):
    with pytest.raises(FBAError):
        CSInstance(pairs, h, NFA.universal("()x"))


def test_cs_instance_json():
    inst = CSInstance.from_json({"k": 1, "h": {"(": "ab", ")": "c"}})
    assert inst.pairs == (("(", ")"),) and inst.h["("] == ("a", "b")
    assert inst.R.accepts("abc")
    again = CSInstance.from_json(inst.to_json())
    assert again.h == inst.h
    with pytest.raises(FBAError):
        CSInstance.from_json({"k": 2, "pairs": [["(", ")"]], "h": {}})
    with pytest.raises(FBAError):
        CSInstance.from_json({"h": {}})


def test_shipped_dyck1_machine_matches_the_construction(dyck1):
    text = resources.files("asmparse.data").joinpath("dyck1.json").read_text("utf-8")
    shipped = FBA.from_json(json.loads(text))
    assert shipped.is_weak()
    assert same_language(shipped, dyck1, 8) == []


# -- random machines -------------------------------------------------------------------------------

def test_random_fba_is_never_degenerate():
    rng = random.Random(0)
    for _ in range(200):
        m = random_fba(rng)
        assert len(m.states) <= 3 and len(m.sigma) <= 2 and len(m.rules) <= 12
        assert any(r.on_fresh and r.state in m.initial for r in m.rules)


def test_equivalence_sweep_is_reproducible():
    a = equivalence_sweep(machines=5, max_len=4, seed=3)
    b = equivalence_sweep(machines=5, max_len=4, seed=3)
    assert a.to_json() == b.to_json()
