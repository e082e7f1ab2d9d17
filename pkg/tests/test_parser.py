import pytest

from asmparse.lexicon import LEX, OBJ, SUBJ, VERB, OutOfVocabulary, ReadoutError, load_lexicon
from asmparse.parser import (Parser, ParserConfig, ParserInternalError, StructureError, _Run,
                             parse, readout_constituency, segment, tokenize)
from asmparse.trees import DependencyTree, Edge

from oracles import oracle

WHEN_CLAUSE = "dogs, when they run, chase cats"
DEPTH2 = "dogs, when they see cats, which sleep, run"
EMB = ParserConfig(embedding_enabled=True)


def expected_tree(src):
    exp = oracle(src)
    return DependencyTree(exp.words, [Edge(h, d, l) for h, d, l in exp.edges], exp.root)


@pytest.fixture(scope="module")
def lex():
    return load_lexicon()


@pytest.fixture(scope="module")
def when_clause():
    return parse(WHEN_CLAUSE, EMB)


@pytest.fixture(scope="module")
def depth2():
    return parse(DEPTH2, EMB)


# -- tokenizing and segmentation ---------------------------------------------------

def test_tokenize():
    assert tokenize("Dogs, when they run, chase cats.") == \
        ["dogs", ",", "when", "they", "run", ",", "chase", "cats"]
    assert tokenize(["dogs", "run", "."]) == ["dogs", "run"]
    with pytest.raises(StructureError):
        tokenize("dogs (run)")


def test_segment_when_clause(lex):
    mem = segment(tokenize(WHEN_CLAUSE), lex)
    assert mem.words == ["dogs", "when", "they", "run", "chase", "cats"]
    assert mem.depths == [0, 1, 1, 1, 0, 0]
    assert mem.link_after == {0: 1} and mem.opens == {1: 1}
    assert mem.closes_before == {4: [1]}
    assert mem.clauses[0].verb == 4 and mem.clauses[1].verb == 3
    assert mem.boundaries() == [(0, 0, 5), (1, 1, 3)]


def test_segment_depth2_closes_both_clauses_at_one_comma(lex):
    mem = segment(tokenize(DEPTH2), lex)
    assert mem.max_depth == 2
    assert mem.closes_before == {7: [2, 1]}


@pytest.mark.parametrize("sentence", ["", ",", "dogs, chase cats", "when dogs run",
                                      "dogs run,", "dogs, when they run,, chase cats",
                                      "dogs, that, chase cats", "dogs chase cats that"])
def test_segment_rejects_ill_formed_input(lex, sentence):
    with pytest.raises(StructureError):
        segment(tokenize(sentence), lex)


def test_clause_marker_needs_embedding_mode(lex):
    with pytest.raises(StructureError):
        segment(tokenize(WHEN_CLAUSE), lex, embedding=False)


def test_out_of_vocabulary(lex):
    with pytest.raises(OutOfVocabulary):
        segment(tokenize("dogs chase zebras"), lex)


@pytest.mark.parametrize("kwargs", [dict(rounds=0), dict(form_rounds=21), dict(p=0.0),
                                    dict(k=0), dict(n=10, k=11)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ParserConfig(**kwargs)


def test_empty_sentence_is_an_error():
    with pytest.raises(StructureError):
        parse("")


# -- dependency parsing -------------------------------------------------------------

def test_transitive_sentence():
    rec = parse("dogs chase cats")
    tree = rec.dependency_tree()
    assert tree == expected_tree("dogs chase cats")
    assert tree.edge_set() == {(1, 0, SUBJ), (1, 2, OBJ)}
    assert rec.role_areas == [SUBJ, VERB, OBJ]


def test_intransitive_sentence():
    tree = parse("dogs run").dependency_tree()
    assert tree.root == 1 and tree.edge_set() == {(1, 0, SUBJ)}


def test_modifiers_and_prepositional_phrase():
    src = "the big dogs quickly chase the small cats in the park"
    assert parse(src).dependency_tree() == expected_tree(src)


def test_parse_is_reproducible():
    a, b = parse("the dogs chase cats", ParserConfig(seed=4)), parse("the dogs chase cats", ParserConfig(seed=4))
    assert a.assemblies == b.assemblies


def test_single_word_readback(lex):
    rec = parse("dogs chase cats")
    react = rec.brain.fire_into(OBJ, rec.assemblies[2].neurons, LEX)
    assert lex.identify(react.neurons) == "cats"


def test_parse_rounds_per_word():
    rec = parse("dogs chase cats")
    assert rec.parse.rounds == 3 * 20 and rec.parse.words == 3
    assert rec.touch.rounds == 0


# -- embedded clauses -------------------------------------------------------------

def test_when_clause_tree(when_clause):
    assert when_clause.dependency_tree() == expected_tree("dogs [when they run] chase cats")
    assert when_clause.dependency_tree().root == 4


def test_when_clause_signature_link(when_clause):
    (link,) = when_clause.links
    assert (link.signature, link.area, link.verb) == (0, SUBJ, 3)
    assert link.ds_assembly is not None and len(link.ds_assembly) == when_clause.config.k


def test_touching_uses_one_round_and_restores_assemblies(when_clause):
    assert when_clause.touch_log and all(rounds == 1 for _, rounds, _ in when_clause.touch_log)
    assert when_clause.touch.rounds == when_clause.touch.words == 1
    # the touched word is "dogs"; its SUBJ assembly comes back
    (word, _, ratio), = when_clause.touch_log
    assert word == 0 and ratio >= 0.95
    assert when_clause.parse.rounds == 20 * when_clause.parse.words


def test_depth2_has_two_links_and_two_touch_passes(depth2):
    assert depth2.dependency_tree() == expected_tree("dogs [when they see cats [which sleep]] run")
    assert len(depth2.links) == 2 and depth2.touch_passes == 2
    assert [l.verb for l in depth2.links] == [3, 6]
    assert all(r >= 0.95 for _, _, r in depth2.touch_log)


def test_right_embedding():
    src = "dogs chase cats [that see birds [which sing]]"
    rec = parse("dogs chase cats that see birds which sing", EMB)
    assert rec.dependency_tree() == expected_tree(src)
    # both clauses end with the input; each end touches the outer prefix
    assert rec.touch_passes == 2 and rec.touch.words == 3 + 3


def test_every_word_has_one_assembly_at_its_depth(depth2):
    assert all(a is not None for a in depth2.assemblies)
    assert len(depth2.assemblies) == len(depth2.words)


def test_touching_a_word_without_assembly_is_internal_error(lex):
    parser = Parser(EMB, lex)
    run = _Run(parser, tokenize(WHEN_CLAUSE), segment(tokenize(WHEN_CLAUSE), lex))
    with pytest.raises(ParserInternalError):
        run.touch([0])


def test_touch_of_empty_prefix_is_a_no_op(lex):
    parser = Parser(EMB, lex)
    run = _Run(parser, tokenize(WHEN_CLAUSE), segment(tokenize(WHEN_CLAUSE), lex))
    state = run.brain.inhibition_state()
    run.touch([])
    assert run.brain.rounds == 0 and run.brain.inhibition_state() == state


# -- clear the slate --------------------------------------------------------------

def test_clear_slate_is_idempotent_and_keeps_weights(when_clause, lex):
    parser = Parser(when_clause.config, lex)
    b = when_clause.brain
    weights = dict(b.synapses[(LEX, SUBJ)].materialized_edges())
    parser.clear_slate(b)
    once = (b.inhibition_state(), {a: b.winners(a) for a in b.areas})
    parser.clear_slate(b)
    assert (b.inhibition_state(), {a: b.winners(a) for a in b.areas}) == once
    assert all(b.winners(a) is None for a in (SUBJ, VERB, OBJ, "DET", "ADJ", "ADV"))
    assert b.inhibition_state() == (frozenset(parser.initial_pattern()[0]), frozenset())
    assert b.synapses[(LEX, SUBJ)].materialized_edges() == weights


# -- constituency -------------------------------------------------------------------

@pytest.mark.parametrize("sentence", ["dogs chase cats", "the big dogs run"])
def test_constituency_mode_keeps_dependency_readout(sentence):
    dep_only = parse(sentence, ParserConfig(seed=2)).dependency_tree()
    with_con = parse(sentence, ParserConfig(seed=2, constituency_enabled=True)).dependency_tree()
    assert dep_only == with_con


def test_constituency_trees():
    t = parse("dogs chase cats", ParserConfig(constituency_enabled=True)).constituency_tree()
    assert str(t) == "(S (Subj dogs) (VP (Verb chase) (Obj cats)))"
    t = parse("the big dogs chase cats", ParserConfig(constituency_enabled=True)).constituency_tree()
    assert t.subject == (0, 1, 2)
    t = parse("birds sing loudly", ParserConfig(constituency_enabled=True)).constituency_tree()
    assert t.obj is None and t.verb == (1, 2)
    t.validate()


def test_constituency_readout_needs_constituency_mode():
    with pytest.raises(ReadoutError):
        readout_constituency(parse("dogs run"))
