import random

import numpy as np
import pytest

from asmparse.brain import AreaParams, Assembly, Brain, BrainError, overlap, top_k

from conftest import compare_steps, explicit_case


def small_brain(seed=0, n=1000, k=30, tie_break="index"):
    b = Brain([AreaParams("A", n, k), AreaParams("B", n, k)], [("A", "B")],
              p=0.05, seed=seed, tie_break=tie_break)
    b.set_winners("A", range(k))
    b.clamp("A")
    b.disinhibit("A")
    b.disinhibit("B")
    b.disinhibit(("A", "B"))
    return b


@pytest.mark.parametrize("kwargs", [dict(name=""), dict(name="A", n=0), dict(name="A", n=5, k=6),
                                    dict(name="A", beta=-0.1), dict(name="A", recurrent_beta=-1)])
def test_area_params_rejects_bad_values(kwargs):
    with pytest.raises(BrainError):
        AreaParams(**kwargs)


def test_brain_construction_errors():
    a = AreaParams("A", 10, 2)
    with pytest.raises(BrainError):
        Brain([a, a])
    with pytest.raises(BrainError):
        Brain([a], [("A", "B")])
    with pytest.raises(BrainError):
        Brain([a], [("A", "A")])
    with pytest.raises(BrainError):
        Brain([a], p=0.0)
    with pytest.raises(BrainError):
        Brain([a], tie_break="coin")


def test_top_k_prefers_low_index_on_ties_and_fills_with_silent_cells():
    si = np.array([1.0, 3.0, 3.0, 3.0, 0.0, 2.0])
    assert list(top_k(si, 2)) == [1, 2]
    assert list(top_k(si, 5)) == [0, 1, 2, 3, 5]
    assert list(top_k(np.array([0.0, 2.0, 0.0, 0.0]), 3)) == [0, 1, 2]


def test_top_k_random_tie_break_is_seeded():
    si = np.ones(50)
    a = top_k(si, 5, np.random.default_rng(3))
    b = top_k(si, 5, np.random.default_rng(3))
    assert list(a) == list(b) and len(set(a)) == 5


def test_set_winners_validates_size_range_and_area():
    b = Brain([AreaParams("A", 10, 3), AreaParams("B", 10, 3)])
    with pytest.raises(BrainError):
        b.set_winners("A", [1, 2])
    with pytest.raises(BrainError):
        b.set_winners("A", [1, 2, 10])
    with pytest.raises(BrainError):
        b.set_winners("A", Assembly.of("B", [1, 2, 3]))
    b.set_winners("A", [3, 1, 2])
    assert b.winners("A").neurons == (1, 2, 3)


@pytest.mark.parametrize("seed", range(40))
def test_step_matches_brute_force_recomputation(seed):
    brain, state = explicit_case(random.Random(seed))
    assert compare_steps(brain, state, rounds=4) == []


def test_inhibited_area_neither_fires_nor_changes():
    b = small_brain()
    b.step()
    before = b.winners("B")
    b.inhibit("B")
    b.set_winners("A", range(30, 60))
    b.step()
    assert b.winners("B") == before


def test_closed_fiber_carries_nothing():
    b = small_brain()
    b.inhibit(("A", "B"))
    b.step()
    assert b.winners("B") is None


def test_projection_converges_and_potentiates_only_used_synapses():
    b = small_brain()
    b.project_star(20)
    w19 = set(b.winners("B").neurons)
    b.step()
    assert overlap(w19, b.winners("B").neurons) >= 0.95 * 30
    edges = b.edges("A", "B")
    winners = set(b.winners("B").neurons)
    strong = {(i, j) for (i, j), w in edges.items() if w > 1.0}
    # only synapses out of the firing stimulus; all of those onto the final assembly
    assert strong and all(i < 30 for i, _ in strong)
    onto_final = {(i, j) for (i, j) in edges if i < 30 and j in winners}
    assert onto_final and onto_final <= strong


def test_fire_into_is_read_only():
    b = small_brain()
    b.project_star(5)
    rounds, weights = b.rounds, dict(b.edges("A", "B"))
    r = b.fire_into("A", range(30), "B")
    assert r is not None and len(r) == 30
    assert b.rounds == rounds and b.edges("A", "B") == weights


def test_inhibition_state_round_trip_and_reset_keeps_weights():
    b = small_brain()
    b.project_star(3)
    state = b.inhibition_state()
    weights = dict(b.edges("A", "B"))
    b.reset(["A"], [])
    assert b.winners("B") is None and b.is_inhibited("B") and b.is_inhibited(("A", "B"))
    assert b.edges("A", "B") == weights
    b.set_inhibition(state)
    assert b.inhibition_state() == state


def test_synapses_depend_only_on_seed():
    a, b, c = small_brain(1), small_brain(1), small_brain(2)
    for x in (a, b, c):
        x.step()
    assert a.winners("B") == b.winners("B")
    assert a.edges("A", "B") == b.edges("A", "B")
    assert a.edges("A", "B") != c.edges("A", "B")


def test_clamped_area_keeps_its_winners():
    b = small_brain()
    b.project_star(4)
    assert b.winners("A").neurons == tuple(range(30))


def test_round_and_event_counters():
    b = small_brain()
    b.project_star(3)
    assert b.rounds == 3 and b.synaptic_events > 0
    with pytest.raises(BrainError):
        b.project_star(0)


def test_random_tie_break_is_reproducible():
    x, y = small_brain(tie_break="random"), small_brain(tie_break="random")
    x.project_star(3)
    y.project_star(3)
    assert x.winners("B") == y.winners("B")
