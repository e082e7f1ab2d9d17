import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from asmparse.brain import AreaParams, Brain  # noqa: E402

import oracles  # noqa: E402


def explicit_case(rng: random.Random):
    """A random brain of at most 8 neurons with explicit integer weights.

    Weights are small integers and beta is 0, 0.5 or 1, so every sum the
    engine and the oracle compute is exact in floating point and ties are
    genuine ties.
    """
    names = ["A", "B", "C"][: rng.randint(1, 3)]
    sizes = {}
    budget = 8
    for i, name in enumerate(names):
        left = len(names) - i - 1
        sizes[name] = rng.randint(1, max(1, min(4, budget - left)))
        budget -= sizes[name]
    areas = {}
    for name in names:
        n = sizes[name]
        areas[name] = (n, rng.randint(1, n), rng.choice([0.0, 0.5, 1.0]), rng.choice([0.0, 0.5, 1.0]))
    fibers = [(a, b) for i, a in enumerate(names) for b in names[i + 1:] if rng.random() < 0.8]
    brain = Brain([AreaParams(a, n, k, beta, rb) for a, (n, k, beta, rb) in areas.items()],
                  fibers, p=0.5, seed=rng.randint(0, 10**6), tie_break="index")
    weights = {}
    pairs = [(a, a) for a in names] + fibers + [(b, a) for a, b in fibers]
    for src, dst in pairs:
        m = {}
        for i in range(areas[src][0]):
            for j in range(areas[dst][0]):
                if src == dst and i == j:
                    continue
                if rng.random() < 0.6:
                    m[(i, j)] = float(rng.randint(1, 3))
        brain.set_edges(src, dst, m)
        weights[(src, dst)] = m
    open_areas = {a for a in names if rng.random() < 0.8}
    open_fibers = {frozenset(f) for f in fibers if rng.random() < 0.8}
    clamped = {a for a in names if rng.random() < 0.3}
    winners = {}
    for a in names:
        n, k = areas[a][0], areas[a][1]
        winners[a] = set(rng.sample(range(n), k)) if rng.random() < 0.7 else set()
        if winners[a]:
            brain.set_winners(a, sorted(winners[a]))
    clamped = {a for a in clamped if winners[a]}
    brain.reset(open_areas, [tuple(f) for f in open_fibers], keep_winners=tuple(names))
    for a in clamped:
        brain.clamp(a)
    state = dict(areas=areas, weights=weights, winners=winners, open_areas=open_areas,
                 open_fibers=open_fibers, clamped=clamped)
    return brain, state


def compare_steps(brain: Brain, state: dict, rounds: int = 3):
    """Step engine and oracle side by side; return a list of discrepancies."""
    problems = []
    winners, weights = state["winners"], state["weights"]
    for r in range(rounds):
        winners, weights = oracles.brute_step(state["areas"], weights, winners,
                                              state["open_areas"], state["open_fibers"],
                                              state["clamped"])
        brain.step()
        for a in state["areas"]:
            got = brain.winners(a)
            got = set(got.neurons) if got is not None else set()
            if got != winners[a]:
                problems.append(f"round {r}: winners({a}) {sorted(got)} != {sorted(winners[a])}")
        for (src, dst), m in weights.items():
            if brain.edges(src, dst) != m:
                problems.append(f"round {r}: weights {src}->{dst} differ")
    return problems


@pytest.fixture
def explicit_brain_case():
    return explicit_case


# -- acceptance report -------------------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion and return the verdict."""
    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} - {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
