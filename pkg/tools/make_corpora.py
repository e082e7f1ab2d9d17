"""Regenerate the shipped reference corpora from bracketed sources.

Expected trees come from the grammar oracle in tests/oracles.py, which knows
nothing about the parser.  Run from the repository root:

    python tools/make_corpora.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import oracle  # noqa: E402

DATA = ROOT / "src" / "asmparse" / "data"

# pattern id, pattern, two sources
CONSTITUENCY = [
    ("C01", "N Vi", ["dogs run", "birds sing"]),
    ("C02", "N Vt N", ["dogs chase cats", "kids love horses"]),
    ("C03", "D N Vi", ["the dogs bark", "some birds sing"]),
    ("C04", "D N Vt D N", ["the kids watch the birds", "some cats see the mice"]),
    ("C05", "D A N Vi", ["the old horses sleep", "some happy kids play"]),
    ("C06", "D A N Vt D A N", ["the big dogs chase the small cats",
                               "the angry birds bite the old horses"]),
    ("C07", "N Adv Vi", ["dogs often bark", "kids quickly hide"]),
    ("C08", "N Vi Adv", ["birds sing loudly", "horses run slowly"]),
    ("C09", "N Adv Vt N", ["cats often watch birds", "dogs quickly chase mice"]),
    ("C10", "D N Vt D N Adv", ["the cats eat the mice slowly", "the kids like the dogs often"]),
    ("C11", "N Vi P N", ["kids play in parks", "dogs sleep near trees"]),
    ("C12", "D N Vi P D N", ["the birds sing in the tree", "some kids hide near the house"]),
    ("C13", "N Vt N P D N", ["dogs chase cats in the park", "kids watch horses near the tree"]),
    ("C14", "D N Vi P D A N", ["the dogs run in the big park", "the mice hide near the old house"]),
    ("C15", "A N Vt N", ["big dogs chase cats", "happy kids love birds"]),
    ("C16", "N Vt A N", ["cats see small birds", "dogs bite angry cats"]),
    ("C17", "D N Adv Vt D N", ["the dogs often chase the cats", "some cats slowly watch the mice"]),
    ("C18", "D A N Vi Adv P D N", ["the small birds sing loudly in the tree",
                                   "the happy kids play often near the house"]),
    ("C19", "N Vt D A N P N", ["kids see the big horses in parks",
                               "cats watch the small mice near trees"]),
    ("C20", "D A N Adv Vt D A N P D N", ["the big dogs quickly chase the small cats in the park",
                                         "the angry birds often watch the happy kids near the house"]),
]

EMBEDDING = [
    ("E1", "single clause", 0, ["dogs chase cats", "the kids love the old horses",
                                "birds sing in the tree", "the angry dogs bark loudly"]),
    ("E2", "subordinate clause inside the subject", 1,
     ["dogs [when they run] chase cats", "kids [if they play] love dogs",
      "cats [because they hide] sleep", "the dogs [when they see cats] bark"]),
    ("E3", "relative clause on the object", 1,
     ["dogs chase cats [that sleep]", "kids love birds [which sing]",
      "the cats watch the mice [that hide]", "horses see dogs [who bark]"]),
    ("E4", "relative clause inside the subject", 1,
     ["dogs [that bark] chase cats", "kids [who play] love horses",
      "birds [which sing] sleep", "the cats [that hide] watch the mice"]),
    ("E5", "two levels of embedding", 2,
     ["dogs [when they see cats [which sleep]] run", "dogs chase cats [that see birds [which sing]]",
      "kids [who love dogs [that bark]] play", "birds [which see cats [that chase mice]] sing"]),
]


def _edges(exp):
    return [{"head": h, "dep": d, "label": l} for h, d, l in sorted(exp.edges)]


def dependency_json(exp):
    return {"nodes": [{"id": i, "word": w} for i, w in enumerate(exp.words)],
            "root": exp.root, "edges": _edges(exp)}


def constituency_json(exp):
    vp = [{"label": "Verb", "span": list(exp.verb)}]
    if exp.obj:
        vp.append({"label": "Obj", "span": list(exp.obj)})
    return {"words": exp.words, "label": "S",
            "children": [{"label": "Subj", "span": list(exp.subject)},
                         {"label": "VP", "children": vp}]}


def build_constituency():
    cases = []
    for pid, pattern, sources in CONSTITUENCY:
        for j, src in enumerate(sources):
            exp = oracle(src)
            cases.append({"id": f"{pid}-{j + 1}", "sentence": exp.sentence,
                          "tags": {"pattern": pid, "shape": pattern, "depth": 0},
                          "expected_dependency": dependency_json(exp),
                          "expected_constituency": constituency_json(exp)})
    return {"name": "constituency", "modes": {"constituency": True, "embedding": False},
            "cases": cases}


def build_embedding():
    cases = []
    for sid, desc, depth, sources in EMBEDDING:
        for j, src in enumerate(sources):
            exp = oracle(src)
            assert exp.depth == depth, src
            cases.append({"id": f"{sid}-{j + 1}", "sentence": exp.sentence, "source": src,
                          "tags": {"structure": sid, "description": desc, "depth": depth},
                          "expected_dependency": dependency_json(exp)})
    return {"name": "embedding", "modes": {"constituency": False, "embedding": True},
            "cases": cases}


def main():
    for name, corpus in (("constituency", build_constituency()), ("embedding", build_embedding())):
        path = DATA / f"{name}_corpus.json"
        path.write_text(json.dumps(corpus, indent=1, ensure_ascii=False) + "\n")
        print(f"wrote {len(corpus['cases'])} cases to {path.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
