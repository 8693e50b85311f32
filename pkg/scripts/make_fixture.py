#!/usr/bin/env python3
"""Generate the bundled 20-example mock fixture (dataset + backend spec).

Outcome per example is fixed by construction of the mock victim weights:
- gold-neg texts carry one negative keyword inside a whitelisted phrase,
  so removing it flips the argmax to pos (bias 0.3): success.
- gold-pos texts carry a positive keyword; removing it still leaves pos
  as the argmax, so the attack exhausts its candidates: failed.
- three gold-pos texts contain a negative keyword: skipped_misclassified.
- two texts route the top-ranked phrase to a fill ("joyful") whose
  likelihood ratio under gold=neg is far below 1: an empty-filter step,
  then success on the enclosing phrase.
"""

import json
import re
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data"


def leaves(tree: str) -> list[str]:
    # terminals are the second atoms of (TAG token) pairs
    return re.findall(r"\(\s*[^\s()]+\s+([^\s()]+)\s*\)", tree)


def single(ex_id, gold, tree):
    return {"id": ex_id, "label": gold, "text": " ".join(leaves(tree)), "tree": tree}


def pair(ex_id, gold, premise_tree, hypothesis_tree):
    return {
        "id": ex_id,
        "label": gold,
        "premise": " ".join(leaves(premise_tree)),
        "hypothesis": " ".join(leaves(hypothesis_tree)),
        "premise_tree": premise_tree,
        "hypothesis_tree": hypothesis_tree,
    }


examples = [
    # --- successes: one negative keyword inside a whitelisted phrase ---
    single("s01", "neg", "(S (NP (DT the) (JJ terrible) (NN soup)) (VP (VBD arrived) (ADVP (RB late))))"),
    single("s02", "neg", "(S (NP (PRP we)) (VP (VBD endured) (NP (DT an) (JJ awful) (NN wait))))"),
    single("s03", "neg", "(S (NP (DT the) (NN disaster) (NN zone)) (VP (VBD kept) (NP (NN growing))))"),
    single(
        "s04",
        "neg",
        "(TOP (S (NP (DT the) (NN menu)) (VP (VBD felt) (ADJP (JJ stale))) (. .)) "
        "(S (NP (DT The) (NN bread)) (VP (VBD was) (NP (DT a) (NN disaster))) (. .)))",
    ),
    single("s05", "neg", "(S (NNP gorvax) (VP (VBZ stumbles) (PP (IN over) (NP (DT the) (NN counter)))))"),
    single("s06", "neg", "(S (NP (DT the) (NN meal)) (VP (VBD was)) (ADJP (RB truly) (JJ awful)))"),
    single("s07", "neg", "(S (NP (DT the) (JJ awful) (NN noise)) (VP (VBD filled) (NP (DT the) (NN room))))"),
    single("s08", "neg", "(S (NP (PRP they)) (VP (VBD served) (NP (NP (DT a) (NN plate)) (PP (IN of) (NP (NN disaster))))))"),
    # --- failures: positive keyword, removal never flips toward neg ---
    single("f01", "pos", "(S (NP (DT the) (JJ delightful) (NN patio)) (VP (VBD glowed) (PP (IN at) (NP (NN dusk)))))"),
    single("f02", "pos", "(S (NP (DT the) (NN chef)) (VP (VBD plated) (NP (DT a) (JJ superb) (NN stew))))"),
    single("f03", "pos", "(S (NP (PRP we)) (VP (VBD admired) (NP (DT the) (JJ delightful) (NN garden))))"),
    single("f04", "pos", "(S (NP (DT the) (NN band)) (VP (VBD sounded) (ADJP (JJ superb))) (. .))"),
    # --- skipped: gold pos but a negative keyword dominates ---
    single("k01", "pos", "(S (NP (DT the) (JJ terrible) (NN road)) (VP (VBD led) (PP (IN to) (NP (NN town)))))"),
    single("k02", "pos", "(S (NP (DT the) (NN film)) (VP (VBD was) (NP (DT an) (JJ awful) (NN bore))))"),
    single("k03", "pos", "(S (NP (PRP it)) (VP (VBD rained) (NP (NN disaster))))"),
    # --- pairs: attack the longer hypothesis ---
    pair(
        "p01",
        "neg",
        "(S (NP (DT the) (NN review)) (VP (VBD stung)))",
        "(S (NP (DT the) (NN diner)) (VP (VBD called) (NP (DT the) (NN service)) (NP (DT a) (JJ terrible) (NN mess))))",
    ),
    pair(
        "p02",
        "neg",
        "(S (NP (NN rain)) (VP (VBD fell)))",
        "(S (NP (DT the) (NN trip)) (VP (VBD became) (NP (DT an) (JJ awful) (NN slog) (NN overall))))",
    ),
    pair(
        "p03",
        "pos",
        "(S (NP (NN sun)) (VP (VBD rose)))",
        "(S (NP (DT the) (NN morning)) (VP (VBD stayed) (ADJP (RB quite) (JJ superb))))",
    ),
    # --- empty-filter step first, then success on the enclosing phrase ---
    single(
        "e01",
        "neg",
        "(S (NP (PRP we)) (VP (VBD read) (NP (NP (DT the) (JJ grim) (NN story)) (PP (IN of) (NP (NN failure))))))",
    ),
    single(
        "e02",
        "neg",
        "(S (NP (PRP he)) (VP (VBD told) (NP (NP (DT a) (JJ grim) (NN tale)) (PP (IN about) (NP (NN money))))))",
    ),
]

mock_spec = {
    "labels": ["neg", "pos"],
    "victim": {
        "bias": {"neg": 0.0, "pos": 0.3},
        "weights": {
            "neg": {"terrible": 3.0, "awful": 3.0, "disaster": 3.0, "gorvax": 3.0, "grim": 3.0},
            "pos": {"delightful": 3.0, "superb": 3.0},
        },
    },
    "infill": {
        "default": ["plain", "rather plain", "mild and brief", "plain mild thing"],
        "rules": [
            {"left": "read", "right": "of", "fills": ["joyful"]},
            {"left": "told", "right": "about", "fills": ["joyful"]},
        ],
    },
    "cmlm": {
        "floor": 0.05,
        "tables": {
            "neg": {"joyful": 0.004, "dreadful": 0.4},
            "pos": {"joyful": 0.4, "dreadful": 0.004},
        },
    },
    "perplexity": {"base": 40.0, "per_token": 0.5},
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    dataset_path = OUT / "fixture_dataset.jsonl"
    with dataset_path.open("w", encoding="utf-8") as fh:
        for record in examples:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    spec_path = OUT / "fixture_mock_spec.json"
    with spec_path.open("w", encoding="utf-8") as fh:
        json.dump(mock_spec, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {dataset_path} ({len(examples)} examples)")
    print(f"wrote {spec_path}")


if __name__ == "__main__":
    main()
