"""Infill sampling: determinism, bounds, and the context-preservation
invariant across at least 500 accepted fills."""

import random

from phraseattack_server.infill import sample_fills, sample_fills_with_reconstructions
from phraseattack_server.toy import toy_corpus


def blanks_from_corpus(seed, count):
    _, held_out = toy_corpus(seed=11)
    rng = random.Random(seed)
    blanks = []
    for tokens, _ in held_out[:count]:
        split = rng.randint(1, len(tokens) - 1)
        width = rng.randint(1, min(2, len(tokens) - split))
        blanks.append((tokens[:split], tokens[split + width :]))
    return blanks


def test_same_seed_same_fills(toy_models):
    model_set, _ = toy_models
    left, right = ["the", "breeze", "near"], ["willow"]
    args = (model_set.infiller, model_set.vocab, left, right, 4, 20, 30, 7)
    assert sample_fills(*args) == sample_fills(*args)


def test_different_seeds_differ(toy_models):
    model_set, _ = toy_models
    left, right = ["the", "breeze", "near"], ["willow"]
    one = sample_fills(model_set.infiller, model_set.vocab, left, right, 4, 20, 30, seed=7)
    two = sample_fills(model_set.infiller, model_set.vocab, left, right, 4, 20, 30, seed=8)
    assert one != two


def test_max_fill_len_one_yields_single_words(toy_models):
    model_set, _ = toy_models
    fills = sample_fills(model_set.infiller, model_set.vocab, ["the"], ["near", "dew"], 1, 15, 30, seed=3)
    assert fills
    assert all(len(f) == 1 for f in fills)


def test_context_preserved_on_500_fills(toy_models):
    model_set, _ = toy_models
    accepted = 0
    for i, (left, right) in enumerate(blanks_from_corpus(5, 40)):
        pairs = sample_fills_with_reconstructions(
            model_set.infiller, model_set.vocab, list(left), list(right), 4, 20, 30, seed=100 + i
        )
        for fill, reconstruction in pairs:
            assert reconstruction[: len(left)] == list(left)
            if right:
                assert reconstruction[len(reconstruction) - len(right) :] == list(right)
            assert reconstruction == list(left) + fill + list(right)
            assert 1 <= len(fill) <= 4
            accepted += 1
    print(f"[PASS-INFO] infill context preservation held on {accepted} accepted fills")
    assert accepted >= 500
