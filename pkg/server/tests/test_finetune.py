import pytest

from phraseattack_server.finetune import (
    CmlmTrainConfig,
    VictimTrainConfig,
    build_cmlm_corpus,
    finetune_cmlm,
    finetune_victim,
    split_into_sentences,
)
from phraseattack_server.models import ModelDims, build_cmlm, build_victim
from phraseattack_server.toy import toy_corpus, toy_vocab


def test_split_into_sentences():
    tokens = ["a", "b", ".", "c", "!", "d"]
    assert split_into_sentences(tokens) == [["a", "b", "."], ["c", "!"], ["d"]]


def test_victim_reaches_high_accuracy(toy_models):
    _, reports = toy_models
    assert reports["victim"]["accuracy"] > 0.9


def test_cmlm_masked_perplexity_drops(toy_models):
    _, reports = toy_models
    assert reports["cmlm"]["masked_ppl_after"] < reports["cmlm"]["masked_ppl_before"]


def test_empty_dataset_rejected():
    train, test = toy_corpus(seed=1, per_class=5)
    vocab = toy_vocab(train + test)
    victim = build_victim(vocab, ModelDims())
    with pytest.raises(ValueError):
        finetune_victim(victim, vocab, [], test, VictimTrainConfig(epochs=1))


def test_unknown_label_rejected():
    train, test = toy_corpus(seed=1, per_class=5)
    vocab = toy_vocab(train + test)
    victim = build_victim(vocab, ModelDims())
    bad = [(tokens, "gamma") for tokens, _ in train[:3]]
    with pytest.raises(ValueError):
        finetune_victim(victim, vocab, bad, test, VictimTrainConfig(epochs=1))


def test_single_class_cmlm_rejected(toy_models):
    model_set, _ = toy_models
    train, _ = toy_corpus(seed=1, per_class=5)
    single = [(tokens, label) for tokens, label in train if label == "alpha"]
    cmlm = build_cmlm(model_set.vocab, ModelDims())
    with pytest.raises(ValueError):
        finetune_cmlm(cmlm, model_set.vocab, single, model_set.victim, CmlmTrainConfig(epochs=1))


def test_confidence_filter_failing_loudly(toy_models):
    model_set, _ = toy_models
    train, _ = toy_corpus(seed=1, per_class=5)
    impossible = CmlmTrainConfig(confidence_threshold=1.1)
    with pytest.raises(RuntimeError):
        build_cmlm_corpus(train, model_set.vocab, model_set.victim, impossible)


def test_confidence_filter_keeps_both_classes(toy_models):
    model_set, _ = toy_models
    train, _ = toy_corpus(seed=3, per_class=20)
    samples = build_cmlm_corpus(train, model_set.vocab, model_set.victim, CmlmTrainConfig())
    assert len(samples) > 0


def test_pair_rows_skip_splitting(toy_models):
    model_set, _ = toy_models
    pairs = [
        (["the", "breeze", "."], ["a", "meadow", ".", "then", "dew"], "alpha"),
        (["a", "gear", "."], ["the", "rotor", ".", "then", "flux"], "beta"),
    ]
    samples = build_cmlm_corpus(pairs, model_set.vocab, model_set.victim, CmlmTrainConfig())
    # one sample per pair row: internal '.' must not split them
    assert len(samples) == 2
