"""Synthetic two-class corpus and the end-to-end toy model-set build.

The two classes use disjoint content vocabularies over shared function
words, so class membership of any content word is unambiguous. That makes
the corpus a controlled probe for the label-conditioned MLM: in-class
fills should score far above out-of-class fills.
"""

from __future__ import annotations

import json
import random

from .finetune import (
    CmlmTrainConfig,
    InfillerTrainConfig,
    LmTrainConfig,
    VictimTrainConfig,
    finetune_cmlm,
    finetune_victim,
    pretrain_infiller,
    pretrain_lm,
)
from .models import ModelDims, ModelSet, build_cmlm, build_infiller, build_lm, build_victim, save_model_set
from .vocab import WordVocab

ALPHA_WORDS = [
    "breeze", "meadow", "lantern", "willow", "brook", "petal", "dawn", "fern",
    "moss", "dew", "orchard", "stream",
]
BETA_WORDS = [
    "circuit", "piston", "gear", "engine", "voltage", "turbine", "sensor", "diode",
    "rotor", "flux", "valve", "shaft",
]
FUNCTION_WORDS = ["the", "a", "near", "with", "under", "over", "then", "beside"]
TOY_LABELS = ["alpha", "beta"]

CONTENT_BY_LABEL = {"alpha": ALPHA_WORDS, "beta": BETA_WORDS}


def toy_sentence(rng: random.Random, label: str) -> list[str]:
    content = CONTENT_BY_LABEL[label]
    length = rng.randint(4, 8)
    tokens = [rng.choice(FUNCTION_WORDS) if i % 2 == 0 else rng.choice(content) for i in range(length)]
    if tokens[-1] in FUNCTION_WORDS:
        tokens[-1] = rng.choice(content)
    return tokens


def toy_corpus(seed: int = 11, per_class: int = 300):
    rng = random.Random(seed)
    rows = []
    for _ in range(per_class):
        rows.append((toy_sentence(rng, "alpha"), "alpha"))
        rows.append((toy_sentence(rng, "beta"), "beta"))
    rng.shuffle(rows)
    split = int(len(rows) * 0.8)
    return rows[:split], rows[split:]


def toy_vocab(rows) -> WordVocab:
    words = {w for tokens, _ in rows for w in tokens}
    return WordVocab.build(words, TOY_LABELS)


# schedules calibrated for from-scratch CPU training on the toy corpus
TOY_VICTIM = VictimTrainConfig(learning_rate=5e-4, epochs=20, batch_size=32, seed=0)
TOY_CMLM = CmlmTrainConfig(learning_rate=5e-4, epochs=60, batch_size=8, mask_prob=0.3, seed=0)
TOY_INFILLER = InfillerTrainConfig(learning_rate=1e-3, epochs=40, batch_size=16, max_span=3, seed=0)
TOY_LM = LmTrainConfig(learning_rate=1e-3, epochs=10, batch_size=16, seed=0)


def build_toy_model_set(out_dir: str | None = None, seed: int = 11, with_lm: bool = True, log=print):
    """Train the full toy model set from scratch; a few minutes on CPU."""
    train, test = toy_corpus(seed=seed)
    vocab = toy_vocab(train + test)
    dims = ModelDims()

    victim = build_victim(vocab, dims)
    victim_report = finetune_victim(victim, vocab, train, test, TOY_VICTIM)
    log(f"victim: accuracy {victim_report['accuracy']:.3f} on {victim_report['eval_size']} held-out rows")

    cmlm = build_cmlm(vocab, dims)
    cmlm_report = finetune_cmlm(cmlm, vocab, train, victim, TOY_CMLM, eval_rows=test)
    log(
        "cmlm: masked ppl "
        f"{cmlm_report['masked_ppl_before']:.2f} -> {cmlm_report['masked_ppl_after']:.2f} "
        f"({cmlm_report['samples']} samples)"
    )

    infiller = build_infiller(vocab, dims)
    infill_report = pretrain_infiller(infiller, vocab, [tokens for tokens, _ in train], TOY_INFILLER)
    log(f"infiller: final denoising loss {infill_report['final_loss']:.3f}")

    lm = None
    if with_lm:
        lm = build_lm(vocab, dims)
        pretrain_lm(lm, vocab, [tokens for tokens, _ in train], TOY_LM)
        log("perplexity lm: trained")

    model_set = ModelSet(vocab=vocab, victim=victim, cmlm=cmlm, infiller=infiller, lm=lm).eval()
    reports = {"victim": victim_report, "cmlm": cmlm_report, "infiller": infill_report}
    if out_dir:
        save_model_set(model_set, out_dir)
        with open(f"{out_dir}/reports.json", "w", encoding="utf-8") as fh:
            json.dump(reports, fh, indent=2)
        log(f"saved checkpoints to {out_dir}")
    return model_set, reports


def toy_dataset_jsonl(path: str, seed: int = 99, count: int = 12) -> None:
    """A small attackable dataset drawn from the toy distribution."""
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(count):
            label = TOY_LABELS[i % 2]
            tokens = toy_sentence(rng, label)
            record = {"id": f"toy{i:02d}", "text": " ".join(tokens), "label": label}
            fh.write(json.dumps(record) + "\n")
