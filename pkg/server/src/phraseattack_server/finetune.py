"""Training recipes for the served models.

Defaults follow the reference recipes (victim: lr 2e-5, 3 epochs, batch
32, classification head on the sequence-summary token; label-conditioned
MLM: lr 5e-5, batch 8, label token prepended, documents split into
sentences kept only when the victim assigns the gold label > 0.99
confidence). Toy-scale runs override the schedule, never the shape.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import torch

from .vocab import CLS, MASK, PAD, SEP, WordVocab, label_token

SENTENCE_END = {".", "!", "?"}
MAX_TOKENS = 58  # leaves room for [CLS]/label/[SEP] within 64 positions


@dataclass(frozen=True)
class VictimTrainConfig:
    learning_rate: float = 2e-5
    epochs: int = 3
    batch_size: int = 32
    seed: int = 0


@dataclass(frozen=True)
class CmlmTrainConfig:
    learning_rate: float = 5e-5
    epochs: int = 3
    batch_size: int = 8
    mask_prob: float = 0.15
    confidence_threshold: float = 0.99
    seed: int = 0


@dataclass(frozen=True)
class InfillerTrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 40
    batch_size: int = 16
    max_span: int = 3
    seed: int = 0


@dataclass(frozen=True)
class LmTrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 10
    batch_size: int = 16
    seed: int = 0


def split_into_sentences(tokens: list[str]) -> list[list[str]]:
    sentences: list[list[str]] = []
    current: list[str] = []
    for tok in tokens:
        current.append(tok)
        if tok in SENTENCE_END:
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


def pad_batch(seqs: list[list[int]], pad_id: int) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(s) for s in seqs)
    ids = torch.full((len(seqs), width), pad_id, dtype=torch.long)
    attention = torch.zeros((len(seqs), width), dtype=torch.long)
    for row, seq in enumerate(seqs):
        ids[row, : len(seq)] = torch.tensor(seq)
        attention[row, : len(seq)] = 1
    return ids, attention


def _batches(items, size):
    for i in range(0, len(items), size):
        yield items[i : i + size]


def victim_probs(victim, vocab: WordVocab, labels: list[str], segments: list[list[str]]) -> dict[str, float]:
    ids = [vocab.id(CLS)]
    type_ids = [0]
    for seg_index, segment in enumerate(segments):
        ids.extend(vocab.encode(segment[:MAX_TOKENS]))
        ids.append(vocab.id(SEP))
        type_ids.extend([seg_index] * (min(len(segment), MAX_TOKENS) + 1))
    with torch.no_grad():
        logits = victim(input_ids=torch.tensor([ids]), token_type_ids=torch.tensor([type_ids])).logits[0]
        probs = torch.softmax(logits.double(), dim=-1)
    return {label: probs[i].item() for i, label in enumerate(labels)}


def _encode_rows(vocab: WordVocab, rows):
    """[CLS] tokens [SEP] (pairs get a [SEP]-separated second segment)."""
    encoded = []
    for row in rows:
        if len(row) == 2:
            tokens, label = row
            ids = [vocab.id(CLS)] + vocab.encode(tokens[:MAX_TOKENS]) + [vocab.id(SEP)]
        else:
            premise, hypothesis, label = row
            half = MAX_TOKENS // 2
            ids = (
                [vocab.id(CLS)]
                + vocab.encode(premise[:half])
                + [vocab.id(SEP)]
                + vocab.encode(hypothesis[:half])
                + [vocab.id(SEP)]
            )
        encoded.append((ids, label))
    return encoded


def finetune_victim(victim, vocab: WordVocab, train_rows, eval_rows, config: VictimTrainConfig = VictimTrainConfig()):
    """Train the classifier head-and-body; returns the held-out accuracy."""
    if not train_rows:
        raise ValueError("empty training dataset")
    labels = vocab.labels
    label_ids = {label: i for i, label in enumerate(labels)}
    for row in list(train_rows) + list(eval_rows):
        if row[-1] not in label_ids:
            raise ValueError(f"unknown label {row[-1]!r}")

    rng = random.Random(config.seed)
    torch.manual_seed(config.seed)
    optimizer = torch.optim.AdamW(victim.parameters(), lr=config.learning_rate)
    encoded = _encode_rows(vocab, train_rows)
    victim.train()
    for _ in range(config.epochs):
        rng.shuffle(encoded)
        for batch in _batches(encoded, config.batch_size):
            ids, attention = pad_batch([ids for ids, _ in batch], vocab.id(PAD))
            y = torch.tensor([label_ids[label] for _, label in batch])
            loss = victim(input_ids=ids, attention_mask=attention, labels=y).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    victim.eval()

    correct = 0
    for batch in _batches(_encode_rows(vocab, eval_rows), config.batch_size):
        ids, attention = pad_batch([ids for ids, _ in batch], vocab.id(PAD))
        with torch.no_grad():
            pred = victim(input_ids=ids, attention_mask=attention).logits.argmax(-1)
        correct += (pred == torch.tensor([label_ids[label] for _, label in batch])).sum().item()
    accuracy = correct / max(len(eval_rows), 1)
    return {"accuracy": accuracy, "train_size": len(train_rows), "eval_size": len(eval_rows)}


def build_cmlm_corpus(rows, vocab: WordVocab, victim, config: CmlmTrainConfig):
    """Label-conditioned MLM samples from raw rows.

    Single-text rows are split into sentences and kept only when the victim
    is confident they carry the document's gold label; pair rows are used
    whole with a [SEP] [SEP] separator.
    """
    labels = vocab.labels
    seen_labels = {row[-1] for row in rows}
    if len(seen_labels) < 2:
        raise ValueError("label-conditioned MLM needs at least two classes in the data")
    per_class = {label: 0 for label in seen_labels}
    samples = []
    for row in rows:
        if len(row) == 3:
            premise, hypothesis, label = row
            half = MAX_TOKENS // 2
            ids = (
                [vocab.id(CLS), vocab.id(label_token(label))]
                + vocab.encode(premise[:half])
                + [vocab.id(SEP), vocab.id(SEP)]
                + vocab.encode(hypothesis[:half])
                + [vocab.id(SEP)]
            )
            samples.append(ids)
            per_class[label] += 1
            continue
        tokens, label = row
        for sentence in split_into_sentences(tokens):
            confidence = victim_probs(victim, vocab, labels, [sentence])[label]
            if confidence <= config.confidence_threshold:
                continue
            ids = (
                [vocab.id(CLS), vocab.id(label_token(label))]
                + vocab.encode(sentence[:MAX_TOKENS])
                + [vocab.id(SEP)]
            )
            samples.append(ids)
            per_class[label] += 1
    for label, count in per_class.items():
        if count == 0:
            raise RuntimeError(
                f"confidence filter left zero sentences for class {label!r}; "
                "lower the threshold or provide more data"
            )
    return samples


def _mask_sample(ids: list[int], vocab: WordVocab, rng: random.Random, mask_prob: float):
    """Mask content positions (everything after [CLS]+label, before final [SEP])."""
    maskable = list(range(2, len(ids) - 1))
    target = [-100] * len(ids)
    masked = list(ids)
    if not maskable:
        return masked, target
    count = max(1, int(mask_prob * len(maskable)))
    for position in rng.sample(maskable, min(count, len(maskable))):
        target[position] = ids[position]
        masked[position] = vocab.id(MASK)
    return masked, target


def masked_perplexity(cmlm, vocab: WordVocab, samples: list[list[int]], seed: int = 1234, mask_prob: float = 0.15) -> float:
    """exp(mean NLL) over deterministically masked validation positions."""
    rng = random.Random(seed)
    cmlm.eval()
    total_nll, total_count = 0.0, 0
    with torch.no_grad():
        for batch in _batches(samples, 16):
            pairs = [_mask_sample(ids, vocab, rng, mask_prob) for ids in batch]
            ids, attention = pad_batch([m for m, _ in pairs], vocab.id(PAD))
            target = torch.full_like(ids, -100)
            for row, (_, tgt) in enumerate(pairs):
                target[row, : len(tgt)] = torch.tensor(tgt)
            logits = cmlm(input_ids=ids, attention_mask=attention).logits
            loss = torch.nn.functional.cross_entropy(
                logits.view(-1, logits.size(-1)), target.view(-1), ignore_index=-100, reduction="sum"
            )
            total_nll += loss.item()
            total_count += (target != -100).sum().item()
    return math.exp(total_nll / max(total_count, 1))


def finetune_cmlm(cmlm, vocab: WordVocab, rows, victim, config: CmlmTrainConfig = CmlmTrainConfig(), eval_rows=None):
    """Masked-LM training over label-token-prepended samples.

    Returns masked perplexity on the validation samples before and after.
    """
    if not rows:
        raise ValueError("empty training dataset")
    samples = build_cmlm_corpus(rows, vocab, victim, config)
    eval_samples = build_cmlm_corpus(eval_rows, vocab, victim, config) if eval_rows else samples[: max(1, len(samples) // 5)]

    ppl_before = masked_perplexity(cmlm, vocab, eval_samples)
    rng = random.Random(config.seed)
    torch.manual_seed(config.seed)
    optimizer = torch.optim.AdamW(cmlm.parameters(), lr=config.learning_rate)
    cmlm.train()
    for _ in range(config.epochs):
        rng.shuffle(samples)
        for batch in _batches(samples, config.batch_size):
            pairs = [_mask_sample(ids, vocab, rng, config.mask_prob) for ids in batch]
            ids, attention = pad_batch([m for m, _ in pairs], vocab.id(PAD))
            target = torch.full_like(ids, -100)
            for row, (_, tgt) in enumerate(pairs):
                target[row, : len(tgt)] = torch.tensor(tgt)
            loss = cmlm(input_ids=ids, attention_mask=attention, labels=target).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    cmlm.eval()
    ppl_after = masked_perplexity(cmlm, vocab, eval_samples)
    return {
        "samples": len(samples),
        "masked_ppl_before": ppl_before,
        "masked_ppl_after": ppl_after,
    }


def pretrain_infiller(infiller, vocab: WordVocab, corpora, config: InfillerTrainConfig = InfillerTrainConfig()):
    """Denoising pretraining: one contiguous span becomes a single [MASK];
    the target reconstructs the whole sequence."""
    from .vocab import BOS, EOS

    if not corpora:
        raise ValueError("empty pretraining corpus")
    rng = random.Random(config.seed)
    torch.manual_seed(config.seed)
    optimizer = torch.optim.AdamW(infiller.parameters(), lr=config.learning_rate)
    sentences = [list(tokens)[:MAX_TOKENS] for tokens in corpora]
    infiller.train()
    final_loss = None
    for _ in range(config.epochs):
        rng.shuffle(sentences)
        for batch in _batches(sentences, config.batch_size):
            sources, targets = [], []
            for tokens in batch:
                span_len = rng.randint(1, min(config.max_span, len(tokens)))
                start = rng.randrange(len(tokens) - span_len + 1)
                corrupted = tokens[:start] + [MASK] + tokens[start + span_len :]
                sources.append([vocab.id(BOS)] + vocab.encode(corrupted) + [vocab.id(EOS)])
                targets.append([vocab.id(BOS)] + vocab.encode(tokens) + [vocab.id(EOS)])
            ids, attention = pad_batch(sources, vocab.id(PAD))
            width = max(len(t) for t in targets)
            labels = torch.full((len(targets), width), -100, dtype=torch.long)
            for row, tgt in enumerate(targets):
                labels[row, : len(tgt)] = torch.tensor(tgt)
            loss = infiller(input_ids=ids, attention_mask=attention, labels=labels).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            final_loss = loss.item()
    infiller.eval()
    return {"final_loss": final_loss, "sentences": len(sentences)}


def pretrain_lm(lm, vocab: WordVocab, corpora, config: LmTrainConfig = LmTrainConfig()):
    from .vocab import BOS

    if not corpora:
        raise ValueError("empty pretraining corpus")
    rng = random.Random(config.seed)
    torch.manual_seed(config.seed)
    optimizer = torch.optim.AdamW(lm.parameters(), lr=config.learning_rate)
    sentences = [list(tokens)[:MAX_TOKENS] for tokens in corpora]
    lm.train()
    for _ in range(config.epochs):
        rng.shuffle(sentences)
        for batch in _batches(sentences, config.batch_size):
            seqs = [[vocab.id(BOS)] + vocab.encode(tokens) for tokens in batch]
            ids, attention = pad_batch(seqs, vocab.id(PAD))
            labels = ids.masked_fill(attention == 0, -100)
            loss = lm(input_ids=ids, attention_mask=attention, labels=labels).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
    lm.eval()
    return {"sentences": len(sentences)}
