"""Serve-time blank infilling: top-k sampled reconstructions, filtered so
the context around the blank is reproduced verbatim."""

from __future__ import annotations

import torch

from .vocab import BOS, EOS, MASK, PAD, WordVocab

GENERATION_BATCH = 64
MAX_ROUNDS = 12


def sample_fills_with_reconstructions(
    model,
    vocab: WordVocab,
    left: list[str],
    right: list[str],
    max_fill_len: int,
    num_samples: int,
    top_k: int,
    seed: int,
    batch_size: int = GENERATION_BATCH,
    max_rounds: int = MAX_ROUNDS,
) -> list[tuple[list[str], list[str]]]:
    """Unique (fill, full reconstruction) pairs.

    The model regenerates the whole sequence around a single mask; outputs
    whose context differs from the request are rejected. Sampling repeats
    in batches until ``num_samples`` unique fills or the round cap.
    """
    source = [vocab.id(BOS)] + vocab.encode(left) + [vocab.id(MASK)] + vocab.encode(right) + [vocab.id(EOS)]
    input_ids = torch.tensor([source])
    max_length = min(len(source) + max_fill_len + 2, model.config.max_position_embeddings - 1)

    accepted: list[tuple[list[str], list[str]]] = []
    seen: set[tuple[str, ...]] = set()
    torch.manual_seed(seed)
    for _ in range(max_rounds):
        if len(accepted) >= num_samples:
            break
        with torch.no_grad():
            generated = model.generate(
                input_ids,
                do_sample=True,
                top_k=max(1, top_k),
                max_length=max_length,
                num_return_sequences=batch_size,
                pad_token_id=vocab.id(PAD),
            )
        for row in generated.tolist():
            tokens = vocab.decode(row)
            if len(tokens) < len(left) + len(right) + 1:
                continue
            if tokens[: len(left)] != list(left):
                continue
            if right and tokens[len(tokens) - len(right) :] != list(right):
                continue
            fill = tokens[len(left) : len(tokens) - len(right)] if right else tokens[len(left) :]
            if not 1 <= len(fill) <= max_fill_len:
                continue
            key = tuple(fill)
            if key in seen:
                continue
            seen.add(key)
            accepted.append((fill, tokens))
            if len(accepted) >= num_samples:
                break
    return accepted


def sample_fills(model, vocab, left, right, max_fill_len, num_samples, top_k, seed, **kwargs) -> list[list[str]]:
    pairs = sample_fills_with_reconstructions(
        model, vocab, left, right, max_fill_len, num_samples, top_k, seed, **kwargs
    )
    return [fill for fill, _ in pairs]
