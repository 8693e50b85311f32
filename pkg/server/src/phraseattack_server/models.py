"""Model construction, scoring entry points, and checkpoint layout.

Architectures are standard bidirectional-encoder / denoising-seq2seq /
causal-LM transformers sized by ``ModelDims``; the toy preset keeps them
small enough to train from scratch on CPU in minutes.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

import torch
from transformers import (
    BartConfig,
    BartForConditionalGeneration,
    BertConfig,
    BertForMaskedLM,
    BertForSequenceClassification,
    GPT2Config,
    GPT2LMHeadModel,
)

from .vocab import BOS, CLS, EOS, MASK, PAD, SEP, WordVocab, label_token


@dataclass(frozen=True)
class ModelDims:
    hidden: int = 96
    layers: int = 2
    heads: int = 4
    ffn: int = 192
    max_positions: int = 64


def build_victim(vocab: WordVocab, dims: ModelDims = ModelDims(), seed: int = 0) -> BertForSequenceClassification:
    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=dims.hidden,
        num_hidden_layers=dims.layers,
        num_attention_heads=dims.heads,
        intermediate_size=dims.ffn,
        max_position_embeddings=dims.max_positions,
        num_labels=len(vocab.labels),
        pad_token_id=vocab.id(PAD),
    )
    return BertForSequenceClassification(config)


def build_cmlm(vocab: WordVocab, dims: ModelDims = ModelDims(), seed: int = 1) -> BertForMaskedLM:
    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=dims.hidden,
        num_hidden_layers=dims.layers,
        num_attention_heads=dims.heads,
        intermediate_size=dims.ffn,
        max_position_embeddings=dims.max_positions,
        pad_token_id=vocab.id(PAD),
    )
    return BertForMaskedLM(config)


def build_infiller(vocab: WordVocab, dims: ModelDims = ModelDims(), seed: int = 2) -> BartForConditionalGeneration:
    torch.manual_seed(seed)
    config = BartConfig(
        vocab_size=len(vocab),
        d_model=dims.hidden,
        encoder_layers=dims.layers,
        decoder_layers=dims.layers,
        encoder_attention_heads=dims.heads,
        decoder_attention_heads=dims.heads,
        encoder_ffn_dim=dims.ffn,
        decoder_ffn_dim=dims.ffn,
        max_position_embeddings=dims.max_positions,
        pad_token_id=vocab.id(PAD),
        bos_token_id=vocab.id(BOS),
        eos_token_id=vocab.id(EOS),
        decoder_start_token_id=vocab.id(BOS),
        forced_eos_token_id=vocab.id(EOS),
    )
    return BartForConditionalGeneration(config)


def build_lm(vocab: WordVocab, dims: ModelDims = ModelDims(), seed: int = 3) -> GPT2LMHeadModel:
    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=len(vocab),
        n_embd=dims.hidden,
        n_layer=dims.layers,
        n_head=dims.heads,
        n_positions=dims.max_positions,
        bos_token_id=vocab.id(BOS),
        eos_token_id=vocab.id(EOS),
    )
    return GPT2LMHeadModel(config)


@dataclass
class ModelSet:
    """Everything the service serves, plus a lock for seeded generation."""

    vocab: WordVocab
    victim: BertForSequenceClassification
    cmlm: BertForMaskedLM
    infiller: BartForConditionalGeneration
    lm: GPT2LMHeadModel | None = None
    generation_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def labels(self) -> list[str]:
        return self.vocab.labels

    def eval(self) -> "ModelSet":
        for model in (self.victim, self.cmlm, self.infiller, self.lm):
            if model is not None:
                model.eval()
        return self


def _check_length(ids: list[int], limit: int) -> None:
    if len(ids) > limit:
        raise ValueError(f"sequence of {len(ids)} model tokens exceeds the {limit}-position window")


def classify_probs(model_set: ModelSet, segments: list[list[str]]) -> dict[str, float]:
    """Victim probabilities over the label set for 1 or 2 word segments."""
    if not 1 <= len(segments) <= 2 or any(not seg for seg in segments):
        raise ValueError("classify needs 1 or 2 non-empty segments")
    vocab = model_set.vocab
    ids = [vocab.id(CLS)]
    type_ids = [0]
    for seg_index, segment in enumerate(segments):
        ids.extend(vocab.encode(segment))
        ids.append(vocab.id(SEP))
        type_ids.extend([seg_index] * (len(segment) + 1))
    _check_length(ids, model_set.victim.config.max_position_embeddings)
    with torch.no_grad():
        logits = model_set.victim(
            input_ids=torch.tensor([ids]), token_type_ids=torch.tensor([type_ids])
        ).logits[0]
        probs = torch.softmax(logits.double(), dim=-1)
    probs = probs / probs.sum()
    return {label: probs[i].item() for i, label in enumerate(model_set.labels)}


def cmlm_token_prob(
    model_set: ModelSet,
    tokens: list[str],
    masked_index: int,
    label: str,
    context_before: list[str] | None = None,
    context_after: list[str] | None = None,
) -> float:
    """P(token at masked_index | label-conditioned context).

    Input layouts mirror fine-tuning: "<label> tokens" for single texts and
    "<label> A [SEP] [SEP] B" for pairs.
    """
    if label not in model_set.labels:
        raise KeyError(label)
    if not 0 <= masked_index < len(tokens):
        raise ValueError(f"masked_index {masked_index} out of range")
    vocab = model_set.vocab
    ids = [vocab.id(CLS), vocab.id(label_token(label))]
    if context_before:
        ids.extend(vocab.encode(context_before))
        ids.extend([vocab.id(SEP), vocab.id(SEP)])
    mask_position = len(ids) + masked_index
    target_id = vocab.id(tokens[masked_index])
    ids.extend(vocab.encode(tokens))
    if context_after:
        ids.extend([vocab.id(SEP), vocab.id(SEP)])
        ids.extend(vocab.encode(context_after))
    ids.append(vocab.id(SEP))
    ids[mask_position] = vocab.id(MASK)
    _check_length(ids, model_set.cmlm.config.max_position_embeddings)
    with torch.no_grad():
        logits = model_set.cmlm(input_ids=torch.tensor([ids])).logits[0, mask_position]
        probs = torch.softmax(logits.double(), dim=-1)
    return float(probs[target_id].item())


def sequence_perplexity(model_set: ModelSet, tokens: list[str]) -> float:
    if model_set.lm is None:
        raise RuntimeError("no perplexity model configured")
    if not tokens:
        raise ValueError("perplexity needs a non-empty sequence")
    vocab = model_set.vocab
    ids = torch.tensor([[vocab.id(BOS)] + vocab.encode(tokens)])
    with torch.no_grad():
        out = model_set.lm(input_ids=ids, labels=ids)
    return float(torch.exp(out.loss).item())


def save_model_set(model_set: ModelSet, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    model_set.vocab.save(os.path.join(directory, "vocab.json"))
    model_set.victim.save_pretrained(os.path.join(directory, "victim"))
    model_set.cmlm.save_pretrained(os.path.join(directory, "cmlm"))
    model_set.infiller.save_pretrained(os.path.join(directory, "infiller"))
    meta = {"has_lm": model_set.lm is not None}
    if model_set.lm is not None:
        model_set.lm.save_pretrained(os.path.join(directory, "lm"))
    with open(os.path.join(directory, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh)


def load_model_set(directory: str) -> ModelSet:
    vocab = WordVocab.load(os.path.join(directory, "vocab.json"))
    with open(os.path.join(directory, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    model_set = ModelSet(
        vocab=vocab,
        victim=BertForSequenceClassification.from_pretrained(os.path.join(directory, "victim")),
        cmlm=BertForMaskedLM.from_pretrained(os.path.join(directory, "cmlm")),
        infiller=BartForConditionalGeneration.from_pretrained(os.path.join(directory, "infiller")),
        lm=GPT2LMHeadModel.from_pretrained(os.path.join(directory, "lm")) if meta.get("has_lm") else None,
    )
    return model_set.eval()
