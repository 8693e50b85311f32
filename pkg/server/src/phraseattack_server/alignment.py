"""Word-to-model-token alignment, rebuilt per request via character offsets.

The protocol is word-level; the model side may tokenize differently. The
incoming words are detokenized to a string, run through the model
tokenizer (which reports character spans), and each word index is mapped
to the model-token positions whose spans overlap it. With this server's
word-level vocabulary the map is 1:1, but the algorithm does not rely on
that.
"""

from __future__ import annotations


def word_char_spans(words: list[str]) -> list[tuple[int, int]]:
    spans = []
    pos = 0
    for word in words:
        spans.append((pos, pos + len(word)))
        pos += len(word) + 1
    return spans


def align_words(words: list[str], tokenizer) -> list[list[int]]:
    """For each word, the indices of model tokens overlapping it.

    ``tokenizer.tokenize_with_offsets(text)`` must yield
    (token, char_start, char_end) triples over ``" ".join(words)``.
    """
    text = " ".join(words)
    model_spans = [(s, e) for _, s, e in tokenizer.tokenize_with_offsets(text)]
    mapping: list[list[int]] = []
    for w_start, w_end in word_char_spans(words):
        positions = [i for i, (s, e) in enumerate(model_spans) if s < w_end and w_start < e]
        if not positions:
            raise ValueError(f"word at chars [{w_start}, {w_end}) lost during model tokenization")
        mapping.append(positions)
    return mapping


def model_tokens(words: list[str], tokenizer) -> list[str]:
    return [tok for tok, _, _ in tokenizer.tokenize_with_offsets(" ".join(words))]
