"""Word-level text representation: tokens, spans, labels, examples.

Every other module operates in this word-token space. Subword handling,
if any, is a model backend's private concern.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import EmptyText, SpanOutOfRange

# A token sequence is an immutable tuple of non-empty surface strings.
Tokens = tuple[str, ...]

# Characters peeled off token edges during tokenization. Committed rule
# table: edge punctuation becomes its own token, internal punctuation
# (contractions, decimals, hyphens) stays attached.
EDGE_PUNCT = frozenset(".,!?;:\"'()[]{}")

# Sentence-final tokens for the local-context segmentation rule.
SENTENCE_END = frozenset(".!?")


def tokenize(raw: str) -> Tokens:
    """Split text into word tokens: whitespace split + edge-punctuation peel.

    Deterministic; normalizes to NFC first. Raises EmptyText for empty or
    whitespace-only input.
    """
    normalized = unicodedata.normalize("NFC", raw)
    chunks = normalized.split()
    if not chunks:
        raise EmptyText("cannot tokenize empty or whitespace-only text")
    tokens: list[str] = []
    for chunk in chunks:
        head: list[str] = []
        tail: list[str] = []
        while len(chunk) > 1 and chunk[0] in EDGE_PUNCT:
            head.append(chunk[0])
            chunk = chunk[1:]
        while len(chunk) > 1 and chunk[-1] in EDGE_PUNCT:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(head)
        tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tuple(tokens)


def detokenize(tokens: Tokens) -> str:
    """Inverse of tokenize up to whitespace normalization."""
    return " ".join(tokens)


def validate_tokens(tokens: Tokens) -> Tokens:
    """Check the token invariants (non-empty, no internal whitespace)."""
    for tok in tokens:
        if not tok or tok.split() != [tok]:
            raise ValueError(f"invalid token {tok!r}")
    return tokens


@dataclass(frozen=True, order=True)
class Span:
    """Inclusive token-index range [start, end] within some sequence."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span ({self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def intersects(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end

    def shifted(self, delta: int) -> "Span":
        return Span(self.start + delta, self.end + delta)


def check_span(x: Tokens, span: Span) -> None:
    if span.end >= len(x):
        raise SpanOutOfRange(f"span ({span.start}, {span.end}) outside sequence of length {len(x)}")


def slice_span(x: Tokens, span: Span) -> Tokens:
    check_span(x, span)
    return x[span.start : span.end + 1]


def apply_fill(x: Tokens, span: Span, fill: Tokens) -> Tokens:
    """Replace x[span] with ``fill``; tokens outside the span are untouched."""
    check_span(x, span)
    if not fill:
        raise ValueError("fill must be non-empty")
    return x[: span.start] + tuple(fill) + x[span.end + 1 :]


def mask_span(x: Tokens, span: Span, mask_token: str) -> Tokens:
    """Replace every token in span with mask_token (one mask per token)."""
    check_span(x, span)
    return x[: span.start] + (mask_token,) * len(span) + x[span.end + 1 :]


def blank_span(x: Tokens, span: Span) -> tuple[Tokens, Tokens]:
    """Remove x[span] entirely, returning (left context, right context)."""
    check_span(x, span)
    return x[: span.start], x[span.end + 1 :]


def split_sentences(x: Tokens) -> list[Span]:
    """Segment a sequence into sentence spans.

    A sentence ends at a '.', '!' or '?' token that is last in the sequence
    or followed by a capitalized token. Always covers the whole sequence.
    """
    spans: list[Span] = []
    start = 0
    for i, tok in enumerate(x):
        last = i == len(x) - 1
        if tok in SENTENCE_END and (last or x[i + 1][:1].isupper()):
            spans.append(Span(start, i))
            start = i + 1
    if start < len(x):
        spans.append(Span(start, len(x) - 1))
    return spans


def sentence_around(x: Tokens, span: Span) -> Span:
    """Smallest union of sentences of x covering ``span``."""
    check_span(x, span)
    covering = [s for s in split_sentences(x) if s.intersects(span)]
    return Span(covering[0].start, covering[-1].end)


@dataclass(frozen=True)
class Label:
    """A class label: opaque id plus display text."""

    id: str
    display: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("label id must be non-empty")
        if not self.display:
            object.__setattr__(self, "display", self.id)


@dataclass(frozen=True)
class LabeledExample:
    """One dataset record: 1 segment (single text) or 2 (premise, hypothesis)."""

    id: str
    segments: tuple[Tokens, ...]
    gold: str
    attack_segment: int = field(default=-1)
    trees: tuple[str | None, ...] = ()

    def __post_init__(self) -> None:
        if len(self.segments) not in (1, 2):
            raise ValueError("an example holds 1 or 2 segments")
        if not self.trees:
            object.__setattr__(self, "trees", (None,) * len(self.segments))
        if len(self.trees) != len(self.segments):
            raise ValueError("one tree slot per segment")
        if self.attack_segment == -1:
            object.__setattr__(self, "attack_segment", choose_attack_segment(self.segments))
        if not 0 <= self.attack_segment < len(self.segments):
            raise ValueError(f"attack_segment {self.attack_segment} out of range")

    @property
    def attacked(self) -> Tokens:
        return self.segments[self.attack_segment]

    def with_attacked(self, x: Tokens) -> tuple[Tokens, ...]:
        segs = list(self.segments)
        segs[self.attack_segment] = x
        return tuple(segs)


def choose_attack_segment(segments: tuple[Tokens, ...]) -> int:
    """Pick the segment to attack: the only one, or the longer of a pair.

    Equal lengths break toward segment 1 (the second sentence).
    """
    if len(segments) == 1:
        return 0
    return 0 if len(segments[0]) > len(segments[1]) else 1
