"""Wire payload types and their canonical (de)serialization.

All request bodies are JSON objects; canonical form is sorted-key,
separator-free JSON, which is also what cache keys hash.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import ProtocolError
from ..text import Tokens, validate_tokens

# Engine-side floor applied to any backend probability before taking logs.
LIKELIHOOD_FLOOR = 1e-12

PROB_SUM_TOL = 1e-6


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ClassDistribution:
    """Probabilities over the full label set; validated to sum to one."""

    probs: dict[str, float]

    def __post_init__(self) -> None:
        if not self.probs:
            raise ProtocolError("class distribution is empty")
        total = 0.0
        for label, p in self.probs.items():
            if not 0.0 <= p <= 1.0:
                raise ProtocolError(f"probability {p} for label {label!r} outside [0, 1]")
            total += p
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ProtocolError(f"class probabilities sum to {total}, not 1")

    def prob(self, label: str) -> float:
        if label not in self.probs:
            raise ProtocolError(f"label {label!r} missing from distribution")
        return self.probs[label]

    def argmax(self) -> str:
        # Ties break toward the lexicographically first label id.
        return max(sorted(self.probs), key=lambda lab: self.probs[lab])

    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(self.probs))

    @staticmethod
    def from_wire(payload: dict) -> "ClassDistribution":
        probs = payload.get("probs")
        if not isinstance(probs, dict):
            raise ProtocolError("classify response missing 'probs' object")
        try:
            return ClassDistribution({str(k): float(v) for k, v in probs.items()})
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"bad probability value: {exc}") from exc


@dataclass(frozen=True)
class InfillRequest:
    """Blank-infilling request: fill the gap between left and right context."""

    left: Tokens
    right: Tokens
    max_fill_len: int
    num_samples: int
    top_k: int
    seed: int

    def __post_init__(self) -> None:
        if self.max_fill_len < 1:
            raise ValueError("max_fill_len must be >= 1")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    def to_wire(self) -> dict:
        return {
            "left": list(self.left),
            "right": list(self.right),
            "max_fill_len": self.max_fill_len,
            "num_samples": self.num_samples,
            "top_k": self.top_k,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class InfillResponse:
    fills: tuple[Tokens, ...]

    @staticmethod
    def from_wire(payload: dict, max_fill_len: int) -> "InfillResponse":
        raw = payload.get("fills")
        if not isinstance(raw, list):
            raise ProtocolError("infill response missing 'fills' list")
        fills: list[Tokens] = []
        for item in raw:
            if not isinstance(item, list) or not all(isinstance(t, str) for t in item):
                raise ProtocolError("each fill must be a list of strings")
            if not 1 <= len(item) <= max_fill_len:
                raise ProtocolError(f"fill length {len(item)} outside [1, {max_fill_len}]")
            fills.append(validate_tokens(tuple(item)))
        return InfillResponse(tuple(fills))


@dataclass(frozen=True)
class CmlmQuery:
    """Ask the class-conditioned MLM for the probability of one token.

    ``tokens`` contains the token in place; the server masks position
    ``masked_index`` itself and scores the token it saw there. Optional
    context segments carry the untouched half of a sentence pair.
    """

    tokens: Tokens
    masked_index: int
    label: str
    context_before: Tokens = field(default=())
    context_after: Tokens = field(default=())

    def __post_init__(self) -> None:
        if not 0 <= self.masked_index < len(self.tokens):
            raise ValueError(f"masked_index {self.masked_index} outside sequence")

    def to_wire(self) -> dict:
        payload = {
            "tokens": list(self.tokens),
            "masked_index": self.masked_index,
            "label": self.label,
        }
        if self.context_before:
            payload["context_before"] = list(self.context_before)
        if self.context_after:
            payload["context_after"] = list(self.context_after)
        return payload


def prob_from_wire(payload: dict) -> float:
    value = payload.get("prob")
    if not isinstance(value, (int, float)):
        raise ProtocolError("cmlm response missing numeric 'prob'")
    p = float(value)
    if not 0.0 <= p <= 1.0:
        raise ProtocolError(f"cmlm probability {p} outside [0, 1]")
    return p
