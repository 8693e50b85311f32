"""Deterministic in-process mock backends.

Every mock is a pure function of (request, seed): repeated engine runs
with fixed seeds are byte-identical. The same objects back the in-process
transport and the ``mock-serve`` HTTP server.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field

from ..errors import UnknownLabel
from ..syntax import format_ptb
from ..text import Tokens
from .types import canonical_json


def softmax(scores: dict[str, float]) -> dict[str, float]:
    peak = max(scores.values())
    exps = {label: math.exp(s - peak) for label, s in scores.items()}
    total = sum(exps.values())
    return {label: e / total for label, e in exps.items()}


@dataclass
class MockVictim:
    """Bag-of-words linear classifier: softmax(bias + sum of token weights).

    Tokens without a weight contribute nothing, so masking or replacing
    non-keyword tokens leaves the distribution exactly unchanged.
    """

    labels: tuple[str, ...]
    weights: dict[str, dict[str, float]] = field(default_factory=dict)
    bias: dict[str, float] = field(default_factory=dict)

    def classify(self, segments: list[list[str]]) -> dict[str, float]:
        scores = {}
        for label in self.labels:
            score = self.bias.get(label, 0.0)
            table = self.weights.get(label, {})
            for segment in segments:
                for token in segment:
                    score += table.get(token, 0.0)
            scores[label] = score
        return softmax(scores)


@dataclass
class MockTableInfiller:
    """Fill lookup keyed on (last left-context token, first right-context token).

    Falls back to ``default`` fills; output is truncated to num_samples and
    filtered to the requested length bound.
    """

    rules: list[tuple[str, str, list[Tokens]]] = field(default_factory=list)
    default: list[Tokens] = field(default_factory=list)

    def infill(self, left: list[str], right: list[str], max_fill_len: int, num_samples: int) -> list[Tokens]:
        left_last = left[-1] if left else ""
        right_first = right[0] if right else ""
        fills = self.default
        for rule_left, rule_right, rule_fills in self.rules:
            if rule_left == left_last and rule_right == right_first:
                fills = rule_fills
                break
        bounded = [f for f in fills if 1 <= len(f) <= max_fill_len]
        return bounded[:num_samples]


@dataclass
class MockSamplingInfiller:
    """Seeded random fills drawn from a fixed vocabulary.

    The RNG is derived from a content hash of the whole request, so equal
    requests (same seed included) get equal fills and different seeds get
    independent draws.
    """

    vocab: tuple[str, ...]

    def infill(self, left: list[str], right: list[str], max_fill_len: int, num_samples: int, top_k: int, seed: int) -> list[Tokens]:
        request = {
            "left": left,
            "right": right,
            "max_fill_len": max_fill_len,
            "num_samples": num_samples,
            "top_k": top_k,
            "seed": seed,
        }
        digest = hashlib.sha256(canonical_json(request).encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        pool = self.vocab[: max(1, min(top_k, len(self.vocab)))]
        fills = []
        for _ in range(num_samples):
            length = rng.randint(1, max_fill_len)
            fills.append(tuple(rng.choice(pool) for _ in range(length)))
        return fills


@dataclass
class MockCmlm:
    """Per-class unigram tables with a floor for unknown tokens."""

    labels: tuple[str, ...]
    tables: dict[str, dict[str, float]]
    floor: float = 1e-6

    def token_prob(self, tokens: list[str], masked_index: int, label: str) -> float:
        if label not in self.labels:
            raise UnknownLabel(f"label {label!r} not in {self.labels}")
        token = tokens[masked_index]
        return self.tables.get(label, {}).get(token, self.floor)


@dataclass
class MockParser:
    """Tree lookup by exact token sequence, with a flat fallback tree."""

    trees: dict[str, str] = field(default_factory=dict)

    def parse(self, tokens: list[str]) -> str:
        key = " ".join(tokens)
        if key in self.trees:
            return self.trees[key]
        from ..syntax import Leaf, ParseTree

        preterminals = tuple(ParseTree("X", (Leaf(i, tok),)) for i, tok in enumerate(tokens))
        return format_ptb(ParseTree("S", preterminals))


@dataclass
class MockPerplexity:
    base: float = 40.0
    per_token: float = 0.5

    def perplexity(self, tokens: list[str]) -> float:
        return self.base + self.per_token * len(tokens)


@dataclass
class MockBackends:
    """A full backend set plus the server-side protocol dispatch."""

    labels: tuple[str, ...]
    victim: MockVictim
    infiller: MockTableInfiller | MockSamplingInfiller
    cmlm: MockCmlm
    parser: MockParser = field(default_factory=MockParser)
    perplexity: MockPerplexity | None = None

    def handle(self, endpoint: str, payload: dict) -> dict:
        if endpoint == "/v1/classify":
            return {"probs": self.victim.classify(payload["segments"])}
        if endpoint == "/v1/classify_batch":
            return {"results": [{"probs": self.victim.classify(item["segments"])} for item in payload["items"]]}
        if endpoint == "/v1/infill":
            if isinstance(self.infiller, MockSamplingInfiller):
                fills = self.infiller.infill(
                    payload["left"],
                    payload["right"],
                    payload["max_fill_len"],
                    payload["num_samples"],
                    payload["top_k"],
                    payload["seed"],
                )
            else:
                fills = self.infiller.infill(
                    payload["left"], payload["right"], payload["max_fill_len"], payload["num_samples"]
                )
            return {"fills": [list(f) for f in fills]}
        if endpoint == "/v1/cmlm":
            prob = self.cmlm.token_prob(payload["tokens"], payload["masked_index"], payload["label"])
            return {"prob": prob}
        if endpoint == "/v1/cmlm_batch":
            return {
                "results": [
                    {"prob": self.cmlm.token_prob(item["tokens"], item["masked_index"], item["label"])}
                    for item in payload["items"]
                ]
            }
        if endpoint == "/v1/parse":
            return {"tree": self.parser.parse(payload["tokens"])}
        if endpoint == "/v1/perplexity":
            if self.perplexity is None:
                raise ValueError("no perplexity backend configured")
            return {"ppl": self.perplexity.perplexity(payload["tokens"])}
        raise ValueError(f"unknown endpoint {endpoint}")


def _parse_fill_list(raw: list) -> list[Tokens]:
    return [tuple(entry.split()) if isinstance(entry, str) else tuple(entry) for entry in raw]


def mock_backends_from_spec(spec: dict) -> MockBackends:
    """Build mock backends from the committed JSON mock-spec format."""
    labels = tuple(spec["labels"])
    victim_spec = spec.get("victim", {})
    victim = MockVictim(
        labels=labels,
        weights={lab: dict(tab) for lab, tab in victim_spec.get("weights", {}).items()},
        bias=dict(victim_spec.get("bias", {})),
    )
    infill_spec = spec.get("infill", {})
    if "vocab" in infill_spec:
        infiller: MockTableInfiller | MockSamplingInfiller = MockSamplingInfiller(vocab=tuple(infill_spec["vocab"]))
    else:
        rules = [
            (rule["left"], rule["right"], _parse_fill_list(rule["fills"]))
            for rule in infill_spec.get("rules", [])
        ]
        infiller = MockTableInfiller(rules=rules, default=_parse_fill_list(infill_spec.get("default", [])))
    cmlm_spec = spec.get("cmlm", {})
    cmlm = MockCmlm(
        labels=labels,
        tables={lab: dict(tab) for lab, tab in cmlm_spec.get("tables", {}).items()},
        floor=float(cmlm_spec.get("floor", 1e-6)),
    )
    parser = MockParser(trees=dict(spec.get("parse", {}).get("trees", {})))
    if "perplexity" in spec:
        ppl_spec = spec["perplexity"]
        perplexity = MockPerplexity(
            base=float(ppl_spec.get("base", 40.0)), per_token=float(ppl_spec.get("per_token", 0.5))
        )
    else:
        perplexity = None
    return MockBackends(
        labels=labels, victim=victim, infiller=infiller, cmlm=cmlm, parser=parser, perplexity=perplexity
    )
