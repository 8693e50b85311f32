"""Dataset ingestion and result-record serialization (line-delimited JSON).

Record schema: {id, text, label} or {id, premise, hypothesis, label},
optionally carrying precomputed PTB trees as {tree} or
{premise_tree, hypothesis_tree}.
"""

from __future__ import annotations

import json
import logging
import random
from collections.abc import Sequence

from .attack import AttackResult, AttackStatus, AttackStep, FillCandidate
from .errors import ParseError, UnknownLabel
from .syntax import PhraseCandidate
from .text import LabeledExample, Span, tokenize

log = logging.getLogger(__name__)


def _example_from_record(record: dict, line_number: int) -> LabeledExample:
    if not isinstance(record, dict):
        raise ParseError("record is not a JSON object", line_number)
    try:
        example_id = str(record["id"])
        label = str(record["label"])
    except KeyError as exc:
        raise ParseError(f"missing field {exc}", line_number) from exc
    if "text" in record:
        segments = (tokenize(record["text"]),)
        trees = (record.get("tree"),)
    elif "premise" in record and "hypothesis" in record:
        segments = (tokenize(record["premise"]), tokenize(record["hypothesis"]))
        trees = (record.get("premise_tree"), record.get("hypothesis_tree"))
    else:
        raise ParseError("record needs 'text' or 'premise'+'hypothesis'", line_number)
    return LabeledExample(id=example_id, segments=segments, gold=label, trees=trees)


def load_dataset(
    path: str, limit: int | None = None, seed: int = 0, labels: Sequence[str] | None = None
) -> list[LabeledExample]:
    """Load examples, optionally down-sampling to ``limit`` without replacement.

    Sampling is seeded and keeps file order. Labels are validated against
    ``labels`` when given.
    """
    examples: list[LabeledExample] = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line_number) from exc
            example = _example_from_record(record, line_number)
            if labels is not None and example.gold not in labels:
                raise UnknownLabel(f"line {line_number}: label {example.gold!r} not in {tuple(labels)}")
            examples.append(example)
    if limit is not None and limit < 1:
        raise ValueError("limit must be >= 1")
    if limit is not None:
        if limit >= len(examples):
            if limit > len(examples):
                log.warning("limit %d exceeds dataset size %d; using all records", limit, len(examples))
        else:
            indices = sorted(random.Random(seed).sample(range(len(examples)), limit))
            examples = [examples[i] for i in indices]
    return examples


def result_to_record(result: AttackResult, ppl: float | None = None) -> dict:
    """Flatten an AttackResult into a JSON-serializable record."""
    example = result.example
    steps = [
        {
            "index": step.index,
            "tag": step.target.tag,
            "span": [step.target.span.start, step.target.span.end],
            "phrase": list(step.target.phrase),
            "depth": step.target.depth,
            "importance": step.target.importance,
            "fills_generated": step.fills_generated,
            "fills_surviving": step.fills_surviving_filter,
            "chosen": list(step.chosen.tokens) if step.chosen else None,
            "chosen_ratio": step.chosen.ratio if step.chosen else None,
            "chosen_score": step.chosen.score if step.chosen else None,
            "victim_prob_after": step.victim_prob_after,
        }
        for step in result.steps
    ]
    return {
        "id": example.id,
        "status": result.status.value,
        "gold": example.gold,
        "segments": [list(seg) for seg in example.segments],
        "attack_segment": example.attack_segment,
        "perturbed": list(result.perturbed) if result.perturbed else None,
        "committed_spans": [[s.start, s.end] for s in result.committed_spans],
        "final_gold_prob": result.final_gold_prob,
        "steps": steps,
        "ppl": ppl,
        "error": result.error,
    }


def record_to_result(record: dict) -> AttackResult:
    """Rebuild an AttackResult (trace included) from its record."""
    example = LabeledExample(
        id=record["id"],
        segments=tuple(tuple(seg) for seg in record["segments"]),
        gold=record["gold"],
        attack_segment=record["attack_segment"],
    )
    steps = []
    for raw in record.get("steps", []):
        target = PhraseCandidate(
            phrase=tuple(raw["phrase"]),
            span=Span(raw["span"][0], raw["span"][1]),
            tag=raw["tag"],
            depth=raw["depth"],
            importance=raw["importance"],
        )
        chosen = None
        if raw.get("chosen") is not None:
            chosen = FillCandidate(
                tokens=tuple(raw["chosen"]),
                order=0,
                ratio=raw.get("chosen_ratio"),
                score=raw.get("chosen_score"),
            )
        steps.append(
            AttackStep(
                index=raw["index"],
                target=target,
                fills_generated=raw["fills_generated"],
                fills_surviving_filter=raw["fills_surviving"],
                chosen=chosen,
                victim_prob_after=raw["victim_prob_after"],
            )
        )
    return AttackResult(
        status=AttackStatus(record["status"]),
        example=example,
        perturbed=tuple(record["perturbed"]) if record.get("perturbed") else None,
        steps=tuple(steps),
        committed_spans=tuple(Span(s, e) for s, e in record.get("committed_spans", [])),
        final_gold_prob=record.get("final_gold_prob"),
        error=record.get("error"),
    )


def load_results(path: str) -> tuple[list[AttackResult], dict[str, float]]:
    """Read a results file back; returns (results, ppl values by example id)."""
    results: list[AttackResult] = []
    ppl_by_id: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line_number) from exc
            results.append(record_to_result(record))
            if record.get("ppl") is not None:
                ppl_by_id[record["id"]] = float(record["ppl"])
    return results, ppl_by_id
