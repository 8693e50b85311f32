"""The phrase-level attack: importance ranking, fill generation, the
class-conditioned likelihood filter, effectiveness selection, and the
greedy perturbation loop.
"""

from __future__ import annotations

import enum
import hashlib
import math
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace

from .errors import EmptyCandidateSet, IncompleteLikelihoods, UnknownLabel
from .gateway.clients import BackendSet, CmlmClient, InfillClient, VictimClient
from .gateway.types import LIKELIHOOD_FLOOR, ClassDistribution, CmlmQuery, InfillRequest
from .syntax import DEFAULT_PHRASE_TAGS, ParseTree, PhraseCandidate, extract_candidates, prune_overlapping
from .text import LabeledExample, Span, Tokens, apply_fill, blank_span, mask_span, sentence_around, slice_span


@dataclass(frozen=True)
class AttackConfig:
    """Attack hyperparameters. Defaults are the reference operating point."""

    max_subtree_depth: int = 4        # d: depth bound for candidate phrases
    max_len_increase: int = 3         # l: fill may exceed the phrase by this many tokens
    max_perturbations: int = 11       # T: bound on greedy loop iterations
    ratio_threshold: float = 1.0      # delta: keep fills with likelihood ratio >= delta
    num_fill_candidates: int = 5000   # N: fills requested per phrase
    top_k: int = 50                   # k: sampling width requested from the infiller
    whitelist: frozenset[str] = DEFAULT_PHRASE_TAGS
    seed: int = 0
    mask_token: str = "[MASK]"

    def __post_init__(self) -> None:
        counts = (
            self.max_subtree_depth,
            self.max_len_increase,
            self.max_perturbations,
            self.num_fill_candidates,
            self.top_k,
        )
        if any(c < 1 for c in counts):
            raise ValueError("all attack counts must be >= 1")
        if self.ratio_threshold <= 0:
            raise ValueError("ratio_threshold must be > 0")
        if not self.mask_token:
            raise ValueError("mask_token must be non-empty")


@dataclass(frozen=True)
class FillCandidate:
    """One perturbation phrase with its scores as they get computed."""

    tokens: Tokens
    order: int                                   # generation order, used for tie-breaks
    log_likelihoods: Mapping[str, float] | None = None
    ratio: float | None = None
    score: float | None = None

    @property
    def length(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class AttackStep:
    """Trace of one greedy-loop iteration."""

    index: int
    target: PhraseCandidate
    fills_generated: int
    fills_surviving_filter: int
    chosen: FillCandidate | None
    victim_prob_after: float


class AttackStatus(str, enum.Enum):
    SUCCESS = "success"
    FAILED = "failed"
    SKIPPED_MISCLASSIFIED = "skipped_misclassified"
    ERRORED = "errored"


@dataclass(frozen=True)
class AttackResult:
    status: AttackStatus
    example: LabeledExample
    perturbed: Tokens | None
    steps: tuple[AttackStep, ...]
    committed_spans: tuple[Span, ...]
    final_gold_prob: float | None = None
    error: str | None = None

    @property
    def perturbed_segments(self) -> tuple[Tokens, ...] | None:
        if self.perturbed is None:
            return None
        return self.example.with_attacked(self.perturbed)


class VictimView:
    """Victim client bound to one example: classify with the attacked
    segment replaced, other segments held fixed."""

    def __init__(self, victim: VictimClient, segments: tuple[Tokens, ...], attack_segment: int):
        self._victim = victim
        self._segments = segments
        self._attack_segment = attack_segment

    def dist(self, x: Tokens) -> ClassDistribution:
        segments = list(self._segments)
        segments[self._attack_segment] = x
        return self._victim.classify(tuple(segments))


def phrase_importance(view: VictimView, x: Tokens, gold: str, span: Span, mask_token: str) -> float:
    """Drop in gold-label probability when the span is masked token-by-token."""
    original = view.dist(x).prob(gold)
    masked = view.dist(mask_span(x, span, mask_token)).prob(gold)
    return original - masked


def rank_by_importance(candidates: Sequence[PhraseCandidate]) -> list[PhraseCandidate]:
    """Sort scored candidates by descending importance.

    Ties break toward the smaller start index, then the shorter span.
    """
    for cand in candidates:
        if cand.importance is None:
            raise ValueError(f"candidate at {cand.span} has no importance score")
    return sorted(candidates, key=lambda c: (-c.importance, c.span.start, len(c.span)))


def generate_fill_set(
    infiller: InfillClient, x: Tokens, cand: PhraseCandidate, config: AttackConfig, seed: int | None = None
) -> list[FillCandidate]:
    """Blank the candidate span and collect deduplicated fills for it.

    Drops exact duplicates, fills identical to the current phrase, and
    (defensively) fills over the length bound. An empty result is valid.
    """
    left, right = blank_span(x, cand.span)
    bound = len(cand.span) + config.max_len_increase
    request = InfillRequest(
        left=left,
        right=right,
        max_fill_len=bound,
        num_samples=config.num_fill_candidates,
        top_k=config.top_k,
        seed=config.seed if seed is None else seed,
    )
    response = infiller.infill(request)
    current_phrase = slice_span(x, cand.span)
    fills: list[FillCandidate] = []
    seen: set[Tokens] = set()
    for tokens in response.fills:
        if tokens in seen or tokens == current_phrase or not 1 <= len(tokens) <= bound:
            continue
        seen.add(tokens)
        fills.append(FillCandidate(tokens=tokens, order=len(fills)))
    return fills


def phrase_log_likelihood(
    cmlm: CmlmClient,
    x_filled: Tokens,
    fill_span: Span,
    label: str,
    context_before: Tokens = (),
    context_after: Tokens = (),
    restrict_to_sentence: bool = True,
) -> float:
    """Pseudo-log-likelihood of the filled-in phrase under one class.

    Sums log P(z_k | context with z_k masked) over the fill's tokens,
    scored on the sentence containing the fill (whole sequence for pair
    tasks). Probabilities are floored before the log.
    """
    if restrict_to_sentence:
        sentence = sentence_around(x_filled, fill_span)
    else:
        sentence = Span(0, len(x_filled) - 1)
    sub = slice_span(x_filled, sentence)
    offset = fill_span.start - sentence.start
    total = 0.0
    for k in range(len(fill_span)):
        query = CmlmQuery(
            tokens=sub,
            masked_index=offset + k,
            label=label,
            context_before=context_before,
            context_after=context_after,
        )
        prob = max(cmlm.token_prob(query), LIKELIHOOD_FLOOR)
        total += math.log(prob)
    return total


def likelihood_ratio(log_likelihoods: Mapping[str, float], gold: str) -> float:
    """exp(logL(gold) - max over other classes of logL)."""
    if gold not in log_likelihoods:
        raise IncompleteLikelihoods(f"gold label {gold!r} missing from likelihoods")
    others = [value for label, value in log_likelihoods.items() if label != gold]
    if not others:
        raise IncompleteLikelihoods("need likelihoods for at least one non-gold class")
    return math.exp(log_likelihoods[gold] - max(others))


def label_preservation_filter(fills: Sequence[FillCandidate], threshold: float) -> list[FillCandidate]:
    """Keep exactly the fills whose likelihood ratio is >= threshold."""
    for fill in fills:
        if fill.ratio is None:
            raise ValueError("fill has no likelihood ratio")
    return [fill for fill in fills if fill.ratio >= threshold]


def effectiveness_score(
    view: VictimView, x: Tokens, span: Span, fill: Tokens, gold: str
) -> tuple[float, ClassDistribution]:
    """Negative gold probability after applying the fill (higher = better)."""
    dist = view.dist(apply_fill(x, span, fill))
    return -dist.prob(gold), dist


def select_best(fills: Sequence[FillCandidate]) -> FillCandidate:
    """Argmax of the effectiveness score; ties go to the earliest fill."""
    if not fills:
        raise EmptyCandidateSet("no fills to select from")
    for fill in fills:
        if fill.score is None:
            raise ValueError("fill has no effectiveness score")
    return max(fills, key=lambda f: (f.score, -f.order))


def _step_seed(base_seed: int, example_id: str, step: int) -> int:
    digest = hashlib.sha256(f"{base_seed}:{example_id}:{step}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def attack(
    example: LabeledExample,
    tree: ParseTree,
    backends: BackendSet,
    config: AttackConfig,
    deadline: float | None = None,
) -> AttackResult:
    """Greedy phrase-perturbation loop over importance-ranked candidates.

    Walks candidates in descending importance; each loop iteration consumes
    one candidate whether or not a fill survives the filter, and the loop
    runs at most ``max_perturbations`` iterations. Importance is computed
    once, on the original text. ``deadline`` (time.monotonic value) aborts
    between iterations; a timed-out example is reported as errored.
    """
    x_original = example.attacked
    view = VictimView(backends.victim, example.segments, example.attack_segment)
    is_pair = len(example.segments) == 2
    context_before: Tokens = ()
    context_after: Tokens = ()
    if is_pair:
        if example.attack_segment == 1:
            context_before = example.segments[0]
        else:
            context_after = example.segments[1]

    dist0 = view.dist(x_original)
    if example.gold not in dist0.probs:
        raise UnknownLabel(f"gold label {example.gold!r} not among victim labels {dist0.labels()}")
    labels = dist0.labels()
    if dist0.argmax() != example.gold:
        return AttackResult(
            status=AttackStatus.SKIPPED_MISCLASSIFIED,
            example=example,
            perturbed=None,
            steps=(),
            committed_spans=(),
            final_gold_prob=dist0.prob(example.gold),
        )

    candidates = extract_candidates(tree, config.whitelist, config.max_subtree_depth)
    scored = [
        cand.scored(phrase_importance(view, x_original, example.gold, cand.span, config.mask_token))
        for cand in candidates
    ]
    queue = rank_by_importance(scored)

    x_current = x_original
    gold_prob = dist0.prob(example.gold)
    committed: list[Span] = []
    steps: list[AttackStep] = []

    for t in range(1, config.max_perturbations + 1):
        if not queue:
            break
        if deadline is not None and time.monotonic() > deadline:
            return AttackResult(
                status=AttackStatus.ERRORED,
                example=example,
                perturbed=None,
                steps=tuple(steps),
                committed_spans=tuple(committed),
                final_gold_prob=gold_prob,
                error="per-example time budget exceeded",
            )
        cand = queue.pop(0)
        fills = generate_fill_set(
            backends.infiller, x_current, cand, config, seed=_step_seed(config.seed, example.id, t)
        )
        with_ratios: list[FillCandidate] = []
        for fill in fills:
            x_filled = apply_fill(x_current, cand.span, fill.tokens)
            fill_span = Span(cand.span.start, cand.span.start + fill.length - 1)
            log_l = {
                label: phrase_log_likelihood(
                    backends.cmlm,
                    x_filled,
                    fill_span,
                    label,
                    context_before=context_before,
                    context_after=context_after,
                    restrict_to_sentence=not is_pair,
                )
                for label in labels
            }
            with_ratios.append(
                replace(fill, log_likelihoods=log_l, ratio=likelihood_ratio(log_l, example.gold))
            )

        survivors = label_preservation_filter(with_ratios, config.ratio_threshold)
        if not survivors:
            steps.append(
                AttackStep(
                    index=t,
                    target=cand,
                    fills_generated=len(fills),
                    fills_surviving_filter=0,
                    chosen=None,
                    victim_prob_after=gold_prob,
                )
            )
            continue

        scored_fills: list[FillCandidate] = []
        dists: dict[int, ClassDistribution] = {}
        for fill in survivors:
            score, dist = effectiveness_score(view, x_current, cand.span, fill.tokens, example.gold)
            scored_fills.append(replace(fill, score=score))
            dists[fill.order] = dist

        best = select_best(scored_fills)
        dist_after = dists[best.order]
        x_current = apply_fill(x_current, cand.span, best.tokens)
        new_span = Span(cand.span.start, cand.span.start + best.length - 1)
        delta = best.length - len(cand.span)
        committed = [s.shifted(delta) if s.start > cand.span.end else s for s in committed]
        committed.append(new_span)
        queue = prune_overlapping(queue, cand.span, best.length)
        gold_prob = dist_after.prob(example.gold)
        steps.append(
            AttackStep(
                index=t,
                target=cand,
                fills_generated=len(fills),
                fills_surviving_filter=len(survivors),
                chosen=best,
                victim_prob_after=gold_prob,
            )
        )
        if dist_after.argmax() != example.gold:
            return AttackResult(
                status=AttackStatus.SUCCESS,
                example=example,
                perturbed=x_current,
                steps=tuple(steps),
                committed_spans=tuple(committed),
                final_gold_prob=gold_prob,
            )

    return AttackResult(
        status=AttackStatus.FAILED,
        example=example,
        perturbed=None,
        steps=tuple(steps),
        committed_spans=tuple(committed),
        final_gold_prob=gold_prob,
    )
