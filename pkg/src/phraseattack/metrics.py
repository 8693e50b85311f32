"""Attack-quality metrics: success rate, normalized edit distance, BLEU,
vulnerable-tag statistics, and run-report aggregation.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .attack import AttackResult, AttackStatus
from .text import Tokens

BLEU_MAX_NGRAM = 4


def levenshtein(x: Tokens, y: Tokens) -> int:
    """Token-level Levenshtein distance, two-row dynamic program."""
    if not x:
        return len(y)
    if not y:
        return len(x)
    previous = list(range(len(y) + 1))
    for i, xi in enumerate(x, start=1):
        current = [i] + [0] * len(y)
        for j, yj in enumerate(y, start=1):
            cost = 0 if xi == yj else 1
            current[j] = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
        previous = current
    return previous[len(y)]


def edit_distance_normalized(x: Tokens, x_prime: Tokens) -> float:
    """Levenshtein(x, x') normalized by the original length |x|."""
    if not x:
        raise ValueError("original sequence must be non-empty")
    return levenshtein(x, x_prime) / len(x)


def _ngram_counts(tokens: Tokens, n: int) -> Counter:
    return Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1))


def bleu(reference: Tokens, candidate: Tokens) -> float:
    """Sentence BLEU: 4-gram, uniform weights, brevity penalty.

    Modified n-gram precisions use add-one smoothing whenever the match
    count is zero, so the score stays positive and BLEU(x, x) is exactly 1.
    """
    if not reference or not candidate:
        raise ValueError("both sequences must be non-empty")
    log_precision_sum = 0.0
    for n in range(1, BLEU_MAX_NGRAM + 1):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        total = max(len(candidate) - n + 1, 0)
        matched = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        if matched > 0:
            precision = matched / total
        else:
            precision = 1.0 / (total + 1)
        log_precision_sum += math.log(precision) / BLEU_MAX_NGRAM
    if len(candidate) >= len(reference):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(reference) / len(candidate))
    return brevity * math.exp(log_precision_sum)


def attack_success_rate(results: Sequence[AttackResult]) -> float | None:
    """Successes over (successes + failures); skips and errors excluded.

    Returns None when nothing was actually attacked.
    """
    successes = sum(1 for r in results if r.status is AttackStatus.SUCCESS)
    failures = sum(1 for r in results if r.status is AttackStatus.FAILED)
    if successes + failures == 0:
        return None
    return successes / (successes + failures)


def tag_frequency(results: Sequence[AttackResult]) -> dict[str, float]:
    """Fraction of committed perturbations per constituent tag, over
    successful attacks only."""
    counts: Counter = Counter()
    for result in results:
        if result.status is not AttackStatus.SUCCESS:
            continue
        for step in result.steps:
            if step.chosen is not None:
                counts[step.target.tag] += 1
    total = sum(counts.values())
    if total == 0:
        return {}
    return {tag: counts[tag] / total for tag in sorted(counts)}


def mean_metrics_over_successes(
    results: Sequence[AttackResult], ppl_by_id: Mapping[str, float] | None = None
) -> tuple[float | None, float | None, float | None]:
    """(mean DIS, mean BLEU, mean PPL) over successful attacks.

    DIS and BLEU compare the attacked segment before and after; PPL values
    come from the optional perplexity backend, keyed by example id.
    """
    dis_values: list[float] = []
    bleu_values: list[float] = []
    ppl_values: list[float] = []
    for result in results:
        if result.status is not AttackStatus.SUCCESS or result.perturbed is None:
            continue
        original = result.example.attacked
        dis_values.append(edit_distance_normalized(original, result.perturbed))
        bleu_values.append(bleu(original, result.perturbed))
        if ppl_by_id and result.example.id in ppl_by_id:
            ppl_values.append(ppl_by_id[result.example.id])
    mean = lambda vals: sum(vals) / len(vals) if vals else None
    return mean(dis_values), mean(bleu_values), mean(ppl_values)


@dataclass(frozen=True)
class RunReport:
    """Aggregated campaign metrics, one per run."""

    counts: dict[str, int]
    asr: float | None
    mean_dis: float | None
    mean_bleu: float | None
    mean_ppl: float | None
    tag_frequency: dict[str, float]

    def to_json(self) -> dict:
        return {
            "counts": dict(self.counts),
            "asr": self.asr,
            "mean_dis": self.mean_dis,
            "mean_bleu": self.mean_bleu,
            "mean_ppl": self.mean_ppl,
            "tag_frequency": dict(self.tag_frequency),
        }

    @staticmethod
    def from_json(payload: dict) -> "RunReport":
        return RunReport(
            counts={k: int(v) for k, v in payload["counts"].items()},
            asr=payload.get("asr"),
            mean_dis=payload.get("mean_dis"),
            mean_bleu=payload.get("mean_bleu"),
            mean_ppl=payload.get("mean_ppl"),
            tag_frequency={k: float(v) for k, v in payload.get("tag_frequency", {}).items()},
        )


def build_run_report(
    results: Sequence[AttackResult], ppl_by_id: Mapping[str, float] | None = None
) -> RunReport:
    counts = {
        "success": sum(1 for r in results if r.status is AttackStatus.SUCCESS),
        "failed": sum(1 for r in results if r.status is AttackStatus.FAILED),
        "skipped": sum(1 for r in results if r.status is AttackStatus.SKIPPED_MISCLASSIFIED),
        "errored": sum(1 for r in results if r.status is AttackStatus.ERRORED),
    }
    mean_dis, mean_bleu, mean_ppl = mean_metrics_over_successes(results, ppl_by_id)
    return RunReport(
        counts=counts,
        asr=attack_success_rate(results),
        mean_dis=mean_dis,
        mean_bleu=mean_bleu,
        mean_ppl=mean_ppl,
        tag_frequency=tag_frequency(results),
    )


def render_report_table(report: RunReport) -> str:
    """Human-readable metric table (percentages for ASR, 3 decimals else)."""

    def cell(value: float | None, scale: float = 1.0, digits: int = 3) -> str:
        if value is None:
            return "-"
        return f"{value * scale:.{digits}f}"

    headers = ["ASR", "DIS", "BLEU"]
    row = [cell(report.asr, 100.0, 1), cell(report.mean_dis), cell(report.mean_bleu)]
    if report.mean_ppl is not None:
        headers.append("PPL")
        row.append(cell(report.mean_ppl, 1.0, 1))
    widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
    lines = [
        "  ".join(h.rjust(w) for h, w in zip(headers, widths)),
        "  ".join(v.rjust(w) for v, w in zip(row, widths)),
        "",
        "counts: "
        + ", ".join(f"{key}={report.counts.get(key, 0)}" for key in ("success", "failed", "skipped", "errored")),
    ]
    if report.tag_frequency:
        top = sorted(report.tag_frequency.items(), key=lambda kv: (-kv[1], kv[0]))
        lines.append("tags:   " + ", ".join(f"{tag}={frac * 100:.1f}%" for tag, frac in top))
    return "\n".join(lines)
