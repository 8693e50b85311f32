"""Phrase-level adversarial attack engine for text classifiers.

Perturbs the most vulnerable constituency phrases of an input via
contextual blank infilling, filters perturbations with a class-conditioned
likelihood ratio, and picks the fill that hurts the victim's gold-label
probability most.
"""

from .attack import (
    AttackConfig,
    AttackResult,
    AttackStatus,
    AttackStep,
    FillCandidate,
    VictimView,
    attack,
    effectiveness_score,
    generate_fill_set,
    label_preservation_filter,
    likelihood_ratio,
    phrase_importance,
    phrase_log_likelihood,
    rank_by_importance,
    select_best,
)
from .campaign import RunConfig, run_attack_campaign
from .dataset import load_dataset, load_results
from .metrics import (
    RunReport,
    attack_success_rate,
    bleu,
    build_run_report,
    edit_distance_normalized,
    mean_metrics_over_successes,
    render_report_table,
    tag_frequency,
)
from .syntax import (
    DEFAULT_PHRASE_TAGS,
    ParseTree,
    PhraseCandidate,
    extract_candidates,
    parse_ptb,
    prune_overlapping,
    subtree_depth,
)
from .text import (
    LabeledExample,
    Span,
    Tokens,
    apply_fill,
    choose_attack_segment,
    detokenize,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "AttackStatus",
    "AttackStep",
    "DEFAULT_PHRASE_TAGS",
    "FillCandidate",
    "LabeledExample",
    "ParseTree",
    "PhraseCandidate",
    "RunConfig",
    "RunReport",
    "Span",
    "Tokens",
    "VictimView",
    "apply_fill",
    "attack",
    "attack_success_rate",
    "bleu",
    "build_run_report",
    "choose_attack_segment",
    "detokenize",
    "edit_distance_normalized",
    "effectiveness_score",
    "extract_candidates",
    "generate_fill_set",
    "label_preservation_filter",
    "likelihood_ratio",
    "load_dataset",
    "load_results",
    "mean_metrics_over_successes",
    "parse_ptb",
    "phrase_importance",
    "phrase_log_likelihood",
    "prune_overlapping",
    "rank_by_importance",
    "render_report_table",
    "run_attack_campaign",
    "select_best",
    "subtree_depth",
    "tag_frequency",
    "tokenize",
]
