"""Campaign orchestration: a worker pool of attacks over a dataset, with
in-order persistence and report emission.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field

from .attack import AttackConfig, AttackResult, AttackStatus, attack
from .dataset import load_dataset, result_to_record
from .errors import BackendUnavailable, PhraseAttackError
from .gateway.clients import BackendSet
from .gateway.mocks import mock_backends_from_spec
from .gateway.transport import CachingTransport, HttpTransport, InProcessTransport, ResponseCache, Transport
from .metrics import RunReport, build_run_report
from .syntax import parse_ptb
from .text import LabeledExample

log = logging.getLogger(__name__)

TREE_SOURCES = ("inline", "parse")


@dataclass
class RunConfig:
    """Everything one campaign needs: data, backends, attack knobs, output."""

    dataset: str
    output_dir: str
    backend_url: str | None = None
    mock_spec: dict | None = None
    labels: tuple[str, ...] | None = None
    tree_source: str = "inline"
    attack: AttackConfig = field(default_factory=AttackConfig)
    limit: int = 1000
    seed: int = 0
    workers: int = 1
    cache_dir: str | None = None
    cache_enabled: bool = True
    use_perplexity: bool = False
    time_budget: float | None = None

    def __post_init__(self) -> None:
        if self.tree_source not in TREE_SOURCES:
            raise ValueError(f"tree_source must be one of {TREE_SOURCES}")
        if (self.backend_url is None) == (self.mock_spec is None):
            raise ValueError("exactly one of backend_url or mock_spec must be set")
        if self.workers < 1 or self.limit < 1:
            raise ValueError("workers and limit must be >= 1")


def build_transport(cfg: RunConfig) -> Transport:
    if cfg.mock_spec is not None:
        base: Transport = InProcessTransport(mock_backends_from_spec(cfg.mock_spec).handle)
    else:
        http = HttpTransport(cfg.backend_url)
        if not http.healthy():
            raise BackendUnavailable(f"backend {cfg.backend_url} failed its health check")
        base = http
    if cfg.cache_enabled:
        return CachingTransport(base, ResponseCache(cfg.cache_dir))
    return base


def _resolve_tree(example: LabeledExample, backends: BackendSet, cfg: RunConfig):
    if cfg.tree_source == "inline":
        raw = example.trees[example.attack_segment]
        if raw is None:
            raise PhraseAttackError(f"example {example.id} has no inline tree for the attack segment")
        return parse_ptb(raw, example.attacked)
    if backends.parser is None:
        raise PhraseAttackError("tree_source=parse requires a parse backend")
    return backends.parser.parse(example.attacked)


def run_one(example: LabeledExample, backends: BackendSet, cfg: RunConfig) -> tuple[AttackResult, float | None]:
    """Attack a single example; engine errors become an errored result."""
    deadline = time.monotonic() + cfg.time_budget if cfg.time_budget else None
    try:
        tree = _resolve_tree(example, backends, cfg)
        result = attack(example, tree, backends, cfg.attack, deadline=deadline)
    except PhraseAttackError as exc:
        log.warning("example %s errored: %s", example.id, exc)
        return (
            AttackResult(
                status=AttackStatus.ERRORED,
                example=example,
                perturbed=None,
                steps=(),
                committed_spans=(),
                error=str(exc),
            ),
            None,
        )
    ppl = None
    if cfg.use_perplexity and backends.perplexity is not None and result.status is AttackStatus.SUCCESS:
        try:
            ppl = backends.perplexity.perplexity(result.perturbed)
        except PhraseAttackError as exc:
            log.warning("perplexity for %s failed: %s", example.id, exc)
    return result, ppl


def run_attack_campaign(cfg: RunConfig) -> RunReport:
    """Run the full campaign; writes results.jsonl and report.json.

    Results are flushed in dataset order as soon as their prefix completes,
    so an interrupted run leaves a valid partial file; with the cache
    enabled a rerun reproduces the same outputs.
    """
    transport = build_transport(cfg)
    if cfg.mock_spec is not None and "perplexity" in cfg.mock_spec:
        cfg.use_perplexity = True
    backends = BackendSet.over(transport, with_perplexity=cfg.use_perplexity)

    examples = load_dataset(cfg.dataset, limit=cfg.limit, seed=cfg.seed, labels=cfg.labels)
    os.makedirs(cfg.output_dir, exist_ok=True)
    results_path = os.path.join(cfg.output_dir, "results.jsonl")
    report_path = os.path.join(cfg.output_dir, "report.json")

    results: list[AttackResult | None] = [None] * len(examples)
    ppl_by_id: dict[str, float] = {}
    next_to_write = 0

    with open(results_path, "w", encoding="utf-8") as out:

        def flush_ready() -> None:
            nonlocal next_to_write
            while next_to_write < len(results) and results[next_to_write] is not None:
                result = results[next_to_write]
                ppl = ppl_by_id.get(result.example.id)
                out.write(json.dumps(result_to_record(result, ppl), sort_keys=True) + "\n")
                out.flush()
                next_to_write += 1

        if cfg.workers == 1:
            for i, example in enumerate(examples):
                result, ppl = run_one(example, backends, cfg)
                results[i] = result
                if ppl is not None:
                    ppl_by_id[example.id] = ppl
                flush_ready()
        else:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                pending = {pool.submit(run_one, ex, backends, cfg): i for i, ex in enumerate(examples)}
                try:
                    while pending:
                        done, _ = wait(pending, return_when=FIRST_COMPLETED)
                        for future in done:
                            i = pending.pop(future)
                            result, ppl = future.result()
                            results[i] = result
                            if ppl is not None:
                                ppl_by_id[result.example.id] = ppl
                        flush_ready()
                except KeyboardInterrupt:
                    for future in pending:
                        future.cancel()
                    raise

    final_results = [r for r in results if r is not None]
    report = build_run_report(final_results, ppl_by_id)
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return report
