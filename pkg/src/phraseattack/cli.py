"""Command-line entry point: attack / score / report / mock-serve."""

from __future__ import annotations

import argparse
import json
import sys

from .attack import AttackConfig
from .campaign import RunConfig, run_attack_campaign
from .dataset import load_results
from .gateway.mocks import mock_backends_from_spec
from .gateway.server import MockServer
from .metrics import build_run_report, render_report_table, RunReport
from .syntax import DEFAULT_PHRASE_TAGS


def _add_attack_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("attack", help="run an attack campaign over a dataset")
    p.add_argument("--dataset", help="line-delimited JSON dataset")
    p.add_argument("--output-dir", help="directory for results.jsonl and report.json")
    p.add_argument("--config", help="flat JSON config file; flags override its values")
    p.add_argument("--backend", help="base URL of a live model backend")
    p.add_argument("--mock-spec", help="JSON mock backend spec (offline runs)")
    p.add_argument("--tree-source", choices=("inline", "parse"))
    p.add_argument("--labels", help="comma-separated label ids for validation")
    p.add_argument("--limit", type=int, help="sample size drawn from the dataset (default 1000)")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--cache-dir")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--use-perplexity", action="store_true")
    p.add_argument("--time-budget", type=float, help="per-example wall-clock budget in seconds")
    p.add_argument("--depth-d", type=int, help="max candidate subtree depth")
    p.add_argument("--len-incr-l", type=int, help="max fill length increment")
    p.add_argument("--max-steps-T", type=int, dest="max_steps_T", help="max greedy iterations")
    p.add_argument("--delta", type=float, help="likelihood-ratio threshold")
    p.add_argument("--num-fills-N", type=int, dest="num_fills_N", help="fills sampled per phrase")
    p.add_argument("--top-k", type=int, help="sampling width for the infiller")
    p.add_argument("--mask-token")
    p.add_argument("--tags", help="comma-separated constituent tag whitelist")


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)

    def pick(flag_value, key: str, default=None):
        if flag_value is not None:
            return flag_value
        return file_cfg.get(key, default)

    mock_spec = None
    mock_spec_path = pick(args.mock_spec, "mock_spec")
    if mock_spec_path:
        with open(mock_spec_path, encoding="utf-8") as fh:
            mock_spec = json.load(fh)

    labels = pick(args.labels, "labels")
    if isinstance(labels, str):
        labels = tuple(part.strip() for part in labels.split(",") if part.strip())
    elif labels is not None:
        labels = tuple(labels)
    if labels is None and mock_spec is not None:
        labels = tuple(mock_spec["labels"])

    tags = pick(args.tags, "tags")
    if isinstance(tags, str):
        whitelist = frozenset(part.strip() for part in tags.split(",") if part.strip())
    elif tags:
        whitelist = frozenset(tags)
    else:
        whitelist = DEFAULT_PHRASE_TAGS

    seed = pick(args.seed, "seed", 0)
    attack_cfg = AttackConfig(
        max_subtree_depth=pick(args.depth_d, "depth_d", 4),
        max_len_increase=pick(args.len_incr_l, "len_incr_l", 3),
        max_perturbations=pick(args.max_steps_T, "max_steps_T", 11),
        ratio_threshold=pick(args.delta, "delta", 1.0),
        num_fill_candidates=pick(args.num_fills_N, "num_fills_N", 5000),
        top_k=pick(args.top_k, "top_k", 50),
        whitelist=whitelist,
        seed=seed,
        mask_token=pick(args.mask_token, "mask_token", "[MASK]"),
    )

    dataset = pick(args.dataset, "dataset")
    output_dir = pick(args.output_dir, "output_dir")
    if not dataset or not output_dir:
        raise SystemExit("attack needs --dataset and --output-dir (flags or config file)")

    return RunConfig(
        dataset=dataset,
        output_dir=output_dir,
        backend_url=pick(args.backend, "backend"),
        mock_spec=mock_spec,
        labels=labels,
        tree_source=pick(args.tree_source, "tree_source", "inline"),
        attack=attack_cfg,
        limit=pick(args.limit, "limit", 1000),
        seed=seed,
        workers=pick(args.workers, "workers", 1),
        cache_dir=pick(args.cache_dir, "cache_dir"),
        cache_enabled=not (args.no_cache or file_cfg.get("no_cache", False)),
        use_perplexity=args.use_perplexity or file_cfg.get("use_perplexity", False),
        time_budget=pick(args.time_budget, "time_budget"),
    )


def cmd_attack(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    report = run_attack_campaign(cfg)
    print(render_report_table(report))
    print(f"\nresults: {cfg.output_dir}/results.jsonl")
    print(f"report:  {cfg.output_dir}/report.json")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    results, ppl_by_id = load_results(args.results)
    if not results:
        raise SystemExit("results file is empty")
    report = build_run_report(results, ppl_by_id)
    if args.report_out:
        with open(args.report_out, "w", encoding="utf-8") as fh:
            json.dump(report.to_json(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    if args.json:
        print(json.dumps(report.to_json(), sort_keys=True))
    else:
        print(render_report_table(report))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    if args.report:
        with open(args.report, encoding="utf-8") as fh:
            report = RunReport.from_json(json.load(fh))
    else:
        results, ppl_by_id = load_results(args.results)
        report = build_run_report(results, ppl_by_id)
    if args.json:
        print(json.dumps(report.to_json(), sort_keys=True))
    else:
        print(render_report_table(report))
    return 0


def cmd_mock_serve(args: argparse.Namespace) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        backends = mock_backends_from_spec(json.load(fh))
    server = MockServer(backends, host=args.host, port=args.port)
    print(f"mock backends listening on {server.url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="phraseattack", description="Phrase-level adversarial attack engine")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_attack_parser(sub)

    p_score = sub.add_parser("score", help="compute metrics over an existing results file")
    p_score.add_argument("--results", required=True)
    p_score.add_argument("--report-out", help="also write the report JSON here")
    p_score.add_argument("--json", action="store_true", help="print machine-readable JSON")

    p_report = sub.add_parser("report", help="render a report (from report.json or results.jsonl)")
    group = p_report.add_mutually_exclusive_group(required=True)
    group.add_argument("--report")
    group.add_argument("--results")
    p_report.add_argument("--json", action="store_true")

    p_serve = sub.add_parser("mock-serve", help="serve mock backends over HTTP")
    p_serve.add_argument("--spec", required=True, help="mock backend spec JSON")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8722)

    args = parser.parse_args(argv)
    handlers = {
        "attack": cmd_attack,
        "score": cmd_score,
        "report": cmd_report,
        "mock-serve": cmd_mock_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
