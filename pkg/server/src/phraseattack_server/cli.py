"""Server CLI: build toy checkpoints, fine-tune on datasets, serve."""

from __future__ import annotations

import argparse
import json
import sys

from .finetune import CmlmTrainConfig, VictimTrainConfig, finetune_cmlm, finetune_victim
from .models import ModelDims, build_cmlm, build_victim, load_model_set, save_model_set
from .toy import build_toy_model_set, toy_dataset_jsonl
from .vocab import WordVocab


def load_rows(path: str):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "text" in record:
                rows.append((record["text"].split(), record["label"]))
            else:
                rows.append((record["premise"].split(), record["hypothesis"].split(), record["label"]))
    return rows


def cmd_build_toy(args) -> int:
    build_toy_model_set(args.out, seed=args.seed, with_lm=not args.no_lm)
    if args.dataset_out:
        toy_dataset_jsonl(args.dataset_out, seed=args.seed + 1)
        print(f"wrote toy dataset to {args.dataset_out}")
    return 0


def cmd_serve(args) -> int:
    from .service import run_server

    model_set = load_model_set(args.checkpoints)
    print(f"serving model set from {args.checkpoints} on http://{args.host}:{args.port}")
    run_server(model_set, host=args.host, port=args.port)
    return 0


def cmd_finetune_victim(args) -> int:
    rows = load_rows(args.dataset)
    eval_rows = load_rows(args.eval_dataset) if args.eval_dataset else rows[: max(1, len(rows) // 10)]
    labels = sorted({row[-1] for row in rows})
    words = {w for row in rows for seg in row[:-1] for w in seg}
    vocab = WordVocab.build(words, labels)
    victim = build_victim(vocab, ModelDims())
    config = VictimTrainConfig(learning_rate=args.lr, epochs=args.epochs, batch_size=args.batch_size)
    report = finetune_victim(victim, vocab, rows, eval_rows, config)
    print(json.dumps(report, indent=2))
    victim.save_pretrained(f"{args.out}/victim")
    vocab.save(f"{args.out}/vocab.json")
    return 0


def cmd_finetune_cmlm(args) -> int:
    model_set = load_model_set(args.checkpoints)
    rows = load_rows(args.dataset)
    config = CmlmTrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        confidence_threshold=args.confidence,
    )
    cmlm = build_cmlm(model_set.vocab, ModelDims())
    report = finetune_cmlm(cmlm, model_set.vocab, rows, model_set.victim, config)
    print(json.dumps(report, indent=2))
    model_set.cmlm = cmlm
    save_model_set(model_set, args.checkpoints)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="phraseattack-server")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-toy", help="train the toy model set from scratch")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--no-lm", action="store_true")
    p.add_argument("--dataset-out", help="also write a small attackable dataset")

    p = sub.add_parser("serve", help="serve a checkpoint directory")
    p.add_argument("--checkpoints", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8723)

    p = sub.add_parser("finetune-victim", help="train a classifier on a JSONL dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--eval-dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=VictimTrainConfig.learning_rate)
    p.add_argument("--epochs", type=int, default=VictimTrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=VictimTrainConfig.batch_size)

    p = sub.add_parser("finetune-cmlm", help="train the label-conditioned MLM")
    p.add_argument("--checkpoints", required=True, help="directory holding victim + vocab")
    p.add_argument("--dataset", required=True)
    p.add_argument("--lr", type=float, default=CmlmTrainConfig.learning_rate)
    p.add_argument("--epochs", type=int, default=CmlmTrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=CmlmTrainConfig.batch_size)
    p.add_argument("--confidence", type=float, default=CmlmTrainConfig.confidence_threshold)

    args = parser.parse_args(argv)
    handlers = {
        "build-toy": cmd_build_toy,
        "serve": cmd_serve,
        "finetune-victim": cmd_finetune_victim,
        "finetune-cmlm": cmd_finetune_cmlm,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
