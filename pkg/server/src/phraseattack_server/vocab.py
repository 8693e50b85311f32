"""Word-level vocabulary shared by all served models.

The wire protocol is word-token based; this server tokenizes words 1:1
against a fixed vocabulary (out-of-vocabulary words become [UNK]). Label
conditioning uses dedicated ``<label>`` tokens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

PAD, UNK, CLS, SEP, MASK, BOS, EOS = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "[BOS]", "[EOS]"
SPECIALS = (PAD, UNK, CLS, SEP, MASK, BOS, EOS)


def label_token(label: str) -> str:
    return f"<{label}>"


@dataclass
class WordVocab:
    tokens: list[str]
    labels: list[str]

    def __post_init__(self) -> None:
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        for special in SPECIALS:
            if special not in self.index:
                raise ValueError(f"vocabulary missing special token {special}")
        for label in self.labels:
            if label_token(label) not in self.index:
                raise ValueError(f"vocabulary missing label token for {label!r}")

    @staticmethod
    def build(words: set[str], labels: list[str]) -> "WordVocab":
        ordered = list(SPECIALS) + [label_token(lab) for lab in labels] + sorted(words)
        return WordVocab(tokens=ordered, labels=list(labels))

    def __len__(self) -> int:
        return len(self.tokens)

    def id(self, token: str) -> int:
        return self.index.get(token, self.index[UNK])

    def encode(self, words) -> list[int]:
        return [self.id(w) for w in words]

    def decode(self, ids, skip_special: bool = True) -> list[str]:
        out = []
        for i in ids:
            tok = self.tokens[i]
            if skip_special and tok in SPECIALS:
                continue
            out.append(tok)
        return out

    # offset-yielding tokenizer: the interface per-request alignment runs on
    def tokenize_with_offsets(self, text: str) -> list[tuple[str, int, int]]:
        spans = []
        pos = 0
        for chunk in text.split(" "):
            if chunk:
                spans.append((chunk, pos, pos + len(chunk)))
            pos += len(chunk) + 1
        return spans

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"tokens": self.tokens, "labels": self.labels}, fh, indent=1)

    @staticmethod
    def load(path: str) -> "WordVocab":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return WordVocab(tokens=payload["tokens"], labels=payload["labels"])
