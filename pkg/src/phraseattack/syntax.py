"""PTB bracketed constituency trees and depth-restricted phrase extraction."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import MalformedTree, TokenMismatch
from .text import Span, Tokens

# Constituent tags whose subtrees are eligible attack targets.
DEFAULT_PHRASE_TAGS = frozenset(
    {"ADJP", "ADVP", "CONJP", "NP", "NNP", "PP", "QP", "VP", "WHADJP", "WHADVP", "WHNP", "WHVP"}
)

# PTB escapes for bracket characters appearing as terminals.
PTB_UNESCAPE = {
    "-LRB-": "(",
    "-RRB-": ")",
    "-LSB-": "[",
    "-RSB-": "]",
    "-LCB-": "{",
    "-RCB-": "}",
}
PTB_ESCAPE = {v: k for k, v in PTB_UNESCAPE.items()}


@dataclass(frozen=True)
class Leaf:
    """Terminal node: position and surface of one token."""

    index: int
    token: str


@dataclass(frozen=True)
class ParseTree:
    """Internal node with a constituent tag and ordered children."""

    tag: str
    children: tuple["ParseTree | Leaf", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ValueError("internal node needs at least one child")


@dataclass(frozen=True)
class PhraseCandidate:
    """An attackable phrase: its tokens, span (i, j), tag, and subtree depth.

    ``importance`` stays None until scored against the victim.
    """

    phrase: Tokens
    span: Span
    tag: str
    depth: int
    importance: float | None = None

    def scored(self, importance: float) -> "PhraseCandidate":
        return replace(self, importance=importance)

    def shifted(self, delta: int) -> "PhraseCandidate":
        return replace(self, span=self.span.shifted(delta))


def leaves(node: ParseTree | Leaf) -> list[Leaf]:
    if isinstance(node, Leaf):
        return [node]
    out: list[Leaf] = []
    for child in node.children:
        out.extend(leaves(child))
    return out


def subtree_span(node: ParseTree | Leaf) -> Span:
    if isinstance(node, Leaf):
        return Span(node.index, node.index)
    return Span(subtree_span(node.children[0]).start, subtree_span(node.children[-1]).end)


def subtree_depth(node: ParseTree | Leaf) -> int:
    """Edges on the longest node-to-leaf path: leaves 0, preterminals 1."""
    if isinstance(node, Leaf):
        return 0
    return 1 + max(subtree_depth(child) for child in node.children)


def _read_sexpr(text: str) -> tuple[str, list]:
    """Parse one bracketed expression into (tag, parts); parts are strings or nested pairs."""
    pos = 0
    n = len(text)

    def skip_ws() -> None:
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def read_atom() -> str:
        nonlocal pos
        start = pos
        while pos < n and not text[pos].isspace() and text[pos] not in "()":
            pos += 1
        if pos == start:
            raise MalformedTree(f"expected atom at position {pos}")
        return text[start:pos]

    def read_node() -> tuple[str, list]:
        nonlocal pos
        skip_ws()
        if pos >= n or text[pos] != "(":
            raise MalformedTree(f"expected '(' at position {pos}")
        pos += 1
        skip_ws()
        tag = read_atom()
        parts: list = []
        while True:
            skip_ws()
            if pos >= n:
                raise MalformedTree("unbalanced brackets: missing ')'")
            if text[pos] == ")":
                pos += 1
                return tag, parts
            if text[pos] == "(":
                parts.append(read_node())
            else:
                parts.append(read_atom())

    node = read_node()
    skip_ws()
    if pos != n:
        raise MalformedTree(f"trailing content after tree at position {pos}")
    return node


def parse_ptb(bracketed: str, x: Tokens) -> ParseTree:
    """Parse PTB bracketed-tree text whose terminals cover x exactly, in order.

    Raises MalformedTree for bad bracket structure, TokenMismatch when the
    terminals disagree with x.
    """
    if not bracketed.strip():
        raise MalformedTree("empty tree text")
    tag, parts = _read_sexpr(bracketed.strip())

    cursor = 0

    def build(tag: str, parts: list) -> ParseTree:
        nonlocal cursor
        if not parts:
            raise MalformedTree(f"constituent {tag!r} has no children")
        children: list[ParseTree | Leaf] = []
        for part in parts:
            if isinstance(part, str):
                surface = PTB_UNESCAPE.get(part, part)
                if cursor >= len(x):
                    raise TokenMismatch(f"tree has more terminals than tokens ({len(x)})")
                if surface != x[cursor]:
                    raise TokenMismatch(f"terminal {surface!r} != token {x[cursor]!r} at index {cursor}")
                children.append(Leaf(cursor, surface))
                cursor += 1
            else:
                children.append(build(part[0], part[1]))
        return ParseTree(tag, tuple(children))

    tree = build(tag, parts)
    if cursor != len(x):
        raise TokenMismatch(f"tree covers {cursor} tokens, sequence has {len(x)}")
    return tree


def format_ptb(node: ParseTree | Leaf) -> str:
    """Render a tree back to bracketed text (bracket terminals escaped)."""
    if isinstance(node, Leaf):
        return PTB_ESCAPE.get(node.token, node.token)
    inner = " ".join(format_ptb(child) for child in node.children)
    return f"({node.tag} {inner})"


def extract_candidates(
    tree: ParseTree,
    whitelist: frozenset[str] = DEFAULT_PHRASE_TAGS,
    max_depth: int = 4,
) -> list[PhraseCandidate]:
    """Collect attackable phrases: preorder nodes with whitelisted tag and depth <= max_depth.

    Candidates may nest; duplicates keyed on (span, tag) are dropped, first
    occurrence wins.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    out: list[PhraseCandidate] = []
    seen: set[tuple[Span, str]] = set()

    def visit(node: ParseTree | Leaf) -> None:
        if isinstance(node, Leaf):
            return
        depth = subtree_depth(node)
        if node.tag in whitelist and depth <= max_depth:
            span = subtree_span(node)
            key = (span, node.tag)
            if key not in seen:
                seen.add(key)
                phrase = tuple(leaf.token for leaf in leaves(node))
                out.append(PhraseCandidate(phrase=phrase, span=span, tag=node.tag, depth=depth))
        for child in node.children:
            visit(child)

    visit(tree)
    return out


def prune_overlapping(
    candidates: list[PhraseCandidate], committed: Span, fill_len: int
) -> list[PhraseCandidate]:
    """Drop candidates overlapping a just-committed span; shift the rest.

    ``committed`` is the replaced span in the pre-fill coordinates the
    candidates live in; spans strictly right of it shift by
    fill_len - len(committed).
    """
    delta = fill_len - len(committed)
    kept: list[PhraseCandidate] = []
    for cand in candidates:
        if cand.span.intersects(committed):
            continue
        if cand.span.start > committed.end:
            cand = cand.shifted(delta)
        kept.append(cand)
    return kept
