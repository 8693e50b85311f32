"""Deterministic heuristic constituency parser emitting PTB bracket trees.

A lexicon+suffix POS tagger feeds a greedy shallow chunker (NP / PP / VP /
ADJP / ADVP); anything unchunkable sits as a preterminal directly under S.
Leaves always equal the input tokens in order, which is the protocol
contract. Meant for testing and small runs, not linguistic fidelity.
"""

from __future__ import annotations

BRACKET_ESCAPES = {"(": "-LRB-", ")": "-RRB-", "[": "-LSB-", "]": "-RSB-", "{": "-LCB-", "}": "-RCB-"}

DETERMINERS = {"the", "a", "an", "this", "that", "these", "those", "some", "any", "each", "every", "no"}
PREPOSITIONS = {
    "of", "in", "on", "at", "by", "for", "to", "from", "with", "near", "under", "over",
    "about", "into", "through", "beside", "between", "against", "during", "without",
    "after", "before", "above", "below",
}
PRONOUNS = {"i", "we", "you", "he", "she", "it", "they", "them", "him", "her", "us", "me"}
CONJUNCTIONS = {"and", "or", "but", "nor", "yet", "so"}
MODALS = {"will", "would", "can", "could", "may", "might", "shall", "should", "must"}
AUX_VERBS = {"is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does", "did"}
COMMON_VERBS = {
    "run", "runs", "ran", "go", "goes", "went", "make", "makes", "made", "take", "takes", "took",
    "say", "says", "said", "get", "gets", "got", "see", "sees", "saw", "come", "comes", "came",
    "keep", "keeps", "kept", "hum", "hums", "spin", "spins", "glow", "glows", "drift", "drifts",
    "turn", "turns", "rest", "rests", "sway", "sways",
}
ADJ_SUFFIXES = ("ful", "ous", "ive", "able", "ish", "less")

NOUN_TAGS = {"NN", "NNS", "NNP"}
VERB_TAGS = {"VB", "VBD", "VBG", "VBZ", "MD"}


def pos_tag(tokens: list[str]) -> list[str]:
    tags = []
    for i, tok in enumerate(tokens):
        low = tok.lower()
        if all(not c.isalnum() for c in tok):
            tags.append(".")
        elif low in DETERMINERS:
            tags.append("DT")
        elif low in PREPOSITIONS:
            tags.append("IN")
        elif low in PRONOUNS:
            tags.append("PRP")
        elif low in CONJUNCTIONS:
            tags.append("CC")
        elif low in MODALS:
            tags.append("MD")
        elif low in AUX_VERBS:
            tags.append("VBZ" if low.endswith("s") else "VBD")
        elif low in COMMON_VERBS:
            tags.append("VBZ" if low.endswith("s") else "VB")
        elif i > 0 and tok[0].isupper():
            tags.append("NNP")
        elif low.endswith("ly"):
            tags.append("RB")
        elif low.endswith(ADJ_SUFFIXES):
            tags.append("JJ")
        elif low.endswith("ing"):
            tags.append("VBG")
        elif low.endswith("ed"):
            tags.append("VBD")
        elif low.endswith("s") and len(low) > 3:
            tags.append("NNS")
        else:
            tags.append("NN")
    return tags


def _terminal(tag: str, token: str) -> str:
    return f"({tag} {BRACKET_ESCAPES.get(token, token)})"


def _noun_phrase(tokens, tags, i):
    """Consume DT? (JJ)* noun+ starting at i; None if no noun materializes."""
    j = i
    parts = []
    if j < len(tokens) and tags[j] == "DT":
        parts.append(_terminal("DT", tokens[j]))
        j += 1
    while j < len(tokens) and tags[j] == "JJ":
        parts.append(_terminal("JJ", tokens[j]))
        j += 1
    nouns = 0
    while j < len(tokens) and tags[j] in NOUN_TAGS:
        parts.append(_terminal(tags[j], tokens[j]))
        nouns += 1
        j += 1
    if nouns == 0:
        return None
    return f"(NP {' '.join(parts)})", j


def _chunk(tokens, tags, i, allow_complement=True):
    """One chunk starting at token i -> (bracket text, next index)."""
    tag = tags[i]
    if tag == "PRP":
        return f"(NP {_terminal('PRP', tokens[i])})", i + 1
    if tag in {"DT", "JJ"} or tag in NOUN_TAGS:
        np = _noun_phrase(tokens, tags, i)
        if np is not None:
            return np
        if tag == "JJ":  # adjectives with no following noun
            j = i
            parts = []
            while j < len(tokens) and tags[j] == "JJ":
                parts.append(_terminal("JJ", tokens[j]))
                j += 1
            return f"(ADJP {' '.join(parts)})", j
        return _terminal(tag, tokens[i]), i + 1
    if tag == "IN":
        np = _noun_phrase(tokens, tags, i + 1)
        if np is not None:
            inner, j = np
            return f"(PP {_terminal('IN', tokens[i])} {inner})", j
        return _terminal("IN", tokens[i]), i + 1
    if tag in VERB_TAGS:
        j = i
        parts = []
        while j < len(tokens) and tags[j] in VERB_TAGS:
            parts.append(_terminal(tags[j], tokens[j]))
            j += 1
        if allow_complement and j < len(tokens) and tags[j] not in VERB_TAGS and tags[j] not in {".", "CC"}:
            complement, j2 = _chunk(tokens, tags, j, allow_complement=False)
            parts.append(complement)
            j = j2
        return f"(VP {' '.join(parts)})", j
    if tag == "RB":
        if i + 1 < len(tokens) and tags[i + 1] == "JJ":
            parts = [_terminal("RB", tokens[i])]
            j = i + 1
            while j < len(tokens) and tags[j] == "JJ":
                parts.append(_terminal("JJ", tokens[j]))
                j += 1
            return f"(ADJP {' '.join(parts)})", j
        return f"(ADVP {_terminal('RB', tokens[i])})", i + 1
    return _terminal(tag, tokens[i]), i + 1


def parse_to_ptb(tokens: list[str]) -> str:
    """Parse words into a single-S bracketed tree covering them exactly."""
    if not tokens:
        raise ValueError("cannot parse an empty token sequence")
    tags = pos_tag(list(tokens))
    chunks = []
    i = 0
    while i < len(tokens):
        chunk, i = _chunk(list(tokens), tags, i)
        chunks.append(chunk)
    return f"(S {' '.join(chunks)})"
