from phraseattack_server.parser import parse_to_ptb, pos_tag

from phraseattack.syntax import DEFAULT_PHRASE_TAGS, extract_candidates, leaves, parse_ptb, subtree_depth


def roundtrip(tokens):
    """The engine's own parser is the contract check for emitted trees."""
    return parse_ptb(parse_to_ptb(list(tokens)), tuple(tokens))


class TestPosTag:
    def test_lexicon_classes(self):
        tags = pos_tag(["the", "breeze", "near", "a", "willow"])
        assert tags == ["DT", "NN", "IN", "DT", "NN"]

    def test_suffix_rules(self):
        assert pos_tag(["quickly"]) == ["RB"]
        assert pos_tag(["joyful"]) == ["JJ"]
        assert pos_tag(["turning"])[0] == "VBG"

    def test_capitalized_mid_sentence_is_nnp(self):
        assert pos_tag(["we", "saw", "Gorvax"])[2] == "NNP"

    def test_punct(self):
        assert pos_tag(["."]) == ["."]


class TestParseToPtb:
    def test_leaves_equal_tokens(self):
        tokens = ["the", "breeze", "drifts", "near", "a", "willow"]
        tree = roundtrip(tokens)
        assert [leaf.token for leaf in leaves(tree)] == tokens

    def test_brackets_escaped(self):
        tokens = ["(", "odd", ")"]
        tree = roundtrip(tokens)
        assert [leaf.token for leaf in leaves(tree)] == tokens

    def test_produces_attackable_phrases(self):
        tokens = ["the", "breeze", "drifts", "near", "a", "willow"]
        tree = roundtrip(tokens)
        candidates = extract_candidates(tree, DEFAULT_PHRASE_TAGS, 4)
        assert candidates, "chunker should yield whitelisted phrases"
        assert all(c.depth <= 4 for c in candidates)
        assert any(c.tag == "NP" for c in candidates)

    def test_depth_stays_shallow(self):
        tokens = ["we", "endured", "the", "grim", "story", "of", "failure", "then", "rested", "quietly", "."]
        tree = roundtrip(tokens)
        assert subtree_depth(tree) <= 5

    def test_deterministic(self):
        tokens = ["the", "sensor", "hums", "near", "the", "rotor"]
        assert parse_to_ptb(tokens) == parse_to_ptb(tokens)

    def test_varied_inputs_all_roundtrip(self):
        samples = [
            ["it", "rained", "all", "day"],
            ["Gorvax", "stumbles", "badly"],
            ["a", "truly", "joyful", "noise", "!"],
            ["under", "the", "bridge", ",", "we", "slept"],
            ["numbers", "like", "4.5", "stay", "whole"],
        ]
        for tokens in samples:
            tree = roundtrip(tokens)
            assert [leaf.token for leaf in leaves(tree)] == tokens
