import math

import pytest

from phraseattack.errors import BackendUnavailable, ProtocolError, TokenMismatch, UnknownLabel
from phraseattack.gateway.clients import BackendSet, VictimClient
from phraseattack.gateway.mocks import (
    MockBackends,
    MockCmlm,
    MockParser,
    MockSamplingInfiller,
    MockTableInfiller,
    MockVictim,
)
from phraseattack.gateway.server import MockServer
from phraseattack.gateway.transport import (
    CachingTransport,
    CountingTransport,
    HttpTransport,
    InProcessTransport,
    ResponseCache,
)
from phraseattack.gateway.types import ClassDistribution, InfillRequest, InfillResponse


def two_label_backends(**overrides) -> MockBackends:
    labels = ("neg", "pos")
    defaults = dict(
        labels=labels,
        victim=MockVictim(labels=labels, weights={"neg": {"terrible": 2.0}}, bias={}),
        infiller=MockTableInfiller(default=[("fine",), ("quite", "fine")]),
        cmlm=MockCmlm(labels=labels, tables={"neg": {}, "pos": {}}, floor=0.1),
        parser=MockParser(),
    )
    defaults.update(overrides)
    return MockBackends(**defaults)


class TestClassDistribution:
    def test_must_sum_to_one(self):
        with pytest.raises(ProtocolError):
            ClassDistribution({"a": 0.5, "b": 0.4})

    def test_probability_range(self):
        with pytest.raises(ProtocolError):
            ClassDistribution({"a": 1.2, "b": -0.2})

    def test_argmax_tie_is_deterministic(self):
        dist = ClassDistribution({"b": 0.5, "a": 0.5})
        assert dist.argmax() == "a"

    def test_missing_label_on_lookup(self):
        dist = ClassDistribution({"a": 1.0})
        with pytest.raises(ProtocolError):
            dist.prob("zzz")


class TestRequestValidation:
    def test_num_samples_floor(self):
        with pytest.raises(ValueError):
            InfillRequest(left=("a",), right=(), max_fill_len=3, num_samples=0, top_k=5, seed=0)

    def test_fill_length_bounds_checked(self):
        with pytest.raises(ProtocolError):
            InfillResponse.from_wire({"fills": [["a", "b", "c"]]}, max_fill_len=2)
        with pytest.raises(ProtocolError):
            InfillResponse.from_wire({"fills": [[]]}, max_fill_len=2)


class TestMockVictim:
    def test_uniform_without_weights(self):
        victim = MockVictim(labels=("a", "b", "c"))
        probs = victim.classify([["anything", "at", "all"]])
        for p in probs.values():
            assert abs(p - 1 / 3) < 1e-12

    def test_keyword_drives_argmax(self):
        victim = MockVictim(labels=("neg", "pos"), weights={"neg": {"terrible": 2.0}})
        probs = victim.classify([["a", "terrible", "meal"]])
        # independent softmax arithmetic on the committed weights
        expected_neg = math.exp(2.0) / (math.exp(2.0) + math.exp(0.0))
        assert abs(probs["neg"] - expected_neg) < 1e-12
        assert max(probs, key=probs.get) == "neg"

    def test_pair_segments_pooled(self):
        victim = MockVictim(labels=("neg", "pos"), weights={"neg": {"terrible": 2.0}})
        one = victim.classify([["terrible"], ["day"]])
        other = victim.classify([["terrible", "day"]])
        assert one == other


class TestMockCmlm:
    def test_identical_tables_ignore_label(self):
        table = {"great": 0.4}
        cmlm = MockCmlm(labels=("a", "b"), tables={"a": table, "b": table})
        assert cmlm.token_prob(["great"], 0, "a") == cmlm.token_prob(["great"], 0, "b")

    def test_committed_table_value(self):
        cmlm = MockCmlm(labels=("a", "b"), tables={"a": {"great": 0.4}, "b": {"great": 0.01}})
        assert cmlm.token_prob(["so", "great"], 1, "a") == 0.4
        assert cmlm.token_prob(["so", "great"], 1, "b") == 0.01

    def test_unknown_label(self):
        cmlm = MockCmlm(labels=("a", "b"), tables={})
        with pytest.raises(UnknownLabel):
            cmlm.token_prob(["x"], 0, "zzz")

    def test_floor_for_unknown_tokens(self):
        cmlm = MockCmlm(labels=("a",), tables={"a": {}}, floor=0.05)
        assert cmlm.token_prob(["mystery"], 0, "a") == 0.05


class TestMockInfillers:
    def test_table_lookup_and_truncation(self):
        infiller = MockTableInfiller(
            rules=[("the", "was", [("food",), ("service",), ("whole", "meal")])],
            default=[("thing",)],
        )
        fills = infiller.infill(["the"], ["was", "bad"], max_fill_len=5, num_samples=2)
        assert fills == [("food",), ("service",)]
        assert infiller.infill(["a"], ["went"], max_fill_len=5, num_samples=10) == [("thing",)]

    def test_max_fill_len_one(self):
        infiller = MockTableInfiller(default=[("one",), ("two", "words"), ("tok",)])
        fills = infiller.infill([], [], max_fill_len=1, num_samples=10)
        assert fills == [("one",), ("tok",)]
        assert all(len(f) == 1 for f in fills)

    def test_sampling_infiller_deterministic(self):
        infiller = MockSamplingInfiller(vocab=("a", "b", "c", "d"))
        args = (["left"], ["right"], 3, 20, 2, 7)
        assert infiller.infill(*args) == infiller.infill(*args)
        different_seed = infiller.infill(["left"], ["right"], 3, 20, 2, 8)
        assert different_seed != infiller.infill(*args)

    def test_sampling_respects_bounds(self):
        infiller = MockSamplingInfiller(vocab=("a", "b", "c", "d"))
        fills = infiller.infill([], [], 4, 50, 2, 1)
        assert len(fills) == 50
        assert all(1 <= len(f) <= 4 for f in fills)
        assert all(tok in ("a", "b") for f in fills for tok in f)


class TestCache:
    def test_identical_calls_hit_once(self):
        counting = CountingTransport(InProcessTransport(two_label_backends().handle))
        transport = CachingTransport(counting, ResponseCache())
        victim = VictimClient(transport)
        first = victim.classify((("a", "terrible", "meal"),))
        second = victim.classify((("a", "terrible", "meal"),))
        assert first == second
        assert counting.counts["/v1/classify"] == 1

    def test_different_seeds_are_distinct_keys(self):
        counting = CountingTransport(InProcessTransport(two_label_backends().handle))
        transport = CachingTransport(counting, ResponseCache())
        req = {"left": [], "right": [], "max_fill_len": 2, "num_samples": 3, "top_k": 5}
        transport.post("/v1/infill", dict(req, seed=1))
        transport.post("/v1/infill", dict(req, seed=2))
        assert counting.counts["/v1/infill"] == 2

    def test_disabled_cache_passes_through(self):
        counting = CountingTransport(InProcessTransport(two_label_backends().handle))
        transport = CachingTransport(counting, ResponseCache(), enabled=False)
        victim = VictimClient(transport)
        victim.classify((("x",),))
        victim.classify((("x",),))
        assert counting.counts["/v1/classify"] == 2

    def test_cache_transparency(self):
        plain = VictimClient(InProcessTransport(two_label_backends().handle))
        cached = VictimClient(
            CachingTransport(InProcessTransport(two_label_backends().handle), ResponseCache())
        )
        for tokens in (("a", "terrible", "meal"), ("ok", "then"), ("a", "terrible", "meal")):
            assert plain.classify((tokens,)) == cached.classify((tokens,))

    def test_persistent_cache_survives_new_instance(self, tmp_path):
        directory = str(tmp_path / "cache")
        counting = CountingTransport(InProcessTransport(two_label_backends().handle))
        first = VictimClient(CachingTransport(counting, ResponseCache(directory)))
        first.classify((("a", "terrible", "meal"),))

        counting2 = CountingTransport(InProcessTransport(two_label_backends().handle))
        second = VictimClient(CachingTransport(counting2, ResponseCache(directory)))
        out = second.classify((("a", "terrible", "meal"),))
        assert out.argmax() == "neg"
        assert counting2.counts.get("/v1/classify", 0) == 0


class TestHttpTransport:
    def test_roundtrip_against_mock_server(self):
        server = MockServer(two_label_backends()).start()
        try:
            transport = HttpTransport(server.url, retry_base_delay=0.01)
            assert transport.healthy()
            backends = BackendSet.over(transport)
            dist = backends.victim.classify((("a", "terrible", "meal"),))
            assert dist.argmax() == "neg"
            req = InfillRequest(left=("a",), right=("meal",), max_fill_len=3, num_samples=5, top_k=3, seed=0)
            fills = backends.infiller.infill(req).fills
            assert fills == (("fine",), ("quite", "fine"))
        finally:
            server.stop()

    def test_unreachable_backend(self):
        transport = HttpTransport("http://127.0.0.1:9", timeout=0.2, retry_base_delay=0.01)
        with pytest.raises(BackendUnavailable):
            transport.post("/v1/classify", {"segments": [["x"]]})
        assert not transport.healthy()

    def test_error_envelope_is_protocol_error(self):
        server = MockServer(two_label_backends()).start()
        try:
            transport = HttpTransport(server.url, retry_base_delay=0.01)
            with pytest.raises(ProtocolError) as excinfo:
                transport.post("/v1/cmlm", {"tokens": ["x"], "masked_index": 0, "label": "zzz"})
            assert "unknown_label" in str(excinfo.value)
        finally:
            server.stop()


class TestParseClient:
    def test_tree_token_contract(self):
        backends = two_label_backends(parser=MockParser(trees={"the dog": "(S (NN cat) (NN dog))"}))
        client = BackendSet.over(InProcessTransport(backends.handle))
        with pytest.raises(TokenMismatch):
            client.parser.parse(("the", "dog"))

    def test_fallback_flat_tree(self):
        from phraseattack.syntax import leaves

        client = BackendSet.over(InProcessTransport(two_label_backends().handle))
        tree = client.parser.parse(("one", "two"))
        assert [leaf.token for leaf in leaves(tree)] == ["one", "two"]


class TestBatchEndpoints:
    def test_classify_batch_matches_loop(self):
        client = BackendSet.over(InProcessTransport(two_label_backends().handle))
        items = [(("a", "terrible", "meal"),), (("fine", "day"),)]
        batch = client.victim.classify_batch(items)
        singles = [client.victim.classify(item) for item in items]
        assert batch == singles

    def test_cmlm_batch_matches_loop(self):
        from phraseattack.gateway.types import CmlmQuery

        client = BackendSet.over(InProcessTransport(two_label_backends().handle))
        queries = [CmlmQuery(tokens=("x", "y"), masked_index=0, label="neg")]
        assert client.cmlm.token_prob_batch(queries) == [client.cmlm.token_prob(queries[0])]
