"""Live-server protocol conformance, driven by the attack engine's own
clients and campaign loop (the consumer side of the wire contract)."""

import json

import pytest

from phraseattack.attack import AttackConfig
from phraseattack.campaign import RunConfig, run_attack_campaign
from phraseattack.dataset import load_results
from phraseattack.errors import ProtocolError
from phraseattack.gateway.clients import BackendSet
from phraseattack.gateway.transport import HttpTransport
from phraseattack.gateway.types import CmlmQuery, InfillRequest
from phraseattack.syntax import leaves

from phraseattack_server.toy import toy_dataset_jsonl


@pytest.fixture(scope="module")
def live_backends(served_url):
    transport = HttpTransport(served_url, retry_base_delay=0.01)
    assert transport.healthy()
    return BackendSet.over(transport, with_perplexity=True)


class TestProtocolConformance:
    def test_classify_is_a_valid_distribution(self, live_backends):
        dist = live_backends.victim.classify((("the", "breeze", "near", "dew"),))
        assert set(dist.labels()) == {"alpha", "beta"}
        assert dist.argmax() == "alpha"

    def test_classify_accepts_pairs(self, live_backends):
        dist = live_backends.victim.classify((("the", "gear"), ("a", "rotor", "near", "flux")))
        assert dist.argmax() == "beta"

    def test_unknown_label_envelope(self, live_backends):
        query = CmlmQuery(tokens=("the", "breeze"), masked_index=1, label="gamma")
        with pytest.raises(ProtocolError) as excinfo:
            live_backends.cmlm.token_prob(query)
        assert "unknown_label" in str(excinfo.value)

    def test_cmlm_prob_in_range(self, live_backends):
        query = CmlmQuery(tokens=("the", "breeze", "near", "dew"), masked_index=1, label="alpha")
        prob = live_backends.cmlm.token_prob(query)
        assert 0.0 <= prob <= 1.0

    def test_infill_respects_request_bounds(self, live_backends):
        request = InfillRequest(
            left=("the", "breeze"), right=("near", "dew"), max_fill_len=2, num_samples=10, top_k=20, seed=4
        )
        response = live_backends.infiller.infill(request)
        assert 1 <= len(response.fills) <= 10
        assert all(1 <= len(f) <= 2 for f in response.fills)

    def test_parse_covers_tokens(self, live_backends):
        tokens = ("the", "breeze", "drifts", "near", "a", "willow")
        tree = live_backends.parser.parse(tokens)
        assert tuple(leaf.token for leaf in leaves(tree)) == tokens

    def test_perplexity_positive(self, live_backends):
        assert live_backends.perplexity.perplexity(("the", "breeze", "near", "dew")) > 0

    def test_batch_endpoints_match_singles(self, live_backends):
        items = [(("the", "breeze"),), (("a", "gear", "near", "flux"),)]
        assert live_backends.victim.classify_batch(items) == [
            live_backends.victim.classify(item) for item in items
        ]
        queries = [CmlmQuery(tokens=("the", "breeze"), masked_index=1, label="alpha")]
        assert live_backends.cmlm.token_prob_batch(queries) == [
            live_backends.cmlm.token_prob(queries[0])
        ]


class TestEndToEndAttack:
    def test_campaign_against_live_server(self, served_url, tmp_path):
        dataset = tmp_path / "toy_dataset.jsonl"
        toy_dataset_jsonl(str(dataset), seed=99, count=12)
        cfg = RunConfig(
            dataset=str(dataset),
            output_dir=str(tmp_path / "run"),
            backend_url=served_url,
            labels=("alpha", "beta"),
            tree_source="parse",
            attack=AttackConfig(num_fill_candidates=40, top_k=20, seed=5),
            limit=12,
            seed=5,
            workers=2,
            use_perplexity=True,
        )
        report = run_attack_campaign(cfg)
        counts = report.counts
        assert sum(counts.values()) == 12
        assert counts["errored"] == 0

        results, _ = load_results(str(tmp_path / "run" / "results.jsonl"))
        attacked = [r for r in results if r.steps]
        assert attacked, "at least some examples must have been attacked"
        for result in results:
            importances = [step.target.importance for step in result.steps]
            assert importances == sorted(importances, reverse=True)
            spans = result.committed_spans
            assert len(spans) <= cfg.attack.max_perturbations
            for i, a in enumerate(spans):
                for b in spans[i + 1 :]:
                    assert not a.intersects(b)
        print(f"[PASS-INFO] live-server campaign: {counts}")
