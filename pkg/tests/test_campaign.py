import json
import os

import pytest

from phraseattack.attack import AttackConfig
from phraseattack.campaign import RunConfig, run_attack_campaign
from phraseattack.cli import main as cli_main
from phraseattack.errors import BackendUnavailable
from phraseattack.gateway.mocks import mock_backends_from_spec
from phraseattack.gateway.server import MockServer


def fixture_config(fixture_dataset_path, fixture_mock_spec, out_dir, **overrides):
    base = dict(
        dataset=fixture_dataset_path,
        output_dir=str(out_dir),
        mock_spec=fixture_mock_spec,
        labels=tuple(fixture_mock_spec["labels"]),
        tree_source="inline",
        attack=AttackConfig(seed=7),
        limit=20,
        seed=7,
        workers=1,
    )
    base.update(overrides)
    return RunConfig(**base)


class TestCampaign:
    def test_fixture_outcome_counts(self, fixture_dataset_path, fixture_mock_spec, tmp_path):
        cfg = fixture_config(fixture_dataset_path, fixture_mock_spec, tmp_path / "run")
        report = run_attack_campaign(cfg)
        assert report.counts == {"success": 12, "failed": 5, "skipped": 3, "errored": 0}
        assert report.asr == 12 / 17
        assert report.mean_ppl is not None
        assert max(report.tag_frequency, key=report.tag_frequency.get) == "NP"

    def test_results_keep_dataset_order(self, fixture_dataset_path, fixture_mock_spec, tmp_path):
        cfg = fixture_config(fixture_dataset_path, fixture_mock_spec, tmp_path / "run", workers=4)
        run_attack_campaign(cfg)
        with open(tmp_path / "run" / "results.jsonl", encoding="utf-8") as fh:
            ids = [json.loads(line)["id"] for line in fh]
        with open(fixture_dataset_path, encoding="utf-8") as fh:
            expected = [json.loads(line)["id"] for line in fh]
        assert ids == expected

    def test_worker_counts_do_not_change_bytes(self, fixture_dataset_path, fixture_mock_spec, tmp_path):
        cfg1 = fixture_config(fixture_dataset_path, fixture_mock_spec, tmp_path / "w1", workers=1)
        cfg8 = fixture_config(fixture_dataset_path, fixture_mock_spec, tmp_path / "w8", workers=8)
        run_attack_campaign(cfg1)
        run_attack_campaign(cfg8)
        for name in ("results.jsonl", "report.json"):
            one = (tmp_path / "w1" / name).read_bytes()
            eight = (tmp_path / "w8" / name).read_bytes()
            assert one == eight

    def test_reruns_are_byte_identical(self, fixture_dataset_path, fixture_mock_spec, tmp_path):
        cfg_a = fixture_config(fixture_dataset_path, fixture_mock_spec, tmp_path / "a")
        cfg_b = fixture_config(fixture_dataset_path, fixture_mock_spec, tmp_path / "b")
        run_attack_campaign(cfg_a)
        run_attack_campaign(cfg_b)
        assert (tmp_path / "a" / "results.jsonl").read_bytes() == (tmp_path / "b" / "results.jsonl").read_bytes()

    def test_cache_dir_reuse_reproduces_outputs(self, fixture_dataset_path, fixture_mock_spec, tmp_path):
        cache = tmp_path / "cache"
        cfg_a = fixture_config(
            fixture_dataset_path, fixture_mock_spec, tmp_path / "a", cache_dir=str(cache)
        )
        run_attack_campaign(cfg_a)
        assert any(cache.rglob("*.json"))
        cfg_b = fixture_config(
            fixture_dataset_path, fixture_mock_spec, tmp_path / "b", cache_dir=str(cache)
        )
        run_attack_campaign(cfg_b)
        assert (tmp_path / "a" / "results.jsonl").read_bytes() == (tmp_path / "b" / "results.jsonl").read_bytes()

    def test_missing_inline_tree_marks_example_errored(self, fixture_mock_spec, tmp_path):
        dataset = tmp_path / "data.jsonl"
        dataset.write_text(json.dumps({"id": "x", "text": "plain words here", "label": "neg"}) + "\n")
        cfg = fixture_config(str(dataset), fixture_mock_spec, tmp_path / "run", limit=1)
        report = run_attack_campaign(cfg)
        assert report.counts["errored"] == 1

    def test_parse_tree_source_uses_endpoint(self, fixture_mock_spec, tmp_path):
        dataset = tmp_path / "data.jsonl"
        dataset.write_text(json.dumps({"id": "x", "text": "a terrible meal", "label": "neg"}) + "\n")
        spec = dict(fixture_mock_spec)
        spec["parse"] = {"trees": {"a terrible meal": "(S (NP (DT a) (JJ terrible) (NN meal)))"}}
        cfg = fixture_config(str(dataset), spec, tmp_path / "run", limit=1, tree_source="parse")
        report = run_attack_campaign(cfg)
        assert report.counts["success"] == 1

    def test_http_backend_campaign(self, fixture_dataset_path, fixture_mock_spec, tmp_path):
        server = MockServer(mock_backends_from_spec(fixture_mock_spec)).start()
        try:
            cfg = RunConfig(
                dataset=fixture_dataset_path,
                output_dir=str(tmp_path / "http"),
                backend_url=server.url,
                labels=tuple(fixture_mock_spec["labels"]),
                attack=AttackConfig(seed=7),
                limit=20,
                seed=7,
                workers=4,
                use_perplexity=True,
            )
            report = run_attack_campaign(cfg)
            assert report.counts == {"success": 12, "failed": 5, "skipped": 3, "errored": 0}

            in_process = fixture_config(fixture_dataset_path, fixture_mock_spec, tmp_path / "inproc")
            run_attack_campaign(in_process)
            http_bytes = (tmp_path / "http" / "results.jsonl").read_bytes()
            inproc_bytes = (tmp_path / "inproc" / "results.jsonl").read_bytes()
            assert http_bytes == inproc_bytes
        finally:
            server.stop()

    def test_unreachable_backend_aborts(self, fixture_dataset_path, tmp_path):
        cfg = RunConfig(
            dataset=fixture_dataset_path,
            output_dir=str(tmp_path / "run"),
            backend_url="http://127.0.0.1:9",
            limit=1,
        )
        with pytest.raises(BackendUnavailable):
            run_attack_campaign(cfg)


class TestCli:
    def test_attack_score_report(self, fixture_dataset_path, tmp_path, capsys):
        out_dir = tmp_path / "run"
        spec_path = os.path.join(os.path.dirname(fixture_dataset_path), "fixture_mock_spec.json")
        rc = cli_main(
            [
                "attack",
                "--dataset", fixture_dataset_path,
                "--output-dir", str(out_dir),
                "--mock-spec", spec_path,
                "--seed", "7",
                "--limit", "20",
            ]
        )
        assert rc == 0
        table = capsys.readouterr().out
        assert "ASR" in table and "70.6" in table

        rc = cli_main(["score", "--results", str(out_dir / "results.jsonl"), "--json"])
        assert rc == 0
        scored = json.loads(capsys.readouterr().out)
        assert scored["counts"] == {"success": 12, "failed": 5, "skipped": 3, "errored": 0}

        rc = cli_main(["report", "--report", str(out_dir / "report.json")])
        assert rc == 0
        assert "ASR" in capsys.readouterr().out

    def test_config_file_with_flag_override(self, fixture_dataset_path, tmp_path, capsys):
        spec_path = os.path.join(os.path.dirname(fixture_dataset_path), "fixture_mock_spec.json")
        config = {
            "dataset": fixture_dataset_path,
            "output_dir": str(tmp_path / "from_config"),
            "mock_spec": spec_path,
            "seed": 7,
            "limit": 20,
            "max_steps_T": 11,
        }
        config_path = tmp_path / "run.json"
        config_path.write_text(json.dumps(config))
        rc = cli_main(["attack", "--config", str(config_path), "--output-dir", str(tmp_path / "override")])
        assert rc == 0
        assert (tmp_path / "override" / "report.json").exists()
        assert not (tmp_path / "from_config").exists()
