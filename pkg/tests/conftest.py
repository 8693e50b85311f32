import json
import os

import pytest

from phraseattack.gateway.clients import BackendSet
from phraseattack.gateway.mocks import mock_backends_from_spec
from phraseattack.gateway.transport import InProcessTransport

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
FIXTURE_DATASET = os.path.join(DATA_DIR, "fixture_dataset.jsonl")
FIXTURE_MOCK_SPEC = os.path.join(DATA_DIR, "fixture_mock_spec.json")


@pytest.fixture(scope="session")
def fixture_mock_spec() -> dict:
    with open(FIXTURE_MOCK_SPEC, encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def fixture_dataset_path() -> str:
    return FIXTURE_DATASET


def backends_for(spec: dict) -> BackendSet:
    mocks = mock_backends_from_spec(spec)
    transport = InProcessTransport(mocks.handle)
    return BackendSet.over(transport, with_perplexity=mocks.perplexity is not None)


@pytest.fixture
def fixture_backends(fixture_mock_spec) -> BackendSet:
    return backends_for(fixture_mock_spec)
