"""Model gateway: wire protocol v1, transports, caching, and mock backends.

See docs/wire_protocol_v1.md for the authoritative endpoint and payload
definitions.
"""

from .clients import BackendSet, CmlmClient, InfillClient, ParseClient, PerplexityClient, VictimClient
from .mocks import (
    MockBackends,
    MockCmlm,
    MockParser,
    MockPerplexity,
    MockSamplingInfiller,
    MockTableInfiller,
    MockVictim,
    mock_backends_from_spec,
)
from .transport import CachingTransport, CountingTransport, HttpTransport, InProcessTransport, ResponseCache, Transport
from .types import ClassDistribution, CmlmQuery, InfillRequest, InfillResponse

__all__ = [
    "BackendSet",
    "CachingTransport",
    "ClassDistribution",
    "CmlmClient",
    "CmlmQuery",
    "CountingTransport",
    "HttpTransport",
    "InProcessTransport",
    "InfillClient",
    "InfillRequest",
    "InfillResponse",
    "MockBackends",
    "MockCmlm",
    "MockParser",
    "MockPerplexity",
    "MockSamplingInfiller",
    "MockTableInfiller",
    "MockVictim",
    "ParseClient",
    "PerplexityClient",
    "ResponseCache",
    "Transport",
    "VictimClient",
    "mock_backends_from_spec",
]
