"""Typed clients for the four model roles, over any Transport."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ProtocolError, TokenMismatch
from ..syntax import ParseTree, leaves, parse_ptb
from ..text import Tokens
from .transport import Transport
from .types import ClassDistribution, CmlmQuery, InfillRequest, InfillResponse, prob_from_wire

CLASSIFY = "/v1/classify"
INFILL = "/v1/infill"
CMLM = "/v1/cmlm"
PARSE = "/v1/parse"
PERPLEXITY = "/v1/perplexity"
CLASSIFY_BATCH = "/v1/classify_batch"
CMLM_BATCH = "/v1/cmlm_batch"


class VictimClient:
    """The classifier under attack, queried black-box for class probabilities."""

    def __init__(self, transport: Transport):
        self._transport = transport

    def classify(self, segments: tuple[Tokens, ...]) -> ClassDistribution:
        if not segments or any(not seg for seg in segments):
            raise ValueError("classify needs non-empty segments")
        payload = {"segments": [list(seg) for seg in segments]}
        return ClassDistribution.from_wire(self._transport.post(CLASSIFY, payload))

    def classify_batch(self, items: list[tuple[Tokens, ...]]) -> list[ClassDistribution]:
        payload = {"items": [{"segments": [list(seg) for seg in segments]} for segments in items]}
        body = self._transport.post(CLASSIFY_BATCH, payload)
        results = body.get("results")
        if not isinstance(results, list) or len(results) != len(items):
            raise ProtocolError("classify_batch results do not match request items")
        return [ClassDistribution.from_wire(item) for item in results]


class InfillClient:
    def __init__(self, transport: Transport):
        self._transport = transport

    def infill(self, request: InfillRequest) -> InfillResponse:
        body = self._transport.post(INFILL, request.to_wire())
        response = InfillResponse.from_wire(body, request.max_fill_len)
        if len(response.fills) > request.num_samples:
            raise ProtocolError(f"server returned {len(response.fills)} fills for num_samples={request.num_samples}")
        return response


class CmlmClient:
    def __init__(self, transport: Transport):
        self._transport = transport

    def token_prob(self, query: CmlmQuery) -> float:
        return prob_from_wire(self._transport.post(CMLM, query.to_wire()))

    def token_prob_batch(self, queries: list[CmlmQuery]) -> list[float]:
        payload = {"items": [q.to_wire() for q in queries]}
        body = self._transport.post(CMLM_BATCH, payload)
        results = body.get("results")
        if not isinstance(results, list) or len(results) != len(queries):
            raise ProtocolError("cmlm_batch results do not match request items")
        return [prob_from_wire(item) for item in results]


class ParseClient:
    def __init__(self, transport: Transport):
        self._transport = transport

    def parse(self, tokens: Tokens) -> ParseTree:
        body = self._transport.post(PARSE, {"tokens": list(tokens)})
        raw = body.get("tree")
        if not isinstance(raw, str):
            raise ProtocolError("parse response missing 'tree' string")
        tree = parse_ptb(raw, tokens)
        # Tokenization contract: the tree must cover exactly the tokens sent.
        if tuple(leaf.token for leaf in leaves(tree)) != tokens:
            raise TokenMismatch("parse endpoint returned a tree over different tokens")
        return tree


class PerplexityClient:
    def __init__(self, transport: Transport):
        self._transport = transport

    def perplexity(self, tokens: Tokens) -> float:
        body = self._transport.post(PERPLEXITY, {"tokens": list(tokens)})
        value = body.get("ppl")
        if not isinstance(value, (int, float)) or value <= 0:
            raise ProtocolError("perplexity response missing positive 'ppl'")
        return float(value)


@dataclass
class BackendSet:
    """Everything an attack needs to talk to, already wired to transports."""

    victim: VictimClient
    infiller: InfillClient
    cmlm: CmlmClient
    parser: ParseClient | None = None
    perplexity: PerplexityClient | None = None

    @staticmethod
    def over(transport: Transport, with_parser: bool = True, with_perplexity: bool = False) -> "BackendSet":
        return BackendSet(
            victim=VictimClient(transport),
            infiller=InfillClient(transport),
            cmlm=CmlmClient(transport),
            parser=ParseClient(transport) if with_parser else None,
            perplexity=PerplexityClient(transport) if with_perplexity else None,
        )
