"""Model gateways: generative chat, embeddings, and deterministic mocks.

Every external model sits behind one of two small contracts so tests
and dry runs can swap in deterministic local implementations:

* ChatGateway.complete(messages, ...) -> str
* EmbeddingGateway.embed(texts) -> list of vectors
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Protocol, Sequence

import httpx

from .corpus import tokenize
from .errors import GatewayError, ProtocolError


class ChatGateway(Protocol):
    def complete(
        self, messages: Sequence[Mapping[str, str]], *, max_tokens: int = 1024, temperature: float = 0.0
    ) -> str:
        ...


class EmbeddingGateway(Protocol):
    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        ...


def _retrying_post(
    url: str,
    payload: dict,
    *,
    headers: Mapping[str, str],
    timeout: float,
    max_retries: int,
    backoff_base: float,
    client: Optional[httpx.Client] = None,
) -> dict:
    owned = client is None
    client = client or httpx.Client(timeout=timeout)
    try:
        last_error: Exception | None = None
        for attempt in range(max_retries + 1):
            try:
                response = client.post(url, json=payload, headers=dict(headers))
                if response.status_code >= 500:
                    raise GatewayError(f"{url} returned {response.status_code}")
                if response.status_code != 200:
                    raise ProtocolError(f"{url} returned {response.status_code}: {response.text[:200]}")
                try:
                    return response.json()
                except ValueError as exc:
                    raise ProtocolError(f"{url} response is not JSON") from exc
            except (httpx.TransportError, GatewayError) as exc:
                last_error = exc
                if attempt < max_retries:
                    time.sleep(backoff_base * (2**attempt))
        raise GatewayError(f"{url} failing after {max_retries + 1} attempts: {last_error}")
    finally:
        if owned:
            client.close()


@dataclass
class HttpChatGateway:
    """Client for a chat-completions style endpoint.

    Wire format: POST {model, messages, max_tokens, temperature} ->
    {choices: [{message: {content}}]}.
    """

    base_url: str
    model: str
    api_key: Optional[str] = None
    timeout: float = 120.0
    max_retries: int = 3
    backoff_base: float = 0.5
    extra_headers: Mapping[str, str] = field(default_factory=dict)
    client: Optional[httpx.Client] = None

    def complete(
        self, messages: Sequence[Mapping[str, str]], *, max_tokens: int = 1024, temperature: float = 0.0
    ) -> str:
        headers = dict(self.extra_headers)
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": list(messages),
            "max_tokens": max_tokens,
            "temperature": temperature,
        }
        body = _retrying_post(
            self.base_url,
            payload,
            headers=headers,
            timeout=self.timeout,
            max_retries=self.max_retries,
            backoff_base=self.backoff_base,
            client=self.client,
        )
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"chat response missing choices[0].message.content: {body}") from exc
        if not isinstance(content, str):
            raise ProtocolError("chat response content is not a string")
        return content


@dataclass
class HttpEmbeddingGateway:
    """Client for the embedding endpoint: POST {texts} -> {embeddings}."""

    base_url: str
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 0.5
    extra_headers: Mapping[str, str] = field(default_factory=dict)
    client: Optional[httpx.Client] = None

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        body = _retrying_post(
            self.base_url,
            {"texts": list(texts)},
            headers=self.extra_headers,
            timeout=self.timeout,
            max_retries=self.max_retries,
            backoff_base=self.backoff_base,
            client=self.client,
        )
        rows = body.get("embeddings") if isinstance(body, dict) else None
        if not isinstance(rows, list) or len(rows) != len(texts):
            raise ProtocolError("embedding response does not cover the request texts")
        return [[float(v) for v in row] for row in rows]


class HashingEmbedder:
    """Deterministic local embedder: signed token hashing into a fixed dim.

    Texts with disjoint hashed token sets map to orthogonal vectors, and
    identical texts map to identical vectors on every machine.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim

    def _slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        index = int.from_bytes(digest[:4], "big") % self.dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        return index, sign

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        rows = []
        for text in texts:
            vec = [0.0] * self.dim
            for token in tokenize(text):
                index, sign = self._slot(token)
                vec[index] += sign
            rows.append(vec)
        return rows


_JSON_ARRAY = re.compile(r"\[[^\[\]]*\]", re.DOTALL)

COVERAGE_SENTINEL = "Answer with a strict JSON array of booleans"
QUALITY_SENTINEL = "Answer with a strict JSON object of integer scores"
CHAT_SENTINEL = "Answer only from the provided report and posts"


class MockChatGateway:
    """Deterministic stand-in for the generative gateway.

    Report prompts are answered by echoing the prompt (so substituted
    parameters and inline posts land in the body, and coverage of the
    output mirrors coverage of the input). Judge prompts are answered by
    exact string containment, which makes the mock double as a
    deterministic containment judge. Chat prompts are answered from the
    grounding material only.
    """

    def __init__(self):
        self.calls: list[list[dict]] = []

    def complete(
        self, messages: Sequence[Mapping[str, str]], *, max_tokens: int = 1024, temperature: float = 0.0
    ) -> str:
        self.calls.append([dict(m) for m in messages])
        joined = "\n".join(m.get("content", "") for m in messages)
        last_user = next((m["content"] for m in reversed(messages) if m.get("role") == "user"), "")

        if COVERAGE_SENTINEL in joined:
            return self._judge_coverage(joined)
        if QUALITY_SENTINEL in joined:
            return json.dumps({"informative": 4, "quality": 4, "coherence": 4, "attributable": 4, "overall": 4})
        if CHAT_SENTINEL in joined:
            return self._answer_from_grounding(joined, last_user)

        body = f"Automatically generated analytical report.\n{last_user}"
        if "references to original posts" in last_user:
            post_count = len(re.findall(r"^\d+\. ", last_user, flags=re.MULTILINE))
            markers = "".join(f"[{i}]" for i in range(1, min(post_count, 3) + 1))
            body += f"\nKey issues were reported by citizens {markers}."
        return body

    @staticmethod
    def _judge_coverage(prompt: str) -> str:
        report_match = re.search(r"REPORT:\n(.*)\nITEMS:", prompt, flags=re.DOTALL)
        items_match = re.findall(r"^\s*(\d+)\.\s+(.*)$", prompt[report_match.end() :] if report_match else prompt, flags=re.MULTILINE)
        report_tokens = set(tokenize(report_match.group(1))) if report_match else set()
        verdicts = []
        for _, item in items_match:
            item_tokens = tokenize(item)
            verdicts.append(bool(item_tokens) and all(tok in report_tokens for tok in item_tokens))
        return json.dumps(verdicts)

    @staticmethod
    def _answer_from_grounding(grounding: str, question: str) -> str:
        question_tokens = {tok for tok in tokenize(question) if len(tok) > 3}
        for line in grounding.splitlines():
            line_tokens = set(tokenize(line))
            if question_tokens and question_tokens & line_tokens and CHAT_SENTINEL not in line:
                return f"According to the report material: {line.strip()}"
        return "The provided report and posts do not contain an answer to that question."


class ScriptedChatGateway:
    """Replays a fixed response sequence; raises any exception it is handed."""

    def __init__(self, responses: Sequence[str | Exception]):
        self.responses = list(responses)
        self.calls: list[list[dict]] = []

    def complete(
        self, messages: Sequence[Mapping[str, str]], *, max_tokens: int = 1024, temperature: float = 0.0
    ) -> str:
        self.calls.append([dict(m) for m in messages])
        if not self.responses:
            raise GatewayError("scripted gateway exhausted")
        response = self.responses.pop(0)
        if isinstance(response, Exception):
            raise response
        return response


class ScriptedEmbeddingGateway:
    """Maps exact texts to fixed vectors; unseen texts are an error."""

    def __init__(self, vectors: Mapping[str, Sequence[float]]):
        self.vectors = {k: list(v) for k, v in vectors.items()}

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        missing = [t for t in texts if t not in self.vectors]
        if missing:
            raise GatewayError(f"scripted embedder has no vector for {missing[0]!r}")
        return [list(self.vectors[t]) for t in texts]
