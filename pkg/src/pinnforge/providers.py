"""Pluggable completion and embedding providers.

Every step the pipeline delegates to an LLM goes through a CompletionProvider.
The mock backend is a deterministic fixture lookup keyed by a hash of
(prompt, params); the live backend is a plain HTTP POST with bounded retries.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from pathlib import Path

from .errors import FixtureMissing, ProviderUnavailable

DEFAULT_PARAMS = {"temperature": 0.7, "max_tokens": 2048}

ENDPOINT_ENV = "PINNFORGE_PROVIDER_URL"
TOKEN_ENV = "PINNFORGE_PROVIDER_TOKEN"
EMBED_ENDPOINT_ENV = "PINNFORGE_EMBED_URL"
EMBED_TOKEN_ENV = "PINNFORGE_EMBED_TOKEN"


def fixture_key(prompt: str, params: dict) -> str:
    blob = json.dumps({"prompt": prompt, "params": params}, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


class MockProvider:
    """Deterministic fixture lookup; missing keys are an error, never a guess."""

    def __init__(self, fixtures_dir: str | Path | None = None, table: dict | None = None):
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.table = dict(table or {})
        self.calls: list[str] = []

    def complete(self, prompt: str, params: dict | None = None) -> str:
        params = {**DEFAULT_PARAMS, **(params or {})}
        key = fixture_key(prompt, params)
        self.calls.append(key)
        if key in self.table:
            return self.table[key]
        if self.fixtures_dir is not None:
            path = self.fixtures_dir / f"{key}.txt"
            if path.exists():
                return path.read_text(encoding="utf-8")
        raise FixtureMissing(key, prompt[:60])

    def add(self, prompt: str, text: str, params: dict | None = None) -> str:
        params = {**DEFAULT_PARAMS, **(params or {})}
        key = fixture_key(prompt, params)
        self.table[key] = text
        return key

    @staticmethod
    def write_fixture(directory: str | Path, prompt: str, text: str, params: dict | None = None) -> str:
        params = {**DEFAULT_PARAMS, **(params or {})}
        key = fixture_key(prompt, params)
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / f"{key}.txt").write_text(text, encoding="utf-8")
        return key


class HttpProvider:
    """POST {"prompt", "temperature"} -> {"text"} with exponential backoff."""

    def __init__(
        self,
        endpoint: str | None = None,
        token: str | None = None,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 30.0,
        post_fn=None,
    ):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV, "")
        self.token = token or os.environ.get(TOKEN_ENV, "")
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.last_retry_count = 0
        if post_fn is None:
            import requests

            post_fn = requests.post
        self._post = post_fn

    def complete(self, prompt: str, params: dict | None = None) -> str:
        if not self.endpoint:
            raise ProviderUnavailable(f"no endpoint configured (set {ENDPOINT_ENV})")
        params = {**DEFAULT_PARAMS, **(params or {})}
        payload = {"prompt": prompt, "temperature": params["temperature"]}
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        last_error = None
        for attempt in range(self.retries + 1):
            self.last_retry_count = attempt
            try:
                resp = self._post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
            except Exception as err:  # noqa: BLE001 - network layer is opaque here
                last_error = err
                self._sleep(attempt)
                continue
            status = getattr(resp, "status_code", 200)
            if status >= 500:
                last_error = ProviderUnavailable(f"server error {status}")
                self._sleep(attempt)
                continue
            if status >= 400:
                raise ProviderUnavailable(f"request rejected with status {status}")
            body = resp.json()
            if "text" not in body:
                raise ProviderUnavailable("malformed response: missing 'text'")
            return body["text"]
        raise ProviderUnavailable(f"gave up after {self.retries} retries: {last_error}")

    def _sleep(self, attempt: int):
        if attempt < self.retries:
            time.sleep(self.backoff * (2**attempt))


class EmbeddingSimilarityProvider:
    """Scores summaries by cosine similarity of their rendered-text embeddings.

    POST {"texts": [...]} -> {"vectors": [[...], ...]}.
    """

    def __init__(
        self,
        endpoint: str | None = None,
        token: str | None = None,
        timeout: float = 30.0,
        post_fn=None,
    ):
        self.endpoint = endpoint or os.environ.get(EMBED_ENDPOINT_ENV, "")
        self.token = token or os.environ.get(EMBED_TOKEN_ENV, "")
        self.timeout = timeout
        if post_fn is None:
            import requests

            post_fn = requests.post
        self._post = post_fn

    def score(self, s1, s2) -> float:
        if not self.endpoint:
            raise ProviderUnavailable(f"no endpoint configured (set {EMBED_ENDPOINT_ENV})")
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = self._post(
                self.endpoint,
                json={"texts": [s1.render(), s2.render()]},
                headers=headers,
                timeout=self.timeout,
            )
            vectors = resp.json()["vectors"]
        except Exception as err:  # noqa: BLE001
            raise ProviderUnavailable(f"embedding call failed: {err}") from err
        v1, v2 = vectors[0], vectors[1]
        dot = sum(a * b for a, b in zip(v1, v2))
        n1 = math.sqrt(sum(a * a for a in v1))
        n2 = math.sqrt(sum(b * b for b in v2))
        if n1 == 0.0 or n2 == 0.0:
            return 0.0
        return min(1.0, max(0.0, dot / (n1 * n2)))
