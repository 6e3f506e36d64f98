"""Thin HTTP client for chat-completions style endpoints.

Sampling goes through POST /chat/completions; logprob scoring goes through
POST /completions with echo+logprobs (the llama.cpp/vLLM-compatible shape),
summing token logprobs over the continuation region. Failures retry with
exponential backoff up to the endpoint's max_retries; 4xx responses are not
retried. Bearer auth is read from the environment variable the endpoint
names, never from config values.
"""

from __future__ import annotations

import os
import time

import httpx

from ..errors import EndpointError
from .config import LmEndpoint

BACKOFF_BASE_S = 0.5


class LmClient:
    def __init__(self, endpoint: LmEndpoint, transport=None, sleeper=time.sleep):
        self.endpoint = endpoint
        self._sleep = sleeper
        headers = {}
        if endpoint.auth_token_env:
            token = os.environ.get(endpoint.auth_token_env)
            if not token:
                raise EndpointError(
                    f"auth token environment variable {endpoint.auth_token_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        self._http = httpx.Client(
            base_url=endpoint.base_url.rstrip("/"),
            timeout=endpoint.request_timeout_s,
            headers=headers,
            transport=transport,
        )

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _post(self, path: str, payload: dict) -> dict:
        last_error = None
        for attempt in range(self.endpoint.max_retries + 1):
            try:
                response = self._http.post(path, json=payload)
                if 400 <= response.status_code < 500:
                    raise EndpointError(
                        f"{path} rejected with {response.status_code}: {response.text[:200]}"
                    )
                response.raise_for_status()
                return response.json()
            except EndpointError:
                raise
            except (httpx.HTTPError, ValueError) as exc:
                last_error = exc
                if attempt < self.endpoint.max_retries:
                    self._sleep(BACKOFF_BASE_S * (2 ** attempt))
        raise EndpointError(
            f"{path} failed after {self.endpoint.max_retries + 1} attempts: {last_error}"
        ) from last_error

    def chat_text(self, prompt: str, *, temperature: float, seed: int,
                  max_tokens=None) -> str:
        """One sampled completion for a single-message chat prompt."""
        payload = {
            "model": self.endpoint.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "n": 1,
            "seed": int(seed),
        }
        if max_tokens is not None:
            payload["max_tokens"] = int(max_tokens)
        body = self._post("/chat/completions", payload)
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise EndpointError(f"malformed chat response: {exc!r}") from exc
        if not isinstance(content, str):
            raise EndpointError("chat response content is not text")
        return content

    def score_continuation(self, context: str, continuation: str):
        """Total logprob and token count of `continuation` given `context`.

        Uses the echo trick: the endpoint scores the concatenated text and
        reports per-token logprobs with character offsets; tokens at or past
        the context boundary belong to the continuation.
        """
        full = context + continuation
        payload = {
            "model": self.endpoint.model_id,
            "prompt": full,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
            "temperature": 0.0,
        }
        body = self._post("/completions", payload)
        try:
            info = body["choices"][0]["logprobs"]
            logprobs = info["token_logprobs"]
            offsets = info["text_offset"]
        except (KeyError, IndexError, TypeError) as exc:
            raise EndpointError(f"endpoint returned no logprobs: {exc!r}") from exc
        if len(logprobs) != len(offsets):
            raise EndpointError("logprob and offset arrays disagree")
        boundary = len(context)
        total = 0.0
        count = 0
        for offset, lp in zip(offsets, logprobs):
            if offset < boundary:
                continue
            if lp is None:
                raise EndpointError("missing logprob inside the continuation")
            total += float(lp)
            count += 1
        if count == 0:
            raise EndpointError("no tokens fell inside the continuation span")
        return total, count
