"""Agent backed by a live model endpoint.

Two listener estimators:

  sampling         n_samples completions, numeric answers snapped to the
                   grid and count-normalized with smoothing. Raises
                   ParseStarvation when under half the samples parse.
  logprob-scoring  direct mode only: each grid value is scored as the
                   continuation "<answer>{v}</answer>" appended to the
                   prompt, total token logprobs softmaxed over the grid.

Every network call is content-addressed in the request cache when one is
attached, keyed by (model, prompt, mode, estimator, temperature, seed,
sample index), so warm-cache reruns replay byte-identical responses without
touching the endpoint. Per-request seeds are derived from the base seed and
the sample index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import ParseStarvation
from ..hashing import derive_seed
from ..rsa import DEFAULT_GRID, Distribution, normalize
from .base import dedupe_candidates
from .cache import RequestCache
from .client import LmClient
from .config import AgentConfig, LmEndpoint
from .parsing import parse_answer, parse_clue
from .prompts import ANSWER_CLOSE, ANSWER_OPEN, format_scale_value, render_listener, render_speaker

DEFAULT_MAX_TOKENS = {"direct": 64, "cot": 2048}


class LmAgent:
    def __init__(self, config: AgentConfig, endpoint: LmEndpoint,
                 cache: RequestCache | None = None, grid=DEFAULT_GRID,
                 transport=None, client: LmClient | None = None):
        self.config = config
        self.endpoint = endpoint
        self.cache = cache
        self.grid = grid
        self.client = client if client is not None else LmClient(endpoint, transport=transport)

    # -- plumbing ---------------------------------------------------------

    def fingerprint(self) -> dict:
        return {
            "kind": "lm",
            "base_url": self.endpoint.base_url,
            "model_id": self.endpoint.model_id,
            **self.config.as_dict(),
        }

    def with_config(self, **overrides) -> "LmAgent":
        if not overrides:
            return self
        return LmAgent(self.config.replaced(**overrides), self.endpoint,
                       cache=self.cache, grid=self.grid, client=self.client)

    def literal(self) -> "LmAgent":
        """Direct-mode view of the same model, for literal-listener columns."""
        return self.with_config(mode="direct")

    def _max_tokens(self, mode: str):
        if self.config.max_tokens is not None:
            return self.config.max_tokens
        return DEFAULT_MAX_TOKENS[mode]

    def _cached_chat(self, prompt: str, *, mode: str, temperature: float,
                     sample_index: int) -> str:
        request_seed = derive_seed(self.config.seed, sample_index)
        fields = {
            "model_id": self.endpoint.model_id,
            "prompt": prompt,
            "mode": mode,
            "estimator": "sampling",
            "temperature": temperature,
            "seed": self.config.seed,
            "sample_index": sample_index,
        }

        def fetch():
            return self.client.chat_text(
                prompt,
                temperature=temperature,
                seed=request_seed,
                max_tokens=self._max_tokens(mode),
            )

        if self.cache is None:
            return fetch()
        key = RequestCache.request_key(**fields)
        response, _ = self.cache.lookup_or_call(key, fields, fetch)
        return response

    def _cached_score(self, context: str, continuation: str, *, mode: str,
                      sample_index: int):
        fields = {
            "model_id": self.endpoint.model_id,
            "prompt": context + continuation,
            "mode": mode,
            "estimator": "logprob-scoring",
            "temperature": 0.0,
            "seed": self.config.seed,
            "sample_index": sample_index,
        }

        def fetch():
            total, count = self.client.score_continuation(context, continuation)
            return {"total_logprob": total, "n_tokens": count}

        if self.cache is None:
            return fetch()
        key = RequestCache.request_key(**fields)
        response, _ = self.cache.lookup_or_call(key, fields, fetch)
        return response

    def _fan_out(self, calls):
        """Run thunks in parallel, preserving order."""
        workers = min(len(calls), self.endpoint.max_parallel_requests)
        if workers <= 1:
            return [call() for call in calls]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda call: call(), calls))

    # -- listener ---------------------------------------------------------

    def listener_distribution(self, problem, clue: str) -> Distribution:
        prompt = render_listener(problem.left, problem.right, clue,
                                 cot=self.config.mode == "cot")
        if self.config.estimator == "logprob-scoring":
            return self._listener_by_scoring(prompt)
        return self._listener_by_sampling(prompt)

    def _listener_by_scoring(self, prompt: str) -> Distribution:
        context = f"{prompt}\n{ANSWER_OPEN}"
        calls = [
            (lambda i=i, v=v: self._cached_score(
                context, f"{format_scale_value(v)}{ANSWER_CLOSE}",
                mode=self.config.mode, sample_index=i,
            ))
            for i, v in enumerate(self.grid)
        ]
        results = self._fan_out(calls)
        totals = np.array([r["total_logprob"] for r in results], dtype=float)
        shifted = np.exp(totals - totals.max())
        return Distribution(self.grid.values, shifted / shifted.sum())

    def _listener_by_sampling(self, prompt: str) -> Distribution:
        n = self.config.n_samples
        calls = [
            (lambda i=i: self._cached_chat(
                prompt, mode=self.config.mode,
                temperature=self.config.temperature, sample_index=i,
            ))
            for i in range(n)
        ]
        texts = self._fan_out(calls)
        values = [v for v in (parse_answer(t) for t in texts) if v is not None]
        if len(values) * 2 < n:
            raise ParseStarvation(
                f"only {len(values)} of {n} samples contained a usable answer"
            )
        counts = np.zeros(len(self.grid))
        for v in values:
            counts[self.grid.index_of(self.grid.snap(v))] += 1
        return normalize(counts, self.grid, epsilon=self.config.smoothing)

    # -- speaker ----------------------------------------------------------

    def generate_alternatives(self, problem, per_state: int = 1) -> list:
        """One or more clue proposals per grid state, deduplicated.

        Generation is always direct (no chain of thought): alternatives only
        need to be plausible utterances, and direct sampling is cheap.
        States whose samples fail to parse are skipped.
        """
        if per_state < 1:
            raise ValueError("per_state must be at least 1")
        calls = []
        for state_index, state in enumerate(self.grid):
            prompt = render_speaker(problem.left, problem.right, state, cot=False)
            for j in range(per_state):
                calls.append(lambda p=prompt, i=state_index * per_state + j: self._cached_chat(
                    p, mode="direct", temperature=self.config.temperature,
                    sample_index=i,
                ))
        texts = self._fan_out(calls)
        seen = set()
        alternatives = []
        for text in texts:
            clue = parse_clue(text)
            if clue is None:
                continue
            key = " ".join(clue.split()).casefold()
            if key in seen:
                continue
            seen.add(key)
            alternatives.append(clue)
        return alternatives

    def speaker_samples(self, problem, target: float, n: int) -> list:
        """Raw clue samples for a target; under-half parse rate raises."""
        prompt = render_speaker(problem.left, problem.right, target,
                                cot=self.config.mode == "cot")
        calls = [
            (lambda i=i: self._cached_chat(
                prompt, mode=self.config.mode,
                temperature=self.config.temperature, sample_index=i,
            ))
            for i in range(n)
        ]
        texts = self._fan_out(calls)
        clues = [c for c in (parse_clue(t) for t in texts) if c is not None]
        if len(clues) * 2 < n:
            raise ParseStarvation(
                f"only {len(clues)} of {n} speaker samples contained a clue"
            )
        return clues

    def speaker_candidates(self, problem, target: float, n: int) -> list:
        return dedupe_candidates(self.speaker_samples(problem, target, n))

    def speaker_score(self, problem, state: float, utterance: str) -> float:
        """Length-normalized generation propensity of `utterance` at `state`."""
        prompt = render_speaker(problem.left, problem.right, state, cot=False)
        context = f"{prompt}\n{ANSWER_OPEN}"
        result = self._cached_score(context, utterance, mode="direct", sample_index=0)
        return math.exp(result["total_logprob"] / max(1, result["n_tokens"]))
