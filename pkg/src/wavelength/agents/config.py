"""Agent and endpoint configuration, plus the YAML file format.

A config file holds up to two sections:

    agent:
      mode: cot
      estimator: sampling
      n_samples: 32
      temperature: 1.0
      seed: 0
    endpoint:
      base_url: http://localhost:8000/v1
      model_id: my-model
      auth_token_env: LM_API_TOKEN

Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import yaml

MODES = ("direct", "cot")
ESTIMATORS = ("sampling", "logprob-scoring")


@dataclass(frozen=True)
class LmEndpoint:
    """Where and how to reach a chat-completions style server."""

    base_url: str
    model_id: str
    auth_token_env: str | None = None
    request_timeout_s: float = 60.0
    max_retries: int = 3
    max_parallel_requests: int = 4

    def __post_init__(self):
        if not self.base_url.strip():
            raise ValueError("base_url must be non-empty")
        if not self.model_id.strip():
            raise ValueError("model_id must be non-empty")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.max_parallel_requests < 1:
            raise ValueError("max_parallel_requests must be at least 1")
        if self.request_timeout_s <= 0:
            raise ValueError("request_timeout_s must be positive")


@dataclass(frozen=True)
class AgentConfig:
    """Prompting and estimation knobs for a single agent role."""

    mode: str = "direct"
    estimator: str = "sampling"
    n_samples: int = 32
    temperature: float = 1.0
    seed: int = 0
    max_tokens: int | None = None
    smoothing: float = 1e-6

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(
                f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}"
            )
        if self.estimator == "logprob-scoring" and self.mode != "direct":
            raise ValueError("logprob scoring only supports direct mode")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.smoothing < 0:
            raise ValueError("smoothing must be non-negative")

    def replaced(self, **overrides) -> "AgentConfig":
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "estimator": self.estimator,
            "n_samples": self.n_samples,
            "temperature": self.temperature,
            "seed": self.seed,
            "max_tokens": self.max_tokens,
            "smoothing": self.smoothing,
        }


def _build(cls, section: dict, label: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(section) - allowed
    if unknown:
        raise ValueError(f"unknown {label} keys: {sorted(unknown)}")
    return cls(**section)


def load_agent_yaml(path):
    """Read a config file; returns (AgentConfig, LmEndpoint or None)."""
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    unknown = set(raw) - {"agent", "endpoint"}
    if unknown:
        raise ValueError(f"{path}: unknown sections: {sorted(unknown)}")
    agent = _build(AgentConfig, raw.get("agent") or {}, "agent")
    endpoint = None
    if raw.get("endpoint"):
        endpoint = _build(LmEndpoint, raw["endpoint"], "endpoint")
    return agent, endpoint
