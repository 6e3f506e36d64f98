"""The agent protocol shared by live endpoints and mocks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..rsa import canonical_clue


@dataclass(frozen=True)
class Candidate:
    """A deduplicated speaker proposal with its sample frequency."""

    text: str
    weight: float
    count: int


def dedupe_candidates(samples) -> list:
    """Collapse raw speaker samples into unique candidates.

    Case and surrounding whitespace are ignored when merging; the first
    spelling seen is kept for display. Weights are sample frequencies.
    """
    order = []
    counts = {}
    display = {}
    for text in samples:
        key = canonical_clue(text)
        if not key:
            continue
        if key not in counts:
            counts[key] = 0
            display[key] = text.strip()
            order.append(key)
        counts[key] += 1
    total = sum(counts.values())
    if total == 0:
        return []
    return [Candidate(display[k], counts[k] / total, counts[k]) for k in order]


@runtime_checkable
class Agent(Protocol):
    """What the evaluation pipelines need from any agent.

    listener_distribution returns a Distribution over the agent's grid.
    generate_alternatives returns deduplicated clue texts (possibly empty).
    speaker_samples returns raw clue texts; speaker_candidates the merged
    form. speaker_score is an unnormalized generation propensity used by the
    state-marginal listener; agents without one may raise NotImplementedError.
    """

    def fingerprint(self) -> dict: ...

    def with_config(self, **overrides) -> "Agent": ...

    def literal(self) -> "Agent": ...

    def listener_distribution(self, problem, clue): ...

    def generate_alternatives(self, problem, per_state: int = 1) -> list: ...

    def speaker_samples(self, problem, target: float, n: int) -> list: ...

    def speaker_candidates(self, problem, target: float, n: int) -> list: ...

    def speaker_score(self, problem, state: float, utterance: str) -> float: ...
