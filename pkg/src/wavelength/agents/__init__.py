"""Listener/speaker agents: live model endpoints and deterministic mocks."""

from .base import Agent, Candidate, dedupe_candidates
from .config import AgentConfig, LmEndpoint, load_agent_yaml
from .cache import RequestCache
from .client import LmClient
from .lm import LmAgent
from .mock import (
    ExplicitCurve,
    GaussianCurve,
    IntervalCurve,
    MockAgent,
    ScriptedSpeaker,
    TabularLexicon,
    gaussian_comprehension_suite,
    misleading_production_suite,
)
from .parsing import ClueIssue, ClueValidation, parse_answer, parse_clue, validate_clue
from .prompts import COT_TRIGGER, render_listener, render_speaker

__all__ = [
    "Agent",
    "AgentConfig",
    "Candidate",
    "ClueIssue",
    "ClueValidation",
    "COT_TRIGGER",
    "ExplicitCurve",
    "GaussianCurve",
    "IntervalCurve",
    "LmAgent",
    "LmClient",
    "LmEndpoint",
    "MockAgent",
    "RequestCache",
    "ScriptedSpeaker",
    "TabularLexicon",
    "dedupe_candidates",
    "gaussian_comprehension_suite",
    "load_agent_yaml",
    "misleading_production_suite",
    "parse_answer",
    "parse_clue",
    "render_listener",
    "render_speaker",
    "validate_clue",
]
