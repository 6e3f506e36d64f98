"""Request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

from ..agents.config import AgentConfig, LmEndpoint
from ..pipelines import MethodSpec
from ..rsa import RsaConfig


class AgentConfigModel(BaseModel):
    mode: Literal["direct", "cot"] = "direct"
    estimator: Literal["sampling", "logprob-scoring"] = "sampling"
    n_samples: int = Field(32, ge=1)
    temperature: float = Field(1.0, ge=0)
    seed: int = 0
    max_tokens: int | None = Field(None, ge=1)
    smoothing: float = Field(1e-6, ge=0)

    def to_config(self) -> AgentConfig:
        return AgentConfig(**self.model_dump())


class EndpointModel(BaseModel):
    base_url: str = Field(min_length=1)
    model_id: str = Field(min_length=1)
    auth_token_env: str | None = None
    request_timeout_s: float = Field(60.0, gt=0)
    max_retries: int = Field(3, ge=0)
    max_parallel_requests: int = Field(4, ge=1)

    def to_endpoint(self) -> LmEndpoint:
        return LmEndpoint(**self.model_dump())


class AgentSpecModel(BaseModel):
    kind: Literal["mock", "lm"]
    config: AgentConfigModel = AgentConfigModel()
    endpoint: EndpointModel | None = None
    lexicon_path: str | None = None
    speaker_spread: float = Field(5.0, gt=0)

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind == "mock" and not self.lexicon_path:
            raise ValueError("mock agents need lexicon_path")
        if self.kind == "lm" and self.endpoint is None:
            raise ValueError("lm agents need an endpoint")
        return self


class MethodSpecModel(BaseModel):
    task: Literal["comprehension", "production"]
    method: Literal["direct", "cot", "direct-rsa", "cot-rsa"] = "direct"
    rsa_variant: Literal["standard", "state-marginal"] = "standard"
    n_alternatives: int = Field(32, ge=1)
    alt_per_state: int = Field(1, ge=1)
    actual_only: bool = False
    selection: Literal["argmax", "sample"] = "argmax"

    def to_spec(self) -> MethodSpec:
        return MethodSpec(**self.model_dump())


class RsaModel(BaseModel):
    alpha: float = Field(1.0, ge=0)
    epsilon: float = Field(1e-6, ge=0)

    def to_config(self) -> RsaConfig:
        return RsaConfig(alpha=self.alpha, epsilon=self.epsilon)


class _EvalCommon(BaseModel):
    problems_path: str
    seed: int = 0
    rsa: RsaModel = RsaModel()
    out_dir: str | None = None
    basename: str | None = None
    cache_dir: str | None = None
    formats: list[Literal["json", "csv"]] = ["json", "csv"]


class ComprehensionEvalRequest(_EvalCommon):
    method: MethodSpecModel
    agent: AgentSpecModel
    alt_agent: AgentSpecModel | None = None
    clues_path: str | None = None
    human_data_path: str | None = None

    @model_validator(mode="after")
    def _check_sources(self):
        if self.method.task != "comprehension":
            raise ValueError("method.task must be comprehension")
        if not self.clues_path and not self.human_data_path:
            raise ValueError("provide clues_path or human_data_path")
        return self


class ProductionEvalRequest(_EvalCommon):
    method: MethodSpecModel
    speaker: AgentSpecModel
    judge: AgentSpecModel | None = None
    human_data_path: str | None = None

    @model_validator(mode="after")
    def _check_task(self):
        if self.method.task != "production":
            raise ValueError("method.task must be production")
        return self


class AblationRequest(ProductionEvalRequest):
    pool_sizes: list[int] = Field(min_length=1)
    bootstrap_resamples: int = Field(10000, ge=1000)


class AlternativesRequest(BaseModel):
    problems_path: str
    agent: AgentSpecModel
    per_state: int = Field(1, ge=1)
    out_path: str | None = None
    cache_dir: str | None = None


class JudgeRequest(_EvalCommon):
    clues_path: str
    judge: AgentSpecModel
    human_data_path: str | None = None


class ValidateRequest(BaseModel):
    path: str
    kind: Literal["problems", "judgments", "clues"]


class RenderRequest(BaseModel):
    report_path: str
    out_dir: str
    basename: str | None = None
    formats: list[Literal["json", "csv"]] = ["json", "csv"]


class CompareRequest(BaseModel):
    report_a: str
    report_b: str
    resamples: int = Field(10000, ge=1000)
    seed: int = 0


class GuessSubmission(BaseModel):
    session_id: str = Field(min_length=1)
    problem_id: str = Field(min_length=1)
    guess: float = Field(ge=0, le=100)
    clue: str | None = None
    nonce: str | None = None


class ClueSubmission(BaseModel):
    session_id: str = Field(min_length=1)
    problem_id: str = Field(min_length=1)
    clue: str = Field(min_length=1)
    nonce: str | None = None
