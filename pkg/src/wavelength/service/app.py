"""The FastAPI application: study endpoints plus evaluation wrappers.

Evaluation endpoints load datasets from server-side paths, build agents from
their specs, run the pipelines in-process, optionally emit report files, and
return the report payload. Study endpoints proxy a StudyRuntime when one is
configured. Domain errors map onto stable HTTP codes: think-time violations
are 429 with a retry hint, exhausted sessions 409, schema problems 400.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..agents import LmAgent, MockAgent, RequestCache, TabularLexicon
from ..data import (
    human_clues_and_samples,
    load_clues,
    load_judgments,
    load_problems,
)
from ..errors import (
    EndpointError,
    SchemaError,
    SessionExhausted,
    ThinkTimeViolation,
    WavelengthError,
)
from ..hashing import file_digest
from ..pipelines import (
    MethodSpec,
    run_ablation_alternatives,
    run_comprehension,
    run_production,
)
from ..reports import (
    ablation_to_dict,
    bootstrap_to_dict,
    compare_report_dicts,
    emit_report,
    load_report,
    report_to_dict,
)
from .schemas import (
    AblationRequest,
    AgentSpecModel,
    AlternativesRequest,
    ClueSubmission,
    CompareRequest,
    ComprehensionEvalRequest,
    GuessSubmission,
    JudgeRequest,
    ProductionEvalRequest,
    RenderRequest,
    ValidateRequest,
)
from .study import StudyRuntime

logger = logging.getLogger(__name__)


@dataclass
class ServiceSettings:
    study: StudyRuntime | None = None
    ui_dir: str | None = None


def _judge_method_spec(agent) -> MethodSpec:
    """Judging provided clues is a comprehension run in the judge's mode."""
    mode = getattr(agent.config, "mode", "direct")
    return MethodSpec("comprehension", method=mode)


def build_agent(spec: AgentSpecModel, cache_dir: str | None = None):
    config = spec.config.to_config()
    if spec.kind == "mock":
        lexicon = TabularLexicon.load(spec.lexicon_path)
        return MockAgent(lexicon, config, speaker_spread=spec.speaker_spread)
    cache = RequestCache(cache_dir) if cache_dir else None
    return LmAgent(config, spec.endpoint.to_endpoint(), cache=cache)


def _dataset_digests(**paths) -> dict:
    return {
        name: file_digest(path)
        for name, path in paths.items()
        if path is not None
    }


def _clue_map(records) -> dict:
    clue_by_problem = {}
    for record in records:
        clue_by_problem.setdefault(record.problem_id, record.clue)
    return clue_by_problem


def _maybe_emit(report, request, default_basename: str):
    if not request.out_dir:
        return {}
    basename = request.basename or default_basename
    paths = emit_report(report, request.out_dir, basename,
                        formats=tuple(request.formats))
    return {fmt: str(path) for fmt, path in paths.items()}


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()
    app = FastAPI(title="wavelength", version=__version__)

    @app.exception_handler(ThinkTimeViolation)
    async def _think_time(request: Request, exc: ThinkTimeViolation):
        return JSONResponse(
            status_code=429,
            content={
                "detail": str(exc),
                "elapsed_s": exc.elapsed_s,
                "retry_after_s": exc.retry_after_s,
            },
            headers={"Retry-After": str(max(1, int(exc.retry_after_s + 0.999)))},
        )

    @app.exception_handler(SessionExhausted)
    async def _exhausted(request: Request, exc: SessionExhausted):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(SchemaError)
    async def _schema(request: Request, exc: SchemaError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "path": exc.path, "line": exc.line},
        )

    @app.exception_handler(EndpointError)
    async def _endpoint(request: Request, exc: EndpointError):
        return JSONResponse(status_code=502, content={"detail": str(exc)})

    @app.exception_handler(WavelengthError)
    async def _domain(request: Request, exc: WavelengthError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(KeyError)
    async def _missing(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _invalid(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def _no_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    # -- general ----------------------------------------------------------

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    # -- study ------------------------------------------------------------

    def _study() -> StudyRuntime:
        if settings.study is None:
            raise HTTPException(status_code=503, detail="no study is configured")
        return settings.study

    @app.get("/study/config")
    def study_config():
        runtime = _study()
        return {
            "task": runtime.config.task,
            "min_think_s": runtime.min_think_s,
            "items_per_session": runtime.config.items_per_session,
            "n_problems": len(runtime.problems),
        }

    @app.get("/study/next")
    def study_next(session_id: str | None = Query(default=None)):
        return _study().next_item(session_id)

    @app.post("/study/guess")
    def study_guess(submission: GuessSubmission):
        return _study().submit_guess(
            submission.session_id,
            submission.problem_id,
            submission.guess,
            clue=submission.clue,
            nonce=submission.nonce,
        )

    @app.post("/study/clue")
    def study_clue(submission: ClueSubmission):
        return _study().submit_clue(
            submission.session_id,
            submission.problem_id,
            submission.clue,
            nonce=submission.nonce,
        )

    @app.get("/study/progress")
    def study_progress():
        return _study().snapshot()

    # -- evaluation -------------------------------------------------------

    @app.post("/eval/comprehension")
    def eval_comprehension(request: ComprehensionEvalRequest):
        problems = load_problems(request.problems_path)
        human = None
        if request.human_data_path:
            judgments = load_judgments(request.human_data_path)
            human_clues, human = human_clues_and_samples(judgments)
            clues = human_clues
        if request.clues_path:
            clues = _clue_map(load_clues(request.clues_path))
        agent = build_agent(request.agent, request.cache_dir)
        alt_agent = (
            build_agent(request.alt_agent, request.cache_dir)
            if request.alt_agent else None
        )
        report = run_comprehension(
            problems, clues, agent,
            method=request.method.to_spec(),
            human=human,
            rsa_config=request.rsa.to_config(),
            alt_agent=alt_agent,
            seed=request.seed,
            datasets=_dataset_digests(
                problems=request.problems_path,
                clues=request.clues_path,
                human=request.human_data_path,
            ),
        )
        files = _maybe_emit(report, request, f"comprehension-{report.manifest.run_id}")
        return {"report": report_to_dict(report), "files": files}

    @app.post("/eval/production")
    def eval_production(request: ProductionEvalRequest):
        problems = load_problems(request.problems_path)
        human_judgments = (
            load_judgments(request.human_data_path)
            if request.human_data_path else None
        )
        speaker = build_agent(request.speaker, request.cache_dir)
        judge = build_agent(request.judge, request.cache_dir) if request.judge else None
        report = run_production(
            problems, speaker,
            method=request.method.to_spec(),
            judge=judge,
            human_judgments=human_judgments,
            rsa_config=request.rsa.to_config(),
            seed=request.seed,
            datasets=_dataset_digests(
                problems=request.problems_path,
                human=request.human_data_path,
            ),
        )
        files = _maybe_emit(report, request, f"production-{report.manifest.run_id}")
        return {"report": report_to_dict(report), "files": files}

    @app.post("/eval/ablation")
    def eval_ablation(request: AblationRequest):
        problems = load_problems(request.problems_path)
        speaker = build_agent(request.speaker, request.cache_dir)
        judge = build_agent(request.judge, request.cache_dir) if request.judge else None
        report = run_ablation_alternatives(
            problems, speaker, request.pool_sizes,
            method=request.method.to_spec(),
            judge=judge,
            rsa_config=request.rsa.to_config(),
            seed=request.seed,
            datasets=_dataset_digests(problems=request.problems_path),
            bootstrap_resamples=request.bootstrap_resamples,
        )
        files = _maybe_emit(report, request, f"ablation-{report.manifest.run_id}")
        return {"report": ablation_to_dict(report), "files": files}

    @app.post("/alternatives/generate")
    def generate_alternatives(request: AlternativesRequest):
        problems = load_problems(request.problems_path)
        agent = build_agent(request.agent, request.cache_dir)
        by_problem = {
            p.problem_id: agent.generate_alternatives(p, per_state=request.per_state)
            for p in problems
        }
        if request.out_path:
            path = Path(request.out_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8") as fh:
                for problem_id, alternatives in by_problem.items():
                    fh.write(json.dumps(
                        {"problem_id": problem_id, "alternatives": alternatives},
                        ensure_ascii=False,
                    ) + "\n")
        return {"alternatives": by_problem}

    @app.post("/judge")
    def judge_clues(request: JudgeRequest):
        problems = load_problems(request.problems_path)
        clues = _clue_map(load_clues(request.clues_path))
        human = None
        if request.human_data_path:
            _, human = human_clues_and_samples(load_judgments(request.human_data_path))
        agent = build_agent(request.judge, request.cache_dir)
        method = _judge_method_spec(agent)
        report = run_comprehension(
            problems, clues, agent,
            method=method,
            human=human,
            rsa_config=request.rsa.to_config(),
            seed=request.seed,
            datasets=_dataset_digests(
                problems=request.problems_path,
                clues=request.clues_path,
                human=request.human_data_path,
            ),
        )
        files = _maybe_emit(report, request, f"judge-{report.manifest.run_id}")
        return {"report": report_to_dict(report), "files": files}

    # -- data and reports --------------------------------------------------

    @app.post("/data/validate")
    def validate_data(request: ValidateRequest):
        loaders = {
            "problems": load_problems,
            "judgments": load_judgments,
            "clues": load_clues,
        }
        try:
            records = loaders[request.kind](request.path)
        except SchemaError as exc:
            return {
                "valid": False,
                "n_records": 0,
                "errors": [{"line": exc.line, "detail": str(exc)}],
            }
        return {"valid": True, "n_records": len(records), "errors": []}

    @app.post("/reports/render")
    def render_report(request: RenderRequest):
        payload = load_report(request.report_path)
        basename = request.basename or Path(request.report_path).stem
        paths = emit_report(payload, request.out_dir, basename,
                            formats=tuple(request.formats))
        return {"files": {fmt: str(path) for fmt, path in paths.items()}}

    @app.post("/reports/compare")
    def compare_reports_endpoint(request: CompareRequest):
        result = compare_report_dicts(
            load_report(request.report_a),
            load_report(request.report_b),
            resamples=request.resamples,
            seed=request.seed,
        )
        if result is None:
            raise HTTPException(status_code=422,
                                detail="reports share no comparable problems")
        return {"comparison": bootstrap_to_dict(result)}

    # -- static UI ---------------------------------------------------------

    if settings.ui_dir and Path(settings.ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=settings.ui_dir, html=True), name="ui")

    return app
