"""Comprehension and production evaluation pipelines.

A run takes problems, an agent (plus optional alternative-source and judge
agents), a method, and produces a MetricReport: one row per problem plus
seeded aggregate statistics. Rows for problems that failed (endpoint
errors, parse starvation) are kept and flagged missing, never dropped.

Methods:
  direct / cot          the agent's listener distribution as-is
  direct-rsa / cot-rsa  comprehension: full pragmatic recursion over the
                        actual clue plus generated alternatives;
                        production: candidate reweighting by literal
                        recovery of the target

The rsa_variant switch picks between the Bayes recursion ("standard") and
the state-marginal listener ("state-marginal"), which rescales the literal
listener by a generation score and never normalizes over utterances.

Endpoint throughput is bounded inside the agents (max_parallel_requests);
the problem loop itself is sequential so runs are deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .agents.base import dedupe_candidates
from .errors import (
    DegenerateVariance,
    EndpointError,
    InvalidUtterancePool,
    LengthMismatch,
    NoCandidates,
    ParseStarvation,
)
from .hashing import derive_seed, digest_of
from .metrics import (
    BootstrapResult,
    EmpiricalSample,
    bootstrap_ci,
    grid_histogram,
    paired_bootstrap,
    pearson,
    rmse,
    standard_error,
    wasserstein1,
)
from .rsa import (
    ACTUAL_CLUE,
    GENERATED_ALTERNATIVE,
    SPEAKER_CANDIDATE,
    Distribution,
    LiteralMatrix,
    RsaConfig,
    SpeakerMatrix,
    UtteranceSet,
    alt_pragmatic_listener,
    canonical_clue,
    entropy,
    inverse_speaker,
    mean_value,
    pragmatic_listener,
    pragmatic_speaker,
)

logger = logging.getLogger(__name__)

TASKS = ("comprehension", "production")
METHODS = ("direct", "cot", "direct-rsa", "cot-rsa")
RSA_VARIANTS = ("standard", "state-marginal")
SELECTIONS = ("argmax", "sample")

# Failures that mark a single problem missing instead of aborting the run.
_ROW_FAILURES = (EndpointError, ParseStarvation, NoCandidates)


@dataclass(frozen=True)
class MethodSpec:
    """What to run and how."""

    task: str
    method: str = "direct"
    rsa_variant: str = "standard"
    n_alternatives: int = 32
    alt_per_state: int = 1
    actual_only: bool = False
    selection: str = "argmax"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.rsa_variant not in RSA_VARIANTS:
            raise ValueError(f"rsa_variant must be one of {RSA_VARIANTS}")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")
        if self.n_alternatives < 1:
            raise ValueError("n_alternatives must be at least 1")
        if self.alt_per_state < 1:
            raise ValueError("alt_per_state must be at least 1")

    @property
    def uses_rsa(self) -> bool:
        return self.method.endswith("-rsa")

    @property
    def base_mode(self) -> str:
        return "cot" if self.method.startswith("cot") else "direct"


@dataclass
class RunManifest:
    """Identity of a run: reruns with equal manifests must produce equal reports."""

    run_id: str
    task: str
    method: dict
    rsa: dict
    agent: dict
    alt_agent: dict | None
    judge: dict | None
    datasets: dict
    seed: int
    started_at: str | None = None
    finished_at: str | None = None

    def public_dict(self) -> dict:
        # Wall-clock fields stay off the serialized report so byte-identical
        # replay holds across reruns.
        return {
            "run_id": self.run_id,
            "task": self.task,
            "method": self.method,
            "rsa": self.rsa,
            "agent": self.agent,
            "alt_agent": self.alt_agent,
            "judge": self.judge,
            "datasets": self.datasets,
            "seed": self.seed,
        }


def build_manifest(method: MethodSpec, rsa_config: RsaConfig, agent, *,
                   alt_agent=None, judge=None, datasets=None, seed: int = 0) -> RunManifest:
    rsa_dict = {
        "alpha": rsa_config.alpha,
        "epsilon": rsa_config.epsilon,
        "prior": "uniform" if rsa_config.prior is None else list(map(float, rsa_config.prior.probs)),
    }
    body = {
        "task": method.task,
        "method": asdict(method),
        "rsa": rsa_dict,
        "agent": agent.fingerprint(),
        "alt_agent": alt_agent.fingerprint() if alt_agent is not None else None,
        "judge": judge.fingerprint() if judge is not None else None,
        "datasets": dict(datasets or {}),
        "seed": seed,
    }
    return RunManifest(run_id=digest_of(body, length=12), **body)


@dataclass
class ProblemRow:
    """Per-problem outcome; metric fields stay None when unavailable."""

    problem_id: str
    pair_index: int
    left: str
    right: str
    target: float
    clue: str | None = None
    prediction: float | None = None
    abs_diff: float | None = None
    wasserstein: float | None = None
    model_entropy: float | None = None
    human_entropy: float | None = None
    human_mean: float | None = None
    n_candidates: int | None = None
    missing: bool = False
    error: str | None = None


@dataclass
class MetricReport:
    manifest: RunManifest
    rows: list
    aggregate: dict
    pearson_human: float | None
    rmse_human: float | None
    pearson_target: float | None
    rmse_target: float | None
    n_problems: int
    n_missing: int


AGGREGATE_FIELDS = ("abs_diff", "wasserstein", "model_entropy", "human_entropy")


def _safe_pearson(xs, ys):
    try:
        return pearson(xs, ys)
    except (DegenerateVariance, LengthMismatch):
        return None


def build_report(manifest: RunManifest, rows, seed: int,
                 ci_resamples: int = 2000) -> MetricReport:
    """Aggregate rows into means, standard errors, and seeded bootstrap CIs."""
    aggregate = {}
    for name in AGGREGATE_FIELDS:
        values = [getattr(r, name) for r in rows if not r.missing and getattr(r, name) is not None]
        if not values:
            aggregate[name] = {"mean": None, "standard_error": None,
                               "ci_low": None, "ci_high": None, "n": 0}
            continue
        arr = np.asarray(values, dtype=float)
        ci_seed = derive_seed(seed, "ci", name)
        lo, hi = bootstrap_ci(arr, resamples=ci_resamples, seed=ci_seed)
        aggregate[name] = {
            "mean": float(arr.mean()),
            "standard_error": standard_error(arr),
            "ci_low": lo,
            "ci_high": hi,
            "n": int(arr.size),
        }
    ok_rows = [r for r in rows if not r.missing and r.prediction is not None]
    preds = [r.prediction for r in ok_rows]
    targets = [r.target for r in ok_rows]
    pearson_target = _safe_pearson(preds, targets) if len(ok_rows) >= 2 else None
    rmse_target = rmse(preds, targets) if ok_rows else None
    human_rows = [r for r in ok_rows if r.human_mean is not None]
    pearson_human = (
        _safe_pearson([r.prediction for r in human_rows], [r.human_mean for r in human_rows])
        if len(human_rows) >= 2 else None
    )
    rmse_human = (
        rmse([r.prediction for r in human_rows], [r.human_mean for r in human_rows])
        if human_rows else None
    )
    return MetricReport(
        manifest=manifest,
        rows=list(rows),
        aggregate=aggregate,
        pearson_human=pearson_human,
        rmse_human=rmse_human,
        pearson_target=pearson_target,
        rmse_target=rmse_target,
        n_problems=len(rows),
        n_missing=sum(1 for r in rows if r.missing),
    )


def _base_row(problem) -> ProblemRow:
    return ProblemRow(
        problem_id=problem.problem_id,
        pair_index=problem.pair.index,
        left=problem.left,
        right=problem.right,
        target=problem.target,
    )


def _attach_human(row: ProblemRow, dist: Distribution, sample, grid) -> None:
    if sample is None:
        return
    row.wasserstein = wasserstein1(dist, sample)
    row.human_entropy = entropy(grid_histogram(sample.values, grid))
    row.human_mean = sample.mean()


def _finish_row(row: ProblemRow, dist: Distribution, grid, sample) -> None:
    row.prediction = mean_value(dist)
    row.abs_diff = abs(row.prediction - row.target)
    row.model_entropy = entropy(dist)
    _attach_human(row, dist, sample, grid)


def rsa_comprehension_distribution(problem, clue: str, agent, method: MethodSpec,
                                   rsa_config: RsaConfig, alt_agent=None) -> Distribution:
    """Posterior over states for the actual clue under the pragmatic recursion.

    The utterance pool is the actual clue plus generated alternatives (or the
    clue alone under actual_only, which collapses to the prior). An empty
    alternative pool is a configuration failure and raises.
    """
    grid = agent.grid
    if method.actual_only:
        utterances = UtteranceSet((clue,), (ACTUAL_CLUE,))
    else:
        source = alt_agent if alt_agent is not None else agent
        alternatives = source.generate_alternatives(problem, per_state=method.alt_per_state)
        if not alternatives:
            raise InvalidUtterancePool(
                f"no alternatives generated for problem {problem.problem_id}"
            )
        utterances = UtteranceSet.build(
            (text, GENERATED_ALTERNATIVE) for text in alternatives
        ).with_actual(clue)
    columns = [agent.listener_distribution(problem, text) for text in utterances.texts]
    literal = LiteralMatrix.from_columns(grid, utterances, columns)
    if method.rsa_variant == "standard":
        speaker = pragmatic_speaker(literal, rsa_config)
        listener = pragmatic_listener(speaker, rsa_config)
        return listener.column(utterances.actual_index)
    smoothed = literal.smoothed(rsa_config.epsilon)
    scores = np.array([
        [agent.speaker_score(problem, state, text) for text in utterances.texts]
        for state in grid
    ])
    speaker = SpeakerMatrix.from_scores(grid, utterances, scores)
    return alt_pragmatic_listener(smoothed, speaker, utterances.actual_index)


def run_comprehension(problems, clues, agent, method: MethodSpec | None = None, *,
                      human=None, rsa_config: RsaConfig = RsaConfig(),
                      alt_agent=None, seed: int = 0, datasets=None) -> MetricReport:
    """Evaluate listener guesses against targets (and human data when given).

    clues maps problem_id to the clue under evaluation; human, when present,
    maps problem_id to an EmpiricalSample of raw human guesses for that clue.
    """
    method = method or MethodSpec("comprehension")
    if method.task != "comprehension":
        raise ValueError(f"method.task is {method.task!r}, expected comprehension")
    agent = agent.with_config(mode=method.base_mode)
    manifest = build_manifest(method, rsa_config, agent, alt_agent=alt_agent,
                              datasets=datasets, seed=seed)
    human = human or {}
    rows = []
    for problem in problems:
        row = _base_row(problem)
        rows.append(row)
        clue = clues.get(problem.problem_id)
        if clue is None:
            row.missing = True
            row.error = "no clue provided"
            continue
        row.clue = clue
        try:
            if method.uses_rsa:
                dist = rsa_comprehension_distribution(
                    problem, clue, agent, method, rsa_config, alt_agent=alt_agent
                )
            else:
                dist = agent.listener_distribution(problem, clue)
        except _ROW_FAILURES as exc:
            row.missing = True
            row.error = str(exc)
            logger.warning("problem %s failed: %s", problem.problem_id, exc)
            continue
        _finish_row(row, dist, agent.grid, human.get(problem.problem_id))
    return build_report(manifest, rows, seed)


def _choose_candidate(problem, candidates, agent, method: MethodSpec,
                      rsa_config: RsaConfig, seed: int) -> str:
    """Pick the clue to emit from deduplicated candidates."""
    if not method.uses_rsa:
        weights = np.array([c.weight for c in candidates])
        order = int(np.argmax(weights))
        if method.selection == "sample":
            rng = np.random.default_rng(derive_seed(seed, "select", problem.problem_id))
            order = int(rng.choice(len(candidates), p=weights / weights.sum()))
        return candidates[order].text
    utterances = UtteranceSet.build(
        (c.text, SPEAKER_CANDIDATE) for c in candidates
    )
    literal_agent = agent.literal()
    columns = [literal_agent.listener_distribution(problem, text)
               for text in utterances.texts]
    literal = LiteralMatrix.from_columns(agent.grid, utterances, columns)
    weights = [c.weight for c in candidates]
    scored = inverse_speaker(weights, literal, problem.target,
                             epsilon=rsa_config.epsilon)
    if method.selection == "sample":
        rng = np.random.default_rng(derive_seed(seed, "select", problem.problem_id))
        return utterances.texts[int(rng.choice(len(utterances), p=scored.probs))]
    return scored.argmax_text()


def _human_sample_index(judgments) -> dict:
    """(problem_id, canonical clue) -> EmpiricalSample of guesses."""
    groups = {}
    for j in judgments or []:
        groups.setdefault((j.problem_id, canonical_clue(j.clue)), []).append(j.guess)
    return {
        key: EmpiricalSample(np.array(values, dtype=float), problem_id=key[0])
        for key, values in groups.items()
    }


def _production_rows(problems, candidates_for, agent, judge, method: MethodSpec,
                     rsa_config: RsaConfig, seed: int, human_index) -> list:
    rows = []
    for problem in problems:
        row = _base_row(problem)
        rows.append(row)
        try:
            candidates = candidates_for(problem)
            if not candidates:
                raise NoCandidates(
                    f"speaker produced no candidates for {problem.problem_id}"
                )
            row.n_candidates = len(candidates)
            chosen = _choose_candidate(problem, candidates, agent, method,
                                       rsa_config, seed)
            row.clue = chosen
            dist = judge.listener_distribution(problem, chosen)
        except _ROW_FAILURES as exc:
            row.missing = True
            row.error = str(exc)
            logger.warning("problem %s failed: %s", problem.problem_id, exc)
            continue
        sample = None
        if human_index:
            sample = human_index.get((problem.problem_id, canonical_clue(chosen)))
        _finish_row(row, dist, judge.grid, sample)
    return rows


def default_judge(agent):
    """Judge used when none is configured: chain-of-thought, 32 samples."""
    return agent.with_config(mode="cot", estimator="sampling", n_samples=32)


def run_production(problems, agent, method: MethodSpec | None = None, *,
                   judge=None, human_judgments=None,
                   rsa_config: RsaConfig = RsaConfig(), seed: int = 0,
                   datasets=None) -> MetricReport:
    """Generate clues, pick one per problem, and score it with a judge listener."""
    method = method or MethodSpec("production")
    if method.task != "production":
        raise ValueError(f"method.task is {method.task!r}, expected production")
    speaker = agent.with_config(mode=method.base_mode)
    judge = judge if judge is not None else default_judge(agent)
    manifest = build_manifest(method, rsa_config, speaker, judge=judge,
                              datasets=datasets, seed=seed)
    human_index = _human_sample_index(human_judgments)

    def candidates_for(problem):
        return speaker.speaker_candidates(problem, problem.target, method.n_alternatives)

    rows = _production_rows(problems, candidates_for, speaker, judge, method,
                            rsa_config, seed, human_index)
    return build_report(manifest, rows, seed)


@dataclass
class AblationReport:
    """Production quality as a function of candidate-pool size."""

    manifest: RunManifest
    pool_sizes: list
    by_n: dict
    comparisons: dict = field(default_factory=dict)


def run_ablation_alternatives(problems, agent, pool_sizes, method: MethodSpec | None = None, *,
                              judge=None, rsa_config: RsaConfig = RsaConfig(),
                              seed: int = 0, datasets=None,
                              bootstrap_resamples: int = 10000) -> AblationReport:
    """Re-evaluate production at several candidate-pool sizes.

    One raw sample pool of max(pool_sizes) proposals is drawn per problem;
    each size n evaluates the deduplicated first n samples of that shared
    pool, so differences come from pool size alone. Sizes are deduplicated
    with a warning. Each size is bootstrap-compared against the largest.
    """
    requested = [int(n) for n in pool_sizes]
    sizes = sorted(set(requested))
    if len(sizes) != len(requested):
        logger.warning("duplicate pool sizes collapsed: %s", sorted(requested))
    if not sizes:
        raise ValueError("at least one pool size is required")
    if sizes[0] < 1:
        raise ValueError("pool sizes must be positive")
    method = method or MethodSpec("production")
    speaker = agent.with_config(mode=method.base_mode)
    judge = judge if judge is not None else default_judge(agent)
    manifest = build_manifest(method, rsa_config, speaker, judge=judge,
                              datasets=dict(datasets or {}, pool_sizes=sizes), seed=seed)

    max_n = sizes[-1]
    pools = {}
    failures = {}
    for problem in problems:
        try:
            pools[problem.problem_id] = speaker.speaker_samples(
                problem, problem.target, max_n
            )
        except _ROW_FAILURES as exc:
            failures[problem.problem_id] = exc

    by_n = {}
    for n in sizes:
        def candidates_for(problem, n=n):
            if problem.problem_id in failures:
                raise failures[problem.problem_id]
            return dedupe_candidates(pools[problem.problem_id][:n])

        rows = _production_rows(problems, candidates_for, speaker, judge,
                                method, rsa_config, seed, {})
        sub_manifest = build_manifest(
            method, rsa_config, speaker, judge=judge,
            datasets=dict(datasets or {}, pool_size=n), seed=seed,
        )
        by_n[n] = build_report(sub_manifest, rows, seed)

    comparisons = {}
    largest = by_n[sizes[-1]]
    for n in sizes[:-1]:
        result = compare_reports(by_n[n], largest,
                                 resamples=bootstrap_resamples, seed=seed)
        if result is not None:
            comparisons[f"{n}_vs_{sizes[-1]}"] = result
    return AblationReport(manifest=manifest, pool_sizes=sizes, by_n=by_n,
                          comparisons=comparisons)


def paired_abs_diffs(report_a, report_b):
    """Per-problem |error| pairs present and non-missing in both reports."""
    rows_b = {r.problem_id: r for r in report_b.rows}
    pairs = []
    for row in report_a.rows:
        other = rows_b.get(row.problem_id)
        if other is None:
            continue
        if row.missing or other.missing:
            continue
        if row.abs_diff is None or other.abs_diff is None:
            continue
        pairs.append((row.abs_diff, other.abs_diff))
    return pairs


def compare_reports(report_a, report_b, resamples: int = 10000,
                    seed: int = 0) -> BootstrapResult | None:
    """Paired bootstrap on per-problem |error|; None without common rows."""
    pairs = paired_abs_diffs(report_a, report_b)
    if not pairs:
        return None
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    return paired_bootstrap(a, b, resamples=resamples, seed=seed)
