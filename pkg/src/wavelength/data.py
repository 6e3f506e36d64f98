"""Concept pairs, problems, human judgments, and clue records.

File formats are JSONL, one record per line:

  problems:   {"pair_index": int, "left": str, "right": str, "target": number}
  judgments:  {"problem_id": str, "clue": str, "guess": number,
               "think_time_s": number, "session_id": str, "ts": str}
  clues:      {"problem_id": str, "clue": str, "source": str, "method": str|null}
              (optional extras: session_id, think_time_s, ts)

Loaders raise SchemaError with the offending 1-based line number. An empty
file loads to an empty list with a warning: it is distinguishable from a
missing file, which raises.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptySample, NoCandidates, SchemaError
from .metrics import EmpiricalSample
from .rsa import DEFAULT_GRID, canonical_clue

logger = logging.getLogger(__name__)

# Collection protocol defaults: first-pass judgments gathered per item, the
# second-pass top-up for retained items, and listener judgments gathered per
# model-produced clue.
PHASE1_JUDGMENTS = 15
PHASE2_JUDGMENTS = 25
PRODUCTION_EVAL_JUDGMENTS = 5

CONCEPT_PAIRS_RAW = (
    (1, "Bad", "Good"),
    (2, "Hot", "Cold"),
    (3, "Colorless", "Colorful"),
    (4, "Low calorie", "High calorie"),
    (5, "Inessential", "Essential"),
    (6, "Cheap", "Expensive"),
    (7, "Rare", "Common"),
    (8, "Difficult to use", "Easy to use"),
    (9, "Worst day of the year", "Best day of the year"),
    (10, "Bad habit", "Good habit"),
    (11, "Dark", "Light"),
    (12, "Hard to remember", "Easy to remember"),
    (13, "Unhealthy", "Healthy"),
    (14, "Normal pet", "Exotic pet"),
    (15, "Happens slowly", "Happens suddenly"),
    (16, "Mental activity", "Physical activity"),
    (17, "Need", "Want"),
    (18, "Dry food", "Wet food"),
    (19, "Optional", "Mandatory"),
    (20, "Hard to pronounce", "Easy to pronounce"),
    (21, "Low quality", "High quality"),
    (22, "Plain", "Fancy"),
    (23, "Quiet place", "Loud place"),
    (24, "Dangerous", "Safe"),
    (25, "Useless major", "Useful major"),
    (26, "Bad for you", "Good for you"),
    (27, "Waste of time", "Good use of time"),
    (28, "Nobody does it", "Everybody does it"),
    (29, "Snack", "Meal"),
    (30, "Soft", "Hard"),
    (31, "Square", "Round"),
    (32, "Temporary", "Permanent"),
    (33, "Sport", "Game"),
    (34, "Messy food", "Clean food"),
    (35, "Vice", "Virtue"),
    (36, "Unpopular activity", "Popular activity"),
    (37, "Boring", "Exciting"),
    (38, "Easy to do", "Hard to do"),
    (39, "Nature", "Nurture"),
    (40, "Limited", "Infinite"),
    (41, "Casual event", "Formal event"),
    (42, "Small talk", "Heavy topic"),
    (43, "Short", "Long"),
    (44, "Talent", "Skill"),
    (45, "Unnatural", "Natural"),
    (46, "Funny topic", "Serious topic"),
    (47, "Not enough", "Too much"),
    (48, "Art", "Commerce"),
    (49, "Deep thought", "Shallow thought"),
    (50, "Blue", "Green"),
)


@dataclass(frozen=True)
class ConceptPair:
    """One left/right scale, e.g. Hot (0) to Cold (100)."""

    index: int
    left: str
    right: str

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("pair index must be >= 1")
        if not self.left.strip() or not self.right.strip():
            raise ValueError("concept words must be non-empty")
        if canonical_clue(self.left) == canonical_clue(self.right):
            raise ValueError("left and right concepts must differ")


CONCEPT_PAIRS = tuple(ConceptPair(i, l, r) for i, l, r in CONCEPT_PAIRS_RAW)
_PAIR_BY_INDEX = {p.index: p for p in CONCEPT_PAIRS}


def concept_pair(index: int) -> ConceptPair:
    try:
        return _PAIR_BY_INDEX[index]
    except KeyError:
        raise KeyError(f"no embedded concept pair with index {index}") from None


@dataclass(frozen=True)
class Problem:
    """A concept pair with a target position on the grid."""

    pair: ConceptPair
    target: float

    def __post_init__(self):
        if not DEFAULT_GRID.contains(self.target):
            raise ValueError(
                f"target {self.target} is not a multiple of 5 within [0, 100]"
            )
        object.__setattr__(self, "target", float(self.target))

    @property
    def problem_id(self) -> str:
        return f"{self.pair.index}-{int(self.target)}"

    @property
    def left(self) -> str:
        return self.pair.left

    @property
    def right(self) -> str:
        return self.pair.right


@dataclass(frozen=True)
class HumanJudgment:
    """One listener guess for (problem, clue)."""

    problem_id: str
    clue: str
    guess: float
    think_time_s: float
    session_id: str
    ts: str

    def __post_init__(self):
        if not (0 <= self.guess <= 100):
            raise ValueError(f"guess {self.guess} outside [0, 100]")
        if self.think_time_s < 0:
            raise ValueError("think time must be non-negative")
        if not self.clue.strip():
            raise ValueError("clue must be non-empty")


@dataclass
class ClueRecord:
    """A clue proposed for a problem, with optional collection provenance."""

    problem_id: str
    clue: str
    source: str
    method: str | None = None
    session_id: str | None = None
    think_time_s: float | None = None
    ts: str | None = None
    judgments: list = field(default_factory=list, compare=False)

    def __post_init__(self):
        if not self.clue.strip():
            raise ValueError("clue must be non-empty")

    def mean_guess(self) -> float:
        if not self.judgments:
            raise EmptySample(f"clue {self.clue!r} has no judgments")
        return float(np.mean([j.guess for j in self.judgments]))


def _iter_jsonl(text, label):
    if not text.strip():
        logger.warning("data file %s is empty", label)
        return
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON ({exc.msg})", path=label, line=lineno) from exc
        if not isinstance(record, dict):
            raise SchemaError("record must be a JSON object", path=label, line=lineno)
        yield lineno, record


def _read_jsonl(path):
    path = Path(path)
    yield from _iter_jsonl(path.read_text(encoding="utf-8"), path)


def _require(record, key, types, path, lineno):
    if key not in record:
        raise SchemaError(f"missing field {key!r}", path=path, line=lineno)
    value = record[key]
    if not isinstance(value, types):
        raise SchemaError(
            f"field {key!r} has type {type(value).__name__}", path=path, line=lineno
        )
    return value


def load_problems(path) -> list:
    """Read a problems JSONL file; (pair_index, target) must be unique."""
    path = Path(path)
    return _parse_problems(_read_jsonl(path), path)


def _parse_problems(records, path) -> list:
    problems = []
    seen = set()
    for lineno, rec in records:
        index = _require(rec, "pair_index", int, path, lineno)
        left = _require(rec, "left", str, path, lineno)
        right = _require(rec, "right", str, path, lineno)
        target = _require(rec, "target", (int, float), path, lineno)
        try:
            problem = Problem(ConceptPair(index, left, right), float(target))
        except ValueError as exc:
            raise SchemaError(str(exc), path=path, line=lineno) from exc
        if problem.problem_id in seen:
            raise SchemaError(
                f"duplicate problem {problem.problem_id}", path=path, line=lineno
            )
        seen.add(problem.problem_id)
        problems.append(problem)
    return problems


def save_problems(problems, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for p in problems:
            fh.write(json.dumps({
                "pair_index": p.pair.index,
                "left": p.left,
                "right": p.right,
                "target": p.target,
            }, ensure_ascii=False) + "\n")


def load_judgments(path) -> list:
    judgments = []
    for lineno, rec in _read_jsonl(path):
        try:
            judgments.append(HumanJudgment(
                problem_id=_require(rec, "problem_id", str, path, lineno),
                clue=_require(rec, "clue", str, path, lineno),
                guess=float(_require(rec, "guess", (int, float), path, lineno)),
                think_time_s=float(_require(rec, "think_time_s", (int, float), path, lineno)),
                session_id=_require(rec, "session_id", str, path, lineno),
                ts=_require(rec, "ts", str, path, lineno),
            ))
        except ValueError as exc:
            raise SchemaError(str(exc), path=path, line=lineno) from exc
    return judgments


def judgment_to_dict(j: HumanJudgment) -> dict:
    return {
        "problem_id": j.problem_id,
        "clue": j.clue,
        "guess": j.guess,
        "think_time_s": j.think_time_s,
        "session_id": j.session_id,
        "ts": j.ts,
    }


def save_judgments(judgments, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for j in judgments:
            fh.write(json.dumps(judgment_to_dict(j), ensure_ascii=False) + "\n")


def load_clues(path) -> list:
    clues = []
    for lineno, rec in _read_jsonl(path):
        method = rec.get("method")
        if method is not None and not isinstance(method, str):
            raise SchemaError("field 'method' must be a string or null", path=path, line=lineno)
        try:
            clues.append(ClueRecord(
                problem_id=_require(rec, "problem_id", str, path, lineno),
                clue=_require(rec, "clue", str, path, lineno),
                source=_require(rec, "source", str, path, lineno),
                method=method,
                session_id=rec.get("session_id"),
                think_time_s=rec.get("think_time_s"),
                ts=rec.get("ts"),
            ))
        except ValueError as exc:
            raise SchemaError(str(exc), path=path, line=lineno) from exc
    return clues


def clue_to_dict(c: ClueRecord) -> dict:
    rec = {
        "problem_id": c.problem_id,
        "clue": c.clue,
        "source": c.source,
        "method": c.method,
    }
    for key in ("session_id", "think_time_s", "ts"):
        value = getattr(c, key)
        if value is not None:
            rec[key] = value
    return rec


def save_clues(clues, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for c in clues:
            fh.write(json.dumps(clue_to_dict(c), ensure_ascii=False) + "\n")


def empirical_distribution(judgments) -> EmpiricalSample:
    """Raw guesses for one problem/clue as an EmpiricalSample."""
    judgments = list(judgments)
    if not judgments:
        raise EmptySample("no judgments to aggregate")
    ids = {j.problem_id for j in judgments}
    if len(ids) > 1:
        raise ValueError(f"judgments span multiple problems: {sorted(ids)}")
    return EmpiricalSample(
        np.array([j.guess for j in judgments], dtype=float),
        problem_id=judgments[0].problem_id,
    )


def human_clues_and_samples(judgments):
    """Group judgments into (clue_by_problem, sample_by_problem).

    For each problem the clue with the most judgments wins (ties: first
    appearance in the file); its raw guesses become the problem's sample.
    """
    order = {}
    grouped = {}
    for j in judgments:
        key = (j.problem_id, canonical_clue(j.clue))
        if key not in grouped:
            grouped[key] = []
            order[key] = len(order)
        grouped[key].append(j)
    clue_by_problem = {}
    sample_by_problem = {}
    best = {}
    for (problem_id, _), group in grouped.items():
        rank = (-len(group), order[(problem_id, canonical_clue(group[0].clue))])
        if problem_id not in best or rank < best[problem_id]:
            best[problem_id] = rank
            clue_by_problem[problem_id] = group[0].clue
            sample_by_problem[problem_id] = empirical_distribution(group)
    return clue_by_problem, sample_by_problem


def attach_judgments(clues, judgments) -> list:
    """Group judgments onto their clue records by (problem_id, canonical clue)."""
    by_key = {}
    for c in clues:
        c.judgments = []
        by_key.setdefault((c.problem_id, canonical_clue(c.clue)), c)
    for j in judgments:
        key = (j.problem_id, canonical_clue(j.clue))
        if key in by_key:
            by_key[key].judgments.append(j)
    return clues


def select_best_clue(candidates, target: float) -> ClueRecord:
    """Pick the clue whose mean guess is closest to the target.

    Ties go to the candidate with more judgments, then to the earlier one in
    the list. Every candidate must carry at least one judgment.
    """
    candidates = list(candidates)
    if not candidates:
        raise NoCandidates("no clue candidates to select from")
    best = None
    best_key = None
    for pos, c in enumerate(candidates):
        key = (abs(c.mean_guess() - target), -len(c.judgments), pos)
        if best_key is None or key < best_key:
            best, best_key = c, key
    return best


@dataclass(frozen=True)
class ExampleHumanRow:
    """A published per-problem summary: candidate clues, the chosen one, and
    the mean human guess it earned."""

    pair_index: int
    left: str
    right: str
    target: float
    clues: tuple
    chosen_clue: str
    human_mean: float

    @property
    def problem_id(self) -> str:
        return f"{self.pair_index}-{int(self.target)}"


def _asset_text(name: str) -> str:
    return resources.files("wavelength").joinpath("assets", name).read_text(encoding="utf-8")


def load_example_human_rows() -> list:
    """The five published example rows (the only per-problem human data shipped)."""
    rows = []
    for line in _asset_text("example_human_rows.jsonl").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        rows.append(ExampleHumanRow(
            pair_index=rec["pair_index"],
            left=rec["left"],
            right=rec["right"],
            target=float(rec["target"]),
            clues=tuple(rec["clues"]),
            chosen_clue=rec["chosen_clue"],
            human_mean=float(rec["human_mean"]),
        ))
    return rows


def load_placeholder_problems() -> list:
    """100 stand-in problems (two targets per embedded pair).

    The real study's target assignments were never published; these targets
    are synthetic and NOT canonical. Use them for smoke tests and demos only.
    """
    label = "placeholder_problems.jsonl"
    return _parse_problems(_iter_jsonl(_asset_text(label), label), label)
