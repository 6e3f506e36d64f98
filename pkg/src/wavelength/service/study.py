"""Study session management: item assignment, think-time gates, records.

One runtime serves one task type (comprehension or production). Items are
handed out per session, balanced toward the problem with the fewest accepted
records; the server timestamps delivery and refuses submissions that arrive
before the minimum think time, counting from its own clock. Accepted records
append to JSONL files through a lock so concurrent sessions interleave
whole lines. The clock is injectable so tests can drive time by hand.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..agents.parsing import validate_clue
from ..data import (
    ClueRecord,
    HumanJudgment,
    PHASE1_JUDGMENTS,
    PRODUCTION_EVAL_JUDGMENTS,
    clue_to_dict,
    judgment_to_dict,
    load_clues,
    load_judgments,
    load_problems,
)
from ..errors import SessionExhausted, ThinkTimeViolation
from ..rsa import canonical_clue

MIN_THINK_COMPREHENSION_S = 10.0
MIN_THINK_PRODUCTION_S = 20.0


@dataclass(frozen=True)
class StudyConfig:
    task: str
    problems_path: str
    records_dir: str
    clues_path: str | None = None
    judgments_per_item: int = PHASE1_JUDGMENTS
    clues_per_item: int = PRODUCTION_EVAL_JUDGMENTS
    items_per_session: int = 40
    min_think_comprehension_s: float = MIN_THINK_COMPREHENSION_S
    min_think_production_s: float = MIN_THINK_PRODUCTION_S

    def __post_init__(self):
        if self.task not in ("comprehension", "production"):
            raise ValueError("task must be comprehension or production")
        if self.task == "comprehension" and not self.clues_path:
            raise ValueError("comprehension studies need a clues file")
        if self.judgments_per_item < 1 or self.clues_per_item < 1:
            raise ValueError("per-item quotas must be at least 1")
        if self.items_per_session < 1:
            raise ValueError("items_per_session must be at least 1")


@dataclass
class _Delivery:
    problem_id: str
    clue: str | None
    delivered_at: float
    nonce: str


@dataclass
class _Session:
    done: set = field(default_factory=set)
    current: _Delivery | None = None
    n_done: int = 0


class StudyRuntime:
    def __init__(self, config: StudyConfig, clock=time.time):
        self.config = config
        self.clock = clock
        self.problems = load_problems(config.problems_path)
        if not self.problems:
            raise ValueError("study has no problems")
        self._by_id = {p.problem_id: p for p in self.problems}
        self.clue_by_problem = {}
        if config.task == "comprehension":
            for record in load_clues(config.clues_path):
                self.clue_by_problem.setdefault(record.problem_id, record.clue)
            missing = [p.problem_id for p in self.problems
                       if p.problem_id not in self.clue_by_problem]
            if missing:
                raise ValueError(f"no clue on file for problems: {missing[:5]}")
        records_dir = Path(config.records_dir)
        records_dir.mkdir(parents=True, exist_ok=True)
        self.judgments_path = records_dir / "judgments.jsonl"
        self.clues_out_path = records_dir / "clues.jsonl"
        self._lock = threading.Lock()
        self._counts = {p.problem_id: 0 for p in self.problems}
        self._restore_counts()
        self._sessions = {}

    # -- bookkeeping ------------------------------------------------------

    def _restore_counts(self):
        """Resume quota tracking from whatever records already exist."""
        if self.config.task == "comprehension" and self.judgments_path.exists():
            for j in load_judgments(self.judgments_path):
                if j.problem_id in self._counts:
                    self._counts[j.problem_id] += 1
        if self.config.task == "production" and self.clues_out_path.exists():
            for c in load_clues(self.clues_out_path):
                if c.problem_id in self._counts:
                    self._counts[c.problem_id] += 1

    @property
    def _quota(self) -> int:
        if self.config.task == "comprehension":
            return self.config.judgments_per_item
        return self.config.clues_per_item

    @property
    def min_think_s(self) -> float:
        if self.config.task == "comprehension":
            return self.config.min_think_comprehension_s
        return self.config.min_think_production_s

    def _now_iso(self) -> str:
        return datetime.fromtimestamp(self.clock(), tz=timezone.utc).isoformat()

    def _eligible(self, session: _Session) -> list:
        return [
            p for p in self.problems
            if p.problem_id not in session.done and self._counts[p.problem_id] < self._quota
        ]

    def _remaining(self, session: _Session) -> int:
        eligible = self._eligible(session)
        # The delivered item stays completable even if other sessions fill
        # its quota first, but don't count it twice while it is eligible.
        in_hand = 0
        if session.current is not None and not any(
            p.problem_id == session.current.problem_id for p in eligible
        ):
            in_hand = 1
        budget = self.config.items_per_session - session.n_done
        supply = len(eligible) + in_hand
        return max(0, min(budget, supply))

    # -- endpoints --------------------------------------------------------

    def next_item(self, session_id: str | None = None) -> dict:
        with self._lock:
            sid = session_id or uuid.uuid4().hex
            session = self._sessions.setdefault(sid, _Session())
            if session.current is None:
                if session.n_done >= self.config.items_per_session:
                    raise SessionExhausted(f"session {sid} hit its item limit")
                eligible = self._eligible(session)
                if not eligible:
                    raise SessionExhausted("no items need more responses")
                # Fewest accepted records first; ties keep problem order.
                chosen = min(
                    enumerate(eligible),
                    key=lambda pair: (self._counts[pair[1].problem_id], pair[0]),
                )[1]
                session.current = _Delivery(
                    problem_id=chosen.problem_id,
                    clue=self.clue_by_problem.get(chosen.problem_id),
                    delivered_at=self.clock(),
                    nonce=uuid.uuid4().hex,
                )
            problem = self._by_id[session.current.problem_id]
            item = {
                "problem_id": problem.problem_id,
                "task": self.config.task,
                "left": problem.left,
                "right": problem.right,
                "nonce": session.current.nonce,
            }
            if self.config.task == "comprehension":
                item["clue"] = session.current.clue
            else:
                item["target"] = problem.target
            return {
                "session_id": sid,
                "item": item,
                "min_think_s": self.min_think_s,
                "items_remaining": self._remaining(session),
            }

    def _active_delivery(self, session_id: str, problem_id: str, nonce) -> tuple:
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(f"unknown session {session_id!r}")
        delivery = session.current
        if delivery is None or delivery.problem_id != problem_id:
            raise ValueError(f"problem {problem_id!r} is not the session's active item")
        if nonce is not None and nonce != delivery.nonce:
            raise ValueError("stale item nonce; refetch the item")
        return session, delivery

    def _gate_think_time(self, delivery: _Delivery) -> float:
        elapsed = self.clock() - delivery.delivered_at
        if elapsed < self.min_think_s:
            raise ThinkTimeViolation(elapsed, self.min_think_s)
        return elapsed

    def _append(self, path: Path, record: dict):
        line = json.dumps(record, ensure_ascii=False)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def _complete(self, session: _Session, problem_id: str):
        self._counts[problem_id] += 1
        session.done.add(problem_id)
        session.current = None
        session.n_done += 1

    def submit_guess(self, session_id: str, problem_id: str, guess: float,
                     clue: str | None = None, nonce: str | None = None) -> dict:
        if self.config.task != "comprehension":
            raise ValueError("this study collects clues, not guesses")
        if not 0 <= guess <= 100:
            raise ValueError("guess must lie within [0, 100]")
        with self._lock:
            session, delivery = self._active_delivery(session_id, problem_id, nonce)
            if clue is not None and canonical_clue(clue) != canonical_clue(delivery.clue or ""):
                raise ValueError("submitted clue does not match the delivered item")
            elapsed = self._gate_think_time(delivery)
            judgment = HumanJudgment(
                problem_id=problem_id,
                clue=delivery.clue,
                guess=float(guess),
                think_time_s=round(elapsed, 3),
                session_id=session_id,
                ts=self._now_iso(),
            )
            self._append(self.judgments_path, judgment_to_dict(judgment))
            self._complete(session, problem_id)
            return {"accepted": True, "items_remaining": self._remaining(session)}

    def submit_clue(self, session_id: str, problem_id: str, clue: str,
                    nonce: str | None = None) -> dict:
        if self.config.task != "production":
            raise ValueError("this study collects guesses, not clues")
        if not clue or not clue.strip():
            raise ValueError("clue must be non-empty")
        with self._lock:
            session, delivery = self._active_delivery(session_id, problem_id, nonce)
            elapsed = self._gate_think_time(delivery)
            problem = self._by_id[problem_id]
            record = ClueRecord(
                problem_id=problem_id,
                clue=clue.strip(),
                source="human-participant",
                method=None,
                session_id=session_id,
                think_time_s=round(elapsed, 3),
                ts=self._now_iso(),
            )
            advisories = validate_clue(record.clue, problem.pair)
            self._append(self.clues_out_path, clue_to_dict(record))
            self._complete(session, problem_id)
            return {
                "accepted": True,
                "items_remaining": self._remaining(session),
                "advisories": advisories.rules(),
            }

    def snapshot(self) -> dict:
        """Quota progress, for monitoring and tests."""
        with self._lock:
            return {
                "task": self.config.task,
                "counts": dict(self._counts),
                "sessions": len(self._sessions),
                "quota": self._quota,
            }
