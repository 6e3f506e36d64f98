"""Study runtime and HTTP study endpoints, driven by a hand-cranked clock."""

import json
import threading
import warnings

import pytest

from wavelength.data import (
    ClueRecord,
    Problem,
    concept_pair,
    load_clues,
    load_judgments,
    save_clues,
    save_problems,
)
from wavelength.errors import SessionExhausted, ThinkTimeViolation
from wavelength.service.app import ServiceSettings, create_app
from wavelength.service.study import (
    MIN_THINK_COMPREHENSION_S,
    MIN_THINK_PRODUCTION_S,
    StudyConfig,
    StudyRuntime,
)

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient


class FakeClock:
    def __init__(self, start=1_700_000_000.0):
        self.now = float(start)

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += float(seconds)


PROBLEMS = [
    Problem(concept_pair(1), 20.0),
    Problem(concept_pair(2), 45.0),
    Problem(concept_pair(3), 70.0),
]


@pytest.fixture
def study_files(tmp_path):
    problems_path = tmp_path / "problems.jsonl"
    save_problems(PROBLEMS, problems_path)
    clues_path = tmp_path / "clues.jsonl"
    save_clues(
        [ClueRecord(problem_id=p.problem_id, clue=f"clue for {p.problem_id}",
                    source="scripted", method="direct")
         for p in PROBLEMS],
        clues_path,
    )
    return {"problems": problems_path, "clues": clues_path,
            "records": tmp_path / "records"}


def comprehension_runtime(files, clock, **overrides):
    config = StudyConfig(
        task="comprehension",
        problems_path=str(files["problems"]),
        records_dir=str(files["records"]),
        clues_path=str(files["clues"]),
        **overrides,
    )
    return StudyRuntime(config, clock=clock)


def production_runtime(files, clock, **overrides):
    config = StudyConfig(
        task="production",
        problems_path=str(files["problems"]),
        records_dir=str(files["records"]),
        **overrides,
    )
    return StudyRuntime(config, clock=clock)


class TestItemDelivery:
    def test_comprehension_item_shape(self, study_files):
        runtime = comprehension_runtime(study_files, FakeClock())
        out = runtime.next_item()
        assert out["min_think_s"] == MIN_THINK_COMPREHENSION_S
        item = out["item"]
        assert item["task"] == "comprehension"
        assert item["problem_id"] == PROBLEMS[0].problem_id
        assert item["left"] == PROBLEMS[0].left
        assert item["right"] == PROBLEMS[0].right
        assert item["clue"] == f"clue for {PROBLEMS[0].problem_id}"
        assert "target" not in item
        assert item["nonce"]

    def test_production_item_shows_target_but_no_clue(self, study_files):
        runtime = production_runtime(study_files, FakeClock())
        out = runtime.next_item()
        item = out["item"]
        assert out["min_think_s"] == MIN_THINK_PRODUCTION_S
        assert item["target"] == PROBLEMS[0].target
        assert "clue" not in item

    def test_refetch_returns_the_same_item_and_nonce(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        first = runtime.next_item("s1")
        clock.advance(5)
        second = runtime.next_item("s1")
        assert second["item"]["problem_id"] == first["item"]["problem_id"]
        assert second["item"]["nonce"] == first["item"]["nonce"]

    def test_refetch_does_not_reset_the_think_timer(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(6)
        runtime.next_item("s1")
        clock.advance(5)
        # 11s since first delivery even though the refetch was 5s ago.
        result = runtime.submit_guess("s1", out["item"]["problem_id"], 50.0,
                                      nonce=out["item"]["nonce"])
        assert result["accepted"] is True

    def test_items_remaining_counts_down(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock, judgments_per_item=1)
        out = runtime.next_item("s1")
        assert out["items_remaining"] == len(PROBLEMS)
        clock.advance(11)
        result = runtime.submit_guess("s1", out["item"]["problem_id"], 50.0)
        assert result["items_remaining"] == len(PROBLEMS) - 1

    def test_session_budget_caps_remaining(self, study_files):
        runtime = comprehension_runtime(study_files, FakeClock(),
                                        items_per_session=2)
        out = runtime.next_item("s1")
        assert out["items_remaining"] == 2


class TestThinkTimeGate:
    def test_early_guess_is_rejected_with_retry_hint(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(4)
        with pytest.raises(ThinkTimeViolation) as excinfo:
            runtime.submit_guess("s1", out["item"]["problem_id"], 42.0)
        assert excinfo.value.elapsed_s == pytest.approx(4.0)
        assert excinfo.value.retry_after_s == pytest.approx(6.0)
        # Nothing may be persisted for a refused submission.
        assert not runtime.judgments_path.exists()

    def test_guess_after_the_minimum_is_accepted(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(11)
        result = runtime.submit_guess("s1", out["item"]["problem_id"], 42.0)
        assert result["accepted"] is True
        recorded = load_judgments(runtime.judgments_path)
        assert len(recorded) == 1
        assert recorded[0].think_time_s == pytest.approx(11.0)

    def test_rejected_item_can_be_retried_later(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(4)
        with pytest.raises(ThinkTimeViolation):
            runtime.submit_guess("s1", out["item"]["problem_id"], 42.0)
        clock.advance(7)
        result = runtime.submit_guess("s1", out["item"]["problem_id"], 42.0)
        assert result["accepted"] is True
        assert load_judgments(runtime.judgments_path)[0].think_time_s == pytest.approx(11.0)

    def test_production_uses_the_longer_gate(self, study_files):
        clock = FakeClock()
        runtime = production_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(11)
        with pytest.raises(ThinkTimeViolation) as excinfo:
            runtime.submit_clue("s1", out["item"]["problem_id"], "warm")
        assert excinfo.value.retry_after_s == pytest.approx(9.0)
        clock.advance(9)
        result = runtime.submit_clue("s1", out["item"]["problem_id"], "warm")
        assert result["accepted"] is True


class TestSubmissionValidation:
    def test_unknown_session_rejected(self, study_files):
        runtime = comprehension_runtime(study_files, FakeClock())
        with pytest.raises(KeyError):
            runtime.submit_guess("ghost", PROBLEMS[0].problem_id, 50.0)

    def test_wrong_problem_rejected(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        runtime.next_item("s1")
        clock.advance(11)
        with pytest.raises(ValueError, match="active item"):
            runtime.submit_guess("s1", PROBLEMS[2].problem_id, 50.0)

    def test_stale_nonce_rejected(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(11)
        with pytest.raises(ValueError, match="nonce"):
            runtime.submit_guess("s1", out["item"]["problem_id"], 50.0,
                                 nonce="0" * 32)

    def test_out_of_range_guess_rejected(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(11)
        with pytest.raises(ValueError, match="within"):
            runtime.submit_guess("s1", out["item"]["problem_id"], 101.0)
        assert not runtime.judgments_path.exists()

    def test_clue_echo_must_match_delivery(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(11)
        with pytest.raises(ValueError, match="does not match"):
            runtime.submit_guess("s1", out["item"]["problem_id"], 50.0,
                                 clue="a different clue")
        result = runtime.submit_guess("s1", out["item"]["problem_id"], 50.0,
                                      clue=out["item"]["clue"].upper())
        assert result["accepted"] is True

    def test_task_mismatch_rejected(self, study_files):
        clock = FakeClock()
        comp = comprehension_runtime(study_files, clock)
        out = comp.next_item("s1")
        with pytest.raises(ValueError, match="guesses, not clues"):
            comp.submit_clue("s1", out["item"]["problem_id"], "warm")
        prod_files = dict(study_files, records=study_files["records"] / "prod")
        prod = production_runtime(prod_files, clock)
        out = prod.next_item("s1")
        with pytest.raises(ValueError, match="clues, not guesses"):
            prod.submit_guess("s1", out["item"]["problem_id"], 50.0)

    def test_blank_clue_rejected(self, study_files):
        clock = FakeClock()
        runtime = production_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(21)
        with pytest.raises(ValueError, match="non-empty"):
            runtime.submit_clue("s1", out["item"]["problem_id"], "   ")


class TestRecords:
    def finish_one(self, runtime, clock, session, value=50.0):
        out = runtime.next_item(session)
        clock.advance(runtime.min_think_s + 1)
        if runtime.config.task == "comprehension":
            runtime.submit_guess(session, out["item"]["problem_id"], value,
                                 nonce=out["item"]["nonce"])
        else:
            runtime.submit_clue(session, out["item"]["problem_id"], "steam",
                                nonce=out["item"]["nonce"])
        return out["item"]["problem_id"]

    def test_judgment_records_round_trip(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        pid = self.finish_one(runtime, clock, "s1", value=37.5)
        j = load_judgments(runtime.judgments_path)[0]
        assert j.problem_id == pid
        assert j.guess == 37.5
        assert j.clue == f"clue for {pid}"
        assert j.session_id == "s1"
        assert j.ts.endswith("+00:00")

    def test_clue_records_round_trip(self, study_files):
        clock = FakeClock()
        runtime = production_runtime(study_files, clock)
        out = runtime.next_item("s9")
        clock.advance(25)
        result = runtime.submit_clue("s9", out["item"]["problem_id"], "  steam  ")
        assert result["advisories"] == []
        record = load_clues(runtime.clues_out_path)[0]
        assert record.clue == "steam"
        assert record.source == "human-participant"
        assert record.think_time_s == pytest.approx(25.0)

    def test_advisories_flag_rule_breaking_clues(self, study_files):
        clock = FakeClock()
        runtime = production_runtime(study_files, clock)
        out = runtime.next_item("s1")
        clock.advance(21)
        result = runtime.submit_clue(
            "s1", out["item"]["problem_id"],
            f"kind of {PROBLEMS[0].left} 42 thing",
        )
        assert set(result["advisories"]) >= {"reuses-concept-word", "contains-number"}
        # Advisory violations are recorded anyway.
        assert len(load_clues(runtime.clues_out_path)) == 1

    def test_counts_restore_across_restarts(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock, judgments_per_item=1)
        done = {self.finish_one(runtime, clock, "s1"),
                self.finish_one(runtime, clock, "s1")}
        reopened = comprehension_runtime(study_files, clock, judgments_per_item=1)
        snapshot = reopened.snapshot()
        for pid in done:
            assert snapshot["counts"][pid] == 1
        out = reopened.next_item("s2")
        assert out["item"]["problem_id"] not in done

    def test_appends_preserve_existing_records(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        self.finish_one(runtime, clock, "s1")
        reopened = comprehension_runtime(study_files, clock)
        self.finish_one(reopened, clock, "s2")
        recorded = load_judgments(reopened.judgments_path)
        assert [j.session_id for j in recorded] == ["s1", "s2"]


class TestAssignment:
    def test_fewest_responses_first_with_stable_ties(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        # All counts zero: both sessions are offered the first problem.
        first = runtime.next_item("s1")["item"]["problem_id"]
        assert runtime.next_item("s2")["item"]["problem_id"] == first
        clock.advance(11)
        runtime.submit_guess("s1", first, 50.0)
        # s3 now skips the problem that has a response on file.
        assert runtime.next_item("s3")["item"]["problem_id"] == PROBLEMS[1].problem_id

    def test_session_never_repeats_a_problem(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock, judgments_per_item=5)
        seen = []
        for _ in PROBLEMS:
            out = runtime.next_item("s1")
            seen.append(out["item"]["problem_id"])
            clock.advance(11)
            runtime.submit_guess("s1", out["item"]["problem_id"], 50.0)
        assert sorted(seen) == sorted(p.problem_id for p in PROBLEMS)

    def test_session_item_limit(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock, items_per_session=1)
        out = runtime.next_item("s1")
        clock.advance(11)
        runtime.submit_guess("s1", out["item"]["problem_id"], 50.0)
        with pytest.raises(SessionExhausted, match="item limit"):
            runtime.next_item("s1")

    def test_filled_quotas_exhaust_the_study(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock, judgments_per_item=1)
        for session in ("a", "b", "c"):
            out = runtime.next_item(session)
            clock.advance(11)
            runtime.submit_guess(session, out["item"]["problem_id"], 50.0)
        with pytest.raises(SessionExhausted, match="no items"):
            runtime.next_item("d")

    def test_concurrent_sessions_write_whole_lines(self, study_files):
        clock = FakeClock()
        runtime = production_runtime(study_files, clock, clues_per_item=10)
        sessions = [f"s{i}" for i in range(8)]
        deliveries = {sid: runtime.next_item(sid) for sid in sessions}
        clock.advance(25)
        errors = []

        def submit(sid):
            try:
                item = deliveries[sid]["item"]
                runtime.submit_clue(sid, item["problem_id"],
                                    f"clue from {sid}", nonce=item["nonce"])
            except Exception as exc:  # pragma: no cover - failure detail
                errors.append((sid, exc))

        threads = [threading.Thread(target=submit, args=(sid,)) for sid in sessions]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        records = load_clues(runtime.clues_out_path)
        assert len(records) == len(sessions)
        assert {r.session_id for r in records} == set(sessions)
        raw = runtime.clues_out_path.read_text(encoding="utf-8")
        assert all(json.loads(line) for line in raw.splitlines())


@pytest.fixture
def study_client(study_files):
    clock = FakeClock()
    runtime = comprehension_runtime(study_files, clock)
    app = create_app(ServiceSettings(study=runtime))
    with TestClient(app) as client:
        yield client, clock


class TestStudyHttp:
    def test_config_endpoint(self, study_client):
        client, _ = study_client
        body = client.get("/study/config").json()
        assert body["task"] == "comprehension"
        assert body["min_think_s"] == MIN_THINK_COMPREHENSION_S
        assert body["n_problems"] == len(PROBLEMS)

    def test_early_submission_is_429_with_retry_after(self, study_client):
        client, clock = study_client
        out = client.get("/study/next").json()
        clock.advance(4)
        response = client.post("/study/guess", json={
            "session_id": out["session_id"],
            "problem_id": out["item"]["problem_id"],
            "guess": 40.0,
            "nonce": out["item"]["nonce"],
        })
        assert response.status_code == 429
        assert response.headers["Retry-After"] == "6"
        body = response.json()
        assert body["retry_after_s"] == pytest.approx(6.0)
        assert body["elapsed_s"] == pytest.approx(4.0)

    def test_patient_submission_is_accepted(self, study_client):
        client, clock = study_client
        out = client.get("/study/next").json()
        clock.advance(11)
        response = client.post("/study/guess", json={
            "session_id": out["session_id"],
            "problem_id": out["item"]["problem_id"],
            "guess": 40.0,
            "nonce": out["item"]["nonce"],
        })
        assert response.status_code == 200
        assert response.json()["accepted"] is True

    def test_out_of_range_guess_is_422_and_unrecorded(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock)
        app = create_app(ServiceSettings(study=runtime))
        with TestClient(app) as client:
            out = client.get("/study/next").json()
            clock.advance(11)
            response = client.post("/study/guess", json={
                "session_id": out["session_id"],
                "problem_id": out["item"]["problem_id"],
                "guess": 140.0,
            })
            assert response.status_code == 422
        assert not runtime.judgments_path.exists()

    def test_stale_nonce_is_422(self, study_client):
        client, clock = study_client
        out = client.get("/study/next").json()
        clock.advance(11)
        response = client.post("/study/guess", json={
            "session_id": out["session_id"],
            "problem_id": out["item"]["problem_id"],
            "guess": 40.0,
            "nonce": "f" * 32,
        })
        assert response.status_code == 422
        assert "nonce" in response.json()["detail"]

    def test_exhausted_session_is_409(self, study_files):
        clock = FakeClock()
        runtime = comprehension_runtime(study_files, clock, items_per_session=1)
        app = create_app(ServiceSettings(study=runtime))
        with TestClient(app) as client:
            out = client.get("/study/next").json()
            clock.advance(11)
            client.post("/study/guess", json={
                "session_id": out["session_id"],
                "problem_id": out["item"]["problem_id"],
                "guess": 40.0,
            })
            response = client.get("/study/next",
                                  params={"session_id": out["session_id"]})
            assert response.status_code == 409

    def test_production_clue_flow(self, study_files, tmp_path):
        clock = FakeClock()
        runtime = production_runtime(study_files, clock)
        app = create_app(ServiceSettings(study=runtime))
        with TestClient(app) as client:
            out = client.get("/study/next").json()
            assert out["min_think_s"] == MIN_THINK_PRODUCTION_S
            clock.advance(19)
            early = client.post("/study/clue", json={
                "session_id": out["session_id"],
                "problem_id": out["item"]["problem_id"],
                "clue": "steam",
            })
            assert early.status_code == 429
            clock.advance(2)
            late = client.post("/study/clue", json={
                "session_id": out["session_id"],
                "problem_id": out["item"]["problem_id"],
                "clue": "steam",
            })
            assert late.status_code == 200
            assert late.json()["advisories"] == []

    def test_progress_snapshot(self, study_client):
        client, clock = study_client
        out = client.get("/study/next").json()
        clock.advance(11)
        client.post("/study/guess", json={
            "session_id": out["session_id"],
            "problem_id": out["item"]["problem_id"],
            "guess": 40.0,
        })
        body = client.get("/study/progress").json()
        assert body["counts"][out["item"]["problem_id"]] == 1
        assert body["sessions"] == 1

    def test_no_study_configured_is_503(self):
        app = create_app(ServiceSettings())
        with TestClient(app) as client:
            assert client.get("/study/next").status_code == 503
            assert client.get("/study/config").status_code == 503
