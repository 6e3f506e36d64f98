"""Command-line interface, run in-process through CliRunner."""

import json

import pytest
from click.testing import CliRunner

from wavelength.agents.mock import gaussian_comprehension_suite
from wavelength.cli import main
from wavelength.data import (
    ClueRecord,
    HumanJudgment,
    Problem,
    concept_pair,
    save_clues,
    save_judgments,
    save_problems,
)

PROBLEMS = [
    Problem(concept_pair(1), 20.0),
    Problem(concept_pair(2), 45.0),
    Problem(concept_pair(3), 70.0),
    Problem(concept_pair(4), 90.0),
]


@pytest.fixture(scope="module")
def cli_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("clifiles")
    lexicon, clue_map = gaussian_comprehension_suite(PROBLEMS)
    paths = {
        "problems": root / "problems.jsonl",
        "lexicon": root / "lexicon.yaml",
        "clues": root / "clues.jsonl",
        "judgments": root / "judgments.jsonl",
        "agent_yaml": root / "agent.yaml",
    }
    save_problems(PROBLEMS, paths["problems"])
    lexicon.save(paths["lexicon"])
    save_clues(
        [ClueRecord(problem_id=pid, clue=clue, source="scripted", method="direct")
         for pid, clue in clue_map.items()],
        paths["clues"],
    )
    save_judgments(
        [HumanJudgment(problem_id=p.problem_id, clue=clue_map[p.problem_id],
                       guess=p.target, think_time_s=12.0, session_id="h1",
                       ts="2026-01-05T10:00:00+00:00")
         for p in PROBLEMS],
        paths["judgments"],
    )
    paths["agent_yaml"].write_text(
        "agent:\n  mode: direct\n  estimator: logprob-scoring\n",
        encoding="utf-8",
    )
    return paths


@pytest.fixture
def runner():
    return CliRunner()


def comprehension_args(cli_files, *extra):
    return [
        "eval-comprehension",
        "--problems", str(cli_files["problems"]),
        "--clues", str(cli_files["clues"]),
        "--mock-lexicon", str(cli_files["lexicon"]),
        "--agent-config", str(cli_files["agent_yaml"]),
        *extra,
    ]


class TestHelp:
    def test_all_commands_are_registered(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("eval-comprehension", "eval-production", "gen-alternatives",
                        "ablate-alternatives", "judge", "report", "serve-study",
                        "validate-data"):
            assert command in result.output


class TestEvalComprehension:
    def test_mock_run_prints_a_summary(self, runner, cli_files):
        result = runner.invoke(main, comprehension_args(cli_files))
        assert result.exit_code == 0, result.output
        assert "problems: 4  missing: 0" in result.output
        assert "abs diff:" in result.output
        assert "pearson target" in result.output

    def test_human_data_adds_human_metrics(self, runner, cli_files):
        result = runner.invoke(main, [
            "eval-comprehension",
            "--problems", str(cli_files["problems"]),
            "--human-data", str(cli_files["judgments"]),
            "--mock-lexicon", str(cli_files["lexicon"]),
            "--agent-config", str(cli_files["agent_yaml"]),
        ])
        assert result.exit_code == 0, result.output
        assert "pearson human" in result.output

    def test_rsa_flags_are_accepted(self, runner, cli_files):
        result = runner.invoke(main, comprehension_args(
            cli_files, "--method", "direct-rsa", "--alpha", "2.0",
            "--epsilon", "1e-6",
        ))
        assert result.exit_code == 0, result.output

    def test_out_dir_writes_files(self, runner, cli_files, tmp_path):
        out_dir = tmp_path / "reports"
        result = runner.invoke(main, comprehension_args(
            cli_files, "--out-dir", str(out_dir), "--basename", "clirun",
        ))
        assert result.exit_code == 0, result.output
        assert "wrote json:" in result.output
        assert (out_dir / "clirun.json").exists()
        assert (out_dir / "clirun.csv").exists()

    def test_requires_a_clue_source(self, runner, cli_files):
        result = runner.invoke(main, [
            "eval-comprehension",
            "--problems", str(cli_files["problems"]),
            "--mock-lexicon", str(cli_files["lexicon"]),
        ])
        assert result.exit_code != 0
        assert "--human-data or --clues" in result.output

    def test_live_agent_needs_an_endpoint(self, runner, cli_files):
        result = runner.invoke(main, [
            "eval-comprehension",
            "--problems", str(cli_files["problems"]),
            "--clues", str(cli_files["clues"]),
        ])
        assert result.exit_code != 0
        assert "live agents need an endpoint" in result.output


class TestEvalProduction:
    def test_mock_run(self, runner, cli_files):
        result = runner.invoke(main, [
            "eval-production",
            "--problems", str(cli_files["problems"]),
            "--mock-lexicon", str(cli_files["lexicon"]),
            "--agent-config", str(cli_files["agent_yaml"]),
            "--judge-mock-lexicon", str(cli_files["lexicon"]),
            "--n-alternatives", "8",
        ])
        assert result.exit_code == 0, result.output
        assert "problems: 4  missing: 0" in result.output

    def test_rsa_production(self, runner, cli_files):
        result = runner.invoke(main, [
            "eval-production",
            "--problems", str(cli_files["problems"]),
            "--method", "direct-rsa",
            "--mock-lexicon", str(cli_files["lexicon"]),
            "--agent-config", str(cli_files["agent_yaml"]),
            "--judge-mock-lexicon", str(cli_files["lexicon"]),
            "--n-alternatives", "8",
        ])
        assert result.exit_code == 0, result.output


class TestGenAlternatives:
    def test_generation_with_output_file(self, runner, cli_files, tmp_path):
        out_path = tmp_path / "alts.jsonl"
        result = runner.invoke(main, [
            "gen-alternatives",
            "--problems", str(cli_files["problems"]),
            "--mock-lexicon", str(cli_files["lexicon"]),
            "--out", str(out_path),
        ])
        assert result.exit_code == 0, result.output
        for p in PROBLEMS:
            assert f"{p.problem_id}:" in result.output
        records = [json.loads(line) for line in
                   out_path.read_text(encoding="utf-8").splitlines()]
        assert {r["problem_id"] for r in records} == {p.problem_id for p in PROBLEMS}


class TestAblateAlternatives:
    def test_pool_sweep_output(self, runner, cli_files):
        result = runner.invoke(main, [
            "ablate-alternatives",
            "--problems", str(cli_files["problems"]),
            "--pool-sizes", "2,6",
            "--mock-lexicon", str(cli_files["lexicon"]),
            "--agent-config", str(cli_files["agent_yaml"]),
            "--judge-mock-lexicon", str(cli_files["lexicon"]),
        ])
        assert result.exit_code == 0, result.output
        assert "pool    2: abs diff" in result.output
        assert "pool    6: abs diff" in result.output
        assert "2_vs_6: p=" in result.output

    def test_non_numeric_sizes_are_a_usage_error(self, runner, cli_files):
        result = runner.invoke(main, [
            "ablate-alternatives",
            "--problems", str(cli_files["problems"]),
            "--pool-sizes", "a,b",
            "--mock-lexicon", str(cli_files["lexicon"]),
        ])
        assert result.exit_code != 0
        assert "comma-separated integers" in result.output


class TestJudge:
    def test_judging_clues(self, runner, cli_files):
        result = runner.invoke(main, [
            "judge",
            "--problems", str(cli_files["problems"]),
            "--clues", str(cli_files["clues"]),
            "--judge-mock-lexicon", str(cli_files["lexicon"]),
        ])
        assert result.exit_code == 0, result.output
        assert "abs diff:" in result.output


class TestReport:
    @pytest.fixture
    def saved_reports(self, runner, cli_files, tmp_path):
        for basename, method in (("direct", "direct"), ("rsa", "direct-rsa")):
            result = runner.invoke(main, comprehension_args(
                cli_files, "--method", method,
                "--out-dir", str(tmp_path), "--basename", basename,
            ))
            assert result.exit_code == 0, result.output
        return {"direct": tmp_path / "direct.json", "rsa": tmp_path / "rsa.json"}

    def test_summary_of_a_saved_report(self, runner, saved_reports):
        result = runner.invoke(main, ["report", "--report",
                                      str(saved_reports["direct"])])
        assert result.exit_code == 0, result.output
        assert "problems: 4" in result.output

    def test_rerender(self, runner, saved_reports, tmp_path):
        out_dir = tmp_path / "rendered"
        result = runner.invoke(main, [
            "report", "--report", str(saved_reports["direct"]),
            "--out-dir", str(out_dir),
        ])
        assert result.exit_code == 0, result.output
        assert (out_dir / "direct.csv").exists()

    def test_comparison(self, runner, saved_reports):
        result = runner.invoke(main, [
            "report", "--report", str(saved_reports["direct"]),
            "--against", str(saved_reports["rsa"]),
            "--resamples", "1000",
        ])
        assert result.exit_code == 0, result.output
        assert "p=" in result.output
        assert "95% CI" in result.output


class TestValidateData:
    def test_valid_file(self, runner, cli_files):
        result = runner.invoke(main, [
            "validate-data", "--kind", "problems",
            "--path", str(cli_files["problems"]),
        ])
        assert result.exit_code == 0
        assert "OK: 4 records" in result.output

    def test_invalid_file_exits_nonzero(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"pair_index": 1, "left": "Bad", "right": "Good", "target": 20}\n'
                       '{"pair_index": 1, "left": "Bad"}\n', encoding="utf-8")
        result = runner.invoke(main, [
            "validate-data", "--kind", "problems", "--path", str(bad),
        ])
        assert result.exit_code == 1
        assert "INVALID" in result.stderr
        assert "line 2" in result.stderr


class TestServeStudy:
    def test_comprehension_study_requires_clues(self, runner, cli_files, tmp_path):
        result = runner.invoke(main, [
            "serve-study", "--task", "comprehension",
            "--problems", str(cli_files["problems"]),
            "--records-dir", str(tmp_path / "records"),
        ])
        assert result.exit_code != 0
        assert isinstance(result.exception, ValueError)
        assert "clues file" in str(result.exception)
