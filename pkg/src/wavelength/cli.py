"""Command-line interface.

Every command is a thin client of the HTTP service: with --server it talks
to a running instance, otherwise it spins the app up in-process and calls it
through an in-memory transport. serve-study is the exception; it configures
and runs the server itself.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx
import yaml

from .agents.config import load_agent_yaml


def _load_spec_sections(path):
    if path is None:
        return None, None
    return load_agent_yaml(path)


def _agent_spec(agent_config, mock_lexicon, endpoint_url, model_id, mode=None,
                estimator=None, n_samples=None, seed=None):
    """Compose an agent spec payload from a YAML file plus flag overrides."""
    config, endpoint = _load_spec_sections(agent_config)
    config_dict = config.as_dict() if config else {}
    for key, value in (("mode", mode), ("estimator", estimator),
                       ("n_samples", n_samples), ("seed", seed)):
        if value is not None:
            config_dict[key] = value
    if mock_lexicon:
        return {"kind": "mock", "lexicon_path": str(mock_lexicon), "config": config_dict}
    endpoint_dict = None
    if endpoint is not None:
        endpoint_dict = {
            "base_url": endpoint.base_url,
            "model_id": endpoint.model_id,
            "auth_token_env": endpoint.auth_token_env,
            "request_timeout_s": endpoint.request_timeout_s,
            "max_retries": endpoint.max_retries,
            "max_parallel_requests": endpoint.max_parallel_requests,
        }
    if endpoint_url or model_id:
        endpoint_dict = endpoint_dict or {"base_url": "", "model_id": ""}
        if endpoint_url:
            endpoint_dict["base_url"] = endpoint_url
        if model_id:
            endpoint_dict["model_id"] = model_id
    if not endpoint_dict or not endpoint_dict.get("base_url") or not endpoint_dict.get("model_id"):
        raise click.UsageError(
            "live agents need an endpoint: pass --agent-config with an endpoint "
            "section, or --endpoint and --model, or use --mock-lexicon"
        )
    return {"kind": "lm", "endpoint": endpoint_dict, "config": config_dict}


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import ServiceSettings, create_app

    return TestClient(create_app(ServiceSettings()), base_url="http://wavelength.local")


def _post(server, path, payload):
    with _client(server) as client:
        response = client.post(path, json=payload)
        body = response.json()
        if response.status_code >= 400:
            raise click.ClickException(
                f"{path} -> {response.status_code}: {body.get('detail', body)}"
            )
        return body


def _print_report_summary(report: dict):
    agg = report["aggregate"]

    def fmt(metric):
        stats = agg[metric]
        if stats["mean"] is None:
            return "n/a"
        se = stats["standard_error"]
        se_text = f" +/- {se:.3f}" if se is not None else ""
        return f"{stats['mean']:.3f}{se_text} (n={stats['n']})"

    click.echo(f"problems: {report['n_problems']}  missing: {report['n_missing']}")
    click.echo(f"abs diff:        {fmt('abs_diff')}")
    click.echo(f"wasserstein:     {fmt('wasserstein')}")
    click.echo(f"model entropy:   {fmt('model_entropy')}")
    click.echo(f"human entropy:   {fmt('human_entropy')}")
    for name in ("pearson_human", "rmse_human", "pearson_target", "rmse_target"):
        value = report[name]
        if value is not None:
            click.echo(f"{name.replace('_', ' '):>15}: {value:.4f}")


def _echo_files(files: dict):
    for fmt, path in sorted(files.items()):
        click.echo(f"wrote {fmt}: {path}")


server_option = click.option(
    "--server", default=None, metavar="URL",
    help="Base URL of a running service; in-process when omitted.",
)
seed_option = click.option("--seed", default=0, show_default=True, type=int)
out_dir_option = click.option("--out-dir", default=None, type=click.Path())
cache_dir_option = click.option("--cache-dir", default=None, type=click.Path())
rsa_options = (
    click.option("--alpha", default=1.0, show_default=True, type=float,
                 help="Speaker rationality."),
    click.option("--epsilon", default=1e-6, show_default=True, type=float,
                 help="Literal-matrix smoothing; 0 disables."),
)


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


agent_options = (
    click.option("--agent-config", type=click.Path(exists=True), default=None,
                 help="YAML with agent/endpoint sections."),
    click.option("--mock-lexicon", type=click.Path(exists=True), default=None,
                 help="YAML lexicon; makes the agent a deterministic mock."),
    click.option("--endpoint", "endpoint_url", default=None, metavar="URL",
                 help="Chat-completions base URL (overrides the config file)."),
    click.option("--model", "model_id", default=None,
                 help="Model id at the endpoint (overrides the config file)."),
)


@click.group()
def main():
    """Pragmatic-inference evaluation for the Wavelength guessing game."""


@main.command("eval-comprehension")
@server_option
@click.option("--problems", required=True, type=click.Path(exists=True))
@click.option("--human-data", type=click.Path(exists=True), default=None,
              help="Judgments JSONL; provides clues and human baselines.")
@click.option("--clues", type=click.Path(exists=True), default=None,
              help="Clues JSONL; overrides the clue per problem.")
@click.option("--method", default="direct", show_default=True,
              type=click.Choice(["direct", "cot", "direct-rsa", "cot-rsa"]))
@click.option("--rsa-variant", default="standard", show_default=True,
              type=click.Choice(["standard", "state-marginal"]))
@click.option("--alt-per-state", default=1, show_default=True, type=int)
@click.option("--actual-only", is_flag=True,
              help="Shrink the RSA utterance pool to the actual clue.")
@_with_options(agent_options)
@click.option("--alt-agent-config", type=click.Path(exists=True), default=None,
              help="Separate agent YAML for alternative generation.")
@click.option("--alt-mock-lexicon", type=click.Path(exists=True), default=None)
@_with_options(rsa_options)
@seed_option
@out_dir_option
@cache_dir_option
@click.option("--basename", default=None)
def eval_comprehension(server, problems, human_data, clues, method, rsa_variant,
                       alt_per_state, actual_only, agent_config, mock_lexicon,
                       endpoint_url, model_id, alt_agent_config, alt_mock_lexicon,
                       alpha, epsilon, seed, out_dir, cache_dir, basename):
    """Score a listener against targets (and human guesses when given)."""
    if not human_data and not clues:
        raise click.UsageError("pass --human-data or --clues to supply the clues")
    payload = {
        "problems_path": problems,
        "clues_path": clues,
        "human_data_path": human_data,
        "method": {
            "task": "comprehension",
            "method": method,
            "rsa_variant": rsa_variant,
            "alt_per_state": alt_per_state,
            "actual_only": actual_only,
        },
        "agent": _agent_spec(agent_config, mock_lexicon, endpoint_url, model_id),
        "rsa": {"alpha": alpha, "epsilon": epsilon},
        "seed": seed,
        "out_dir": out_dir,
        "basename": basename,
        "cache_dir": cache_dir,
    }
    if alt_agent_config or alt_mock_lexicon:
        payload["alt_agent"] = _agent_spec(alt_agent_config, alt_mock_lexicon, None, None)
    body = _post(server, "/eval/comprehension", payload)
    _print_report_summary(body["report"])
    _echo_files(body["files"])


@main.command("eval-production")
@server_option
@click.option("--problems", required=True, type=click.Path(exists=True))
@click.option("--method", default="direct", show_default=True,
              type=click.Choice(["direct", "cot", "direct-rsa", "cot-rsa"]))
@click.option("--n-alternatives", default=32, show_default=True, type=int)
@click.option("--selection", default="argmax", show_default=True,
              type=click.Choice(["argmax", "sample"]))
@_with_options(agent_options)
@click.option("--judge-config", type=click.Path(exists=True), default=None,
              help="Agent YAML for the judge; defaults to the speaker as a "
                   "chain-of-thought listener.")
@click.option("--judge-mock-lexicon", type=click.Path(exists=True), default=None)
@click.option("--human-data", type=click.Path(exists=True), default=None)
@_with_options(rsa_options)
@seed_option
@out_dir_option
@cache_dir_option
@click.option("--basename", default=None)
def eval_production(server, problems, method, n_alternatives, selection,
                    agent_config, mock_lexicon, endpoint_url, model_id,
                    judge_config, judge_mock_lexicon, human_data, alpha, epsilon,
                    seed, out_dir, cache_dir, basename):
    """Generate clues, pick one per problem, and judge the choice."""
    payload = {
        "problems_path": problems,
        "method": {
            "task": "production",
            "method": method,
            "n_alternatives": n_alternatives,
            "selection": selection,
        },
        "speaker": _agent_spec(agent_config, mock_lexicon, endpoint_url, model_id),
        "human_data_path": human_data,
        "rsa": {"alpha": alpha, "epsilon": epsilon},
        "seed": seed,
        "out_dir": out_dir,
        "basename": basename,
        "cache_dir": cache_dir,
    }
    if judge_config or judge_mock_lexicon:
        payload["judge"] = _agent_spec(judge_config, judge_mock_lexicon, None, None)
    body = _post(server, "/eval/production", payload)
    _print_report_summary(body["report"])
    _echo_files(body["files"])


@main.command("gen-alternatives")
@server_option
@click.option("--problems", required=True, type=click.Path(exists=True))
@_with_options(agent_options)
@click.option("--per-state", default=1, show_default=True, type=int)
@click.option("--out", "out_path", type=click.Path(), default=None)
@cache_dir_option
def gen_alternatives(server, problems, agent_config, mock_lexicon, endpoint_url,
                     model_id, per_state, out_path, cache_dir):
    """Sample one clue per grid state per problem and deduplicate."""
    payload = {
        "problems_path": problems,
        "agent": _agent_spec(agent_config, mock_lexicon, endpoint_url, model_id),
        "per_state": per_state,
        "out_path": out_path,
        "cache_dir": cache_dir,
    }
    body = _post(server, "/alternatives/generate", payload)
    for problem_id, alternatives in body["alternatives"].items():
        click.echo(f"{problem_id}: {len(alternatives)} alternatives")
    if out_path:
        click.echo(f"wrote {out_path}")


@main.command("ablate-alternatives")
@server_option
@click.option("--problems", required=True, type=click.Path(exists=True))
@click.option("--pool-sizes", required=True,
              help="Comma-separated candidate pool sizes, e.g. 4,8,16,32.")
@click.option("--method", default="direct-rsa", show_default=True,
              type=click.Choice(["direct", "cot", "direct-rsa", "cot-rsa"]))
@_with_options(agent_options)
@click.option("--judge-config", type=click.Path(exists=True), default=None)
@click.option("--judge-mock-lexicon", type=click.Path(exists=True), default=None)
@_with_options(rsa_options)
@seed_option
@out_dir_option
@cache_dir_option
@click.option("--basename", default=None)
def ablate_alternatives(server, problems, pool_sizes, method, agent_config,
                        mock_lexicon, endpoint_url, model_id, judge_config,
                        judge_mock_lexicon, alpha, epsilon, seed, out_dir,
                        cache_dir, basename):
    """Production quality as a function of candidate-pool size."""
    try:
        sizes = [int(part) for part in pool_sizes.split(",") if part.strip()]
    except ValueError:
        raise click.UsageError("--pool-sizes must be comma-separated integers")
    payload = {
        "problems_path": problems,
        "pool_sizes": sizes,
        "method": {"task": "production", "method": method,
                   "n_alternatives": max(sizes) if sizes else 32},
        "speaker": _agent_spec(agent_config, mock_lexicon, endpoint_url, model_id),
        "rsa": {"alpha": alpha, "epsilon": epsilon},
        "seed": seed,
        "out_dir": out_dir,
        "basename": basename,
        "cache_dir": cache_dir,
    }
    if judge_config or judge_mock_lexicon:
        payload["judge"] = _agent_spec(judge_config, judge_mock_lexicon, None, None)
    body = _post(server, "/eval/ablation", payload)
    for n in body["report"]["pool_sizes"]:
        sub = body["report"]["by_n"][str(n)]
        agg = sub["aggregate"]["abs_diff"]
        mean = agg["mean"]
        mean_text = f"{mean:.3f}" if mean is not None else "n/a"
        click.echo(f"pool {n:>4}: abs diff {mean_text} (n={agg['n']}, missing={sub['n_missing']})")
    for key, comparison in sorted(body["report"]["comparisons"].items()):
        click.echo(f"{key}: p={comparison['p_value']:.4f} diff={comparison['mean_diff']:.3f}")
    _echo_files(body["files"])


@main.command("judge")
@server_option
@click.option("--problems", required=True, type=click.Path(exists=True))
@click.option("--clues", required=True, type=click.Path(exists=True),
              help="Clue records to judge (model- or human-written).")
@click.option("--judge-config", type=click.Path(exists=True), default=None)
@click.option("--judge-mock-lexicon", type=click.Path(exists=True), default=None)
@click.option("--endpoint", "endpoint_url", default=None)
@click.option("--model", "model_id", default=None)
@click.option("--human-data", type=click.Path(exists=True), default=None)
@_with_options(rsa_options)
@seed_option
@out_dir_option
@cache_dir_option
@click.option("--basename", default=None)
def judge(server, problems, clues, judge_config, judge_mock_lexicon, endpoint_url,
          model_id, human_data, alpha, epsilon, seed, out_dir, cache_dir, basename):
    """Judge a file of clues with a listener agent."""
    payload = {
        "problems_path": problems,
        "clues_path": clues,
        "judge": _agent_spec(judge_config, judge_mock_lexicon, endpoint_url, model_id),
        "human_data_path": human_data,
        "rsa": {"alpha": alpha, "epsilon": epsilon},
        "seed": seed,
        "out_dir": out_dir,
        "basename": basename,
        "cache_dir": cache_dir,
    }
    body = _post(server, "/judge", payload)
    _print_report_summary(body["report"])
    _echo_files(body["files"])


@main.command("report")
@server_option
@click.option("--report", "report_path", required=True, type=click.Path(exists=True))
@click.option("--against", type=click.Path(exists=True), default=None,
              help="Second report; prints a paired bootstrap comparison.")
@click.option("--out-dir", default=None, type=click.Path())
@click.option("--formats", default="json,csv", show_default=True)
@click.option("--resamples", default=10000, show_default=True, type=int)
@seed_option
def report(server, report_path, against, out_dir, formats, resamples, seed):
    """Re-render an emitted report and/or compare two reports."""
    if out_dir:
        body = _post(server, "/reports/render", {
            "report_path": report_path,
            "out_dir": out_dir,
            "formats": [part.strip() for part in formats.split(",") if part.strip()],
        })
        _echo_files(body["files"])
    if against:
        body = _post(server, "/reports/compare", {
            "report_a": report_path,
            "report_b": against,
            "resamples": resamples,
            "seed": seed,
        })
        comparison = body["comparison"]
        click.echo(
            f"mean |err| difference {comparison['mean_diff']:.4f} "
            f"(95% CI {comparison['ci_low']:.4f}..{comparison['ci_high']:.4f}), "
            f"p={comparison['p_value']:.4f}"
        )
    if not out_dir and not against:
        payload = json.loads(Path(report_path).read_text(encoding="utf-8"))
        if "per_problem" in payload:
            _print_report_summary(payload)
        else:
            click.echo(json.dumps(payload, indent=2, sort_keys=True)[:2000])


@main.command("validate-data")
@server_option
@click.option("--kind", required=True,
              type=click.Choice(["problems", "judgments", "clues"]))
@click.option("--path", required=True, type=click.Path(exists=True))
def validate_data(server, kind, path):
    """Check a JSONL data file against its schema."""
    body = _post(server, "/data/validate", {"kind": kind, "path": path})
    if body["valid"]:
        click.echo(f"OK: {body['n_records']} records")
    else:
        for error in body["errors"]:
            line = error["line"]
            prefix = f"line {line}: " if line is not None else ""
            click.echo(f"INVALID: {prefix}{error['detail']}", err=True)
        sys.exit(1)


@main.command("serve-study")
@click.option("--task", required=True, type=click.Choice(["comprehension", "production"]))
@click.option("--problems", required=True, type=click.Path(exists=True))
@click.option("--clues", type=click.Path(exists=True), default=None,
              help="Clue per problem (required for comprehension studies).")
@click.option("--records-dir", required=True, type=click.Path())
@click.option("--judgments-per-item", default=None, type=int,
              help="Accepted guesses per item before it stops being served.")
@click.option("--clues-per-item", default=None, type=int)
@click.option("--items-per-session", default=40, show_default=True, type=int)
@click.option("--min-think-comprehension", default=10.0, show_default=True, type=float)
@click.option("--min-think-production", default=20.0, show_default=True, type=float)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Built study UI to serve under /ui.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve_study(task, problems, clues, records_dir, judgments_per_item,
                clues_per_item, items_per_session, min_think_comprehension,
                min_think_production, ui_dir, host, port):
    """Run the data-collection service."""
    import uvicorn

    from .data import PHASE1_JUDGMENTS, PRODUCTION_EVAL_JUDGMENTS
    from .service.app import ServiceSettings, create_app
    from .service.study import StudyConfig, StudyRuntime

    config = StudyConfig(
        task=task,
        problems_path=problems,
        clues_path=clues,
        records_dir=records_dir,
        judgments_per_item=judgments_per_item or PHASE1_JUDGMENTS,
        clues_per_item=clues_per_item or PRODUCTION_EVAL_JUDGMENTS,
        items_per_session=items_per_session,
        min_think_comprehension_s=min_think_comprehension,
        min_think_production_s=min_think_production,
    )
    app = create_app(ServiceSettings(study=StudyRuntime(config), ui_dir=ui_dir))
    click.echo(f"serving {task} study on http://{host}:{port} (UI at /ui)"
               if ui_dir else f"serving {task} study on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
