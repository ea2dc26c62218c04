#!/usr/bin/env python3
"""
声明核查引擎 - 命令行界面（CLI）
"""

import functools
import json
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from src.claims.decomposer import decompose as decompose_response
from src.claims.models import Claim
from src.common.config_loader import ConfigLoader
from src.common.errors import VerificationError
from src.common.log import setup_logging
from src.dsl.compiler import compile_claim
from src.dsl.parser import parse
from src.dsl.printer import print_plan
from src.engine.config import FLAG_NAMES, EngineConfig
from src.engine.executor import execute
from src.harness.bench import run_ablation, run_bench
from src.harness.pipeline import Verifier, load_dataset, load_dataset_relation
from src.harness.report import render_ablation, render_claims, render_summary, write_report
from src.harness.synthetic import generate_suite
from src.optimizer.optimizer import explain as explain_plan
from src.oracle.cache import PromptCache
from src.oracle.factory import build_oracle, get_backend
from src.oracle.oracle import SemanticOracle
from src.provenance.assembler import render_tokens
from src.provenance.models import ProvToken
from src.relation.embedder import get_embedder
from src.relation.ingest import ingest_jsonl, load_schema
from src.relation.storage import save_relation

EXIT_ERROR = 2


def handle_errors(func):
    """VerificationError -> JSON object on stderr, exit status 2."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except VerificationError as e:
            click.echo(json.dumps(e.to_dict(), ensure_ascii=False, default=str), err=True)
            sys.exit(EXIT_ERROR)

    return wrapper


def _loader() -> ConfigLoader:
    return click.get_current_context().obj["loader"]


def _files() -> dict:
    return _loader().load_settings().get("relation", {})


def _oracle(data_dir: Optional[Path], offline: bool, caching: bool = True,
            cache_dir: Optional[str] = None, max_concurrency: int = 32) -> SemanticOracle:
    loader = _loader()
    settings = loader.load_settings().get("oracle", {})
    rules = data_dir / _files().get("rules_file", "rules.yaml") if data_dir is not None else None
    backend = get_backend(settings, "scripted" if offline else None, rules, loader)
    return build_oracle(backend, cache_dir=cache_dir, caching=caching,
                        max_concurrency=max_concurrency, loader=loader)


def _engine_config(disable: Tuple[str, ...], seed: Optional[int] = None,
                   error_policy: Optional[str] = None) -> EngineConfig:
    cfg = EngineConfig.from_config(_loader(), shuffle_seed=seed, error_policy=error_policy)
    if disable:
        cfg = cfg.with_flags(cfg.flags.without(*disable))
    return cfg


def _find_claim(data_dir: Path, text: Optional[str], claim_id: Optional[str]) -> Claim:
    """A claim from the dataset's claims file (by id or text), else a bare claim."""
    claims = load_dataset(data_dir, _loader()).claims
    for claim in claims:
        if (claim_id and claim.id == claim_id) or (text and claim.text == text):
            return claim
    if claim_id:
        raise VerificationError(f"claim {claim_id!r} not found in {data_dir}")
    return Claim(text=text or "")


data_option = click.option("--data", "data_dir", required=True,
                           type=click.Path(exists=True, file_okay=False, path_type=Path),
                           help="数据集目录 (records.jsonl, schema.yaml, rules.yaml, claims.yaml)")
offline_option = click.option("--offline", is_flag=True, help="使用数据集目录中的脚本化 oracle 规则")
cache_option = click.option("--cache-dir", default=None, help="prompt 缓存目录")


@click.group()
@click.option("--config-dir", default=None, help="配置目录 (默认为仓库 config/)")
@click.option("--log-level", default=None, help="日志级别")
@click.pass_context
def cli(ctx, config_dir: Optional[str], log_level: Optional[str]):
    """基于语义查询的声明核查"""
    loader = ConfigLoader(config_dir)
    log_settings = loader.load_settings().get("logging", {})
    setup_logging(log_level or log_settings.get("level", "INFO"), bool(log_settings.get("serialize", False)))
    ctx.obj = {"loader": loader}


@cli.command()
@click.argument("out_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--seed", type=int, default=0)
@click.option("--single-size", type=int, default=150)
@click.option("--per-location", type=int, default=50)
@handle_errors
def generate(out_dir: Path, seed: int, single_size: int, per_location: int):
    """生成合成评测集"""
    for directory in generate_suite(out_dir, seed, single_size, per_location):
        click.echo(f"📦 {directory}")


@cli.command()
@data_option
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@handle_errors
def ingest(data_dir: Path, out: Optional[Path]):
    """导入记录, 分句并计算嵌入"""
    files = _files()
    dimension = _loader().load_settings().get("embedding", {}).get("dimension", 256)
    schema = load_schema(data_dir / files.get("schema_file", "schema.yaml"))
    relation = ingest_jsonl(data_dir / files.get("records_file", "records.jsonl"), schema,
                            embedder=get_embedder(dimension=dimension))
    path = save_relation(relation, out or data_dir / files.get("materialized_file", "relation.json"))
    click.echo(f"✅ {len(relation)} tuples -> {path}")


@cli.command(name="compile")
@data_option
@click.option("--claim", "text", default=None, help="声明文本")
@click.option("--claim-id", default=None, help="claims.yaml 中的声明 id")
@offline_option
@cache_option
@handle_errors
def compile_command(data_dir: Path, text: Optional[str], claim_id: Optional[str], offline: bool,
                    cache_dir: Optional[str]):
    """声明 -> 查询程序"""
    if not text and not claim_id:
        raise click.UsageError("--claim or --claim-id is required")
    claim = _find_claim(data_dir, text, claim_id)
    relation = load_dataset_relation(data_dir, _loader())
    oracle = _oracle(data_dir, offline, cache_dir=cache_dir)
    try:
        plan = compile_claim(claim, relation.schema, _loader().load_dsl_docs(), oracle)
    finally:
        oracle.close()
    click.echo(print_plan(plan))


@cli.command()
@data_option
@click.option("--claim", "text", default=None, help="声明文本")
@click.option("--claim-id", default=None, help="claims.yaml 中的声明 id")
@click.option("--program", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="查询程序文件")
@click.option("--disable", multiple=True, type=click.Choice(FLAG_NAMES), help="关闭某项优化")
@click.option("--seed", type=int, default=None)
@click.option("--error-policy", type=click.Choice(["abort", "skip"]), default=None)
@click.option("--show-plan", is_flag=True, help="打印物理计划")
@click.option("--json", "as_json", is_flag=True, help="输出 JSON")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="保存 verdict 文件")
@offline_option
@cache_option
@handle_errors
def verify(data_dir: Path, text: Optional[str], claim_id: Optional[str], program: Optional[Path],
           disable: Tuple[str, ...], seed: Optional[int], error_policy: Optional[str], show_plan: bool,
           as_json: bool, out: Optional[Path], offline: bool, cache_dir: Optional[str]):
    """核查声明, 输出结论与引用元组"""
    if not (text or claim_id or program):
        raise click.UsageError("one of --claim, --claim-id or --program is required")
    loader = _loader()
    cfg = _engine_config(disable, seed, error_policy)
    relation = load_dataset_relation(data_dir, loader)
    oracle = _oracle(data_dir, offline, caching=cfg.flags.caching, cache_dir=cache_dir,
                     max_concurrency=cfg.batch_size)
    try:
        verifier = Verifier(relation, oracle, cfg, loader)
        if program is not None:
            plan = parse(program.read_text(encoding="utf-8"), relation.schema)
            label = str(program)
        else:
            claim = _find_claim(data_dir, text, claim_id)
            plan = verifier.plan_for(claim)
            label = claim.text
        physical = verifier.physical(plan)
        verdict = execute(physical, relation, oracle, cfg, verifier.rates)
    finally:
        oracle.close()

    citations = render_tokens(verdict.tokens, verdict.formulas, relation, physical.text_attribute)
    document = {
        "claim": label,
        "text_attribute": physical.text_attribute,
        "verdict": verdict.to_dict(),
        "citations": citations,
    }
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(document, ensure_ascii=False, indent=2), encoding="utf-8")
    if as_json:
        click.echo(json.dumps(document, ensure_ascii=False, indent=2))
        return

    if show_plan:
        click.echo(explain_plan(physical))
        click.echo("")
    mark = "✅ 成立 (grounded)" if verdict.value else "❌ 不成立 (ungrounded)"
    click.echo(f"{mark}: {label}")
    stats = verdict.stats
    click.echo(f"   resolution: {verdict.resolution}")
    click.echo(f"   oracle calls: {stats.oracle_calls} (cache hits {stats.cache_hits})"
               f" | cost ${stats.cost_usd:.4f} | latency {stats.latency_s:.2f}s")
    for note in verdict.notes:
        click.echo(f"   ⚠️ {note}")
    _echo_citations(citations)


def _echo_citations(citations: List[dict]) -> None:
    if not citations:
        click.echo("   (no cited tuples)")
        return
    click.echo(f"📎 引用元组 ({len(citations)}):")
    for c in citations:
        line = f"   #{c['row_id']} [{c['polarity']}] {c['formula']}"
        if c.get("text"):
            line += f"\n      {c['text']}"
        click.echo(line)


@cli.command()
@click.argument("verdict_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@data_option
@handle_errors
def explain(verdict_file: Path, data_dir: Path):
    """展示 verdict 文件引用的元组"""
    try:
        document = json.loads(verdict_file.read_text(encoding="utf-8"))
        verdict = document["verdict"]
        tokens = [ProvToken.model_validate(t) for t in verdict["tokens"]]
    except (json.JSONDecodeError, KeyError, ValueError) as e:
        raise VerificationError(f"invalid verdict file {verdict_file}: {e}")
    relation = load_dataset_relation(data_dir, _loader())
    mark = "✅ 成立" if verdict.get("value") else "❌ 不成立"
    click.echo(f"{mark}: {document.get('claim', '')}")
    click.echo(f"   resolution: {verdict.get('resolution', '')}")
    _echo_citations(render_tokens(tokens, verdict.get("formulas", {}), relation,
                                  document.get("text_attribute")))


@cli.command()
@click.option("--data", "data_dirs", multiple=True, required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--trials", type=int, default=1)
@click.option("--seed", type=int, default=None)
@click.option("--ablate", multiple=True, type=click.Choice(FLAG_NAMES + ("all",)),
              help="逐一关闭的优化 (all = 全部关闭)")
@click.option("--backend", type=click.Choice(["scripted", "replay", "remote"]), default=None)
@click.option("--cache-dir", default=None, help="共享缓存目录 (replay 读取此处)")
@click.option("--claims-table", is_flag=True, help="打印逐条声明结果")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@handle_errors
def bench(data_dirs: Tuple[Path, ...], trials: int, seed: Optional[int], ablate: Tuple[str, ...],
          backend: Optional[str], cache_dir: Optional[str], claims_table: bool, out: Optional[Path]):
    """运行基准 (或消融)"""
    loader = _loader()
    datasets = [load_dataset(d, loader) for d in data_dirs]
    cfg = _engine_config((), seed)
    if ablate:
        report = run_ablation(datasets, ablate, cfg, trials, backend=backend, loader=loader)
        click.echo(render_ablation(report))
    else:
        report = run_bench(datasets, cfg, trials, cache_root=cache_dir, fresh_cache=cache_dir is None,
                           backend=backend, loader=loader)
        click.echo(render_summary(report))
        if claims_table:
            click.echo("")
            click.echo(render_claims(report))
    if out is not None:
        click.echo(f"📄 {write_report(report, out)}")


@cli.group()
def cache():
    """prompt 缓存管理"""


@cache.command()
@cache_option
def stats(cache_dir: Optional[str]):
    """缓存条目统计"""
    settings = _loader().load_settings().get("cache", {})
    info = PromptCache(cache_dir or settings.get("dir")).stats()
    click.echo(json.dumps(info, ensure_ascii=False, indent=2, default=str))


@cache.command()
@cache_option
def clear(cache_dir: Optional[str]):
    """清空缓存"""
    settings = _loader().load_settings().get("cache", {})
    removed = PromptCache(cache_dir or settings.get("dir")).clear()
    click.echo(f"🧹 removed {removed} entries")


@cli.command()
@data_option
@click.option("--response", default=None, help="聚合回答文本")
@click.option("--response-file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@offline_option
@cache_option
@handle_errors
def decompose(data_dir: Path, response: Optional[str], response_file: Optional[Path], offline: bool,
              cache_dir: Optional[str]):
    """把聚合回答拆分为独立声明"""
    if response_file is not None:
        response = response_file.read_text(encoding="utf-8")
    if not response:
        raise click.UsageError("--response or --response-file is required")
    oracle = _oracle(data_dir, offline, cache_dir=cache_dir)
    try:
        claims = decompose_response(response, oracle)
    finally:
        oracle.close()
    for i, claim in enumerate(claims, start=1):
        click.echo(f"{i}. {claim}")


if __name__ == "__main__":
    cli()
