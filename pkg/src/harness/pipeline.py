"""
Verification pipeline - 声明核查流水线

声明 -> (编译 | 解析已有程序) -> 优化 -> 执行 -> Verdict
"""
from pathlib import Path
from typing import Optional, Union

from loguru import logger

from src.claims.loader import load_claims
from src.claims.models import Claim
from src.claims.quantifiers import VagueQuantifierHints
from src.common.config_loader import ConfigLoader, get_config_loader
from src.dsl.compiler import compile_claim
from src.dsl.models import PlanNode
from src.dsl.parser import parse
from src.engine.config import EngineConfig
from src.engine.executor import execute
from src.engine.models import Verdict
from src.optimizer.models import PhysicalPlan
from src.optimizer.optimizer import Optimizer
from src.oracle.models import RateTable, load_rate_table
from src.oracle.oracle import SemanticOracle
from src.relation.embedder import get_embedder
from src.relation.ingest import ingest_jsonl, load_schema
from src.relation.models import Relation
from src.relation.storage import load_relation
from .models import Dataset


def _relation_settings(loader: ConfigLoader) -> dict:
    return loader.load_settings().get("relation", {})


def load_dataset_relation(directory: Union[str, Path], loader: Optional[ConfigLoader] = None) -> Relation:
    """The materialized relation when present, otherwise a fresh ingest of the records."""
    loader = loader or get_config_loader()
    directory = Path(directory)
    files = _relation_settings(loader)
    materialized = directory / files.get("materialized_file", "relation.json")
    if materialized.exists():
        return load_relation(materialized)
    schema = load_schema(directory / files.get("schema_file", "schema.yaml"))
    dimension = loader.load_settings().get("embedding", {}).get("dimension", 256)
    return ingest_jsonl(directory / files.get("records_file", "records.jsonl"), schema,
                        embedder=get_embedder(dimension=dimension))


def load_dataset(directory: Union[str, Path], loader: Optional[ConfigLoader] = None) -> Dataset:
    loader = loader or get_config_loader()
    directory = Path(directory)
    files = _relation_settings(loader)
    claims_path = directory / "claims.yaml"
    rules_path = directory / files.get("rules_file", "rules.yaml")
    return Dataset(
        name=directory.name,
        directory=directory,
        relation=load_dataset_relation(directory, loader),
        claims=load_claims(claims_path) if claims_path.exists() else [],
        rules_path=rules_path if rules_path.exists() else None,
    )


class Verifier:
    """Verifies claims against one relation with one oracle"""

    def __init__(
        self,
        relation: Relation,
        oracle: SemanticOracle,
        cfg: Optional[EngineConfig] = None,
        loader: Optional[ConfigLoader] = None,
        rates: Optional[RateTable] = None,
    ):
        loader = loader or get_config_loader()
        self.relation = relation
        self.oracle = oracle
        self.cfg = cfg or EngineConfig.from_config(loader)
        self.api_docs = loader.load_dsl_docs()
        self.hints = VagueQuantifierHints(loader)
        self.rates = rates or load_rate_table(loader)
        embedder = get_embedder(relation.embedder_name, relation.dimension)
        self.optimizer = Optimizer(self.cfg, relation.schema, oracle, embedder)

    def plan_for(self, claim: Claim) -> PlanNode:
        """Stored program when the claim carries one, otherwise compiled by the oracle."""
        if claim.program:
            return parse(claim.program, self.relation.schema)
        return compile_claim(claim, self.relation.schema, self.api_docs, self.oracle, hints=self.hints)

    def physical(self, plan: PlanNode) -> PhysicalPlan:
        return self.optimizer.optimize(plan)

    def run(self, plan: PlanNode) -> Verdict:
        return execute(self.physical(plan), self.relation, self.oracle, self.cfg, self.rates)

    def verify(self, claim: Claim) -> Verdict:
        log = logger.bind(claim=claim.id or claim.text[:40])
        verdict = self.run(self.plan_for(claim))
        log.debug(f"{verdict.value} ({verdict.resolution})")
        return verdict

    def verify_program(self, program: str) -> Verdict:
        return self.run(parse(program, self.relation.schema))
