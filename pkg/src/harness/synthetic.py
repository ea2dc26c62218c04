"""
Synthetic Suite - 合成评测集

生成评论语料 (单店 + 多门店), schema, 脚本化 oracle 规则表以及覆盖
六类声明的声明网格. 真值用与 oracle 相同的规则暴力计算, 因此和
scripted 后端的回答一致.
"""
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import yaml
from loguru import logger

from src.claims.loader import save_claims
from src.claims.models import (
    Claim,
    ClaimStructure,
    ComparisonOp,
    NestedStructure,
    OrdinalStructure,
    Quantifier,
    QuantifierKind,
    Scope,
    SimpleStructure,
)
from src.claims.quantifiers import evaluate_structure, group_value
from src.dsl.compiler import render_program_text
from src.dsl.parser import parse_expr
from src.engine.expressions import evaluate, truthy
from src.oracle.backends import ScriptedRules, SemanticRule, TextRule

TEXT_ATTRIBUTE = "review"
GROUP_KEY = "business"


@dataclass(frozen=True)
class Topic:
    """A phenomenon planted in reviews, with the yes/no question that detects it"""
    name: str
    question: str
    phrase: str
    keywords: Tuple[str, ...] = ()
    sentences: Tuple[str, ...] = ()
    default: bool = False

    @property
    def template(self) -> str:
        return self.question.replace("the review", "the {%s}" % TEXT_ATTRIBUTE, 1)

    def rule(self) -> SemanticRule:
        return SemanticRule(
            template=self.template,
            type="bool",
            attribute=TEXT_ATTRIBUTE,
            any_keywords=list(self.keywords),
            default=self.default,
        )


SERVICE = Topic(
    "service", "Does the review complain about slow or rude service?",
    "complain about slow or rude service",
    ("rude", "slow", "ignored", "waited"),
    ("Our server was rude and dismissive.", "Service was painfully slow.",
     "We were ignored for ages.", "We waited an hour for drinks."),
)
FOOD = Topic(
    "food", "Does the review praise the food?", "praise the food",
    ("delicious", "tasty", "amazing"),
    ("The pasta was delicious.", "Tasty dumplings and fresh bread.",
     "Amazing burgers and crispy fries.", "The soup was delicious and hot."),
)
PRICE = Topic(
    "price", "Does the review say the prices are high?", "say the prices are high",
    ("expensive", "overpriced", "pricey"),
    ("Everything felt overpriced here.", "Quite expensive for small portions.",
     "Pricey, but we expected that."),
)
PARKING = Topic(
    "parking", "Does the review mention parking?", "mention parking",
    ("parking",),
    ("Parking was hard to find.", "Free parking behind the building."),
)
MUSIC = Topic(
    "music", "Does the review mention live music?", "mention live music",
    ("live music", "band"),
    ("A live band played jazz.",),
)
ENGLISH = Topic(
    "english", "Is the review written in English?", "are written in English",
    default=True,
)
DINNER = Topic(
    "dinner", "Does the review describe a dinner visit?", "describe a dinner visit",
    ("dinner",),
    ("We came for dinner.", "Dinner with my family.", "Late dinner after work."),
)

TOPICS: Tuple[Topic, ...] = (SERVICE, FOOD, PRICE, PARKING, MUSIC, ENGLISH, DINNER)

FILLER = (
    "We came on a Tuesday.",
    "I ordered the special.",
    "The place was busy.",
    "Lunch with two coworkers.",
    "Nice patio and clean tables.",
)

# planted rates per topic; music never appears
SINGLE_RATES: Dict[str, float] = {"service": 0.15, "food": 0.45, "price": 0.25, "parking": 0.02, "dinner": 0.4}
LOCATION_RATES: Dict[str, Dict[str, float]] = {
    "loc_a": {"service": 0.10, "food": 0.50, "price": 0.20, "parking": 0.04, "dinner": 0.5},
    "loc_b": {"service": 0.30, "food": 0.30, "price": 0.10, "parking": 0.10, "dinner": 0.4},
    "loc_c": {"service": 0.05, "food": 0.70, "price": 0.40, "parking": 0.00, "dinner": 0.6},
    "loc_d": {"service": 0.20, "food": 0.20, "price": 0.05, "parking": 0.02, "dinner": 0.3},
    "loc_e": {"service": 0.40, "food": 0.40, "price": 0.30, "parking": 0.08, "dinner": 0.5},
}

LOW_STARS = 'col("stars") <= 2'

SCHEMA = {
    "attributes": [
        {"name": GROUP_KEY, "type": "categorical", "description": "restaurant location"},
        {"name": "stars", "type": "int", "description": "star rating from 1 to 5"},
        {"name": TEXT_ATTRIBUTE, "type": "text", "description": "review text"},
    ]
}

SAMPLE_RESPONSE = "Service at loc_b is often slow. Most diners praise the food."


def _review(rng: random.Random, rates: Dict[str, float]) -> Tuple[str, int]:
    sentences: List[str] = []
    stars = 4
    for topic in (SERVICE, FOOD, PRICE, PARKING, DINNER):
        if rng.random() < rates.get(topic.name, 0.0):
            sentences.append(rng.choice(topic.sentences))
            stars += {"service": -2, "food": 1, "price": -1}.get(topic.name, 0)
    if not sentences or rng.random() < 0.5:
        sentences.append(rng.choice(FILLER))
    rng.shuffle(sentences)
    stars = max(1, min(5, stars + rng.choice((-1, 0, 0, 1))))
    return " ".join(sentences), stars


def generate_records(rng: random.Random, rates_by_group: Dict[str, Dict[str, float]],
                     per_group: int) -> List[Dict[str, Any]]:
    records = []
    for business, rates in rates_by_group.items():
        for _ in range(per_group):
            text, stars = _review(rng, rates)
            records.append({GROUP_KEY: business, "stars": stars, TEXT_ATTRIBUTE: text})
    rng.shuffle(records)
    return records


# ---------------------------------------------------------------- ground truth

class GroundTruth:
    """Brute-force claim truth under the scripted rule table"""

    def __init__(self, records: Sequence[Dict[str, Any]], rules: ScriptedRules):
        self.records = list(records)
        self.rules = rules

    def answer(self, template: str, record: Dict[str, Any]) -> bool:
        rule = self.rules.semantic_rule(template)
        if rule is None:
            raise KeyError(f"no rule for {template!r}")
        return bool(rule.evaluate(record))

    def in_scope(self, scope: Optional[Scope]) -> List[Dict[str, Any]]:
        rows = self.records
        if scope is not None and scope.symbolic:
            expr = parse_expr(scope.symbolic)
            rows = [r for r in rows if truthy(evaluate(expr, r))]
        if scope is not None and scope.semantic:
            rows = [r for r in rows if self.answer(scope.semantic, r)]
        return rows

    def column(self, template: str, scope: Optional[Scope] = None) -> List[bool]:
        return [self.answer(template, r) for r in self.in_scope(scope)]

    def grouped_columns(self, template: str, keys: Sequence[str],
                        scope: Optional[Scope] = None) -> Dict[Tuple[Any, ...], List[bool]]:
        """Groups induced by the in-scope rows, in key order."""
        groups: Dict[Tuple[Any, ...], List[bool]] = {}
        for record in sorted(self.in_scope(scope), key=lambda r: tuple(str(r[k]) for k in keys)):
            key = tuple(record[k] for k in keys)
            groups.setdefault(key, []).append(self.answer(template, record))
        return groups

    def label(self, claim: Claim) -> bool:
        structure = claim.structure
        if isinstance(structure, SimpleStructure):
            columns: Any = self.column(claim.formula_prompt, claim.scope)
        else:
            columns = self.grouped_columns(claim.formula_prompt, structure.group_keys, claim.scope)
        return evaluate_structure(structure, columns)


# ---------------------------------------------------------------- claim grid

def _scope_prefix(scope: Optional[Scope]) -> str:
    if scope is None:
        return ""
    if scope.symbolic:
        return "Among reviews with at most 2 stars, "
    return "Among dinner reviews, "


def _claim(text: str, structure: ClaimStructure, topic: Topic, scope: Optional[Scope] = None) -> Claim:
    return Claim(
        text=_scope_prefix(scope) + text,
        structure=structure,
        formula_prompt=topic.template,
        scope=scope,
        aggregation_prompt="What do reviewers say about these restaurants?",
    )


def _pct(p: float) -> str:
    return f"{round(p * 100):d}%"


class ClaimGrid:
    """Builds grounded and ungrounded claims from the observed data"""

    def __init__(self, truth: GroundTruth):
        self.truth = truth

    def _count(self, topic: Topic, scope: Optional[Scope]) -> int:
        return sum(self.truth.column(topic.template, scope))

    def _share(self, topic: Topic, scope: Optional[Scope]) -> float:
        column = self.truth.column(topic.template, scope)
        return sum(column) / len(column) if column else 0.0

    def simple(self) -> List[Claim]:
        dinner = Scope(semantic=DINNER.template)
        low = Scope(symbolic=LOW_STARS)
        claims = [
            _claim(f"Some reviews {PARKING.phrase}.", SimpleStructure(quantifier=Quantifier.exists()), PARKING),
            _claim(f"Some reviews {MUSIC.phrase}.", SimpleStructure(quantifier=Quantifier.exists()), MUSIC),
            _claim(f"some reviews {SERVICE.phrase}.", SimpleStructure(quantifier=Quantifier.exists()),
                   SERVICE, low),
            _claim(f"All reviews {ENGLISH.phrase}.", SimpleStructure(quantifier=Quantifier.forall()), ENGLISH),
            _claim(f"All reviews {FOOD.phrase}.", SimpleStructure(quantifier=Quantifier.forall()), FOOD),
            _claim(f"all reviews {FOOD.phrase}.", SimpleStructure(quantifier=Quantifier.forall()), FOOD, low),
        ]
        for topic, scope in ((SERVICE, None), (PRICE, dinner)):
            count = self._count(topic, scope)
            low_k = max(1, round(count * 0.6))
            high_k = count + max(2, round(count * 0.4))
            lead = "at" if scope is not None else "At"
            for k in (low_k, high_k):
                claims.append(_claim(f"{lead} least {k} reviews {topic.phrase}.",
                                     SimpleStructure(quantifier=Quantifier.cardinal(ComparisonOp.GE, k)),
                                     topic, scope))
            claims.append(_claim(f"{lead} most {max(0, count - 3)} reviews {topic.phrase}.",
                                 SimpleStructure(quantifier=Quantifier.cardinal(ComparisonOp.LE, max(0, count - 3))),
                                 topic, scope))
        for topic, scope in ((FOOD, None), (PRICE, dinner)):
            share = self._share(topic, scope)
            lead = "more" if scope is not None else "More"
            for p in (max(0.05, share - 0.12), min(0.95, share + 0.12)):
                p = round(p, 2)
                claims.append(_claim(f"{lead} than {_pct(p)} of reviews {topic.phrase}.",
                                     SimpleStructure(quantifier=Quantifier.proportional(ComparisonOp.GT, p)),
                                     topic, scope))
        return claims

    def grouped(self, keys: Sequence[str]) -> List[Claim]:
        keys = list(keys)
        claims: List[Claim] = []
        for topic in (FOOD, SERVICE):
            columns = self.truth.grouped_columns(topic.template, keys)
            shares = {k: group_value("proportion", col) for k, col in columns.items()}
            ranked = sorted(shares, key=lambda k: (-(shares[k] or 0.0), str(k)))
            for target in (ranked[0], ranked[-1]):
                structure = OrdinalStructure(group_keys=keys, aggregate="proportion", target_group=list(target))
                claims.append(_claim(f"{target[0]} has the highest share of reviews that {topic.phrase}.",
                                     structure, topic))
        counts_columns = self.truth.grouped_columns(PARKING.template, keys)
        fewest = min(counts_columns, key=lambda k: (sum(counts_columns[k]), str(k)))
        most = max(counts_columns, key=lambda k: (sum(counts_columns[k]), str(k)))
        for target in (fewest, most):
            structure = OrdinalStructure(group_keys=keys, aggregate="count", target_group=list(target),
                                         descending=False)
            claims.append(_claim(f"{target[0]} has the fewest reviews that {PARKING.phrase}.", structure, PARKING))

        n_groups = len(LOCATION_RATES)
        for m in (2, n_groups):
            structure = NestedStructure(
                outer=Quantifier.cardinal(ComparisonOp.GE, m), group_keys=keys,
                inner=Quantifier.cardinal(ComparisonOp.GE, 8),
            )
            claims.append(_claim(f"At least {m} locations have at least 8 reviews that {SERVICE.phrase}.",
                                 structure, SERVICE))
        claims.append(_claim(
            f"Every location has some reviews that {PARKING.phrase}.",
            NestedStructure(outer=Quantifier.forall(), group_keys=keys, inner=Quantifier.exists()), PARKING))
        claims.append(_claim(
            f"Every location has some reviews that {FOOD.phrase}.",
            NestedStructure(outer=Quantifier.forall(), group_keys=keys, inner=Quantifier.exists()), FOOD))
        for p in (0.5, 0.9):
            claims.append(_claim(
                f"Some location has more than {_pct(p)} of reviews that {FOOD.phrase}.",
                NestedStructure(outer=Quantifier.exists(), group_keys=keys,
                                inner=Quantifier.proportional(ComparisonOp.GT, p)), FOOD))
        return claims


def claim_type(claim: Claim) -> str:
    """existential / universal / cardinal / proportional / ordinal / nested"""
    structure = claim.structure
    if isinstance(structure, OrdinalStructure):
        return "ordinal"
    if isinstance(structure, NestedStructure):
        return "nested"
    if isinstance(structure, SimpleStructure):
        return {
            QuantifierKind.EXISTS: "existential",
            QuantifierKind.FORALL: "universal",
            QuantifierKind.CARDINAL: "cardinal",
            QuantifierKind.PROPORTIONAL: "proportional",
        }[structure.quantifier.kind]
    return "unknown"


# ---------------------------------------------------------------- files

def build_rules(claims: Sequence[Claim]) -> ScriptedRules:
    """Rule table: one rule per topic plus scripted compilation and decomposition."""
    compile_rule = TextRule(key="claim", responses={c.text: render_program_text(c) for c in claims})
    split_rule = TextRule(key="sentence", responses={
        "Service at loc_b is often slow.": ["Service at loc_b is often slow."],
        "Most diners praise the food.": ["Most diners praise the food."],
    })
    resolve_rule = TextRule(key="claim", responses={
        "Service at loc_b is often slow.": "Reviews of loc_b often complain about slow service.",
        "Most diners praise the food.": "Most reviews praise the food.",
    })
    return ScriptedRules(
        semantic=[topic.rule() for topic in TOPICS],
        text={"compile": compile_rule, "decompose_split": split_rule, "decompose_resolve": resolve_rule},
    )


def _write_dataset(directory: Path, records: List[Dict[str, Any]], claims: List[Claim],
                   rules: ScriptedRules) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "records.jsonl", "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
    with open(directory / "schema.yaml", "w", encoding="utf-8") as f:
        yaml.safe_dump(SCHEMA, f, sort_keys=False)
    with open(directory / "rules.yaml", "w", encoding="utf-8") as f:
        yaml.safe_dump(rules.model_dump(mode="json"), f, allow_unicode=True, sort_keys=False)
    save_claims(claims, directory / "claims.yaml")
    (directory / "response.txt").write_text(SAMPLE_RESPONSE + "\n", encoding="utf-8")
    return directory


def _labelled(claims: List[Claim], truth: GroundTruth, prefix: str) -> List[Claim]:
    for index, claim in enumerate(claims, start=1):
        claim.id = f"{prefix}-{index:03d}"
        claim.grounded = truth.label(claim)
    return claims


def generate_dataset(name: str, rates_by_group: Dict[str, Dict[str, float]], per_group: int,
                     seed: int, grouped: bool) -> Tuple[List[Dict[str, Any]], List[Claim], ScriptedRules]:
    rng = random.Random(f"{name}:{seed}")
    records = generate_records(rng, rates_by_group, per_group)
    base_rules = ScriptedRules(semantic=[topic.rule() for topic in TOPICS])
    truth = GroundTruth(records, base_rules)
    grid = ClaimGrid(truth)
    claims = grid.simple()
    if grouped:
        claims += grid.grouped([GROUP_KEY])
    claims = _labelled(claims, truth, name)
    return records, claims, build_rules(claims)


def generate_suite(
    out_dir: Union[str, Path],
    seed: int = 0,
    single_size: int = 150,
    per_location: int = 50,
) -> List[Path]:
    """Write the single-restaurant and multi-location datasets; returns their directories."""
    out_dir = Path(out_dir)
    written = []
    plans = (
        ("single", {"bistro": SINGLE_RATES}, single_size, False),
        ("multi", LOCATION_RATES, per_location, True),
    )
    for name, rates, size, grouped in plans:
        records, claims, rules = generate_dataset(name, rates, size, seed, grouped)
        written.append(_write_dataset(out_dir / name, records, claims, rules))
        grounded = sum(1 for c in claims if c.grounded)
        logger.bind(dataset=name).info(
            f"generated {len(records)} reviews, {len(claims)} claims ({grounded} grounded)"
        )
    return written
