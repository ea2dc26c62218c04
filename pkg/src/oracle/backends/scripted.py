"""
Scripted Backend - 脚本化后端

由 YAML 规则表驱动的确定性 oracle: 答案只取决于 (模板, 元组属性值).
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, Field

from src.common.errors import UnknownTemplateError
from src.relevance.keywords import keyword_hits
from ..models import BackendReply, OracleRequest, ReturnKind, ReturnType, estimate_tokens
from .base import OracleBackend


class SemanticRule(BaseModel):
    """Answer rule for one tuple-level prompt template"""
    template: str
    type: str = "bool"
    attribute: Optional[str] = None
    any_keywords: List[str] = Field(default_factory=list)
    none_keywords: List[str] = Field(default_factory=list)
    labels: List[str] = Field(default_factory=list)
    labels_by_keywords: Dict[str, List[str]] = Field(default_factory=dict)
    lookup: Dict[str, Any] = Field(default_factory=dict)
    default: Any = None
    query: Optional[str] = None

    def evaluate(self, variables: Dict[str, Any]) -> Any:
        value = variables.get(self.attribute) if self.attribute else None
        text = "" if value is None else str(value)
        if self.lookup:
            return self.lookup.get(text, self.default)
        if self.type == "bool":
            hit = keyword_hits(text, self.any_keywords) > 0 if self.any_keywords else bool(self.default)
            if hit and self.none_keywords and keyword_hits(text, self.none_keywords) > 0:
                hit = False
            return hit
        if self.type == "enum":
            for label, words in self.labels_by_keywords.items():
                if keyword_hits(text, words) > 0:
                    return label
            return self.default if self.default is not None else (self.labels[0] if self.labels else "")
        if self.type in ("int", "real"):
            return keyword_hits(text, self.any_keywords) if self.any_keywords else (self.default or 0)
        return self.default


class TextRule(BaseModel):
    """Free-text answers keyed by one template variable"""
    key: str
    responses: Dict[str, Any] = Field(default_factory=dict)
    default: Optional[Any] = None


class ScriptedRules(BaseModel):
    semantic: List[SemanticRule] = Field(default_factory=list)
    text: Dict[str, TextRule] = Field(default_factory=dict)

    def semantic_rule(self, template: str) -> Optional[SemanticRule]:
        for rule in self.semantic:
            if rule.template == template:
                return rule
        return None

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ScriptedRules":
        with open(path, "r", encoding="utf-8") as f:
            return cls.model_validate(yaml.safe_load(f) or {})

    def merged(self, other: "ScriptedRules") -> "ScriptedRules":
        text = dict(self.text)
        for name, rule in other.text.items():
            if name in text:
                responses = {**text[name].responses, **rule.responses}
                text[name] = TextRule(key=rule.key, responses=responses,
                                      default=rule.default if rule.default is not None else text[name].default)
            else:
                text[name] = rule
        return ScriptedRules(semantic=self.semantic + other.semantic, text=text)


def format_answer(value: Any, expected: ReturnType) -> str:
    if expected.kind == ReturnKind.BOOL:
        return "true" if value else "false"
    if isinstance(value, (dict, list)):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


class ScriptedBackend(OracleBackend):
    """Deterministic backend for tests and offline benchmarks."""

    name = "scripted"

    def __init__(self, rules: ScriptedRules):
        self.rules = rules

    async def complete(self, request: OracleRequest) -> BackendReply:
        text = self.answer(request)
        return BackendReply(
            text=text,
            input_tokens=estimate_tokens(request.prompt),
            output_tokens=estimate_tokens(text),
        )

    def answer(self, request: OracleRequest) -> str:
        if request.is_fused:
            answers = {}
            for i, part in enumerate(request.parts, start=1):
                rule = self._semantic(part.template_id)
                answers[f"q{i}"] = _json_value(rule.evaluate(request.variables), part.expected)
            return json.dumps(answers, ensure_ascii=False)

        rule = self.rules.semantic_rule(request.template_id)
        if rule is not None:
            return format_answer(rule.evaluate(request.variables), request.expected)

        text_rule = self.rules.text.get(request.template_id)
        if text_rule is not None:
            key_value = str(request.variables.get(text_rule.key, ""))
            if key_value in text_rule.responses:
                return format_answer(text_rule.responses[key_value], request.expected)
            if text_rule.default is not None:
                return format_answer(text_rule.default, request.expected)

        if request.template_id == "search_spec":
            derived = self._derive_search_spec(request.variables)
            if derived is not None:
                return json.dumps(derived, ensure_ascii=False)

        raise UnknownTemplateError(f"no scripted rule for template {request.template_id!r}")

    def _semantic(self, template: str) -> SemanticRule:
        rule = self.rules.semantic_rule(template)
        if rule is None:
            raise UnknownTemplateError(f"no scripted rule for template {template!r}")
        return rule

    def _derive_search_spec(self, variables: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        """Search hints derived from the keywords of the traced prompt's rule."""
        rule = self.rules.semantic_rule(str(variables.get("primary_prompt", "")))
        if rule is None:
            return None
        include = list(rule.any_keywords)
        for words in rule.labels_by_keywords.values():
            include.extend(words)
        query = rule.query or " ".join(include[:3])
        return {"query": query, "include_keywords": include, "exclude_keywords": list(rule.none_keywords)}


def _json_value(value: Any, expected: ReturnType) -> Any:
    if expected.kind == ReturnKind.BOOL:
        return bool(value)
    return value
