"""
Oracle 模块

提供:
- 请求/响应模型与计费账本
- 追加写入的提示词缓存
- 脚本化 / 回放 / 远程后端
- SemanticOracle 批量并发调用
"""

from .models import (
    BackendReply,
    CacheKey,
    CostLedger,
    FusedPart,
    ModelUsage,
    OracleRequest,
    OracleResponse,
    Rate,
    RateTable,
    ReturnKind,
    ReturnType,
    estimate_tokens,
    load_rate_table,
)
from .cache import PromptCache
from .parsing import parse_fused, parse_typed, strip_fences
from .oracle import SemanticOracle, render_template, template_placeholders
from .backends import (
    OracleBackend,
    RemoteBackend,
    ReplayBackend,
    ScriptedBackend,
    ScriptedRules,
    SemanticRule,
    TextRule,
)
from .factory import build_oracle, get_backend

__all__ = [
    "BackendReply",
    "CacheKey",
    "CostLedger",
    "FusedPart",
    "ModelUsage",
    "OracleRequest",
    "OracleResponse",
    "Rate",
    "RateTable",
    "ReturnKind",
    "ReturnType",
    "estimate_tokens",
    "load_rate_table",
    "PromptCache",
    "parse_fused",
    "parse_typed",
    "strip_fences",
    "SemanticOracle",
    "render_template",
    "template_placeholders",
    "OracleBackend",
    "RemoteBackend",
    "ReplayBackend",
    "ScriptedBackend",
    "ScriptedRules",
    "SemanticRule",
    "TextRule",
    "build_oracle",
    "get_backend",
]
