"""
溯源模块

提供:
- 溯源令牌与按声明类型的最小解释组装
- 暴力对偶不定元半环多项式 (测试用真值)
- 最小性检查
"""

from .models import (
    GroupCapture,
    Monomial,
    OrdinalCapture,
    Polarity,
    ProvPolynomial,
    ProvToken,
    StreamCapture,
    literals_of,
)
from .assembler import assemble, explain_stream, group_score, quantifier_aggregate, render_tokens
from .semiring import MAX_RELATION_SIZE, brute_polynomial, quantified
from .minimality import check_minimal

__all__ = [
    "GroupCapture",
    "Monomial",
    "OrdinalCapture",
    "Polarity",
    "ProvPolynomial",
    "ProvToken",
    "StreamCapture",
    "literals_of",
    "assemble",
    "explain_stream",
    "group_score",
    "quantifier_aggregate",
    "render_tokens",
    "MAX_RELATION_SIZE",
    "brute_polynomial",
    "quantified",
    "check_minimal",
]
