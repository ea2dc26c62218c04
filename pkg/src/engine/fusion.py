"""
Operator fusion - 融合语义算子

相邻的语义 filter/map 打包成一次 oracle 调用, 答案为以 q1..qn 为键的
JSON 对象. 任一 filter 为假则丢弃该元组. 缺键或类型错误的回答由 oracle
重试一次, 仍失败则交给逐元组的错误策略.
"""
from typing import Any, Dict, List, Optional, Sequence, Union

from src.common.errors import OracleError
from src.oracle.models import FusedPart
from src.optimizer.models import FusedPartSpec

FusedOutcome = Union[Optional[Dict[str, Any]], OracleError]


def fused_parts(parts: Sequence[FusedPartSpec]) -> List[FusedPart]:
    return [FusedPart(template_id=p.expr.template, expected=p.expr.return_type) for p in parts]


def interpret_fused(parts: Sequence[FusedPartSpec], answers: Sequence[Any]) -> Optional[Dict[str, Any]]:
    """Map outputs of one tuple, or None when a filter answered false."""
    outputs: Dict[str, Any] = {}
    for part, answer in zip(parts, answers):
        if part.kind == "filter":
            if not answer:
                return None
        else:
            outputs[part.out_name] = answer
    return outputs


def fused_semantic_eval(
    parts: Sequence[FusedPartSpec],
    variables: Sequence[Dict[str, Any]],
    oracle,
    return_exceptions: bool = False,
) -> List[FusedOutcome]:
    """One oracle call per tuple carrying every prompt of a fused operator.

    Args:
        parts: fused filter/map prompts, pairwise independent
        variables: template variables of each tuple
        oracle: SemanticOracle
        return_exceptions: hand back OracleError per tuple instead of raising

    Returns:
        Per tuple: map outputs, None when a filter dropped it, or the error
    """
    requests = fused_parts(parts)
    results = oracle.evaluate_batch_sync([oracle.fused_request(requests, v) for v in variables],
                                         return_exceptions=return_exceptions)
    return [r if isinstance(r, OracleError) else interpret_fused(parts, r.value) for r in results]
