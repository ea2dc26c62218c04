"""Typed parsing of oracle answers."""
import json
import re
from typing import Any, List, Sequence

from src.common.errors import OracleTypeError
from .models import FusedPart, ReturnKind, ReturnType

_FENCE = re.compile(r"^```[a-zA-Z0-9_-]*\s*\n?(.*?)\n?```\s*$", re.DOTALL)
_INT = re.compile(r"[-+]?\d+")
_REAL = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")
_TRUE = {"true", "yes", "1"}
_FALSE = {"false", "no", "0"}


def strip_fences(raw: str) -> str:
    """Remove a surrounding markdown code fence."""
    text = raw.strip()
    match = _FENCE.match(text)
    return match.group(1).strip() if match else text


def parse_typed(raw: Any, expected: ReturnType) -> Any:
    """Parse a raw answer into the expected type; raises OracleTypeError."""
    kind = expected.kind
    if kind == ReturnKind.TEXT:
        return strip_fences(str(raw))
    if kind == ReturnKind.JSON:
        try:
            return json.loads(strip_fences(str(raw)))
        except json.JSONDecodeError as e:
            raise OracleTypeError(f"expected JSON: {e.msg}", raw=str(raw))

    if isinstance(raw, bool) and kind == ReturnKind.BOOL:
        return raw
    if isinstance(raw, (int, float)) and not isinstance(raw, bool) and kind in (ReturnKind.INT, ReturnKind.REAL):
        return int(raw) if kind == ReturnKind.INT else float(raw)

    text = str(raw).strip().strip("\"'`").strip()
    token = text.lower().rstrip(".!")
    if kind == ReturnKind.BOOL:
        if token in _TRUE:
            return True
        if token in _FALSE:
            return False
        raise OracleTypeError(f"expected true/false, got {text!r}", raw=str(raw))
    if kind == ReturnKind.INT:
        match = _INT.search(text)
        if match is None:
            raise OracleTypeError(f"expected an integer, got {text!r}", raw=str(raw))
        return int(match.group(0))
    if kind == ReturnKind.REAL:
        match = _REAL.search(text)
        if match is None:
            raise OracleTypeError(f"expected a number, got {text!r}", raw=str(raw))
        return float(match.group(0))
    # ENUM
    for label in expected.labels:
        if token == label.lower():
            return label
    mentioned = [l for l in expected.labels if re.search(rf"(?<!\w){re.escape(l.lower())}(?!\w)", token)]
    if len(mentioned) == 1:
        return mentioned[0]
    raise OracleTypeError(f"expected one of {list(expected.labels)}, got {text!r}", raw=str(raw))


def parse_fused(raw: str, parts: Sequence[FusedPart]) -> List[Any]:
    """Parse a keyed JSON answer ("q1".."qn") into one typed value per part."""
    try:
        data = json.loads(strip_fences(raw))
    except json.JSONDecodeError as e:
        raise OracleTypeError(f"fused answer is not JSON: {e.msg}", raw=raw)
    if not isinstance(data, dict):
        raise OracleTypeError("fused answer is not a JSON object", raw=raw)
    values = []
    for i, part in enumerate(parts, start=1):
        key = f"q{i}"
        if key not in data:
            raise OracleTypeError(f"fused answer lacks {key}", raw=raw)
        values.append(parse_typed(data[key], part.expected))
    return values
