"""Claims file loading and saving (YAML list of claim records)."""
from pathlib import Path
from typing import List, Union

import yaml
from pydantic import ValidationError

from src.common.errors import VerificationError
from .models import Claim


def load_claims(path: Union[str, Path]) -> List[Claim]:
    path = Path(path)
    if not path.exists():
        raise VerificationError(f"claims file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or []
    records = data.get("claims", []) if isinstance(data, dict) else data
    claims = []
    for index, record in enumerate(records, start=1):
        try:
            claim = Claim.model_validate(record)
        except ValidationError as e:
            raise VerificationError(f"invalid claim #{index} in {path}: {e}")
        if not claim.id:
            claim.id = f"claim-{index:03d}"
        claims.append(claim)
    return claims


def save_claims(claims: List[Claim], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"claims": [c.model_dump(mode="json", exclude_none=True) for c in claims]}
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(payload, f, allow_unicode=True, sort_keys=False)
    return path
