"""
Claim Decomposition - 声明拆分

两步: 逐句拆分为候选声明, 再结合原始回答消解模糊指代.
"""
import json
from typing import List

from loguru import logger

from src.common.errors import DecompositionError, OracleTypeError
from src.oracle.models import ReturnType
from src.oracle.oracle import SemanticOracle
from src.oracle.parsing import strip_fences
from src.relation.segmenter import segment_sentences


class ClaimDecomposer:
    """Splits an aggregate response into standalone claims."""

    def __init__(self, oracle: SemanticOracle):
        self.oracle = oracle

    def split_sentence(self, sentence: str) -> List[str]:
        raw = self.oracle.complete("decompose_split", {"sentence": sentence}, ReturnType.text())
        try:
            claims = json.loads(strip_fences(raw))
        except (json.JSONDecodeError, TypeError):
            raise DecompositionError("claim split did not return a JSON list", raw_output=str(raw))
        if not isinstance(claims, list) or not all(isinstance(c, str) for c in claims):
            raise DecompositionError("claim split did not return a list of strings", raw_output=str(raw))
        return [c.strip() for c in claims if c.strip()]

    def resolve(self, claim: str, response: str) -> str:
        resolved = self.oracle.complete("decompose_resolve", {"claim": claim, "response": response})
        resolved = str(resolved).strip()
        if not resolved:
            raise DecompositionError("claim resolution returned nothing", raw_output=str(resolved))
        return resolved

    def decompose(self, response_text: str) -> List[str]:
        """Claims of a response in sentence order."""
        claims: List[str] = []
        for sentence in segment_sentences(response_text):
            try:
                pieces = self.split_sentence(sentence)
            except OracleTypeError as e:
                raise DecompositionError(str(e), raw_output=e.raw)
            for piece in pieces:
                claims.append(self.resolve(piece, response_text))
        logger.info(f"decomposed response into {len(claims)} claims")
        return claims


def decompose(response_text: str, oracle: SemanticOracle) -> List[str]:
    return ClaimDecomposer(oracle).decompose(response_text)
