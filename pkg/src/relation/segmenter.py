"""Sentence segmentation."""
import re
from typing import List

# terminal punctuation followed by whitespace; end-of-string is handled by the split
_BOUNDARY = re.compile(r"(?<=[.!?])\s+")


def segment_sentences(text: str) -> List[str]:
    """Split text on '.', '!' or '?' followed by whitespace or end of string.

    >>> segment_sentences("Great food! Slow service.")
    ['Great food!', 'Slow service.']
    """
    if not text or not text.strip():
        return []
    return [piece.strip() for piece in _BOUNDARY.split(text.strip()) if piece.strip()]
