"""
Embedding - 文本向量化

确定性特征哈希嵌入器: token -> 哈希桶计数 -> L2 归一化
"""
import hashlib
import re
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np

_TOKEN = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")
_EMPTY_TOKEN = "\x00empty"


def tokenize(text: str) -> List[str]:
    """Lower-cased word tokens."""
    return _TOKEN.findall(text.lower())


class Embedder(ABC):
    """Maps text to unit-norm vectors."""

    name: str = "embedder"
    dimension: int = 0

    @abstractmethod
    def embed(self, text: str) -> np.ndarray:
        """Embed one text."""

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension))
        return np.vstack([self.embed(t) for t in texts])


@lru_cache(maxsize=65536)
def _bucket(token: str, dimension: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


class FeatureHashEmbedder(Embedder):
    """Deterministic bag-of-words feature hashing."""

    name = "feature-hash"

    def __init__(self, dimension: int = 256):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text) or [_EMPTY_TOKEN]
        vector = np.zeros(self.dimension, dtype=np.float64)
        for token in tokens:
            vector[_bucket(token, self.dimension)] += 1.0
        return vector / np.linalg.norm(vector)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two unit vectors."""
    return float(np.dot(a, b))


def get_embedder(name: str = "feature-hash", dimension: Optional[int] = None) -> Embedder:
    """Embedder factory"""
    if name != FeatureHashEmbedder.name:
        raise ValueError(f"unknown embedder: {name}")
    return FeatureHashEmbedder(dimension or 256)
