"""
Prompt Cache - 提示词缓存

追加写入的 JSONL 分段文件, 以 sha256 摘要为索引.
损坏的条目视为未命中, 被剔除并记录警告.
"""
import json
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from loguru import logger

from .models import BackendReply, CacheKey

_SEGMENT_GLOB = "segment-*.jsonl"


class PromptCache:
    """Persistent memoization of oracle replies keyed by (model, temperature, prompt)."""

    def __init__(self, cache_dir: Optional[Union[str, Path]] = None, max_entries_per_segment: int = 5000):
        """Initialize the cache.

        Args:
            cache_dir: Directory holding segment files; None keeps the cache in memory
            max_entries_per_segment: Entries written before rolling to a new segment
        """
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.max_entries_per_segment = max_entries_per_segment
        self._index: Dict[str, Dict[str, Any]] = {}
        self._lock = threading.Lock()
        self._current_segment: Optional[Path] = None
        self._current_count = 0
        self.evicted = 0
        if self.cache_dir is not None:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            self._load()

    # ------------------------------------------------------------------ load

    def _segments(self) -> List[Path]:
        if self.cache_dir is None:
            return []
        return sorted(self.cache_dir.glob(_SEGMENT_GLOB))

    @staticmethod
    def _valid(entry: Any) -> bool:
        if not isinstance(entry, dict):
            return False
        try:
            key = CacheKey(model=entry["model"], temperature=entry["temperature"], prompt=entry["prompt"])
            return (
                key.digest == entry["digest"]
                and isinstance(entry["response"], str)
                and isinstance(entry["input_tokens"], int)
                and isinstance(entry["output_tokens"], int)
            )
        except (KeyError, TypeError, ValueError):
            return False

    def _load(self) -> None:
        for segment in self._segments():
            good_lines: List[str] = []
            corrupt = 0
            with open(segment, "r", encoding="utf-8") as f:
                for line_no, line in enumerate(f, start=1):
                    if not line.strip():
                        continue
                    try:
                        entry = json.loads(line)
                    except json.JSONDecodeError:
                        entry = None
                    if not self._valid(entry):
                        corrupt += 1
                        logger.warning(f"corrupt cache entry evicted: {segment.name} line {line_no}")
                        continue
                    self._index[entry["digest"]] = entry
                    good_lines.append(line.rstrip("\n"))
            if corrupt:
                self.evicted += corrupt
                segment.write_text("".join(l + "\n" for l in good_lines), encoding="utf-8")
            self._current_segment = segment
            self._current_count = len(good_lines)

    # ----------------------------------------------------------------- access

    def get(self, key: CacheKey) -> Optional[BackendReply]:
        entry = self._index.get(key.digest)
        if entry is None:
            return None
        if entry["model"] != key.model or entry["temperature"] != key.temperature or entry["prompt"] != key.prompt:
            return None
        return BackendReply(
            text=entry["response"],
            input_tokens=entry["input_tokens"],
            output_tokens=entry["output_tokens"],
        )

    def put(self, key: CacheKey, reply: BackendReply) -> None:
        entry = {
            "digest": key.digest,
            "model": key.model,
            "temperature": key.temperature,
            "prompt": key.prompt,
            "response": reply.text,
            "input_tokens": reply.input_tokens,
            "output_tokens": reply.output_tokens,
        }
        with self._lock:
            if key.digest in self._index:
                return
            self._index[key.digest] = entry
            if self.cache_dir is not None:
                self._append(entry)

    def _append(self, entry: Dict[str, Any]) -> None:
        if self._current_segment is None or self._current_count >= self.max_entries_per_segment:
            number = len(self._segments())
            self._current_segment = self.cache_dir / f"segment-{number:05d}.jsonl"
            self._current_count = 0
        with open(self._current_segment, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, ensure_ascii=False) + "\n")
        self._current_count += 1

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, key: CacheKey) -> bool:
        return self.get(key) is not None

    # ------------------------------------------------------------ maintenance

    def stats(self) -> Dict[str, Any]:
        segments = self._segments()
        return {
            "entries": len(self._index),
            "segments": len(segments),
            "bytes": sum(s.stat().st_size for s in segments),
            "evicted": self.evicted,
            "dir": str(self.cache_dir) if self.cache_dir else None,
        }

    def clear(self) -> int:
        """Delete every entry; returns the number removed."""
        with self._lock:
            removed = len(self._index)
            self._index.clear()
            for segment in self._segments():
                segment.unlink()
            self._current_segment = None
            self._current_count = 0
        logger.info(f"cleared {removed} cache entries")
        return removed
