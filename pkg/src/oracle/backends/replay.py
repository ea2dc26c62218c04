"""Replay backend: answers come only from the prompt cache."""

from src.common.errors import OracleError
from ..models import BackendReply, OracleRequest
from .base import OracleBackend


class ReplayBackend(OracleBackend):
    """Cache-only backend. The oracle consults the cache first, so reaching here is a miss."""

    name = "replay"

    async def complete(self, request: OracleRequest) -> BackendReply:
        digest = request.cache_key().digest
        raise OracleError(f"replay miss for prompt {digest[:12]} (template {request.template_id!r})")
