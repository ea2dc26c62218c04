"""Backend interface for oracle requests."""

from abc import ABC, abstractmethod

from ..models import BackendReply, OracleRequest


class OracleBackend(ABC):
    """Abstract base class for oracle backends."""

    name: str = "backend"

    @abstractmethod
    async def complete(self, request: OracleRequest) -> BackendReply:
        """Answer one rendered request.

        Args:
            request: Rendered oracle request

        Returns:
            Raw reply text with token counts
        """

    async def aclose(self) -> None:
        """Release resources held by the backend."""
