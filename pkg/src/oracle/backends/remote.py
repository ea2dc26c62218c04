"""
Remote Backend - 远程 chat-completions 客户端

端点与密钥来自环境变量; temperature 固定为 0; 有限次重试 + 指数退避.
"""
import asyncio
from typing import Optional

import httpx
from loguru import logger

from src.common.errors import OracleTransportError
from ..models import BackendReply, OracleRequest, estimate_tokens
from .base import OracleBackend

_RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}


class RemoteBackend(OracleBackend):
    """OpenAI-compatible chat-completions backend."""

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        api_key: Optional[str] = None,
        max_retries: int = 3,
        backoff_s: float = 0.5,
        timeout_s: float = 60.0,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self._transport = transport

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    async def complete(self, request: OracleRequest) -> BackendReply:
        payload = {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        }
        last_error: Optional[str] = None
        async with httpx.AsyncClient(transport=self._transport, timeout=self.timeout_s) as client:
            for attempt in range(self.max_retries + 1):
                try:
                    response = await client.post(
                        f"{self.endpoint}/chat/completions", json=payload, headers=self._headers()
                    )
                    if response.status_code in _RETRYABLE_STATUS:
                        last_error = f"HTTP {response.status_code}"
                    else:
                        response.raise_for_status()
                        return self._parse(response.json(), request)
                except httpx.HTTPStatusError as e:
                    raise OracleTransportError(f"remote oracle rejected request: {e}") from e
                except (httpx.TransportError, ValueError) as e:
                    last_error = str(e)

                if attempt < self.max_retries:
                    delay = self.backoff_s * (2 ** attempt)
                    logger.bind(model=request.model).warning(
                        f"oracle call failed ({last_error}); retry {attempt + 1}/{self.max_retries} in {delay:.2f}s"
                    )
                    await asyncio.sleep(delay)

        raise OracleTransportError(f"remote oracle failed after {self.max_retries + 1} attempts: {last_error}")

    @staticmethod
    def _parse(data: dict, request: OracleRequest) -> BackendReply:
        try:
            text = data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as e:
            raise ValueError(f"malformed completion payload: {e}")
        usage = data.get("usage") or {}
        return BackendReply(
            text=text,
            input_tokens=int(usage.get("prompt_tokens", estimate_tokens(request.prompt))),
            output_tokens=int(usage.get("completion_tokens", estimate_tokens(text))),
        )
