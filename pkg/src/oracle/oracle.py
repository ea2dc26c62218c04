"""
Semantic Oracle - 语义 oracle

渲染提示词, 查询缓存, 并发分派未命中的请求 (信号量上限 = 批大小),
解析类型化答案并记账.
"""
import asyncio
import re
from typing import Any, Dict, List, Optional, Sequence, Union

from loguru import logger

from src.common.config_loader import ConfigLoader, get_config_loader
from src.common.errors import OracleError, OracleTypeError
from .backends.base import OracleBackend
from .cache import PromptCache
from .models import (
    CostLedger,
    FusedPart,
    OracleRequest,
    OracleResponse,
    ReturnKind,
    ReturnType,
)
from .parsing import parse_fused, parse_typed

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


def render_template(template: str, variables: Dict[str, Any]) -> str:
    """Substitute {name} placeholders present in variables; other braces are left alone."""
    def substitute(match: "re.Match[str]") -> str:
        name = match.group(1)
        return str(variables[name]) if name in variables else match.group(0)
    return _PLACEHOLDER.sub(substitute, template)


def template_placeholders(template: str) -> List[str]:
    return _PLACEHOLDER.findall(template)


class SemanticOracle:
    """Typed access to an LLM backend with caching and cost accounting."""

    def __init__(
        self,
        backend: OracleBackend,
        cache: Optional[PromptCache] = None,
        ledger: Optional[CostLedger] = None,
        model: str = "gpt-4o-mini",
        optimizer_model: Optional[str] = None,
        temperature: float = 0.0,
        max_concurrency: int = 32,
        loader: Optional[ConfigLoader] = None,
    ):
        self.backend = backend
        self.cache = cache
        self.ledger = ledger or CostLedger()
        self.model = model
        self.optimizer_model = optimizer_model or model
        self.temperature = temperature
        self.max_concurrency = max_concurrency
        self.prompts = (loader or get_config_loader()).load_prompts()
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._semaphore: Optional[asyncio.Semaphore] = None
        self._semaphore_loop: Optional[asyncio.AbstractEventLoop] = None

    # -------------------------------------------------------------- requests

    def _answer_format(self, expected: ReturnType) -> str:
        if expected.kind == ReturnKind.ENUM:
            return render_template(self.prompts["answer_enum"], {"labels": ", ".join(expected.labels)})
        key = {ReturnKind.BOOL: "answer_bool", ReturnKind.INT: "answer_int", ReturnKind.REAL: "answer_real"}.get(expected.kind)
        return self.prompts[key] if key else ""

    def semantic_request(self, template: str, expected: ReturnType, variables: Dict[str, Any]) -> OracleRequest:
        """Tuple-level question: the template itself identifies the rule."""
        body = render_template(template, variables)
        suffix = self._answer_format(expected)
        return OracleRequest(
            model=self.model,
            prompt=f"{body}\n{suffix}" if suffix else body,
            template_id=template,
            variables=dict(variables),
            expected=expected,
            temperature=self.temperature,
        )

    def fused_request(self, parts: Sequence[FusedPart], variables: Dict[str, Any]) -> OracleRequest:
        """All questions of a fused operator in one request with keyed JSON answers."""
        lines = [self.prompts["fused_header"], ""]
        for i, part in enumerate(parts, start=1):
            question = render_template(part.template_id, variables)
            fmt = self._answer_format(part.expected)
            lines.append(f"q{i}: {question} {fmt}".rstrip())
        return OracleRequest(
            model=self.model,
            prompt="\n".join(lines),
            template_id="fused",
            variables=dict(variables),
            expected=ReturnType(kind=ReturnKind.JSON),
            temperature=self.temperature,
            parts=tuple(parts),
        )

    def task_request(self, template_id: str, variables: Dict[str, Any], expected: Optional[ReturnType] = None,
                     model: Optional[str] = None, appendix: Optional[str] = None) -> OracleRequest:
        """System task (compilation, decomposition, search hints) from a named prompt.

        appendix is added after the rendered template (retry feedback).
        """
        if template_id not in self.prompts:
            raise OracleError(f"unknown prompt template {template_id!r}")
        prompt = render_template(self.prompts[template_id], variables)
        if appendix:
            prompt = f"{prompt.rstrip()}\n\n{appendix}"
        return OracleRequest(
            model=model or self.optimizer_model,
            prompt=prompt,
            template_id=template_id,
            variables=dict(variables),
            expected=expected or ReturnType.text(),
            temperature=self.temperature,
        )

    # ------------------------------------------------------------ evaluation

    def _parse(self, request: OracleRequest, text: str) -> Any:
        if request.is_fused:
            return parse_fused(text, request.parts)
        return parse_typed(text, request.expected)

    async def evaluate(self, request: OracleRequest) -> OracleResponse:
        """Answer one request. Only parseable replies are cached; fused replies get one retry."""
        key = request.cache_key()
        reply = self.cache.get(key) if self.cache is not None else None
        cached = False
        value: Any = None
        if reply is not None:
            try:
                value = self._parse(request, reply.text)
                cached = True
                self.ledger.record_hit(request.model)
            except OracleTypeError:
                reply = None

        if not cached:
            attempts = 2 if request.is_fused else 1
            for attempt in range(attempts):
                reply = await self.backend.complete(request)
                self.ledger.record(request.model, reply.input_tokens, reply.output_tokens)
                try:
                    value = self._parse(request, reply.text)
                    break
                except OracleTypeError:
                    if attempt + 1 == attempts:
                        raise
                    logger.bind(template=request.template_id).warning("malformed fused answer; retrying once")
            if self.cache is not None:
                self.cache.put(key, reply)

        return OracleResponse(
            value=value,
            raw=reply.text,
            input_tokens=reply.input_tokens,
            output_tokens=reply.output_tokens,
            cached=cached,
            model=request.model,
        )

    def _limiter(self) -> asyncio.Semaphore:
        """One in-flight bound shared by every batch on the running loop."""
        loop = asyncio.get_running_loop()
        if self._semaphore is None or self._semaphore_loop is not loop:
            self._semaphore = asyncio.Semaphore(max(1, self.max_concurrency))
            self._semaphore_loop = loop
        return self._semaphore

    async def evaluate_batch(
        self, requests: Sequence[OracleRequest], return_exceptions: bool = False
    ) -> List[Union[OracleResponse, OracleError]]:
        """Evaluate requests concurrently; results keep request order.

        Identical prompts within a batch share one backend call.
        """
        semaphore = self._limiter()

        async def bounded(request: OracleRequest):
            async with semaphore:
                return await self.evaluate(request)

        unique: Dict[str, int] = {}
        distinct: List[OracleRequest] = []
        slots: List[int] = []
        for request in requests:
            digest = request.cache_key().digest
            if digest not in unique:
                unique[digest] = len(distinct)
                distinct.append(request)
            slots.append(unique[digest])

        gathered = await asyncio.gather(*(bounded(r) for r in distinct), return_exceptions=True)
        results = [gathered[i] for i in slots]
        out: List[Union[OracleResponse, OracleError]] = []
        for result in results:
            if isinstance(result, OracleError):
                if not return_exceptions:
                    raise result
                out.append(result)
            elif isinstance(result, BaseException):
                raise result
            else:
                out.append(result)
        return out

    def evaluate_batch_sync(
        self, requests: Sequence[OracleRequest], return_exceptions: bool = False
    ) -> List[Union[OracleResponse, OracleError]]:
        """Synchronous facade on a private event loop."""
        if not requests:
            return []
        if self._loop is None or self._loop.is_closed():
            self._loop = asyncio.new_event_loop()
        return self._loop.run_until_complete(self.evaluate_batch(requests, return_exceptions))

    def ask(self, request: OracleRequest) -> OracleResponse:
        return self.evaluate_batch_sync([request])[0]

    def complete(self, template_id: str, variables: Dict[str, Any], expected: Optional[ReturnType] = None,
                 model: Optional[str] = None, appendix: Optional[str] = None) -> Any:
        """Run a named system prompt and return the parsed value."""
        request = self.task_request(template_id, variables, expected, model, appendix)
        logger.bind(template=template_id, model=request.model).debug("oracle task")
        return self.ask(request).value

    def close(self) -> None:
        if self._loop is not None and not self._loop.is_closed():
            self._loop.run_until_complete(self.backend.aclose())
            self._loop.close()
