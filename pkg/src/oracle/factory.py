"""Factory for oracle backends and the configured SemanticOracle."""

from pathlib import Path
from typing import Any, Dict, Optional, Union

from src.common.config_loader import ConfigLoader, get_config_loader
from src.common.errors import OracleError
from .backends import OracleBackend, RemoteBackend, ReplayBackend, ScriptedBackend, ScriptedRules
from .cache import PromptCache
from .models import CostLedger
from .oracle import SemanticOracle


def get_backend(
    settings: Dict[str, Any],
    kind: Optional[str] = None,
    rules_path: Optional[Union[str, Path]] = None,
    loader: Optional[ConfigLoader] = None,
) -> OracleBackend:
    """Build a backend from the oracle settings block.

    Args:
        settings: The `oracle` section of settings.yaml
        kind: Override of settings['backend']
        rules_path: Rule table for the scripted backend
    """
    loader = loader or get_config_loader()
    kind = kind or settings.get("backend", "scripted")
    if kind == "scripted":
        if rules_path is None:
            raise OracleError("scripted backend needs a rule table")
        return ScriptedBackend(ScriptedRules.load(rules_path))
    if kind == "replay":
        return ReplayBackend()
    if kind == "remote":
        endpoint = loader.env(settings.get("endpoint_env", ""), settings.get("default_endpoint"))
        if not endpoint:
            raise OracleError("remote backend needs an endpoint")
        return RemoteBackend(
            endpoint=endpoint,
            api_key=loader.env(settings.get("api_key_env", "")),
            max_retries=int(settings.get("max_retries", 3)),
            backoff_s=float(settings.get("retry_backoff_s", 0.5)),
            timeout_s=float(settings.get("timeout_s", 60)),
        )
    raise OracleError(f"unknown oracle backend: {kind}")


def build_oracle(
    backend: OracleBackend,
    cache_dir: Optional[Union[str, Path]] = None,
    caching: bool = True,
    max_concurrency: int = 32,
    loader: Optional[ConfigLoader] = None,
    ledger: Optional[CostLedger] = None,
) -> SemanticOracle:
    """SemanticOracle with models and cache taken from settings.yaml."""
    loader = loader or get_config_loader()
    settings = loader.load_settings()
    oracle_settings = settings.get("oracle", {})
    cache_settings = settings.get("cache", {})
    cache = None
    if caching:
        cache = PromptCache(
            cache_dir if cache_dir is not None else cache_settings.get("dir"),
            max_entries_per_segment=int(cache_settings.get("max_entries_per_segment", 5000)),
        )
    return SemanticOracle(
        backend=backend,
        cache=cache,
        ledger=ledger,
        model=oracle_settings.get("execution_model", "gpt-4o-mini"),
        optimizer_model=oracle_settings.get("optimizer_model"),
        temperature=float(oracle_settings.get("temperature", 0.0)),
        max_concurrency=max_concurrency,
        loader=loader,
    )
