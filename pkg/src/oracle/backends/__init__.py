"""Oracle backends."""

from .base import OracleBackend
from .scripted import ScriptedBackend, ScriptedRules, SemanticRule, TextRule
from .replay import ReplayBackend
from .remote import RemoteBackend

__all__ = [
    "OracleBackend",
    "ScriptedBackend",
    "ScriptedRules",
    "SemanticRule",
    "TextRule",
    "ReplayBackend",
    "RemoteBackend",
]
