"""
公共基础模块

提供:
- 配置加载 (YAML + 环境变量)
- 异常层次
- 日志初始化
"""

from .errors import (
    VerificationError,
    IngestionError,
    DecompositionError,
    DslError,
    DslSyntaxError,
    DslNameError,
    DslTypeError,
    CompilationError,
    UnsupportedShapeError,
    ExecutionError,
    OracleError,
    OracleTypeError,
    OracleTransportError,
    UnknownTemplateError,
    InvariantError,
    NeedsTotalError,
    ProvenanceSizeError,
)
from .config_loader import ConfigLoader, get_config_loader, reset_config_loader
from .log import setup_logging

__all__ = [
    "VerificationError",
    "IngestionError",
    "DecompositionError",
    "DslError",
    "DslSyntaxError",
    "DslNameError",
    "DslTypeError",
    "CompilationError",
    "UnsupportedShapeError",
    "ExecutionError",
    "OracleError",
    "OracleTypeError",
    "OracleTransportError",
    "UnknownTemplateError",
    "InvariantError",
    "NeedsTotalError",
    "ProvenanceSizeError",
    "ConfigLoader",
    "get_config_loader",
    "reset_config_loader",
    "setup_logging",
]
