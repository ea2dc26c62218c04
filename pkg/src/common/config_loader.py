"""配置加载器"""
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

DEFAULT_CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"


class ConfigLoader:
    """
    配置加载器

    从 config/ 目录读取 YAML 文件并缓存
    """

    def __init__(self, config_dir: Optional[str] = None):
        self.config_dir = Path(config_dir) if config_dir else DEFAULT_CONFIG_DIR
        self._cache: Dict[str, Any] = {}
        load_dotenv()

    def load_yaml(self, relative_path: str) -> Dict[str, Any]:
        """加载 YAML 文件"""
        if relative_path in self._cache:
            return self._cache[relative_path]

        filepath = self.config_dir / relative_path
        if not filepath.exists():
            raise FileNotFoundError(f"配置文件不存在: {filepath}")

        with open(filepath, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        self._cache[relative_path] = data
        return data

    def load_text(self, relative_path: str) -> str:
        """加载纯文本文件 (DSL 文档等)"""
        filepath = self.config_dir / relative_path
        if not filepath.exists():
            raise FileNotFoundError(f"配置文件不存在: {filepath}")
        return filepath.read_text(encoding="utf-8")

    def load_settings(self) -> Dict[str, Any]:
        """加载全局设置"""
        return self.load_yaml("settings.yaml")

    def load_engine_defaults(self) -> Dict[str, Any]:
        """加载引擎默认参数"""
        return self.load_yaml("engine.yaml").get("engine", {})

    def load_prompts(self) -> Dict[str, str]:
        """加载提示词模板"""
        return self.load_yaml("prompts.yaml").get("prompts", {})

    def load_rates(self) -> Dict[str, Dict[str, float]]:
        """加载模型计费表 (每百万 token 美元)"""
        return self.load_yaml("oracle/rates.yaml").get("rates", {})

    def load_vague_quantifiers(self) -> Dict[str, Dict[str, Any]]:
        """加载模糊量词提示表"""
        return self.load_yaml("claims/vague_quantifiers.yaml").get("vague_quantifiers", {})

    def load_dsl_docs(self) -> str:
        """加载 DSL 文档"""
        return self.load_text("dsl/api_docs.md")

    @staticmethod
    def env(name: str, default: Optional[str] = None) -> Optional[str]:
        """读取环境变量 (.env 已在初始化时加载)"""
        return os.environ.get(name, default)


# 全局实例
_loader: Optional[ConfigLoader] = None


def get_config_loader() -> ConfigLoader:
    """获取配置加载器单例"""
    global _loader
    if _loader is None:
        _loader = ConfigLoader()
    return _loader


def reset_config_loader() -> None:
    """重置单例 (测试用)"""
    global _loader
    _loader = None
