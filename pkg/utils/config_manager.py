"""
Layered settings for contrakt.

The defaults in config.py are the bottom layer; config/system_config.yaml (or
the file given with --settings) is merged on top. Keys are addressed with dot
paths such as "integrator.rtol".
"""

import copy
import logging
import os
from typing import Any, Dict, List, Optional

import yaml

from config import get_config as get_default_config
from utils.logger import LEVELS

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_FILE = "config/system_config.yaml"
INTEGRATION_METHODS = ('RK45', 'DOP853')


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """
    Settings file merged over the config.py defaults.

    A missing or unreadable file leaves the defaults in place. Nothing reaches
    the library until apply() is called.
    """

    def __init__(self, config_file: str = DEFAULT_SETTINGS_FILE):
        self.config_file = config_file
        self.config: Dict[str, Any] = {}
        self._load_config()

    def _load_config(self):
        defaults = copy.deepcopy(get_default_config())
        if not os.path.exists(self.config_file):
            logger.warning(f"Settings file not found: {self.config_file}, using defaults")
            self.config = defaults
            return

        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                overrides = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Failed to read settings {self.config_file}: {e}")
            self.config = defaults
            return

        self.config = _deep_merge(defaults, overrides)
        logger.info(f"✅ Loaded settings from {self.config_file}")

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Value at a dot path, or `default` when any segment is missing.

        Example:
            >>> ConfigManager().get("integrator.rtol")
            1e-09
        """
        node: Any = self.config
        for key in key_path.split('.'):
            if not isinstance(node, dict) or key not in node:
                return default
            node = node[key]
        return node

    def set(self, key_path: str, value: Any, save: bool = False):
        """Set a dot-path value, creating sections as needed."""
        *sections, leaf = key_path.split('.')
        node = self.config
        for key in sections:
            node = node.setdefault(key, {})
        node[leaf] = value
        logger.debug(f"Set {key_path} = {value}")
        if save:
            self.save()

    def update(self, updates: Dict[str, Any], save: bool = False):
        """Set several dot-path values at once."""
        for key_path, value in updates.items():
            self.set(key_path, value)
        if save:
            self.save()

    def save(self, file_path: Optional[str] = None):
        """Write the merged settings to `file_path` (default: the loaded file)."""
        target = file_path or self.config_file
        directory = os.path.dirname(target)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.config, f, default_flow_style=False, indent=2)
        logger.info(f"✅ Saved settings to {target}")

    def reload(self):
        """Discard in-memory changes and read the file again."""
        self._load_config()

    def get_section(self, section: str) -> Dict[str, Any]:
        """Copy of one top-level section, empty when absent."""
        return copy.deepcopy(self.config.get(section, {}))

    def validate(self) -> List[str]:
        """
        Check tolerance ranges and names.

        Returns:
            Error messages, empty when the settings are usable
        """
        errors = []

        rtol = self.get("integrator.rtol", 1e-9)
        if not (1e-12 <= rtol <= 1e-3):
            errors.append(f"integrator.rtol={rtol} outside [1e-12, 1e-3]")
        if self.get("integrator.atol", 1e-11) <= 0:
            errors.append("integrator.atol must be positive")
        method = self.get("integrator.method")
        if method not in INTEGRATION_METHODS:
            errors.append(f"integrator.method must be RK45 or DOP853, got {method}")

        if self.get("tensor_norm.restarts", 1) < 1:
            errors.append("tensor_norm.restarts must be >= 1")
        if self.get("sampler.grid_per_dim", 1) < 1:
            errors.append("sampler.grid_per_dim must be >= 1")
        if self.get("sampler.random_count", 0) < 0:
            errors.append("sampler.random_count must be >= 0")

        h_list = self.get("measures.oracle_h_list", [])
        if not h_list or any(h <= 0 for h in h_list):
            errors.append("measures.oracle_h_list must hold positive step sizes")

        if self.get("graph.epsilon_default", 1.0) <= 0:
            errors.append("graph.epsilon_default must be positive")
        if self.get("rate_fit.min_samples", 10) < 2:
            errors.append("rate_fit.min_samples must be >= 2")

        level = str(self.get("logging.level", "INFO")).upper()
        if level not in LEVELS:
            errors.append(f"logging.level {level} is not a logging level")

        return errors

    def apply(self) -> None:
        """Push the merged values into the live section dicts of config.py."""
        live = get_default_config()
        for section, values in self.config.items():
            if section in live and isinstance(values, dict):
                live[section].update(values)
        logger.debug(f"Applied settings from {self.config_file}")

    def export_template(self, file_path: str):
        """Write the current settings as a commented starting point for a settings file."""
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write("# contrakt settings\n")
            f.write("# Pass with --settings; omitted keys keep their defaults.\n\n")
            yaml.safe_dump(self.config, f, default_flow_style=False, indent=2)
        logger.info(f"✅ Exported settings template to {file_path}")


_config_manager: Optional[ConfigManager] = None


def get_config(config_file: Optional[str] = None) -> ConfigManager:
    """
    Shared ConfigManager. Passing a file replaces the shared instance.
    """
    global _config_manager
    if _config_manager is None or config_file is not None:
        _config_manager = ConfigManager(config_file or DEFAULT_SETTINGS_FILE)
    return _config_manager
