"""Pipeline configuration: one structured file of defaults, overridable by flags.

All randomness in the pipeline flows from the explicit seeds here, so repeated
runs with the same config produce byte-identical artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class ToolConfig:
    threshold: float = 0.95
    span_max_len: int = 10
    sif_a: float = 1e-3
    lexicon_path: str | None = None
    c0_window: int = 5
    c1_cap: int = 20
    embed_dim: int = 96
    embed_window: int = 3
    embed_epochs: int = 3
    neg_ratio: float = 3.0
    learning_rate: float = 10.0
    model_epochs: int = 3000
    seed: int = 7
    scope: str = "per_project"

    def __post_init__(self) -> None:
        if self.scope not in ("per_project", "global"):
            raise ConfigError(f"scope must be per_project or global, got {self.scope!r}")
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in (0, 1], got {self.threshold}")

    def replace(self, **overrides) -> "ToolConfig":
        """New config with non-None overrides applied."""
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for key, value in overrides.items():
            if key not in values:
                raise ConfigError(f"unknown config key {key!r}")
            if value is not None:
                values[key] = value
        return ToolConfig(**values)


def load_config(path: str | Path | None) -> ToolConfig:
    """Load a JSON config file; missing keys fall back to the defaults."""
    if path is None:
        return ToolConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return ToolConfig().replace(**payload)
