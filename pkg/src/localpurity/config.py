"""Run configuration: a JSON document with a versioned schema.

Errors carry the line of the offending key so the CLI can report
``config.json:12: ...``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import ValidationError

SCHEMA = 1


class ConfigError(ValidationError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass
class Config:
    """Parsed config plus the raw text used for line lookups."""

    data: dict
    text: str
    source: str = "<config>"

    def line_of(self, key: str) -> int | None:
        m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(message, self.line_of(key), self.source)

    def section(self, key: str, required: bool = True) -> dict:
        val = self.data.get(key)
        if val is None:
            if required:
                raise ConfigError(f"missing required section {key!r}", None, self.source)
            return {}
        if not isinstance(val, dict):
            raise self.error(key, f"{key!r} must be an object")
        return val

    def number(self, section: dict, key: str, default=None, positive: bool = False,
               allow_inf: bool = False) -> float | None:
        if key not in section or section[key] is None:
            if default is None:
                return None
            return default
        val = section[key]
        if allow_inf and isinstance(val, str) and val.lower() in ("inf", "infinity"):
            return math.inf
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise self.error(key, f"{key!r} must be a number, got {val!r}")
        val = float(val)
        if not math.isfinite(val):
            raise self.error(key, f"{key!r} must be finite")
        if positive and not val > 0:
            raise self.error(key, f"{key!r} must be positive, got {val}")
        return val

    def integer(self, section: dict, key: str, default=None, minimum: int | None = None) -> int | None:
        if key not in section or section[key] is None:
            return default
        val = section[key]
        if isinstance(val, bool) or not isinstance(val, int):
            raise self.error(key, f"{key!r} must be an integer, got {val!r}")
        if minimum is not None and val < minimum:
            raise self.error(key, f"{key!r} must be >= {minimum}")
        return val

    def number_list(self, section: dict, key: str, required: bool = True, positive: bool = False) -> list | None:
        if key not in section:
            if required:
                raise self.error(key, f"missing required list {key!r}")
            return None
        val = section[key]
        if not isinstance(val, list) or not val:
            raise self.error(key, f"{key!r} must be a non-empty list")
        out = []
        for v in val:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise self.error(key, f"{key!r} entries must be finite numbers, got {v!r}")
            if positive and not v > 0:
                raise self.error(key, f"{key!r} entries must be positive, got {v!r}")
            out.append(float(v))
        return out

    def choice(self, section: dict, key: str, choices, default=None) -> str:
        val = section.get(key, default)
        if val not in choices:
            raise self.error(key, f"{key!r} must be one of {list(choices)}, got {val!r}")
        return val


def parse_config(text: str, source: str = "<config>") -> Config:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, source) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", 1, source)
    cfg = Config(data, text, source)
    if data.get("schema") != SCHEMA:
        raise cfg.error("schema", f"'schema' must be {SCHEMA}, got {data.get('schema')!r}")
    return cfg


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))
