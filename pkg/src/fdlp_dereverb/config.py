"""Plain ``key = value`` configuration with per-module sections.

Either form is accepted::

    [train]
    lambda = 0.6

    train.seed = 3

Unknown keys are rejected with their line number. Values are parsed with the
type of the default; ``roomsim.t60_set`` is a comma-separated list.
"""
from __future__ import annotations

from pathlib import Path

from .exceptions import InvalidArgumentError

DEFAULTS = {
    "fdlp.lp_order": 30,
    "dplstm.hidden_size": 64,
    "train.lambda": 0.6,
    "train.learning_rate": 3e-4,
    "train.epochs": 20,
    "train.batch_size": 8,
    "train.seed": 0,
    "train.clip_norm": 5.0,
    "roomsim.t60_set": (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8),
    "roomsim.snr_db": 20.0,
    "roomsim.rir_length": 1.0,
    "roomsim.boundary_ms": 50.0,
    "roomsim.seed": 0,
}


class ConfigError(InvalidArgumentError):
    pass


def _convert(key, raw: str, where: str):
    default = DEFAULTS[key]
    try:
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if isinstance(default, int):
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value {raw!r} for {key}") from exc


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse config text into ``{dotted_key: value}`` (only keys that appear)."""
    values = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key = key.strip()
        if "." not in key and section:
            key = f"{section}.{key}"
        if key not in DEFAULTS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        values[key] = _convert(key, raw.strip(), where)
    return values


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the file (if any), then non-``None`` overrides."""
    cfg = dict(DEFAULTS)
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"no such file: {path}")
        cfg.update(parse_config(path.read_text(), str(path)))
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
        if value is not None:
            cfg[key] = value
    return cfg


def describe_defaults() -> str:
    return "\n".join(
        f"  {k} = {','.join(map(str, v)) if isinstance(v, tuple) else v}"
        for k, v in DEFAULTS.items())
