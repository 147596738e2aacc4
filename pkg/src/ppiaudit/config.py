"""Flat ``key = value`` pipeline configuration.

Precedence, lowest to highest: built-in defaults, config file, CLI overrides.
Relative input paths in a config file resolve against the file's directory.
Held-out splits shuffle gold complexes with a SplitMix64-driven
Fisher-Yates shuffle, so ``seed`` values are portable across platforms.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

DEFAULTS: dict[str, Any] = {
    "dataset": "synthetic",
    "edges": "",
    "gaf": "",
    "gold": "",
    "terms": "",
    "gold_named": False,
    "out": "out",
    "seed": 42,
    "threads": 1,
    "timing": True,
    "embed.dim": 64,
    "embed.cache": True,
    "embed.cache_dir": "",
    "mcl.inflation": 2.0,
    "mcl.max_iter": 100,
    "mcl.prune_eps": 1e-5,
    "mcl.tol": 1e-6,
    "overlap.alpha": 0.5,
    "overlap.tau": 0.1,
    "nucleus.min_hops": 2,
    "nucleus.k": 0,
    "candidates.ego_cap": 50,
    "candidates.expand_cap": 30,
    "candidates.expand_min_gain": 0.05,
    "candidates.knn_k": 10,
    "candidates.union_jaccard": 0.5,
    "echo.max_rel_growth": 0.15,
    "echo.max_added": 2,
    "echo.min_gain": 0.38,
    "echo.gate_topo": 0.12,
    "echo.gate_sem": 0.28,
    "echo.gate_go": 0.25,
    "slpa.iterations": 100,
    "slpa.threshold": 0.1,
    "slpa.weighted": True,
    "match.threshold": 0.5,
    "ablate.dedup_jaccard": 0.8,
    "heldout.seeds": "42,43,44,45,46",
    "heldout.test_frac": 0.2,
    "export.candidates": True,
    "export.profiles": True,
}

PATH_KEYS = ("edges", "gaf", "gold", "terms")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


def coerce(key: str, value: Any) -> Any:
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key: {key}")
    kind = type(DEFAULTS[key])
    if isinstance(value, kind) and not (kind is int and isinstance(value, bool)):
        return value
    text = str(value).strip()
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {kind.__name__}") from None
    return text


class Config(dict):
    """Typed flat mapping over :data:`DEFAULTS`."""

    def __init__(self, values: Mapping[str, Any] | None = None):
        super().__init__(DEFAULTS)
        for k, v in (values or {}).items():
            self[k] = v

    def __setitem__(self, key: str, value: Any) -> None:
        super().__setitem__(key, coerce(key, value))

    def update(self, other: Mapping[str, Any] = (), **kw) -> None:  # type: ignore[override]
        for k, v in {**dict(other), **kw}.items():
            self[k] = v

    def path(self, key: str) -> Path | None:
        v = self[key]
        return Path(v) if v else None

    @property
    def out_dir(self) -> Path:
        return Path(self["out"]) / self["dataset"]

    def heldout_seeds(self) -> list[int]:
        return [int(s) for s in str(self["heldout.seeds"]).split(",") if s.strip()]

    def dumps(self) -> str:
        return "".join(f"{k} = {self[k]}\n" for k in DEFAULTS)


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> Config:
    cfg = Config()
    if path is not None:
        path = Path(path)
        try:
            values = parse_config_text(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for k, v in values.items():
            if k in PATH_KEYS and v and not Path(v).is_absolute():
                v = str(path.parent / v)
            cfg[k] = v
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    return cfg
