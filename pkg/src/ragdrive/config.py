"""Engine configuration: flat key=value file, env endpoints, flag overrides.

Example file:

    retrieval.omega = 0.5
    retrieval.k = 1
    eval.alpha = 0.4
    labeling.window = 3.0
    bev.pixels_per_meter = 8
    gateway.embed_endpoint = http://127.0.0.1:8900
    seed = 0

Endpoints may also come from RAGDRIVE_EMBED_ENDPOINT /
RAGDRIVE_CHAT_ENDPOINT; CLI flags override both.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .bev import BevConfig
from .errors import ParseError
from .evaluation import ScoreWeights
from .labeling import LabelingConfig
from .retrieval import RetrievalConfig

ENV_EMBED = "RAGDRIVE_EMBED_ENDPOINT"
ENV_CHAT = "RAGDRIVE_CHAT_ENDPOINT"


@dataclass
class EngineConfig:
    embed_endpoint: str = ""
    chat_endpoint: str = ""
    omega: float = 0.5
    k: int = 1
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    labeling: LabelingConfig = field(default_factory=LabelingConfig)
    bev: BevConfig = field(default_factory=BevConfig)
    parallelism: int = 8
    timeout_s: float = 60.0
    seed: int = 0

    def retrieval(self) -> RetrievalConfig:
        return RetrievalConfig(omega=self.omega, k=self.k)


_FIELD_MAP = {
    "gateway.embed_endpoint": ("embed_endpoint", str),
    "gateway.chat_endpoint": ("chat_endpoint", str),
    "retrieval.omega": ("omega", float),
    "retrieval.k": ("k", int),
    "parallelism": ("parallelism", int),
    "timeout_s": ("timeout_s", float),
    "seed": ("seed", int),
}
_WEIGHT_KEYS = {"eval.alpha": "alpha", "eval.beta": "beta",
                "eval.gamma": "gamma", "eval.delta": "delta"}
_LABELING_FIELDS = {f.name: f.type for f in dataclasses.fields(LabelingConfig)}
_BEV_FIELDS = {
    f.name for f in dataclasses.fields(BevConfig) if f.name != "colors"
}


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Build a config from the optional file plus endpoint env vars."""
    values: dict[str, str] = {}
    if path is not None:
        for lineno, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1
        ):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    cfg = EngineConfig()
    weights: dict[str, float] = {}
    labeling: dict[str, float] = {}
    bev: dict[str, float] = {}
    for key, value in values.items():
        try:
            if key in _FIELD_MAP:
                name, cast = _FIELD_MAP[key]
                setattr(cfg, name, cast(value))
            elif key in _WEIGHT_KEYS:
                weights[_WEIGHT_KEYS[key]] = float(value)
            elif key.startswith("labeling.") and key[9:] in _LABELING_FIELDS:
                labeling[key[9:]] = float(value)
            elif key.startswith("bev.") and key[4:] in _BEV_FIELDS:
                bev[key[4:]] = float(value)
            else:
                raise ParseError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ParseError(f"config key {key!r}: {exc}") from None
    if weights:
        cfg.weights = dataclasses.replace(cfg.weights, **weights)
    if labeling:
        cfg.labeling = dataclasses.replace(cfg.labeling, **labeling)
    if bev:
        cfg.bev = dataclasses.replace(cfg.bev, **bev)

    if os.environ.get(ENV_EMBED):
        cfg.embed_endpoint = os.environ[ENV_EMBED]
    if os.environ.get(ENV_CHAT):
        cfg.chat_endpoint = os.environ[ENV_CHAT]
    return cfg
