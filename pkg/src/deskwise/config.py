"""Runtime configuration: orchestrator thresholds plus pipeline knobs,
loadable from a flat key-value file (``key = value`` lines, # comments)."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class OrchestratorConfig:
    theta_answer: float = 0.7
    theta_disambig: float = 0.3
    top_k: int = 5
    max_clarify_turns: int = 3
    search_k: int = 10
    handoff_on_negative: bool = True

    def validate(self) -> None:
        if not (0 <= self.theta_disambig < self.theta_answer <= 1):
            raise ValueError(
                f"need 0 <= theta_disambig < theta_answer <= 1, got "
                f"{self.theta_disambig} / {self.theta_answer}"
            )
        if self.top_k < 2:
            raise ValueError(f"top_k must be >= 2, got {self.top_k}")


@dataclass
class AppConfig:
    orchestrator: OrchestratorConfig
    w_promote: int = 3
    gap_threshold: float = 0.8
    sigma1: float = 1.0
    sigma2: float = 2.0
    dog_gain: float = 1.5
    upscale_factor: int = 2
    max_chunk_tokens: int = 512
    textrank_ratio: float = 0.10
    glossary_top_m: int = 200
    epochs: int = 50
    lambda_: float = 1e-4
    seed: int = 42
    agent_token: str = "agent-token"

    @classmethod
    def default(cls) -> "AppConfig":
        return cls(orchestrator=OrchestratorConfig())


def _coerce(raw: str, target_type: type):
    if target_type is bool:
        return raw.strip().lower() in {"1", "true", "yes", "on"}
    return target_type(raw.strip())


def load_config(path: str | Path | None = None) -> AppConfig:
    cfg = AppConfig.default()
    if path is None:
        return cfg
    orch_fields = {f.name: f for f in fields(OrchestratorConfig)}
    app_fields = {f.name: f for f in fields(AppConfig) if f.name != "orchestrator"}
    aliases = {"lambda": "lambda_", "k": "top_k"}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        sep = "=" if "=" in line else (":" if ":" in line else None)
        if sep is None:
            raise ValueError(f"{path}:{line_no}: expected 'key = value'")
        key, raw = line.split(sep, 1)
        key = aliases.get(key.strip(), key.strip())
        if key in orch_fields:
            f = orch_fields[key]
            setattr(cfg.orchestrator, key, _coerce(raw, f.type if isinstance(f.type, type) else type(getattr(cfg.orchestrator, key))))
        elif key in app_fields:
            setattr(cfg, key, _coerce(raw, type(getattr(cfg, key))))
        else:
            raise ValueError(f"{path}:{line_no}: unknown key {key.strip()!r}")
    cfg.orchestrator.validate()
    return cfg
