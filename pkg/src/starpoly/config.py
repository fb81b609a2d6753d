"""Experiment configuration: dataclass blocks plus a flat namespaced-key text
format (model.d = 2, sampler.steps = 20000, ...).  Unknown keys are errors so
that sweep configs stay reproducible; the seed is mandatory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from pathlib import Path


@dataclass
class ModelBlock:
    d: int = 1
    N: int = 1
    T: float = 1.0
    beta: float = 1.0
    n: int = 64


@dataclass
class SamplerBlock:
    steps: int = 20000
    burn_in: int = 5000
    thinning: int = 10
    chains: int = 1
    bridge: float = 0.7
    tail: float = 0.2
    redraw: float = 0.1
    mean_segment_frac: float = 0.125
    spread: float = 0.0
    r1: float | None = None
    r2: float | None = None


@dataclass
class ZBoundBlock:
    n_samples: int = 10000
    resample_theta: bool = True


@dataclass
class SweepBlock:
    T: list[float] = field(default_factory=list)
    beta: list[float] = field(default_factory=list)
    N: list[int] = field(default_factory=list)


@dataclass
class ExperimentConfig:
    seed: int
    model: ModelBlock = field(default_factory=ModelBlock)
    sampler: SamplerBlock = field(default_factory=SamplerBlock)
    zbound: ZBoundBlock = field(default_factory=ZBoundBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    out: str | None = None

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("a master seed is mandatory")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if self.sampler.burn_in >= self.sampler.steps:
            raise ValueError("burn-in must be smaller than the step budget")
        if self.sampler.thinning < 1 or self.sampler.chains < 1:
            raise ValueError("thinning and chain count must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_list(raw: str, conv):
    return [conv(tok) for tok in raw.split(",") if tok.strip()]


_KEY_PARSERS = {
    "model.d": int, "model.N": int, "model.T": float,
    "model.beta": float, "model.n": int,
    "sampler.steps": int, "sampler.burn_in": int, "sampler.thinning": int,
    "sampler.chains": int, "sampler.bridge": float, "sampler.tail": float,
    "sampler.redraw": float, "sampler.mean_segment_frac": float,
    "sampler.spread": float, "sampler.r1": float, "sampler.r2": float,
    "zbound.n_samples": int, "zbound.resample_theta": _parse_bool,
    "sweep.T": lambda raw: _parse_list(raw, float),
    "sweep.beta": lambda raw: _parse_list(raw, float),
    "sweep.N": lambda raw: _parse_list(raw, int),
    "seed": int,
    "out": str,
}


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        parser = _KEY_PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = parser(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if "seed" not in values:
        raise ConfigError("missing mandatory key 'seed'")

    def block(cls, prefix):
        kwargs = {k.split(".", 1)[1]: v for k, v in values.items()
                  if k.startswith(prefix + ".")}
        return cls(**kwargs)

    return ExperimentConfig(
        seed=values["seed"],  # type: ignore[arg-type]
        model=block(ModelBlock, "model"),
        sampler=block(SamplerBlock, "sampler"),
        zbound=block(ZBoundBlock, "zbound"),
        sweep=block(SweepBlock, "sweep"),
        out=values.get("out"),  # type: ignore[arg-type]
    )


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())
