"""``key=value`` run configuration with validation."""

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .flow_path import DEFAULT_SIGMA, PathConfig
from .metrics import DEFAULT_CEPSTRA
from .sampler import SampleConfig
from .trainer import TrainConfig


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _range(text):
    lo, hi = (float(v) for v in text.split(","))
    return (lo, hi)


@dataclass
class Config:
    sigma: float = DEFAULT_SIGMA
    steps: int = 2000
    batch: int = 8
    learning_rate: float = 1e-4
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    mel_dim: int = 80
    unit_vocab: int = 50
    unit_embed_dim: int = 32
    hidden_sizes: tuple = (128, 128)
    time_dim: int = 16
    mask_fraction_range: tuple = (0.7, 1.0)
    sampler_steps: int = 32
    sampler_method: str = "euler"
    cepstra: int = DEFAULT_CEPSTRA
    audio_guidance: bool = True
    visual_guidance: bool = True
    duration_steps: int = 1000
    duration_batch: int = 8
    duration_learning_rate: float = 1e-3
    duration_embed_dim: int = 32
    duration_hidden: int = 64
    duration_kernel: int = 3

    _PARSERS = {bool: _bool, int: int, float: float, str: str}

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            self.train_config()
            self.duration_config()
            self.sample_config()
            PathConfig(self.sigma)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        lo, hi = self.mask_fraction_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigError(f"mask_fraction_range {self.mask_fraction_range} outside [0, 1]")
        if self.time_dim < 2 or self.time_dim % 2:
            raise ConfigError("time_dim must be even and >= 2")
        if self.duration_kernel % 2 == 0:
            raise ConfigError("duration_kernel must be odd")
        if self.cepstra < 2:
            raise ConfigError("cepstra must be >= 2")
        for name in ("mel_dim", "unit_vocab", "unit_embed_dim", "duration_embed_dim", "duration_hidden"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ConfigError("hidden_sizes must list positive widths")

    @classmethod
    def parse(cls, text, source="<config>"):
        known = {f.name: f for f in fields(cls)}
        values = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            key = key.strip()
            if not sep:
                raise ConfigError(f"{source}:{n}: expected key=value")
            if key not in known:
                raise ConfigError(f"{source}:{n}: unknown key {key!r}")
            default = known[key].default
            try:
                if key == "hidden_sizes":
                    values[key] = _ints(raw)
                elif key == "mask_fraction_range":
                    values[key] = _range(raw)
                else:
                    values[key] = cls._PARSERS[type(default)](raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{source}:{n}: bad value for {key}: {exc}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path):
        path = Path(path)
        return cls.parse(path.read_text(), str(path))

    def train_config(self):
        return TrainConfig(
            steps=self.steps, batch=self.batch, learning_rate=self.learning_rate,
            optimizer=self.optimizer, beta1=self.beta1, beta2=self.beta2, eps=self.eps,
            seed=self.seed, sigma=self.sigma, mask_fraction_range=self.mask_fraction_range,
            audio_guidance=self.audio_guidance, visual_guidance=self.visual_guidance)

    def duration_config(self):
        return TrainConfig(
            steps=self.duration_steps, batch=self.duration_batch,
            learning_rate=self.duration_learning_rate, optimizer=self.optimizer,
            beta1=self.beta1, beta2=self.beta2, eps=self.eps, seed=self.seed)

    def sample_config(self, steps=None, seed=None):
        return SampleConfig(steps=self.sampler_steps if steps is None else steps,
                            method=self.sampler_method,
                            seed=self.seed if seed is None else seed)

    def model_kwargs(self):
        return dict(mel_dim=self.mel_dim, vocab=self.unit_vocab, unit_dim=self.unit_embed_dim,
                    hidden=self.hidden_sizes, time_dim=self.time_dim,
                    duration_dim=self.duration_embed_dim, duration_hidden=self.duration_hidden,
                    duration_kernel=self.duration_kernel)
