"""Experiment configuration and the plain-text ``key = value`` config format."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .features import DEFAULT_ANGLE_SCALE, DEFAULT_TROTTER_STEPS

DEFAULT_SIZES = tuple(range(100, 1001, 100))


class ConfigError(ValueError):
    """A config file contains an unknown key or a malformed value."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved sweep configuration; every seed is explicit."""

    dataset: str = "mnist"
    class_pair: tuple[int, int] | None = None  # None: (1, 8) mnist / (0, 1) cifar10
    n_components: int = 10
    trotter_steps: int = DEFAULT_TROTTER_STEPS
    angle_scale: float = DEFAULT_ANGLE_SCALE
    wall_seed: int = 7
    relabel_seed: int = 202
    train_seed: int = 303
    subsample_seed: int = 404
    gamma_q: float | str = "median"
    gamma_c: float | str = "median"
    lambda_: float = 1.1
    noise_rate: float = 0.05
    sizes: tuple[int, ...] = DEFAULT_SIZES
    epochs: int = 100
    batch_size: int = 32
    lr: float = 0.003
    eval_set_size: int = 200
    repeats: int = 3

    def __post_init__(self):
        if self.dataset not in ("mnist", "cifar10"):
            raise ConfigError(f"dataset must be 'mnist' or 'cifar10', got {self.dataset!r}")
        if self.class_pair is None:
            pair = (1, 8) if self.dataset == "mnist" else (0, 1)
            object.__setattr__(self, "class_pair", pair)
        a, b = self.class_pair
        if a == b:
            raise ConfigError(f"class_pair must name two distinct classes, got {self.class_pair}")
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s2 <= s1 for s1, s2 in zip(sizes, sizes[1:])):
            raise ConfigError("sizes must be strictly increasing")
        if sizes[0] < 2 * self.batch_size:
            raise ConfigError(
                f"smallest size {sizes[0]} is below 2 * batch_size = {2 * self.batch_size}"
            )
        object.__setattr__(self, "sizes", sizes)
        for name in ("gamma_q", "gamma_c"):
            v = getattr(self, name)
            if not (v == "median" or (isinstance(v, (int, float)) and v > 0)):
                raise ConfigError(f"{name} must be a positive number or 'median', got {v!r}")
        if self.lambda_ < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lambda_}")
        if not 0.0 <= self.noise_rate < 0.5:
            raise ConfigError(f"noise_rate must be in [0, 0.5), got {self.noise_rate}")
        if self.epochs < 0 or self.repeats < 1 or self.eval_set_size < 4:
            raise ConfigError("epochs must be >= 0, repeats >= 1, eval_set_size >= 4")
        if self.lr <= 0 or self.batch_size < 1:
            raise ConfigError("lr must be positive and batch_size >= 1")


# config-file key -> dataclass field (only 'lambda' differs, being a keyword)
_KEY_TO_FIELD = {
    **{f.name: f.name for f in fields(ExperimentConfig) if f.name != "lambda_"},
    "lambda": "lambda_",
}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "dataset":
        return raw
    if key == "class_pair":
        parts = [int(p) for p in raw.split(",")]
        if len(parts) != 2:
            raise ValueError("expected two comma-separated class ids")
        return tuple(parts)
    if key == "sizes":
        return tuple(int(p) for p in raw.split(","))
    if key in ("gamma_q", "gamma_c"):
        return "median" if raw == "median" else float(raw)
    if key in ("angle_scale", "lambda", "noise_rate", "lr"):
        return float(raw)
    return int(raw)  # counts and seeds


def parse_config(path) -> ExperimentConfig:
    """Read a ``key = value`` config file; unknown keys are errors.

    Blank lines and lines starting with '#' are ignored. Missing keys take
    the defaults above.
    """
    overrides = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in _KEY_TO_FIELD:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                overrides[_KEY_TO_FIELD[key]] = _parse_value(key, raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    try:
        return ExperimentConfig(**overrides)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
