"""Experiment configuration: flat key = value files plus CLI overrides.

Every experiment parameter has a key; defaults follow the reference setup
(64-QAM, 10x10, 150 000 symbols, 1000 reads/sweeps, p = 1.5). Unknown keys and
malformed values raise ConfigError with file/line diagnostics.
"""

from dataclasses import dataclass, fields, replace
import math

from .errors import ConfigError

EXPERIMENTS = ("ser-sweep", "norm-dist", "chain-sweep", "sweeps-sweep")
SOLVER_NAMES = ("zfp", "lrzfp", "exact-restricted", "sim-anneal", "sphere")

_DEFAULT_CHANNELS = {
    "norm-dist": 2000,
    "chain-sweep": 150,
    "sweeps-sweep": 150,
    "ser-sweep": 100,
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    order: int = 64
    nr: int = 10
    nt: int = 10
    snr_db_list: tuple[float, ...] = (24.0, 26.0, 28.0, 30.0, 32.0, 34.0, 36.0, 38.0, 40.0)
    num_symbols: int = 150_000
    num_channels: int = 0          # 0 = per-experiment default
    solvers: tuple[str, ...] = ("zfp", "lrzfp", "sim-anneal")
    num_reads: int = 1000
    num_sweeps: int = 1000
    beta_min: float | None = None
    beta_max: float | None = None
    beta_shape: str = "geometric"
    p: float = 1.5
    p_list: tuple[float, ...] = (0.6, 0.9, 1.2, 1.5, 1.8)
    sweeps_list: tuple[int, ...] = (200, 400, 1000, 2000, 4000)
    seed: int = 1
    out: str = ""                  # "" = <experiment>.csv
    threads: int = 1
    delta: float = 0.75
    embedded: bool = False
    chimera_m: int = 0             # 0 = smallest grid that fits
    clip: bool = False
    clip_limit: float = 1.0
    clip_step: float = 0.0625
    fallback_to_lrzfp: bool = False

    @property
    def channels(self) -> int:
        return self.num_channels if self.num_channels else _DEFAULT_CHANNELS[self.experiment]

    @property
    def out_path(self) -> str:
        return self.out if self.out else f"{self.experiment}.csv"


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float(text: str) -> float:
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(text)


_PARSERS = {
    "order": int,
    "nr": int,
    "nt": int,
    "snr_db_list": lambda s: tuple(_parse_float(v) for v in s.split(",") if v.strip()),
    "num_symbols": int,
    "num_channels": int,
    "solvers": lambda s: tuple(v.strip() for v in s.split(",") if v.strip()),
    "num_reads": int,
    "num_sweeps": int,
    "beta_min": lambda s: None if not s.strip() else float(s),
    "beta_max": lambda s: None if not s.strip() else float(s),
    "beta_shape": str.strip,
    "p": float,
    "p_list": lambda s: tuple(float(v) for v in s.split(",") if v.strip()),
    "sweeps_list": lambda s: tuple(int(v) for v in s.split(",") if v.strip()),
    "seed": int,
    "out": str.strip,
    "threads": int,
    "delta": float,
    "embedded": _parse_bool,
    "chimera_m": int,
    "clip": _parse_bool,
    "clip_limit": float,
    "clip_step": float,
    "fallback_to_lrzfp": _parse_bool,
}


def parse_config_file(path: str) -> dict:
    """Read a flat key = value file; '#' starts a comment."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, text = (part.strip() for part in line.split("=", 1))
        if key == "experiment":
            values[key] = text
            continue
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](text)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def parse_override(key: str, text: str) -> tuple[str, object]:
    """Parse one 'key=value' override from the command line."""
    if key not in _PARSERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return key, _PARSERS[key](text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from exc


def build_config(experiment: str, *override_maps: dict) -> ExperimentConfig:
    """Layer defaults, file values and CLI overrides, then validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    merged: dict = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for layer in override_maps:
        for key, value in layer.items():
            if key == "experiment":
                if value != experiment:
                    raise ConfigError(
                        f"config file experiment {value!r} conflicts with requested {experiment!r}"
                    )
                continue
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    cfg = ExperimentConfig(experiment=experiment, **merged)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    def fail(field_name: str, message: str):
        raise ConfigError(f"field {field_name!r}: {message}")

    if cfg.order not in (4, 16, 64, 256):
        fail("order", f"unsupported QAM order {cfg.order}")
    if cfg.nr < 1 or cfg.nt < 1:
        fail("nr/nt", "antenna counts must be positive")
    if cfg.nr > cfg.nt:
        fail("nr", f"nr = {cfg.nr} exceeds nt = {cfg.nt}")
    if cfg.num_symbols < 1:
        fail("num_symbols", "must be at least 1")
    if cfg.num_channels < 0:
        fail("num_channels", "must be non-negative (0 = default)")
    for name in cfg.solvers:
        if name not in SOLVER_NAMES:
            fail("solvers", f"unknown solver {name!r}; expected subset of {SOLVER_NAMES}")
    if not cfg.solvers:
        fail("solvers", "at least one solver is required")
    if cfg.num_reads < 1 or cfg.num_sweeps < 1:
        fail("num_reads/num_sweeps", "must be at least 1")
    if cfg.beta_shape not in ("linear", "geometric"):
        fail("beta_shape", f"expected linear or geometric, got {cfg.beta_shape!r}")
    if cfg.beta_min is not None and cfg.beta_max is not None and not cfg.beta_min < cfg.beta_max:
        fail("beta_min", "beta_min must be smaller than beta_max")
    if cfg.experiment == "ser-sweep" and not cfg.snr_db_list:
        fail("snr_db_list", "ser-sweep needs at least one SNR point")
    if cfg.experiment == "chain-sweep" and not cfg.p_list:
        fail("p_list", "chain-sweep needs at least one chain-strength value")
    if cfg.experiment == "sweeps-sweep" and not cfg.sweeps_list:
        fail("sweeps_list", "sweeps-sweep needs at least one sweep count")
    if cfg.threads < 1:
        fail("threads", "must be at least 1")
    if not 0.25 < cfg.delta < 1.0:
        fail("delta", "LLL parameter must lie in (1/4, 1)")
    if cfg.chimera_m < 0:
        fail("chimera_m", "must be non-negative (0 = auto)")
    if cfg.clip_limit <= 0 or cfg.clip_step <= 0:
        fail("clip_limit/clip_step", "must be positive")


def with_overrides(cfg: ExperimentConfig, **kwargs) -> ExperimentConfig:
    out = replace(cfg, **kwargs)
    validate_config(out)
    return out
