"""Run configuration: flat dotted-key text, strictly validated.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored.  Unknown keys, duplicates and out-of-range values are rejected
with the offending key path in the message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import ConfigError
from .model import FluidParameters
from .solver import SchemeConfig

_THETA_MODES = ("explicit", "implicit")
_STAB_FIELDS = ("tau0", "u0", "b0", "theta0")
_STAB_SHAPES = ("shift", "sine", "jump")


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 128
    t_end: float = 1.0
    dt_init: float = 1e-3
    cfl_safety: float = 0.4
    theta_step_mode: str = "implicit"
    snapshot_interval: float = 0.1
    R: float = 1.0
    cv: float = 1.0
    mu: float = 1.0
    kappa: float = 1.0
    init_preset: str | None = None
    init_file: str | None = None
    output_dir: str = "out"
    mollifier_epsilon: float = 0.05
    stability_delta: float = 0.01
    stability_field: str = "theta0"
    stability_shape: str = "sine"
    stability_q: float = math.inf
    stability_r: float = 1.6
    stability_eps: float = 0.25
    convergence_levels: int = 3

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(
            dt_init=self.dt_init,
            cfl_safety=self.cfl_safety,
            t_end=self.t_end,
            theta_step_mode=self.theta_step_mode,
            snapshot_interval=self.snapshot_interval,
        )

    def fluid_parameters(self) -> FluidParameters:
        return FluidParameters(R=self.R, cv=self.cv, mu=self.mu, kappa=self.kappa)


def _parse_float(key: str, raw: str, allow_inf: bool = False) -> float:
    try:
        v = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc
    if math.isnan(v) or (math.isinf(v) and not allow_inf):
        raise ConfigError(f"{key}: expected a finite number, got {raw!r}")
    return v


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


# key path -> (attribute, parser)
_KEYS = {
    "grid.n": ("grid_n", _parse_int),
    "time.t_end": ("t_end", _parse_float),
    "time.dt_init": ("dt_init", _parse_float),
    "time.cfl_safety": ("cfl_safety", _parse_float),
    "time.theta_step_mode": ("theta_step_mode", None),
    "output.snapshot_interval": ("snapshot_interval", _parse_float),
    "params.R": ("R", _parse_float),
    "params.cv": ("cv", _parse_float),
    "params.mu": ("mu", _parse_float),
    "params.kappa": ("kappa", _parse_float),
    "init.preset": ("init_preset", None),
    "init.file": ("init_file", None),
    "output.dir": ("output_dir", None),
    "mollifier.epsilon": ("mollifier_epsilon", _parse_float),
    "stability.delta": ("stability_delta", _parse_float),
    "stability.field": ("stability_field", None),
    "stability.shape": ("stability_shape", None),
    "stability.q": ("stability_q", lambda k, v: _parse_float(k, v, allow_inf=True)),
    "stability.r": ("stability_r", lambda k, v: _parse_float(k, v, allow_inf=True)),
    "stability.eps": ("stability_eps", _parse_float),
    "convergence.levels": ("convergence_levels", _parse_int),
}


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration document."""
    values: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key '{key}' (line {lineno})")
        if key in seen:
            raise ConfigError(f"duplicate key '{key}' (line {lineno})")
        seen.add(key)
        attr, parser = _KEYS[key]
        values[attr] = raw if parser is None else parser(key, raw)

    cfg = RunConfig(**values)  # type: ignore[arg-type]
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.grid_n < 1:
        raise ConfigError("grid.n must be at least 1")
    if cfg.t_end < 0.0:
        raise ConfigError("time.t_end must be nonnegative")
    if not cfg.dt_init > 0.0:
        raise ConfigError("time.dt_init must be strictly positive")
    if not 0.0 < cfg.cfl_safety <= 1.0:
        raise ConfigError("time.cfl_safety must lie in (0, 1]")
    if cfg.theta_step_mode not in _THETA_MODES:
        raise ConfigError("time.theta_step_mode must be 'explicit' or 'implicit'")
    if not cfg.snapshot_interval > 0.0:
        raise ConfigError("output.snapshot_interval must be strictly positive")
    for key in ("R", "cv", "mu", "kappa"):
        if not getattr(cfg, key) > 0.0:
            raise ConfigError(f"params.{key} must be strictly positive")
    if cfg.init_preset is not None and cfg.init_file is not None:
        raise ConfigError("init.preset and init.file are mutually exclusive")
    if cfg.init_preset is None and cfg.init_file is None:
        raise ConfigError("missing required key: one of init.preset or init.file")
    if not 0.0 < cfg.mollifier_epsilon < 1.0:
        raise ConfigError("mollifier.epsilon must lie in (0, 1)")
    if cfg.stability_delta < 0.0:
        raise ConfigError("stability.delta must be nonnegative")
    if cfg.stability_field not in _STAB_FIELDS:
        raise ConfigError("stability.field must be one of tau0, u0, b0, theta0")
    if cfg.stability_shape not in _STAB_SHAPES:
        raise ConfigError("stability.shape must be one of shift, sine, jump")
    if not cfg.stability_q >= 1.0 or not cfg.stability_r >= 1.0:
        raise ConfigError("stability.q and stability.r must be at least 1")
    if not 0.0 < cfg.stability_eps < 0.5:
        raise ConfigError("stability.eps must lie in (0, 1/2)")
    if cfg.convergence_levels < 3:
        raise ConfigError("convergence.levels must be at least 3")


def config_text(cfg: RunConfig) -> str:
    """Serialize a configuration back to the flat dotted-key format."""
    lines = []
    attr_to_key = {attr: key for key, (attr, _) in _KEYS.items()}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        lines.append(f"{attr_to_key[f.name]} = {value}")
    return "\n".join(lines) + "\n"
