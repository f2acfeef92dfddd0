"""Line-oriented ``key = value`` config files with ``[section]`` headers.

Grammar::

    # comment            (also ``;``); blank lines ignored
    [section]
    key = value          value typed by the default for that key
    steps_list = 1, 2, 4 list values are comma separated

Every tunable has a default below; a resolved snapshot lists all of them.
"""

from __future__ import annotations

import copy

DEFAULTS = {
    "run": {
        "seed": 0,
    },
    "data": {
        "kind": "two_moons",  # two_moons | checkerboard | gauss_mix8 | spiral | blobs
        "n": 4096,
        "noise": 0.05,
        "side": 8,
    },
    "aux": {
        "latent_dim": 32,
        "beta": 1e-3,
        "width": 128,
        "depth": 3,
        "steps": 16000,
        "batch_size": 256,
        "lr": 3e-4,
        "beta1": 0.9,
        "beta2": 0.99,
        "weight_decay": 0.0,
        "eps": 1e-8,
        "log_every": 100,
    },
    "fm": {
        "width": 128,
        "depth": 3,
        "steps": 8000,
        "batch_size": 256,
        "lr": 3e-4,
        "beta1": 0.9,
        "beta2": 0.99,
        "weight_decay": 0.0,
        "eps": 1e-8,
        "log_every": 100,
        "ema_decay": 0.999,
    },
    "latent": {
        "width": 256,
        "depth": 3,
        "steps": 8000,
        "batch_size": 256,
        "lr": 3e-4,
        "beta1": 0.9,
        "beta2": 0.99,
        "weight_decay": 0.0,
        "eps": 1e-8,
        "log_every": 100,
        "ema_decay": 0.999,
    },
    "generate": {
        "latent_steps": 4,
        "latent_method": "midpoint",
        "fm_steps": 2,
        "fm_method": "midpoint",
        "batch_size": 1024,
        "invert_steps": 32,
        "alpha": 0.5,
        "interp_points": 5,
        "interp_mode": "linear_in_w",
    },
    "sweep": {
        "steps_list": [1, 2, 4, 8, 16],
        "solver": "midpoint",
        "projections": 512,
        "reference_n": 4096,
        "reference_seed": 1000,
    },
}

# training sections also seed their model init from run.seed plus this offset
SEED_OFFSETS = {"aux": 0, "fm": 1, "fm-baseline": 3, "latent": 2}


class ConfigError(ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


def _coerce(raw, default, line, field):
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, list):
            return [int(v) for v in raw.split(",") if v.strip()]
        return raw
    except ValueError:
        kind = "list of integers" if isinstance(default, list) else type(default).__name__
        raise ConfigError(f"{field}: expected {kind}, got {raw!r}", line, field) from None


def parse(text: str) -> dict:
    """Parse config text on top of :data:`DEFAULTS`; returns a full nested dict."""
    cfg = copy.deepcopy(DEFAULTS)
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip()
            if section not in cfg:
                raise ConfigError(f"unknown section [{section}]", lineno, section)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in cfg[section]:
            raise ConfigError(f"unknown key {section}.{key}", lineno, f"{section}.{key}")
        cfg[section][key] = _coerce(raw, DEFAULTS[section][key], lineno, f"{section}.{key}")
    validate(cfg)
    return cfg


def load(path) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULTS)
    with open(path) as fh:
        return parse(fh.read())


def validate(cfg: dict) -> None:
    from .ode import Method

    for section in ("aux", "fm", "latent"):
        for key in ("steps", "batch_size", "width", "depth", "log_every"):
            if cfg[section][key] < 1:
                raise ConfigError(f"{section}.{key} must be >= 1", field=f"{section}.{key}")
        if not cfg[section]["lr"] > 0:
            raise ConfigError(f"{section}.lr must be > 0", field=f"{section}.lr")
        for key in ("beta1", "beta2"):
            if not 0.0 <= cfg[section][key] < 1.0:
                raise ConfigError(f"{section}.{key} must be in [0, 1)", field=f"{section}.{key}")
    for section in ("fm", "latent"):
        if not 0.0 <= cfg[section]["ema_decay"] < 1.0:
            raise ConfigError(f"{section}.ema_decay must be in [0, 1)", field=f"{section}.ema_decay")
    if cfg["aux"]["latent_dim"] < 1:
        raise ConfigError("aux.latent_dim must be >= 1", field="aux.latent_dim")
    if cfg["data"]["n"] < 1:
        raise ConfigError("data.n must be >= 1", field="data.n")
    if cfg["data"]["noise"] < 0:
        raise ConfigError("data.noise must be >= 0", field="data.noise")
    if not cfg["aux"]["beta"] > 0:
        raise ConfigError("aux.beta must be > 0", field="aux.beta")
    if cfg["data"]["kind"] not in ("two_moons", "checkerboard", "gauss_mix8", "spiral", "blobs"):
        raise ConfigError(f"unknown data.kind {cfg['data']['kind']!r}", field="data.kind")
    if not 2 <= cfg["data"]["side"] <= 16:
        raise ConfigError("data.side must be in [2, 16]", field="data.side")
    for key in ("latent_method", "fm_method"):
        if cfg["generate"][key] not in {m.value for m in Method}:
            raise ConfigError(f"unknown solver {cfg['generate'][key]!r}", field=f"generate.{key}")
    if cfg["sweep"]["solver"] not in {m.value for m in Method}:
        raise ConfigError(f"unknown solver {cfg['sweep']['solver']!r}", field="sweep.solver")
    if cfg["generate"]["interp_mode"] not in ("linear_in_z", "linear_in_w"):
        raise ConfigError(f"unknown interp_mode {cfg['generate']['interp_mode']!r}",
                          field="generate.interp_mode")
    if not 0.0 <= cfg["generate"]["alpha"]:
        raise ConfigError("generate.alpha must be >= 0", field="generate.alpha")
    for key in ("latent_steps", "fm_steps", "batch_size", "invert_steps", "interp_points"):
        if cfg["generate"][key] < 1:
            raise ConfigError(f"generate.{key} must be >= 1", field=f"generate.{key}")
    if not cfg["sweep"]["steps_list"] or min(cfg["sweep"]["steps_list"]) < 1:
        raise ConfigError("sweep.steps_list must be non-empty with entries >= 1",
                          field="sweep.steps_list")
    if cfg["sweep"]["projections"] < 1 or cfg["sweep"]["reference_n"] < 1:
        raise ConfigError("sweep.projections and sweep.reference_n must be >= 1", field="sweep")


def dump(cfg: dict) -> str:
    lines = []
    for section, values in cfg.items():
        lines.append(f"[{section}]")
        for key, val in values.items():
            if isinstance(val, list):
                val = ", ".join(str(v) for v in val)
            lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)
