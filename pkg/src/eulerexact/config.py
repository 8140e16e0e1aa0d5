"""Run configuration: key=value files, validation, and round-trip serialization.

The format is UTF-8 ``key = value`` lines with ``#`` comments.  Scalar keys
name the family constants and initial scale factors (``gamma``, ``K``,
``lambda``, ``alpha``, ``xi``, ``mu``, ``a0``, ``a1``, ``b0``, ``b1``),
integration controls (``t_end``, ``rel_tol``, ``abs_tol``, ``max_steps``,
``eps_blow``, ``method``), grid axes (``grid.x = min:max:count``), output
times (``times = t1,t2,...``), verification controls (``verify.*``) and sweep
axes (``sweep.<param> = v1,v2,...``).  Command-line flags override file keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_entries",
           "build_config", "serialize_config", "MODES", "SWEEPABLE"]

MODES = ("integrate", "sample", "verify", "classify", "sweep")
METHODS = ("RK45", "DOP853")
SWEEPABLE = ("gamma", "K", "lambda", "alpha", "xi", "mu", "a0", "a1", "b0", "b1")


class ConfigError(Exception):
    """Configuration rejected; the message names the offending key or line."""


@dataclass
class RunConfig:
    mode: str = ""
    dim: int = 3
    K: float = 1.0
    gamma: float = 1.4
    lam: float = 0.0
    alpha: float = 1.0
    xi: float = 1.0
    mu: float = 0.0
    a0: float = 1.0
    a1: float = 0.0
    b0: float = 1.0
    b1: float = 0.0
    t_end: float = 10.0
    times: list[float] = field(default_factory=list)
    grid_x: tuple[float, float, int] | None = None
    grid_y: tuple[float, float, int] | None = None
    grid_z: tuple[float, float, int] | None = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    eps_blow: float = 0.0  # resolved to 1e-10 * min(a0, b0) when not given
    method: str = "RK45"
    out: str | None = None
    verify_points: int = 20
    verify_seed: int = 0
    verify_h: float = 1e-3
    verify_time: float = 0.0
    sweep: dict[str, list[float]] = field(default_factory=dict)
    sweep_t_end: float | None = None


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': malformed number {raw!r}") from None


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': malformed integer {raw!r}") from None


def _parse_times(key, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    return [_parse_float(key, p) for p in parts]


def _parse_grid(key, raw):
    parts = raw.split(":")
    if len(parts) != 3:
        raise ConfigError(f"key '{key}': expected min:max:count, got {raw!r}")
    lo = _parse_float(key, parts[0].strip())
    hi = _parse_float(key, parts[1].strip())
    count = _parse_int(key, parts[2].strip())
    return (lo, hi, count)


def _parse_str(key, raw):
    return raw


# file/flag key -> (RunConfig attribute, parser)
_SCHEMA = {
    "mode": ("mode", _parse_str),
    "dim": ("dim", _parse_int),
    "K": ("K", _parse_float),
    "gamma": ("gamma", _parse_float),
    "lambda": ("lam", _parse_float),
    "alpha": ("alpha", _parse_float),
    "xi": ("xi", _parse_float),
    "mu": ("mu", _parse_float),
    "a0": ("a0", _parse_float),
    "a1": ("a1", _parse_float),
    "b0": ("b0", _parse_float),
    "b1": ("b1", _parse_float),
    "t_end": ("t_end", _parse_float),
    "times": ("times", _parse_times),
    "grid.x": ("grid_x", _parse_grid),
    "grid.y": ("grid_y", _parse_grid),
    "grid.z": ("grid_z", _parse_grid),
    "rel_tol": ("rel_tol", _parse_float),
    "abs_tol": ("abs_tol", _parse_float),
    "max_steps": ("max_steps", _parse_int),
    "eps_blow": ("eps_blow", _parse_float),
    "method": ("method", _parse_str),
    "out": ("out", _parse_str),
    "verify.points": ("verify_points", _parse_int),
    "verify.seed": ("verify_seed", _parse_int),
    "verify.h": ("verify_h", _parse_float),
    "verify.time": ("verify_time", _parse_float),
    "sweep.t_end": ("sweep_t_end", _parse_float),
}


def parse_entries(text: str) -> dict[str, object]:
    """Parse key=value lines into an attribute -> value mapping.

    Raises :class:`ConfigError` with the line number and key for unknown keys,
    malformed numbers, or lines without '='.
    """
    entries: dict[str, object] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {rawline.strip()!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        try:
            if key.startswith("sweep.") and key != "sweep.t_end":
                param = key[len("sweep."):]
                if param not in SWEEPABLE:
                    raise ConfigError(f"key '{key}': {param!r} is not sweepable "
                                      f"(choose from {', '.join(SWEEPABLE)})")
                values = _parse_times(key, raw)
                if not values:
                    raise ConfigError(f"key '{key}': empty value list")
                entries.setdefault("sweep", {})[param] = values
            elif key in _SCHEMA:
                attr, parser = _SCHEMA[key]
                entries[attr] = parser(key, raw)
            else:
                raise ConfigError(f"unknown key '{key}'")
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return entries


def build_config(entries: dict[str, object]) -> RunConfig:
    """Fill defaults, resolve derived defaults, and validate."""
    valid = {f.name for f in fields(RunConfig)}
    unknown = set(entries) - valid
    if unknown:
        raise ConfigError(f"unknown config attribute(s): {sorted(unknown)}")
    cfg = RunConfig(**entries)

    def err(msg):
        raise ConfigError(msg)

    if cfg.mode and cfg.mode not in MODES:
        err(f"mode must be one of {', '.join(MODES)}; got {cfg.mode!r}")
    if cfg.dim not in (2, 3):
        err(f"dim must be 2 or 3, got {cfg.dim}")
    if not cfg.K > 0:
        err(f"K must be > 0, got {cfg.K}")
    if not cfg.gamma >= 1:
        err(f"gamma must be >= 1, got {cfg.gamma}")
    if not cfg.alpha >= 0:
        err(f"alpha must be >= 0, got {cfg.alpha}")
    if not cfg.mu >= 0:
        err(f"mu must be >= 0, got {cfg.mu}")
    if not cfg.a0 > 0:
        err(f"a0 must be > 0, got {cfg.a0}")
    if not cfg.b0 > 0:
        err(f"b0 must be > 0, got {cfg.b0}")
    if not (0.0 < cfg.rel_tol < 1.0):
        err(f"rel_tol must lie in (0, 1), got {cfg.rel_tol}")
    if not (0.0 < cfg.abs_tol < 1.0):
        err(f"abs_tol must lie in (0, 1), got {cfg.abs_tol}")
    if cfg.max_steps < 1:
        err(f"max_steps must be >= 1, got {cfg.max_steps}")
    if cfg.method not in METHODS:
        err(f"method must be one of {', '.join(METHODS)}; got {cfg.method!r}")
    if cfg.verify_points < 1:
        err(f"verify.points must be >= 1, got {cfg.verify_points}")
    if not cfg.verify_h > 0:
        err(f"verify.h must be > 0, got {cfg.verify_h}")
    if cfg.verify_time < 0:
        err(f"verify.time must be >= 0, got {cfg.verify_time}")

    for name, axis in (("grid.x", cfg.grid_x), ("grid.y", cfg.grid_y), ("grid.z", cfg.grid_z)):
        if axis is None:
            continue
        lo, hi, count = axis
        if count < 2:
            err(f"{name}: count must be >= 2, got {count}")
        if not hi > lo:
            err(f"{name}: max must exceed min, got {lo}:{hi}")

    if cfg.times:
        if any(t < 0 for t in cfg.times):
            err("times must be >= 0")
        if any(t1 >= t2 for t1, t2 in zip(cfg.times, cfg.times[1:])):
            err("times must be strictly increasing")
        if "t_end" in entries:
            if cfg.times[-1] > cfg.t_end:
                err(f"times must lie within [0, t_end={cfg.t_end}]")
        elif cfg.times[-1] > cfg.t_end:
            cfg.t_end = cfg.times[-1]

    if "eps_blow" in entries:
        if not cfg.eps_blow > 0:
            err(f"eps_blow must be > 0, got {cfg.eps_blow}")
    else:
        cfg.eps_blow = 1e-10 * min(cfg.a0, cfg.b0)

    for param, values in cfg.sweep.items():
        bad = next((v for v in values if param == "gamma" and v < 1
                    or param == "K" and v <= 0
                    or param == "alpha" and v < 0
                    or param == "mu" and v < 0
                    or param in ("a0", "b0") and v <= 0), None)
        if bad is not None:
            err(f"sweep.{param}: invalid value {bad}")

    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse a config file into a fully-populated, validated RunConfig."""
    return build_config(parse_entries(text))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Emit a config file that parses back to an equal RunConfig."""
    lines = []
    attr_to_key = {attr: key for key, (attr, _) in _SCHEMA.items()}
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if f.name == "sweep":
            for param, values in value.items():
                lines.append(f"sweep.{param} = {','.join(_fmt(v) for v in values)}")
            continue
        if value is None or value == [] or value == "":
            continue
        key = attr_to_key[f.name]
        if f.name == "times":
            lines.append(f"{key} = {','.join(_fmt(t) for t in value)}")
        elif f.name.startswith("grid_"):
            lo, hi, count = value
            lines.append(f"{key} = {_fmt(lo)}:{_fmt(hi)}:{count}")
        else:
            lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"
