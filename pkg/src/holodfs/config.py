"""Run configuration: sectioned ``key = value`` files.

Frequencies are ordinary frequencies in MHz (converted to rad/ns here),
times in ns, angles in radians. Omitted keys take the default parameter set.

Example::

    [system]
    g = 50          ; or "auto" to derive it from G, Omega_L, Delta, delta
    kappa = 0.5

    [drives]
    angle = 0.7853981634
    phase = 0

    [decoherence]
    mode = individual
    multipliers = 0.8, 1.0, 1.2

    [simulation]
    dt = 0.0025
    n_max = 2

    [output]
    directory = results
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path


from .analysis import SimulationOptions
from .dynamics import IntegrationConfig
from .holonomy import ParameterError
from .model import PhysicalParams, effective_coupling, mhz


class ConfigError(ValueError):
    """Configuration file could not be read or validated."""

    exit_code = 2


class ConfigMissingError(ConfigError):
    pass


class ConfigSyntaxError(ConfigError):
    pass


class ConfigValueError(ConfigError):
    pass


_DEFAULT_MHZ = {
    "G": 1000.0,
    "Omega_L": 500.0,
    "Delta": 8000.0,
    "delta": 1000.0,
    "g": 50.0,
    "kappa": 0.5,
    "gamma": 0.004,
    "gamma_phi": 0.004,
}

_SECTIONS = {
    "system": set(_DEFAULT_MHZ),
    "drives": {"kind", "angle", "phase"},
    "decoherence": {"mode", "multipliers"},
    "simulation": {"dt", "n_max", "sample_stride", "duration_factor", "restrict", "excitation_margin"},
    "output": {"directory"},
}


@dataclass
class RunConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    gate_kind: str = "u1"
    angle: float = math.pi / 2
    phase: float = 0.0
    mode: str = "collective"
    options: SimulationOptions = field(default_factory=SimulationOptions)
    output_dir: Path = Path(".")
    source: Path | None = None


def _float(section: str, key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigValueError(f"[{section}] {key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigValueError(f"[{section}] {key}: value must be finite, got {raw!r}")
    return value


def _int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigValueError(f"[{section}] {key}: expected an integer, got {raw!r}") from None


def _bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in {"1", "true", "yes", "on"}:
        return True
    if low in {"0", "false", "no", "off"}:
        return False
    raise ConfigValueError(f"[{section}] {key}: expected a boolean, got {raw!r}")


def read_config_text(text: str, source: str = "<string>") -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str  # G and g are different keys
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigSyntaxError(f"{source}: {exc}") from None
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigValueError(f"{source}: unknown section [{section}]; allowed: {sorted(_SECTIONS)}")
        unknown = set(parser[section]) - _SECTIONS[section]
        if unknown:
            raise ConfigValueError(
                f"{source}: unknown key(s) {sorted(unknown)} in [{section}]; allowed: {sorted(_SECTIONS[section])}"
            )
    return parser


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    parser = read_config_text(text, source)
    sec = lambda name: parser[name] if parser.has_section(name) else {}  # noqa: E731

    system = sec("system")
    mhz_values = dict(_DEFAULT_MHZ)
    auto_g = False
    for key in _DEFAULT_MHZ:
        if key not in system:
            continue
        raw = system[key]
        if key == "g" and raw.strip().lower() == "auto":
            auto_g = True
            continue
        value = _float("system", key, raw)
        if value < 0:
            raise ConfigValueError(f"[system] {key}: frequencies and rates must be >= 0, got {value}")
        mhz_values[key] = value

    decoherence = sec("decoherence")
    multipliers = (0.8, 1.0, 1.2)
    if "multipliers" in decoherence:
        parts = [p for p in decoherence["multipliers"].replace(",", " ").split() if p]
        multipliers = tuple(_float("decoherence", "multipliers", p) for p in parts)
        if not multipliers or any(m < 0 for m in multipliers):
            raise ConfigValueError("[decoherence] multipliers: need one or more non-negative numbers")
    mode = decoherence.get("mode", "collective").strip().lower()
    if mode not in {"collective", "individual"}:
        raise ConfigValueError(f"[decoherence] mode: expected 'collective' or 'individual', got {mode!r}")

    try:
        params = PhysicalParams(
            **{k: mhz(v) for k, v in mhz_values.items()}, rate_multipliers=multipliers
        )
        if auto_g:
            params = replace(params, g=effective_coupling(params, +1))
    except ParameterError as exc:
        raise ConfigValueError(f"[system] {exc}") from None

    drives = sec("drives")
    kind = drives.get("kind", "u1").strip().lower()
    if kind not in {"u1", "u2"}:
        raise ConfigValueError(f"[drives] kind: expected 'u1' or 'u2', got {kind!r}")
    angle = _float("drives", "angle", drives["angle"]) if "angle" in drives else (math.pi / 2 if kind == "u1" else math.pi / 4)
    phase = _float("drives", "phase", drives["phase"]) if "phase" in drives else 0.0
    if not 0 <= angle <= math.pi:
        raise ConfigValueError(f"[drives] angle: must lie in [0, pi], got {angle}")

    sim = sec("simulation")
    default_dt = IntegrationConfig.default_dt(params.delta)
    dt = _float("simulation", "dt", sim["dt"]) if "dt" in sim else default_dt
    n_max = _int("simulation", "n_max", sim["n_max"]) if "n_max" in sim else 2
    stride = _int("simulation", "sample_stride", sim["sample_stride"]) if "sample_stride" in sim else 100
    factor = _float("simulation", "duration_factor", sim["duration_factor"]) if "duration_factor" in sim else 1.0
    restrict = _bool("simulation", "restrict", sim["restrict"]) if "restrict" in sim else True
    margin = _int("simulation", "excitation_margin", sim["excitation_margin"]) if "excitation_margin" in sim else 0
    if dt <= 0:
        raise ConfigValueError(f"[simulation] dt: must be positive, got {dt}")
    bound = IntegrationConfig.max_dt(params.delta)
    if dt > bound * (1 + 1e-12):
        raise ConfigValueError(
            f"[simulation] dt: {dt} ns violates the resolution bound dt <= 2*pi/(100*2*delta) = {bound:.6g} ns"
        )
    if n_max < 1:
        raise ConfigValueError(f"[simulation] n_max: must be >= 1, got {n_max}")
    if stride < 1:
        raise ConfigValueError(f"[simulation] sample_stride: must be >= 1, got {stride}")
    if factor <= 0:
        raise ConfigValueError(f"[simulation] duration_factor: must be positive, got {factor}")
    if margin < 0:
        raise ConfigValueError(f"[simulation] excitation_margin: must be >= 0, got {margin}")
    options = SimulationOptions(
        dt=None if "dt" not in sim else dt,
        n_max=n_max,
        sample_stride=stride,
        duration_factor=factor,
        restrict=restrict,
        excitation_margin=margin,
    )

    out = sec("output")
    output_dir = Path(out.get("directory", ".").strip() or ".")
    return RunConfig(params, kind, angle, phase, mode, options, output_dir, None)


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigMissingError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigMissingError(f"cannot read config file {path}: {exc}") from None
    cfg = parse_config_text(text, str(path))
    cfg.source = path
    return cfg


def params_to_mhz(params: PhysicalParams) -> dict[str, float]:
    # 12 significant digits hides the 2*pi round trip
    return {k: float(f"{getattr(params, k) / mhz(1.0):.12g}") for k in _DEFAULT_MHZ}
