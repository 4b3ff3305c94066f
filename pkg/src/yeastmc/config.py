"""Experiment configuration: YAML schema with strict validation.

Every section is a frozen dataclass. Unknown keys, wrong types and
out-of-range values raise :class:`ConfigurationError` naming the full
field path (``stimulus.amplitude_uM``).

Example::

    scenario: rx_only_synthetic
    strain: bar1_delta
    horizon_min: 363
    stimulus: {protocol: three_pulse, amplitude_uM: 10}
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Optional

import yaml

from .core import Concentration, ConfigurationError, StimulusProfile

SCENARIOS = ("rx_only_synthetic", "e2e_tx_channel_rx", "channel_only", "mc_oracle")


@dataclass(frozen=True)
class StimulusConfig:
    protocol: Literal["single_pulse", "three_pulse", "segments", "none"] = "single_pulse"
    amplitude_uM: float = 10.0
    width_min: float = 1.0
    gap_min: float = 120.0
    n_pulses: int = 3
    start_min: float = 0.0
    # (t_start_min, t_end_min, level_nM) triples for protocol "segments"
    segments: tuple = ()

    def __post_init__(self):
        if self.amplitude_uM < 0:
            raise ValueError("amplitude_uM must be >= 0")
        if self.width_min <= 0 or self.gap_min < 0:
            raise ValueError("width_min must be > 0 and gap_min >= 0")
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        segs = []
        for seg in self.segments:
            if not isinstance(seg, (list, tuple)) or len(seg) != 3:
                raise ValueError("segments must be [start_min, end_min, level_nM] triples")
            # YAML 1.1 reads "1.0e6" as a string
            a, b, lvl = (float(v) for v in seg)
            if not b > a or lvl < 0:
                raise ValueError("each segment needs end > start and level >= 0")
            segs.append((a, b, lvl))
        object.__setattr__(self, "segments", tuple(segs))


@dataclass(frozen=True)
class GeometryConfig:
    r_rx_m: float = 2.0e-5


@dataclass(frozen=True)
class ChannelConfig:
    D_alpha: float = 1.0e-10          # m^2/s
    k_alpha: float = 1.0e-3           # 1/s
    literal_exponent: bool = False
    k_re: float = 0.0                 # 1/(M s), Monte Carlo Bar1 mode only
    bar1_uniform_M: float = 0.0       # prescribed Bar1 level for Monte Carlo
    impulse_mass_mol: float = 1.0e-18  # channel_only / mc_oracle release
    grid_dt_s: float = 6.0            # receiver-input sampling of the channel output


@dataclass(frozen=True)
class TransmitterConfig:
    constitutive: bool = False
    n_cells: float = 1.0e5            # transmitter cells lumped at the source point
    cell_volume_m3: float = 4.2e-17
    pre_equilibrate_min: float = 3000.0


@dataclass(frozen=True)
class ReceiverConfig:
    input_mode: Literal["prescribed", "forced"] = "prescribed"


@dataclass(frozen=True)
class ParamsConfig:
    receiver: Optional[str] = None
    transmitter: Optional[str] = None
    receiver_overrides: dict = field(default_factory=dict)
    transmitter_overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SolverConfig:
    rtol: float = 1e-6
    atol: float = 1e-9
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    max_steps: int = 2_000_000


@dataclass(frozen=True)
class EventsConfig:
    species: str = "Fus1"
    prominence_fraction: float = 0.2
    min_separation_min: float = 30.0

    def __post_init__(self):
        if not 0 <= self.prominence_fraction <= 1:
            raise ValueError("prominence_fraction must lie in [0, 1]")
        if self.min_separation_min <= 0:
            raise ValueError("min_separation_min must be > 0")


@dataclass(frozen=True)
class McConfig:
    n_particles: int = 100_000
    dt_s: float = 0.01
    probe_radius_m: float = 5.0e-6
    sample_times_s: tuple = (0.1, 0.2, 0.4, 0.8, 1.6)
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    sample_dt_min: float = 0.1
    plots: bool = True
    plot_formats: tuple = ("svg",)
    species: tuple = ("Fus1_mRNA", "Fus1")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Literal["rx_only_synthetic", "e2e_tx_channel_rx", "channel_only", "mc_oracle"]
    strain: Literal["bar1_plus", "bar1_delta"] = "bar1_plus"
    seed: int = 0
    horizon_min: float = 363.0
    stimulus: StimulusConfig = StimulusConfig()
    geometry: GeometryConfig = GeometryConfig()
    channel: ChannelConfig = ChannelConfig()
    transmitter: TransmitterConfig = TransmitterConfig()
    receiver: ReceiverConfig = ReceiverConfig()
    params: ParamsConfig = ParamsConfig()
    solver: SolverConfig = SolverConfig()
    events: EventsConfig = EventsConfig()
    mc: McConfig = McConfig()
    output: OutputConfig = OutputConfig()

    def __post_init__(self):
        if self.horizon_min <= 0:
            raise ValueError("horizon_min must be > 0")
        if self.scenario in ("e2e_tx_channel_rx", "channel_only", "mc_oracle") and not self.geometry.r_rx_m > 0:
            raise ConfigurationError("geometry.r_rx_m: must be > 0 for channel scenarios")

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def digest(self) -> str:
        """sha256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace_path(self, dotted: str, value) -> "ExperimentConfig":
        """Copy with one dotted field replaced (validation re-run)."""
        d = self.to_dict()
        node = d
        keys = dotted.split(".")
        for k in keys[:-1]:
            if not isinstance(node, dict) or k not in node:
                raise ConfigurationError(f"{dotted}: unknown config path")
            node = node[k]
        if keys[-1] not in node and not _is_override_map(keys):
            raise ConfigurationError(f"{dotted}: unknown config path")
        node[keys[-1]] = value
        return config_from_dict(d)

    def stimulus_profile(self) -> StimulusProfile:
        from .protocols import single_pulse_protocol, three_pulse_protocol
        s = self.stimulus
        amp = Concentration(s.amplitude_uM, "µM")
        if s.protocol == "segments":
            return StimulusProfile(tuple((a, b, Concentration(lvl)) for a, b, lvl in s.segments))
        if s.protocol == "none" or s.amplitude_uM == 0:
            return StimulusProfile()
        if s.protocol == "single_pulse":
            return single_pulse_protocol(amp, s.width_min, s.start_min)
        if s.protocol == "three_pulse":
            return three_pulse_protocol(amp, s.width_min, s.gap_min, s.n_pulses, s.start_min)
        return StimulusProfile(tuple((a, b, Concentration(lvl)) for a, b, lvl in s.segments))


def _is_override_map(keys) -> bool:
    return len(keys) == 3 and keys[0] == "params" and keys[1].endswith("_overrides")


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _convert(tp, value, path: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigurationError(f"{path}: expected a mapping")
        return _build(tp, value, path)
    if origin is Literal:
        if value not in args:
            raise ConfigurationError(f"{path}: must be one of {list(args)}, got {value!r}")
        return value
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(inner[0], value, path)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{path}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{path}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool):
            raise ConfigurationError(f"{path}: expected a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{path}: expected a number, got {value!r}") from None
    if tp is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{path}: expected a string, got {value!r}")
        return value
    if tp is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigurationError(f"{path}: expected a list")
        return tuple(tuple(v) if isinstance(v, list) else v for v in value)
    if tp is dict:
        if not isinstance(value, dict):
            raise ConfigurationError(f"{path}: expected a mapping")
        return dict(value)
    return value


def _build(cls, data: dict, path: str = ""):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigurationError(f"{where}{unknown[0]}: unknown key")
    kwargs = {}
    for f in dataclasses.fields(cls):
        sub = f"{path}.{f.name}" if path else f.name
        if f.name in data:
            kwargs[f.name] = _convert(hints[f.name], data[f.name], sub)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigurationError(f"{sub}: required key missing")
    try:
        return cls(**kwargs)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path or cls.__name__}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("config: top level must be a mapping")
    return _build(ExperimentConfig, data)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment file.

    Relative parameter-file paths are resolved against the config's folder.
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML ({exc})") from exc
    cfg = config_from_dict(data or {})
    pp = cfg.params
    fixed = {}
    for key in ("receiver", "transmitter"):
        v = getattr(pp, key)
        if v is not None and not Path(v).is_absolute():
            fixed[key] = str((path.parent / v).resolve())
    if fixed:
        cfg = dataclasses.replace(cfg, params=dataclasses.replace(pp, **fixed))
    return cfg
