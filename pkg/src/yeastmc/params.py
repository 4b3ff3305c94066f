"""Loading of versioned parameter files.

A parameter file is YAML with three top-level keys::

    version: "rx-defaults-1"      # free-form version tag, recorded in manifests
    parameters: {key: value, ...} # one key per constant, units in comments
    presets: {name: {key: value}} # optional named override sets

Unknown keys are rejected everywhere, and every dataclass field without a
default must be present.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .core import ConfigurationError

_TOP_KEYS = {"version", "parameters", "presets"}


@dataclass(frozen=True)
class ParameterFile:
    path: str
    version: str
    sha256: str
    parameters: dict[str, Any]
    presets: dict[str, dict[str, Any]]


def default_path(name: str) -> Path:
    return Path(str(resources.files("yeastmc") / "data" / name))


def read_parameter_file(path) -> ParameterFile:
    raw = Path(path).read_bytes()
    doc = yaml.safe_load(raw)
    if not isinstance(doc, Mapping):
        raise ConfigurationError(f"{path}: expected a mapping at top level")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"{path}: unknown top-level keys {sorted(unknown)}")
    if "parameters" not in doc or not isinstance(doc["parameters"], Mapping):
        raise ConfigurationError(f"{path}: missing 'parameters' mapping")
    presets = doc.get("presets") or {}
    if not isinstance(presets, Mapping) or not all(isinstance(v, Mapping) for v in presets.values()):
        raise ConfigurationError(f"{path}: 'presets' must map names to mappings")
    return ParameterFile(
        path=str(path),
        version=str(doc.get("version", "unversioned")),
        sha256=hashlib.sha256(raw).hexdigest(),
        parameters=dict(doc["parameters"]),
        presets={k: dict(v) for k, v in presets.items()},
    )


def _as_float(v, where: str) -> float:
    # YAML 1.1 reads "1.0e6" (no exponent sign) as a string
    if isinstance(v, bool):
        raise ConfigurationError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            pass
    raise ConfigurationError(f"{where}: expected a number, got {v!r}")


def build(cls, values: Mapping[str, Any], where: str = ""):
    """Instantiate dataclass ``cls`` from ``values`` with strict key checking."""
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(values) - set(names)
    if unknown:
        raise ConfigurationError(f"{where or cls.__name__}: unknown keys {sorted(unknown)}")
    missing = [n for n, f in names.items()
               if n not in values and f.default is dataclasses.MISSING
               and f.default_factory is dataclasses.MISSING]
    if missing:
        raise ConfigurationError(f"{where or cls.__name__}: missing keys {missing}")
    kwargs = {}
    for k, v in values.items():
        ftype = names[k].type if isinstance(names[k].type, str) else getattr(names[k].type, "__name__", "")
        if ftype == "float":
            v = _as_float(v, f"{where}.{k}")
        elif ftype == "int" and not (isinstance(v, int) and not isinstance(v, bool)):
            raise ConfigurationError(f"{where}.{k}: expected an integer, got {v!r}")
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{where or cls.__name__}: {exc}") from exc


def load_params(cls, path=None, preset: str | None = None, overrides: Mapping[str, Any] | None = None,
                default_name: str | None = None):
    """Load a parameter dataclass, apply a named preset, then ``overrides``.

    Returns ``(params, ParameterFile)``.
    """
    if path is None:
        path = default_path(default_name)
    pf = read_parameter_file(path)
    values = dict(pf.parameters)
    if preset is not None:
        if preset not in pf.presets:
            raise ConfigurationError(f"{path}: unknown preset {preset!r} (have {sorted(pf.presets)})")
        values.update(pf.presets[preset])
    if overrides:
        values.update(overrides)
    return build(cls, values, where=Path(path).name), pf
