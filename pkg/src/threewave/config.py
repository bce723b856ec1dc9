"""Run configuration: JSON parsing, validation, and hashing.

A run is fully described by a :class:`RunConfig`: model parameters,
quadrature controls, grid sizes, per-command options, the RNG seed and the
output directory.  The JSON form round-trips losslessly (floats are emitted
with 17 significant digits) and the SHA-256 of the canonical serialization
identifies the run in every output's metadata sidecar.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .params import Params, ParamError
from .quadrature import QuadratureSpec

__all__ = ["RunConfig", "ConfigError", "parse_config", "load_config",
           "serialize_config", "config_hash"]


class ConfigError(ValueError):
    """A configuration that cannot be parsed or validated."""


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run byte for byte."""

    params: Params = field(default_factory=Params)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    grids: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "out"

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "quadrature": dataclasses.asdict(self.quadrature),
            "grids": dict(self.grids),
            "options": dict(self.options),
            "seed": self.seed,
            "out_dir": self.out_dir,
        }


def _canonical(obj):
    # floats via repr (shortest round-trip form) inside a sorted-key dump
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def serialize_config(cfg: RunConfig) -> str:
    """JSON text that :func:`parse_config` maps back to an equal config."""
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def config_hash(cfg: RunConfig) -> str:
    """Hex SHA-256 of the canonical serialization."""
    return hashlib.sha256(_canonical(cfg.to_dict()).encode()).hexdigest()


def _expect_mapping(val, where):
    if not isinstance(val, dict):
        raise ConfigError(f"'{where}' must be a JSON object, got {type(val).__name__}")
    return val


def parse_config(text: str) -> RunConfig:
    """Parse JSON configuration text into a validated :class:`RunConfig`.

    Syntax errors are reported with line and column; an inadmissible
    parameter set is rejected with the message naming the violated
    constraint.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    raw = _expect_mapping(raw, "config")

    known = {"params", "quadrature", "grids", "options", "seed", "out_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    try:
        params = Params(**_expect_mapping(raw.get("params", {}), "params"))
    except ParamError as e:
        raise ConfigError(f"invalid params: {e}") from e
    except TypeError as e:
        raise ConfigError(f"invalid params: {e}") from e

    try:
        quad = QuadratureSpec(**_expect_mapping(raw.get("quadrature", {}), "quadrature"))
    except (ValueError, TypeError) as e:
        raise ConfigError(f"invalid quadrature: {e}") from e

    grids = _expect_mapping(raw.get("grids", {}), "grids")
    options = _expect_mapping(raw.get("options", {}), "options")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("'seed' must be an integer")
    out_dir = raw.get("out_dir", "out")
    if not isinstance(out_dir, str):
        raise ConfigError("'out_dir' must be a string")

    return RunConfig(params=params, quadrature=quad, grids=grids,
                     options=options, seed=seed, out_dir=out_dir)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path!r}: {e}") from e
    return parse_config(text)
