"""Run configuration: a flat YAML mapping of scalar keys.

Example::

    phi1: 2          # Angle8 code, i.e. pi/2
    phi2: 2
    x1: 0
    x2: 0
    n: 27441
    test_fraction: 0.5
    omega: 0.18
    nu: 0.14
    k: 2
    p: 0.0
    noise: lab-default   # or "ideal"; the keys below override the preset
    v: 0.935
    adversary: honest
    seed: 1
    output_dir: out/lab-run-1
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .devices import NoiseParams, ServerBehavior, parse_behavior
from .protocol import Algorithm
from .verify import Thresholds


class ConfigError(Exception):
    code = "config_error"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field

    def to_dict(self) -> dict:
        return {"error": self.code, "field": self.field, "message": str(self)}


class ConfigFileNotFound(ConfigError):
    code = "missing_file"


class ConfigParseError(ConfigError):
    code = "parse_error"


class ConfigValidationError(ConfigError):
    code = "constraint_violation"


NOISE_KEYS = ("v", "lam", "lc_err_halfwidth", "hwp_err_halfwidth", "pc_phase_offset", "pc_random")
KNOWN_KEYS = {
    "phi1", "phi2", "x1", "x2", "n", "test_fraction", "omega", "nu", "k", "p",
    "noise", "adversary", "seed", "output_dir", "realization", "blindness", *NOISE_KEYS,
}


@dataclass
class RunConfig:
    algorithm: Algorithm = field(default_factory=Algorithm)
    n: int = 10000
    test_fraction: float = 0.5
    thresholds: Thresholds = field(default_factory=Thresholds)
    noise: NoiseParams = field(default_factory=NoiseParams.lab_default)
    noise_preset: str = "lab-default"
    adversary: str = "honest"
    seed: int = 0
    output_dir: str = "out"
    realization: str = "pc"
    blindness: bool = False

    @property
    def behavior(self) -> ServerBehavior:
        return parse_behavior(self.adversary)

    def snapshot(self) -> dict[str, Any]:
        return {
            "phi1": self.algorithm.phi[0], "phi2": self.algorithm.phi[1],
            "x1": self.algorithm.x[0], "x2": self.algorithm.x[1],
            "n": self.n, "test_fraction": self.test_fraction,
            "omega": self.thresholds.omega, "nu": self.thresholds.nu,
            "k": self.thresholds.k, "p": self.thresholds.p,
            "noise": self.noise_preset, **dataclasses.asdict(self.noise),
            "adversary": self.adversary, "seed": self.seed,
            "realization": self.realization, "blindness": self.blindness,
        }


def _typed(raw: dict, key: str, kind, default):
    if key not in raw:
        return default
    val = raw[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if (kind is int and isinstance(val, bool)) or not isinstance(val, kind):
        raise ConfigValidationError(f"{key} must be of type {kind.__name__}, got {val!r}", key)
    return val


def from_mapping(raw: dict[str, Any]) -> RunConfig:
    """Build and validate a :class:`RunConfig` from parsed key/value pairs."""
    if not isinstance(raw, dict):
        raise ConfigParseError("config must be a mapping of keys to values")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigValidationError(f"unknown key(s): {', '.join(unknown)}", unknown[0])

    def bounded_int(key, default, lo, hi):
        val = _typed(raw, key, int, default)
        if not lo <= val <= hi:
            raise ConfigValidationError(f"{key}={val} outside [{lo}, {hi}]", key)
        return val

    alg = Algorithm(
        phi=(bounded_int("phi1", 2, 0, 7), bounded_int("phi2", 2, 0, 7)),
        x=(bounded_int("x1", 0, 0, 1), bounded_int("x2", 0, 0, 1)),
    )
    n = bounded_int("n", 10000, 1, 10**9)
    tf = _typed(raw, "test_fraction", float, 0.5)
    if not 0.0 < tf < 1.0:
        raise ConfigValidationError(f"test_fraction={tf} must lie strictly between 0 and 1", "test_fraction")

    th = Thresholds(
        omega=_typed(raw, "omega", float, 0.18),
        nu=_typed(raw, "nu", float, 0.14),
        k=bounded_int("k", 2, 1, 10**6),
        p=_typed(raw, "p", float, 0.0),
    )
    try:
        sigma = th.sigma
    except ValueError as exc:
        raise ConfigValidationError(str(exc), "p") from None
    if not th.omega < sigma:
        raise ConfigValidationError(f"omega={th.omega} must be below sigma={sigma:g}", "omega")
    if not 0.0 <= th.nu <= th.omega:
        raise ConfigValidationError(f"nu={th.nu} must lie in [0, omega={th.omega}]", "nu")

    preset = _typed(raw, "noise", str, "lab-default")
    if preset not in ("lab-default", "ideal"):
        raise ConfigValidationError(f"noise must be 'lab-default' or 'ideal', got {preset!r}", "noise")
    base = NoiseParams.lab_default() if preset == "lab-default" else NoiseParams.ideal()
    overrides = {}
    for key in NOISE_KEYS:
        kind = bool if key == "pc_random" else float
        if key in raw:
            overrides[key] = _typed(raw, key, kind, None)
    try:
        noise = dataclasses.replace(base, **overrides)
    except ValueError as exc:
        key = str(exc).split("=")[0]
        raise ConfigValidationError(str(exc), key if key in NOISE_KEYS else "noise") from None

    adversary = _typed(raw, "adversary", str, "honest")
    try:
        parse_behavior(adversary)
    except ValueError as exc:
        raise ConfigValidationError(str(exc), "adversary") from None

    seed = _typed(raw, "seed", int, 0)
    if not 0 <= seed < 2**64:
        raise ConfigValidationError("seed must be a 64-bit unsigned integer", "seed")
    realization = _typed(raw, "realization", str, "pc")
    if realization not in ("pc", "direct"):
        raise ConfigValidationError("realization must be 'pc' or 'direct'", "realization")
    return RunConfig(
        algorithm=alg, n=n, test_fraction=tf, thresholds=th, noise=noise, noise_preset=preset,
        adversary=adversary, seed=seed, output_dir=str(_typed(raw, "output_dir", str, "out")),
        realization=realization, blindness=_typed(raw, "blindness", bool, False),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigFileNotFound(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"cannot parse {path}: {exc}") from None
    return from_mapping(raw or {})
