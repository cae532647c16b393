"""Experiment configuration files.

A configuration is an INI-style text file with the sections ``[model]``,
``[potentials]``, ``[truncation]``, ``[grid]`` and ``[tolerances]``.  Every
key has a default, and unknown sections or keys are errors so that a typo
never silently falls back to a default.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .cylinders import DEFAULT_BUDGET, TruncationSpec
from .models import MarkovSystem, ModelError, Potential, load_model, resolve_potential
from .pressure import Combination, Tolerances


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _opt_float(text: str) -> float | None:
    text = text.strip()
    return None if text in ("", "auto") else float(text)


# section -> key -> (default text, parser)
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "model": {
        "id": ("gauss", str),
        "branch_cutoff": ("", lambda s: None if not s.strip() else int(s)),
    },
    "potentials": {
        "numerator": ("log-digit", str),
        "denominator": ("digit", str),
        "combination": ("-1*log-derivative", str),
        "roof": ("digit", str),
        "flow_observable": ("log-digit", str),
        "flow_observable_kind": ("delta", str),
    },
    "truncation": {
        "n": ("2000", int),
        "k": ("2", int),
        "budget": (str(DEFAULT_BUDGET), int),
        "tail": ("", _ints),
    },
    "grid": {
        "points": ("65", int),
        "alpha_min": ("auto", _opt_float),
        "alpha_max": ("auto", _opt_float),
        "alphas": ("", _floats),
        "side": ("left", str),
        "probe_alphas": ("-0.05 -0.02 -0.01", _floats),
        "boundary_probe": ("100000", int),
    },
    "tolerances": {
        "power_tol": ("1e-13", float),
        "vector_tol": ("1e-10", float),
        "max_iter": ("100000", int),
        "probe_cutoff": ("1000000", int),
        "sinf_tol": ("1e-4", float),
        "bowen_tol": ("1e-12", float),
        "entropy_tol": ("1e-8", float),
        "spectrum_tol": ("1e-8", float),
        "q_max": ("1e4", float),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    model_id: str = "gauss"
    branch_cutoff: int | None = None
    numerator: str = "log-digit"
    denominator: str = "digit"
    combination: str = "-1*log-derivative"
    roof: str = "digit"
    flow_observable: str = "log-digit"
    flow_observable_kind: str = "delta"
    n: int = 2000
    k: int = 2
    budget: int = DEFAULT_BUDGET
    tail: tuple[int, ...] = ()
    points: int = 65
    alpha_min: float | None = None
    alpha_max: float | None = None
    alphas: tuple[float, ...] = ()
    side: str = "left"
    probe_alphas: tuple[float, ...] = (-0.05, -0.02, -0.01)
    boundary_probe: int = 100000
    tolerances: Tolerances = field(default_factory=Tolerances)
    spectrum_tol: float = 1e-8
    q_max: float = 1e4

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ConfigError("truncation n and k must be >= 1")
        if self.budget < 1:
            raise ConfigError("budget must be positive")
        if self.points < 1:
            raise ConfigError("grid points must be >= 1")
        if self.side not in ("left", "right"):
            raise ConfigError("grid side must be 'left' or 'right'")
        if self.flow_observable_kind not in ("delta", "fiber-constant"):
            raise ConfigError("flow_observable_kind must be 'delta' or 'fiber-constant'")
        if not self.spectrum_tol > 0:
            raise ConfigError("spectrum_tol must be positive")

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self

    # -- resolution -------------------------------------------------------

    @property
    def spec(self) -> TruncationSpec:
        return TruncationSpec(self.n, self.k, self.budget)

    def build_model(self) -> MarkovSystem:
        kwargs = {}
        if self.branch_cutoff is not None:
            if not self.model_id.startswith("mp:"):
                raise ConfigError("branch_cutoff only applies to mp:<beta> models")
            kwargs["branch_cutoff"] = self.branch_cutoff
        try:
            return load_model(self.model_id, **kwargs)
        except (ModelError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def potential(self, model: MarkovSystem, name: str) -> Potential:
        try:
            return resolve_potential(model, name)
        except (ModelError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def build_combination(self, model: MarkovSystem) -> Combination:
        """Parse ``c1*name1, c2*name2, ...``."""
        pairs = []
        for item in self.combination.split(","):
            item = item.strip()
            if not item:
                continue
            coef, sep, name = item.partition("*")
            if not sep:
                raise ConfigError(f"combination term {item!r} is not of the form coefficient*potential")
            try:
                c = float(coef)
            except ValueError as exc:
                raise ConfigError(f"bad coefficient in combination term {item!r}") from exc
            pairs.append((c, self.potential(model, name)))
        if not pairs:
            raise ConfigError("empty potential combination")
        return Combination.of(*pairs)


_FIELD_OF = {
    ("model", "id"): "model_id",
}
_TOLERANCE_KEYS = {"power_tol", "vector_tol", "max_iter", "probe_cutoff", "sinf_tol", "bowen_tol", "entropy_tol"}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse configuration text, rejecting unknown sections and keys."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    values: dict[str, object] = {}
    tol_values: dict[str, object] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]; known: {', '.join(SCHEMA)}")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            _, conv = SCHEMA[section][key]
            try:
                val = conv(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{source}: bad value {raw!r} for {section}.{key}") from exc
            if section == "tolerances" and key in _TOLERANCE_KEYS:
                tol_values[key] = val
            else:
                values[_FIELD_OF.get((section, key), key)] = val
    for key in ("power_tol", "vector_tol", "sinf_tol", "bowen_tol", "entropy_tol"):
        if key in tol_values and not (tol_values[key] > 0 and math.isfinite(tol_values[key])):
            raise ConfigError(f"{source}: tolerance {key} must be positive")
    values["tolerances"] = Tolerances(**tol_values)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:  # pragma: no cover - schema and dataclass out of sync
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, str(p))


def default_config_text() -> str:
    """A complete configuration file listing every key with its default."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (default, _) in keys.items():
            lines.append(f"{key} = {default}")
        lines.append("")
    return "\n".join(lines)
