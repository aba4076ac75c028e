"""Scenario configuration: JSON schema, validation with line numbers, built-in experiments."""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .io import scenario_hash
from .media import FAMILIES

MODELS = ("exact", "action", "schrodinger", "rays", "wigner")


class ConfigError(ValueError):
    """Invalid scenario configuration; the message carries the line number when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


_family = {
    "type": "object",
    "properties": {
        "family": {"type": "string", "enum": sorted(FAMILIES)},
        "params": {"type": "object"},
    },
    "required": ["family", "params"],
    "additionalProperties": False,
}

_interval_list = {
    "type": "array",
    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    "minItems": 1,
    "maxItems": 2,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "grid": {
            "type": "object",
            "properties": {
                "lengths": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                            "minItems": 1, "maxItems": 2},
                "counts": {"type": "array", "items": {"type": "integer", "minimum": 8},
                           "minItems": 1, "maxItems": 2},
            },
            "required": ["lengths", "counts"],
            "additionalProperties": False,
        },
        "depth": _family,
        "current": {"oneOf": [_family, {"type": "null"}]},
        "bulk": {"oneOf": [_family, {"type": "null"}]},
        "initial": {
            "type": "object",
            "properties": {
                "type": {"enum": ["packet", "eigenmode"]},
                "center": {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 2},
                "width": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                          "minItems": 1, "maxItems": 2},
                "k0": {"type": "number", "exclusiveMinimum": 0},
                "amplitude": {"type": "number", "minimum": 0},
            },
            "required": ["center", "width", "k0", "amplitude"],
            "additionalProperties": False,
        },
        "T": {"type": "number", "exclusiveMinimum": 0},
        "output_every": {"type": "number", "exclusiveMinimum": 0},
        "models": {"type": "array", "items": {"enum": list(MODELS)}, "minItems": 1, "uniqueItems": True},
        "window": {"oneOf": [_interval_list, {"type": "null"}]},
        "energy_window": {"oneOf": [_interval_list, {"type": "null"}]},
        "sponge": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {
                        "width": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.4},
                        "strength": {"type": ["number", "null"], "minimum": 0},
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "options": {
            "type": "object",
            "properties": {
                "g": {"type": "number", "exclusiveMinimum": 0},
                "dt_safety": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "budget": {"type": "boolean"},
                "source_half": {"type": "boolean"},
                "production_levels": {"type": "integer", "minimum": 2},
                "E0_amplitude": {"type": "number", "exclusiveMinimum": 0},
                "direction": {"enum": ["x1", "refracted"]},
                "schrodinger_mu": {"type": "number", "exclusiveMinimum": 0},
                "schrodinger_sources": {"type": "boolean"},
                "ray_dt": {"type": "number", "exclusiveMinimum": 0},
                "wigner_Ymax": {"type": "number", "exclusiveMinimum": 0},
                "wigner_branch": {"enum": ["positive", "both"]},
                "wigner_save": {"type": "array", "items": {"type": "number"}},
                "save_fields": {"type": "boolean"},
                "late_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            "additionalProperties": False,
        },
    },
    "required": ["name", "grid", "depth", "initial", "T", "output_every", "models"],
    "additionalProperties": False,
}

DEFAULT_OPTIONS = {
    "g": 9.81,
    "dt_safety": 0.8,
    "budget": False,
    "source_half": True,
    "production_levels": 32,
    "E0_amplitude": None,          # None: half the initial amplitude (right-moving half)
    "direction": "x1",
    "schrodinger_mu": 1.0,
    "schrodinger_sources": True,
    "ray_dt": None,                # None: output_every / 10
    "wigner_Ymax": None,           # None: 8 packet widths, capped at L/2
    "wigner_branch": "positive",
    "wigner_save": [],
    "save_fields": True,
    "late_fraction": 1 / 3,
}


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: dict
    depth: dict
    initial: dict
    T: float
    output_every: float
    models: tuple
    current: dict | None = None
    bulk: dict | None = None
    window: list | None = None
    energy_window: list | None = None
    sponge: dict | None = field(default_factory=lambda: {"width": 0.1, "strength": None})
    options: dict = field(default_factory=dict)

    @property
    def dims(self) -> int:
        return len(self.grid["lengths"])

    def config(self) -> dict:
        """The scenario as a plain JSON-ready dict (the hashed form)."""
        out = {
            "name": self.name, "grid": self.grid, "depth": self.depth, "current": self.current,
            "bulk": self.bulk, "initial": self.initial, "T": self.T, "output_every": self.output_every,
            "models": list(self.models), "window": self.window, "energy_window": self.energy_window,
            "sponge": self.sponge, "options": self.options,
        }
        return copy.deepcopy(out)

    def resolved_options(self) -> dict:
        return {**DEFAULT_OPTIONS, **self.options}

    @property
    def hash(self) -> str:
        return scenario_hash(self.config())


def _line_of(text: str | None, path) -> int | None:
    """Best-effort line number of a JSON path inside ``text``."""
    if text is None:
        return None
    pos = 0
    for part in path:
        if isinstance(part, str):
            m = re.compile(r'"%s"\s*:' % re.escape(part)).search(text, pos)
            if m is None:
                break
            pos = m.start()
    return text.count("\n", 0, pos) + 1


def _check(cfg: dict, text: str | None = None) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        if e.validator == "additionalProperties":
            extra = re.findall(r"'([^']+)'", e.message)
            path = list(e.absolute_path) + extra[:1]
        else:
            path = list(e.absolute_path)
        raise ConfigError(f"{where}: {e.message}", _line_of(text, path))
    dims = len(cfg["grid"]["lengths"])
    if len(cfg["grid"]["counts"]) != dims:
        raise ConfigError("grid.counts must have one entry per axis", _line_of(text, ["grid", "counts"]))
    for n in cfg["grid"]["counts"]:
        if n % 2:
            raise ConfigError(f"grid count {n} must be even", _line_of(text, ["grid", "counts"]))
    ini = cfg["initial"]
    if len(ini["center"]) != dims:
        raise ConfigError("initial.center needs one coordinate per axis", _line_of(text, ["initial", "center"]))
    for key in ("window", "energy_window"):
        win = cfg.get(key)
        if win is None:
            continue
        if len(win) > dims:
            raise ConfigError(f"{key} has more intervals than axes", _line_of(text, [key]))
        for a, (lo, hi) in enumerate(win):
            if not 0 <= lo < hi <= cfg["grid"]["lengths"][a]:
                raise ConfigError(f"{key}[{a}] = [{lo}, {hi}] lies outside the domain", _line_of(text, [key]))
    for key in ("depth", "current", "bulk"):
        fam = cfg.get(key)
        if fam is None:
            continue
        try:
            from .media import make_family
            make_family(fam["family"], fam["params"])
        except (TypeError, KeyError, ValueError) as err:
            raise ConfigError(f"{key}: bad parameters for {fam['family']!r}: {err}",
                              _line_of(text, [key, "params"])) from None
    if cfg.get("bulk") is not None and cfg["bulk"]["family"] != "tanh_jet":
        raise ConfigError("bulk currents must use the 'tanh_jet' family", _line_of(text, ["bulk"]))


def from_dict(cfg: dict, text: str | None = None) -> Scenario:
    _check(cfg, text)
    kw = {k: cfg[k] for k in cfg if k not in ("models",)}
    kw["models"] = tuple(cfg["models"])
    kw["T"] = float(cfg["T"])
    kw["output_every"] = float(cfg["output_every"])
    return Scenario(**kw)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON: {err.msg}", err.lineno) from None
    if not isinstance(cfg, dict):
        raise ConfigError("top level must be an object", 1)
    if cfg.get("builtin"):
        if set(cfg) - {"builtin", "overrides"}:
            raise ConfigError("a builtin reference takes only 'builtin' and 'overrides'", 1)
        base = builtin(cfg["builtin"]).config()
        _merge(base, cfg.get("overrides", {}))
        return from_dict(base)
    return from_dict(cfg, text)


def _merge(base: dict, over: dict) -> None:
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _merge(base[k], v)
        else:
            base[k] = v


# ------------------------------------------------------------------ built-ins

def _bump(amp, center, width):
    return {"amp": amp, "center": center, "width": width}


def _builtin_configs() -> dict:
    L = 2000.0
    total_energy = {
        "name": "total_energy_1d",
        "grid": {"lengths": [L], "counts": [1024]},
        "depth": {"family": "constant", "params": {"value": 9.0}},
        "current": {"family": "tanh_jet",
                    "params": {"U0": 1.0, "amplitude": 0.5, "center": 2 * L / 3, "width": 300.0, "depth": 9.0}},
        "bulk": {"family": "tanh_jet",
                 "params": {"U0": 1.0, "amplitude": 0.5, "center": 2 * L / 3, "width": 300.0, "depth": 9.0}},
        "initial": {"type": "packet", "center": [L / 2], "width": [0.04 * L], "k0": 2 * 3.141592653589793 / (L / 50),
                    "amplitude": 0.5},
        "T": 80.0,
        "output_every": 0.2,
        "models": ["exact"],
        "window": None,
        "energy_window": None,
        "sponge": {"width": 0.1, "strength": None},
        "options": {"budget": True, "save_fields": False},
    }
    bumpy = {
        "name": "bumpy_1d",
        "grid": {"lengths": [L], "counts": [1024]},
        "depth": {"family": "gaussian_bumps",
                  "params": {"base": 24.0, "bumps": [_bump(-18.0, 2 * L / 3, 0.08 * L),
                                                     _bump(-14.5, L / 2, 0.02 * L),
                                                     _bump(-3.6, 2.2 * L / 3, 0.01 * L)]}},
        "current": {"family": "gaussian_bumps",
                    "params": {"base": 1.2, "bumps": [_bump(0.5, 2 * L / 3, 0.12 * L),
                                                      _bump(0.4, L / 2, 0.02 * L),
                                                      _bump(0.01, 2.2 * L / 3, 0.01 * L)]}},
        "bulk": None,
        "initial": {"type": "packet", "center": [0.3 * L], "width": [0.04 * L], "k0": 2 * 3.141592653589793 / (L / 60),
                    "amplitude": 0.5},
        "T": 240.0,
        "output_every": 5.0,
        "models": ["exact", "action"],
        "window": [[0.4 * L, 0.85 * L]],
        "energy_window": [[0.3 * L, 0.9 * L]],
        "sponge": {"width": 0.1, "strength": None},
        "options": {"dt_safety": 0.4},
    }
    blocking = {
        "name": "blocking_1d",
        "grid": {"lengths": [L], "counts": [1024]},
        "depth": {"family": "constant", "params": {"value": 20.0}},
        "current": {"family": "parabolic_opposing", "params": {"scale": 5.0, "length": L}},
        "bulk": None,
        "initial": {"type": "packet", "center": [0.3 * L], "width": [0.04 * L], "k0": 2 * 3.141592653589793 / (L / 60),
                    "amplitude": 0.5},
        "T": 600.0,
        "output_every": 5.0,
        "models": ["exact", "rays", "wigner"],
        "window": None,
        "energy_window": None,
        "sponge": {"width": 0.1, "strength": None},
        "options": {"wigner_save": [0.0, 300.0, 600.0]},
    }
    L1, L2 = 1500.0, 800.0
    jet = {
        "name": "jet_2d",
        "grid": {"lengths": [L1, L2], "counts": [256, 128]},
        "depth": {"family": "gaussian_bumps",
                  "params": {"base": 24.0, "bumps": [_bump(-18.0, [L1, L2], [L1 / 4, L2 / 4]),
                                                     _bump(-10.0, [L1 / 2, None], [0.06 * L1, None])]}},
        "current": {"family": "meandering_jet",
                    "params": {"amplitude": 1.0, "sigma": 0.7 * L2, "meander": 0.3,
                               "wavenumber": 3 * 3.141592653589793 / L2, "cross": 1 / (2 * L2)}},
        "bulk": None,
        "initial": {"type": "packet", "center": [L1 / 5, L2 / 2], "width": [0.04 * L1, 0.04 * L1],
                    "k0": 2 * 3.141592653589793 / (L1 / 36), "amplitude": 0.5},
        "T": 240.0,
        "output_every": 10.0,
        "models": ["exact", "action", "schrodinger"],
        "window": [[0.4 * L1, 0.85 * L1], [0.1 * L2, 0.9 * L2]],
        "energy_window": None,
        "sponge": {"width": 0.1, "strength": None},
        "options": {"direction": "refracted"},
    }
    return {c["name"]: c for c in (total_energy, bumpy, blocking, jet)}


BUILTIN_NAMES = ("total_energy_1d", "bumpy_1d", "blocking_1d", "jet_2d")

# sha256 of the canonical JSON of each built-in; a change here is a deliberate change of experiment
BUILTIN_HASHES = {
    "total_energy_1d": "fc0a96d7c80723d7e48dd2f56874f73e85648d24aaf4731a8c76ad32f2463e27",
    "bumpy_1d": "48082152c2e03826b6c683d89d942fc8d304f6ef5b5028933e09f62d2b5f739b",
    "blocking_1d": "16cc3fd0e66e5038f673eb95a8bed4995da17dbefe4cfebb9bbed4e8a949cdf9",
    "jet_2d": "efade581bf070762f38d97f5458d3a722e433f19fe354f4f4e14ea83ffe553ba",
}


def builtin(name: str) -> Scenario:
    cfgs = _builtin_configs()
    if name not in cfgs:
        raise ConfigError(f"unknown built-in scenario {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    return from_dict(cfgs[name])


def builtin_config(name: str) -> dict:
    return builtin(name).config()
