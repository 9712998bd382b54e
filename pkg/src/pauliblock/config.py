"""Validated scenario configuration.

Grammar (JSON)::

    {
      "schema_version": 1,
      "scenario": "rates" | "zeeman" | "evolve" | "photon" | "dipole_dipole" | "quench",
      "parameters": {...},
      "output": {"format": "csv" | "json", "path": "<file stem>"},
      "scan": {"parameter": "<name>", "unit": "<unit>", "grid": {"linspace": [a, b, n]}}
    }

Dimensional parameters are strings "<number> <unit>". Rates and frequencies
of the two-atom problem use "Gamma", times "1/Gamma". The quench scenario
works in SI: "Hz", "kHz", "MHz" are cyclic and are multiplied by 2 pi;
"1/s", "rad/s", "krad/s", "Mrad/s" are angular. Fields take "T", "mT", "G";
quench times "s", "ms", "us". Everything is stored in canonical angular SI
(or Gamma) units.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1
SCENARIOS = ("rates", "zeeman", "evolve", "photon", "dipole_dipole", "quench")

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s+((?:1/)?[A-Za-z][A-Za-z/]*)\s*$")

UNITS = {
    "si_rate": {
        "Hz": 2 * math.pi,
        "kHz": 2 * math.pi * 1e3,
        "MHz": 2 * math.pi * 1e6,
        "1/s": 1.0,
        "rad/s": 1.0,
        "krad/s": 1e3,
        "Mrad/s": 1e6,
    },
    "si_time": {"s": 1.0, "ms": 1e-3, "us": 1e-6},
    "rate": {"Gamma": 1.0},
    "time": {"1/Gamma": 1.0},
    "field": {"T": 1.0, "mT": 1e-3, "G": 1e-4},
}
CANONICAL = {"si_rate": "1/s", "si_time": "s", "rate": "Gamma", "time": "1/Gamma", "field": "T"}


class ConfigError(ValueError):
    """All problems found in a config, not only the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


# kind: 'number', 'int', 'bool', 'vec3', 'ivec3', 'eta', 'complex', 'str:<a|b>',
# a unit kind from UNITS, or 'any' (validated by the scenario runner)
SCHEMAS = {
    "rates": {
        "mode": "str:1d|general|laser",
        "eta": "eta",
        "orientation": "orientation",
        "dipole": "vec3",
        "blocked": "bool",
        "k_laser": "vec3",
        "amplitudes": "any",
        "blocking_mode": "ivec3",
        "quadrature_order": "int",
    },
    "zeeman": {
        "x": "number",
        "b_field": "field",
        "species": "str",
        "species_file": "str",
        "a_sign": "int",
        "nuclear_ratio": "number",
        "level": "number",
    },
    "evolve": {
        "eta": "eta",
        "orientation": "orientation",
        "dipole": "vec3",
        "nu": "rate",
        "n_max": "ivec3",
        "sectors": "any",
        "initial": "str:blocked|unblocked",
        "t_final": "time",
        "n_snapshots": "int",
        "rtol": "number",
        "atol": "number",
        "dipole_dipole": "bool",
        "cutoff": "number",
        "quadrature_order": "int",
    },
    "photon": {
        "eta": "number",
        "nu": "rate",
        "state": "str:shaped|mu0|mu1|custom",
        "mu0": "complex",
        "mu1": "complex",
        "t": "time",
        "n_points": "int",
        "rates": "str:exact|lamb_dicke",
    },
    "dipole_dipole": {
        "eta": "eta",
        "dipole": "vec3",
        "elements": "any",
        "cutoff": "number",
        "quadrature_order": "int",
    },
    "quench": {
        "omega_dr": "si_rate",
        "delta_dr": "si_rate",
        "delta_over_gamma_1p": "number",
        "gamma_1p": "si_rate",
        "eta": "number",
        "eta_dr": "number",
        "c_up_sq": "number",
        "c_dn_sq": "number",
        "times": "si_time_list",
    },
}
REQUIRED = {
    "rates": ("eta",),
    "zeeman": (),
    "evolve": ("eta", "t_final"),
    "photon": ("eta", "nu"),
    "dipole_dipole": ("eta",),
    "quench": ("omega_dr", "gamma_1p"),
}


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str
    kind: str

    @property
    def canonical(self):
        return self.value * UNITS[self.kind][self.unit]


@dataclass
class ScenarioConfig:
    scenario: str
    parameters: dict
    output: dict
    scan: dict | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self):
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def canonical_inputs(self):
        """Parameters with every quantity in its canonical unit."""
        out = {}
        for k, v in self.parameters.items():
            if isinstance(v, Quantity):
                out[k] = {"value": v.canonical, "unit": CANONICAL[v.kind]}
            elif isinstance(v, list) and v and isinstance(v[0], Quantity):
                out[k] = {"values": [q.canonical for q in v], "unit": CANONICAL[v[0].kind]}
            else:
                out[k] = v
        return out

    def values(self, overrides=None):
        """Plain parameter values (quantities in canonical units)."""
        out = {}
        for k, v in self.parameters.items():
            if isinstance(v, Quantity):
                v = v.canonical
            elif isinstance(v, list) and v and isinstance(v[0], Quantity):
                v = [q.canonical for q in v]
            out[k] = v
        out.update(overrides or {})
        return out

    def grid(self):
        return None if self.scan is None else self.scan["values"]


def parse_quantity(text, kind):
    if not isinstance(text, str):
        raise ValueError(f"needs a unit suffix ({'/'.join(UNITS[kind])}), got bare {text!r}")
    m = _QUANTITY.match(text)
    if not m:
        raise ValueError(f"cannot read {text!r} as '<number> <unit>'")
    value, unit = float(m.group(1)), m.group(2)
    if unit not in UNITS[kind]:
        raise ValueError(f"unit {unit!r} not allowed here; use one of {sorted(UNITS[kind])}")
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return Quantity(value, unit, kind)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_value(name, v, kind):
    """Return the validated value or raise ValueError."""
    if kind in UNITS:
        return parse_quantity(v, kind)
    if kind == "number":
        if not _is_number(v):
            raise ValueError(f"expected a number, got {v!r}")
        return float(v)
    if kind == "int":
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValueError(f"expected an integer, got {v!r}")
        return v
    if kind == "bool":
        if not isinstance(v, bool):
            raise ValueError(f"expected true/false, got {v!r}")
        return v
    if kind == "str":
        if not isinstance(v, str):
            raise ValueError(f"expected a string, got {v!r}")
        return v
    if kind.startswith("str:"):
        allowed = kind[4:].split("|")
        if v not in allowed:
            raise ValueError(f"expected one of {allowed}, got {v!r}")
        return v
    if kind in ("vec3", "ivec3"):
        ok = isinstance(v, list) and len(v) == 3 and all(_is_number(x) for x in v)
        if kind == "ivec3" and isinstance(v, int) and not isinstance(v, bool):
            return [v, v, v]
        if not ok or (kind == "ivec3" and not all(isinstance(x, int) for x in v)):
            raise ValueError(f"expected a list of three {'integers' if kind == 'ivec3' else 'numbers'}, got {v!r}")
        return [float(x) for x in v] if kind == "vec3" else list(v)
    if kind == "eta":
        if _is_number(v):
            return float(v)
        return _check_value(name, v, "vec3")
    if kind == "orientation":
        if v in ("perp", "parallel"):
            return {"perp": 0.0, "parallel": 1.0}[v]
        if _is_number(v) and -1.0 <= v <= 1.0:
            return float(v)
        raise ValueError(f"expected 'perp', 'parallel' or a cosine in [-1, 1], got {v!r}")
    if kind == "complex":
        if _is_number(v):
            return complex(v)
        if isinstance(v, dict) and set(v) <= {"re", "im"} and all(_is_number(x) for x in v.values()):
            return complex(v.get("re", 0.0), v.get("im", 0.0))
        raise ValueError(f"expected a number or {{'re': .., 'im': ..}}, got {v!r}")
    if kind == "si_time_list":
        if not isinstance(v, list):
            raise ValueError(f"expected a list of times, got {v!r}")
        return [parse_quantity(x, "si_time") for x in v]
    if kind == "any":
        return v
    raise AssertionError(kind)


def expand_grid(spec):
    """Values of a grid spec {'linspace'|'logspace': [a, b, n]} or {'list': [...]}."""
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError("grid must have exactly one of 'linspace', 'logspace', 'list'")
    (kind, args), = spec.items()
    if kind in ("linspace", "logspace"):
        if not (isinstance(args, list) and len(args) == 3 and _is_number(args[0]) and _is_number(args[1])):
            raise ValueError(f"{kind} needs [start, stop, count]")
        n = args[2]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValueError(f"{kind} count must be a positive integer")
        a, b = float(args[0]), float(args[1])
        if kind == "logspace":
            if a <= 0 or b <= 0:
                raise ValueError("logspace end points must be positive")
            vals = np.geomspace(a, b, n)
        else:
            vals = np.linspace(a, b, n)
    elif kind == "list":
        if not isinstance(args, list) or not args or not all(_is_number(x) for x in args):
            raise ValueError("list grid needs a non-empty list of numbers")
        vals = np.asarray(args, dtype=float)
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("grid values must be finite")
    if vals.size > 1:
        d = np.diff(vals)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("grid must be strictly monotone")
    return [float(v) for v in vals]


def parse_config(text):
    """Parse JSON text into a ScenarioConfig, or raise ConfigError listing every problem."""
    errors = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be an object"])

    for key in set(raw) - {"schema_version", "scenario", "parameters", "output", "scan"}:
        errors.append(f"unknown top-level key {key!r}")
    if "schema_version" not in raw:
        errors.append("missing schema_version")
    elif raw["schema_version"] != SCHEMA_VERSION:
        errors.append(f"unsupported schema_version {raw['schema_version']!r} (expected {SCHEMA_VERSION})")

    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        errors.append(f"unknown scenario {scenario!r}; expected one of {list(SCENARIOS)}")
        raise ConfigError(errors)

    schema = SCHEMAS[scenario]
    params_raw = raw.get("parameters", {})
    params = {}
    if not isinstance(params_raw, dict):
        errors.append("parameters must be an object")
        params_raw = {}
    for key, val in params_raw.items():
        if key not in schema:
            errors.append(f"parameters.{key}: unknown key for scenario {scenario!r}")
            continue
        try:
            params[key] = _check_value(key, val, schema[key])
        except ValueError as exc:
            errors.append(f"parameters.{key}: {exc}")

    output = {"format": "csv", "path": scenario}
    out_raw = raw.get("output", {})
    if not isinstance(out_raw, dict):
        errors.append("output must be an object")
        out_raw = {}
    for key, val in out_raw.items():
        if key == "format":
            if val not in ("csv", "json"):
                errors.append(f"output.format: expected 'csv' or 'json', got {val!r}")
            output["format"] = val
        elif key == "path":
            if not isinstance(val, str) or not val or val.startswith("/") or ".." in val.split("/"):
                errors.append(f"output.path: expected a relative file stem, got {val!r}")
            output["path"] = val
        else:
            errors.append(f"output.{key}: unknown key")

    scan = None
    if "scan" in raw:
        s = raw["scan"]
        if not isinstance(s, dict):
            errors.append("scan must be an object")
        else:
            for key in set(s) - {"parameter", "unit", "grid"}:
                errors.append(f"scan.{key}: unknown key")
            name = s.get("parameter")
            if name not in schema:
                errors.append(f"scan.parameter: {name!r} is not a parameter of {scenario!r}")
            try:
                values = expand_grid(s.get("grid"))
            except ValueError as exc:
                errors.append(f"scan.grid: {exc}")
                values = None
            kind = schema.get(name)
            unit = s.get("unit")
            if kind in UNITS:
                if unit not in UNITS[kind]:
                    errors.append(f"scan.unit: {name!r} needs one of {sorted(UNITS[kind])}")
                elif values is not None:
                    values = [v * UNITS[kind][unit] for v in values]
            elif unit is not None:
                errors.append(f"scan.unit: {name!r} is dimensionless")
            elif kind not in (None, "number", "eta", "orientation"):
                errors.append(f"scan.parameter: {name!r} cannot be scanned")
            if values is not None and name in schema:
                scan = {"parameter": name, "values": values, "unit": CANONICAL.get(kind)}

    for key in REQUIRED[scenario]:
        if key not in params_raw and not (scan and scan["parameter"] == key):
            errors.append(f"parameters.{key}: required for scenario {scenario!r}")

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(scenario, params, output, scan, raw)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
