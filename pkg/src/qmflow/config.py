"""Run specifications from INI-style files, preset strings and command-line flags.

Sections: [space] K, n; [flow] RunConfig fields; [initial] preset or profile plus
preset parameters; [elliptic] solve parameters; [sweep] comma-separated grids;
[output] samples.
"""

from dataclasses import dataclass, field, fields, replace
import configparser
import re

from .flow import RunConfig
from .presets import PRESET_DEFAULTS
from .spaceform import SpaceForm

SECTIONS = ("space", "flow", "initial", "elliptic", "sweep", "output")
FLOW_FIELDS = {f.name: f for f in fields(RunConfig) if f.name != "sf"}
FLOW_LOWER = {name.lower(): name for name in FLOW_FIELDS}
ELLIPTIC_KEYS = {"equation": str, "f": str, "alpha": float, "gamma": float, "r": float,
                 "beta": float, "perturb": float, "grid": int, "solutions": int}
SWEEP_KEYS = {"ell": int, "n": int, "cfl": float, "delta": float}
DEFAULT_ELLIPTIC = {"equation": "weingarten", "f": "mean", "alpha": 1.0, "r": 0.6,
                    "perturb": 0.05, "grid": 64, "solutions": 1}


class ConfigError(ValueError):
    """Invalid run specification; the message names the file, line and field."""


@dataclass
class RunSpec:
    sf: SpaceForm
    flow: RunConfig
    preset: str = "perturbed-sphere"
    preset_params: dict = field(default_factory=dict)
    profile_path: str = None
    elliptic: dict = field(default_factory=lambda: dict(DEFAULT_ELLIPTIC))
    sweep: dict = field(default_factory=dict)
    seed: int = 0
    samples: int = None
    out: str = "out"


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _coerce(kind, text):
    if kind is bool:
        return _bool(text)
    if kind is int:
        val = float(text)
        if val != int(val):
            raise ValueError(f"not an integer: {text!r}")
        return int(val)
    return kind(text.strip())


def _flow_type(name):
    default = FLOW_FIELDS[name].default
    return type(default)


def _locate(text, section, key=None):
    """1-based line of [section] or of `key` inside it, or None."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None:
            m = re.match(r"\s*([^=:#;\s]+)\s*[=:]", line)
            if m and m.group(1).lower() == key:
                return i
    return None


def _where(path, text, section, key=None):
    line = _locate(text, section, key)
    loc = f"{path}:{line}" if line else str(path)
    return f"{loc}: [{section}]" + (f" {key}" if key else "")


def _parse_preset_string(value):
    """'name k=v ...' into (name, {k: v})."""
    parts = value.split()
    if not parts:
        raise ValueError("empty preset")
    params = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ValueError(f"preset token {tok!r} is not key=value")
        k, v = tok.split("=", 1)
        params[k] = v
    return parts[0], params


def _apply_overrides(raw, overrides):
    """Route key=value overrides to the space, flow or initial sections."""
    for key, val in overrides.items():
        if key in ("K", "n"):
            raw["space"][key.lower()] = val
        elif key in FLOW_FIELDS:
            raw["flow"][key] = val
        else:
            raw["initial"][key] = val


def build_spec(raw, where=lambda section, key=None: f"[{section}]" + (f" {key}" if key else "")):
    """Validate a {section: {key: text}} mapping into a RunSpec."""
    def fail(section, key, msg):
        raise ConfigError(f"{where(section, key)}: {msg}")

    space = raw.get("space", {})
    try:
        sf = SpaceForm(_coerce(float, space.get("k", "1")), _coerce(int, space.get("n", "2")))
    except ValueError as exc:
        fail("space", None, str(exc))

    flow_kwargs = {}
    for key, text in raw.get("flow", {}).items():
        name = FLOW_LOWER.get(key.lower())
        if name is None:
            fail("flow", key, f"unknown field; expected one of {sorted(FLOW_FIELDS)}")
        try:
            flow_kwargs[name] = _coerce(_flow_type(name), text)
        except ValueError as exc:
            fail("flow", key, str(exc))
    try:
        cfg = RunConfig(sf=sf, **flow_kwargs)
    except ValueError as exc:
        fail("flow", None, str(exc))

    initial = dict(raw.get("initial", {}))
    preset = initial.pop("preset", "perturbed-sphere")
    profile_path = initial.pop("profile", None)
    try:
        seed = _coerce(int, initial.pop("seed", "0"))
    except ValueError as exc:
        fail("initial", "seed", str(exc))
    allowed, params = {}, {}
    if profile_path is None:
        if preset not in PRESET_DEFAULTS:
            fail("initial", "preset",
                 f"unknown preset {preset!r}; choose from {sorted(PRESET_DEFAULTS)}")
        allowed = {k.lower(): k for k in PRESET_DEFAULTS[preset]}
    for key, text in initial.items():
        if profile_path is not None:
            fail("initial", key, "preset parameters given together with a profile file")
        if key.lower() not in allowed:
            fail("initial", key, f"preset {preset!r} takes {sorted(allowed.values())}")
        try:
            params[allowed[key.lower()]] = _coerce(float, text)
        except ValueError as exc:
            fail("initial", key, str(exc))

    elliptic = dict(DEFAULT_ELLIPTIC)
    for key, text in raw.get("elliptic", {}).items():
        kind = ELLIPTIC_KEYS.get(key.lower())
        if kind is None:
            fail("elliptic", key, f"unknown field; expected one of {sorted(ELLIPTIC_KEYS)}")
        try:
            elliptic[key.lower()] = _coerce(kind, text)
        except ValueError as exc:
            fail("elliptic", key, str(exc))
    if elliptic["equation"] not in ("weingarten", "soliton"):
        fail("elliptic", "equation", "must be weingarten or soliton")

    sweep = {}
    for key, text in raw.get("sweep", {}).items():
        kind = SWEEP_KEYS.get(key.lower())
        if kind is None:
            fail("sweep", key, f"unknown grid axis; expected one of {sorted(SWEEP_KEYS)}")
        try:
            sweep[key.lower()] = [_coerce(kind, v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            fail("sweep", key, str(exc))

    samples = None
    if "samples" in raw.get("output", {}):
        try:
            samples = _coerce(int, raw["output"]["samples"])
        except ValueError as exc:
            fail("output", "samples", str(exc))
    return RunSpec(sf=sf, flow=cfg, preset=preset, preset_params=params,
                   profile_path=profile_path, elliptic=elliptic, sweep=sweep, seed=seed,
                   samples=samples)


def read_raw(path):
    """Parse the file into {section: {key: text}} plus its text, for diagnostics."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc.message.strip()}") from exc
    raw = {}
    for section in parser.sections():
        low = section.lower()
        if low not in SECTIONS:
            raise ConfigError(f"{_where(path, text, low)}: unknown section; expected {SECTIONS}")
        raw[low] = {k if low == "initial" else k.lower(): v for k, v in parser[section].items()}
    for key in list(raw.get("space", {})):
        if key not in ("k", "n"):
            raise ConfigError(f"{_where(path, text, 'space', key)}: unknown field; expected K or n")
    return raw, text


def load_spec(config=None, preset=None, seed=None, samples=None, out=None):
    """Combine a config file, an inline preset string and flags into a RunSpec."""
    raw, text, path = {s: {} for s in SECTIONS}, "", None
    if config is not None:
        parsed, text = read_raw(config)
        path = config
        for s, kv in parsed.items():
            raw[s].update(kv)

    def where(section, key=None):
        return _where(path, text, section, key) if path else \
            f"[{section}]" + (f" {key}" if key else "")

    if preset is not None:
        try:
            name, overrides = _parse_preset_string(preset)
        except ValueError as exc:
            raise ConfigError(f"--preset: {exc}") from exc
        raw["initial"].pop("profile", None)
        raw["initial"] = {k: v for k, v in raw["initial"].items() if k == "seed"}
        raw["initial"]["preset"] = name
        _apply_overrides(raw, overrides)
        where_cfg = where

        def where(section, key=None):
            if key is not None and any(key.lower() == k.lower() for k in overrides):
                return f"--preset {key}"
            return where_cfg(section, key)
    spec = build_spec(raw, where)
    if seed is not None:
        spec.seed = seed
    if samples is not None:
        spec.samples = samples
    if spec.samples is not None:
        if spec.samples < 1:
            raise ConfigError("--samples must be >= 1")
        spec.flow = replace(spec.flow, sample_dt=spec.flow.t_end / spec.samples)
    if out is not None:
        spec.out = out
    return spec
