"""Run configuration: an INI file with one level of sections plus overrides.

Grammar (``configparser``, ``#`` or ``;`` comments, ``key = value``)::

    [system]
    families = obe, fme            # any of obe, fme, gbe
    gamma_over_omega_L = 1e-4
    beta_L = 10                    # hbar omega_L / k_B T
    g_over_gamma = 1               # or g_over_delta, or g_over_omega_L
    delta_over_gamma = 1           # or delta_over_omega_L
    initial = thermal              # thermal | ground | excited | plus_x | random
    seed = 0

    [bath]
    model = flat                   # flat | ohmic | lorentzian | table
    fme_occupation = exact         # exact | flat
    cutoff_over_omega_L = 10       # ohmic
    width_over_omega_L = 0.1       # lorentzian
    table = path/to/table.txt      # two columns nu, Gamma in units of omega_L

    [time]                         # simulate only
    unit = gamma                   # gamma (times in 1/gamma) | omega_L
    t_end = 5
    points = 501

    [sweep]                        # sweep only
    x = g_over_gamma
    x_scale = log                  # log | linear
    x_min = 0.1
    x_max = 10
    x_count = 20
    y = delta_over_gamma           # optional second axis, same keys
    ...

    [cascade]
    delta_over_omega_L = 1e-3
    g_over_omega_L = 2e-2          # semiclassical g; g0 = g / (2 alpha). Or g0_over_omega_L.
    alphas = 4, 8, 16
    periods = 1                    # or t_end_over_omega_L
    points = 401

    [output]
    path = out.csv
    format = csv                   # csv | json
    diagnostics = diag.txt         # default: stderr

Every numeric input is a ratio, so omega_L = 1 internally.
"""
from dataclasses import dataclass, field, replace
import configparser
import math
import re
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError

FAMILIES = ("obe", "fme", "gbe")
INITIAL_STATES = ("thermal", "ground", "excited", "plus_x", "random")
BATH_MODELS = ("flat", "ohmic", "lorentzian", "table")
G_KEYS = ("g_over_gamma", "g_over_delta", "g_over_omega_L")
DELTA_KEYS = ("delta_over_gamma", "delta_over_omega_L")
EXCLUSIVE = {"system": (G_KEYS, DELTA_KEYS),
             "cascade": (("g_over_omega_L", "g0_over_omega_L"),
                         ("periods", "t_end_over_omega_L"))}
SWEEPABLE = G_KEYS + DELTA_KEYS + ("gamma_over_omega_L", "beta_L")

KNOWN = {
    "system": {"families", "gamma_over_omega_L", "beta_L", "initial", "seed"}
              | set(G_KEYS) | set(DELTA_KEYS),
    "bath": {"model", "fme_occupation", "cutoff_over_omega_L", "width_over_omega_L", "table"},
    "time": {"unit", "t_end", "points"},
    "sweep": {f"{a}{k}" for a in ("x", "y") for k in ("", "_scale", "_min", "_max", "_count")},
    "cascade": {"delta_over_omega_L", "g_over_omega_L", "g0_over_omega_L", "alphas",
                "periods", "t_end_over_omega_L", "points"},
    "output": {"path", "format", "diagnostics"},
}


@dataclass(frozen=True)
class Axis:
    key: str
    scale: str
    lo: float
    hi: float
    count: int

    def values(self):
        if self.count == 1:
            return np.array([self.lo])
        if self.scale == "log":
            return np.logspace(math.log10(self.lo), math.log10(self.hi), self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; only plain values so it pickles to workers."""

    families: tuple = ("obe",)
    system: dict = field(default_factory=dict)
    initial: str = "thermal"
    seed: int = 0
    bath_model: str = "flat"
    fme_occupation: str = "exact"
    cutoff_over_omega_L: float = 10.0
    width_over_omega_L: float = 0.1
    table: str = None
    time_unit: str = "gamma"
    t_end: float = None
    points: int = None
    axes: tuple = ()
    cascade: dict = field(default_factory=dict)
    out_path: str = None
    out_format: str = "csv"
    diagnostics: str = None
    source: str = "<defaults>"

    def with_system(self, **changes):
        sysd = dict(self.system)
        for k, v in changes.items():
            # a sweep axis replaces whichever alternative key fixed that quantity
            group = G_KEYS if k in G_KEYS else DELTA_KEYS if k in DELTA_KEYS else (k,)
            for other in group:
                sysd.pop(other, None)
            sysd[k] = v
        return replace(self, system=sysd)


class _Located:
    """Line numbers of ``key =`` entries, for error messages."""

    def __init__(self, text, source):
        self.source = source
        self.lines = {}
        section = None
        for no, line in enumerate(text.splitlines(), 1):
            m = re.match(r"\s*\[([^\]]+)\]", line)
            if m:
                section = m.group(1).strip()
                self.lines[(section, None)] = no
                continue
            m = re.match(r"\s*([A-Za-z0-9_]+)\s*[=:]", line)
            if m and section:
                self.lines[(section, m.group(1))] = no

    def error(self, section, key, msg):
        no = self.lines.get((section, key))
        where = f"{self.source}:{no}" if no else self.source
        name = f"[{section}] {key}" if key else f"[{section}]"
        return ConfigError(f"{where}: {name}: {msg}")


def preset_path(name):
    """Path of a preset shipped with the package (``fig2a`` or ``fig2a.ini``)."""
    stem = name[:-4] if name.endswith(".ini") else name
    path = resources.files("obethermo") / "presets" / f"{stem}.ini"
    if not path.is_file():
        raise ConfigError(f"no preset named {name!r}; available: {', '.join(list_presets())}")
    return Path(str(path))


def list_presets():
    folder = resources.files("obethermo") / "presets"
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".ini"))


def _parse_overrides(overrides):
    out = []
    for item in overrides or ():
        m = re.fullmatch(r"\s*([A-Za-z_]+)\.([A-Za-z0-9_]+)\s*=(.*)", item)
        if not m:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        out.append((m.group(1), m.group(2), m.group(3).strip()))
    return out


def load_config(path=None, overrides=(), text=None):
    """Read a config file (or ``text``) and apply ``section.key=value`` overrides."""
    if text is None and path is not None:
        p = Path(path)
        if not p.is_file():
            p = preset_path(str(path)) if "/" not in str(path) else p
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        source = str(p)
    else:
        source = "<text>" if text is not None else "<defaults>"
        text = text or ""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    loc = _Located(text, source)
    for section, key, value in _parse_overrides(overrides):
        if not parser.has_section(section):
            parser.add_section(section)
        for group in EXCLUSIVE.get(section, ()):
            if key in group:
                for other in group:
                    parser.remove_option(section, other)
        parser.set(section, key, value)
        loc.lines[(section, key)] = None
    return _build(parser, loc)


def _number(parser, loc, section, key, kind=float, default=None, positive=False,
            nonneg=False):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        val = kind(raw)
    except ValueError:
        raise loc.error(section, key, f"not a valid {kind.__name__}: {raw!r}") from None
    if kind is float and not math.isfinite(val):
        raise loc.error(section, key, "must be finite")
    if positive and not val > 0:
        raise loc.error(section, key, f"must be positive, got {raw}")
    if nonneg and val < 0:
        raise loc.error(section, key, f"must be nonnegative, got {raw}")
    return val


def _choice(parser, loc, section, key, options, default):
    if not parser.has_option(section, key):
        return default
    val = parser.get(section, key).strip()
    if val not in options:
        raise loc.error(section, key, f"{val!r} is not one of {', '.join(options)}")
    return val


def _one_of(parser, loc, section, keys, what):
    present = [k for k in keys if parser.has_option(section, k)]
    if len(present) > 1:
        raise loc.error(section, present[1], f"{what} given twice (also {present[0]})")
    return present[0] if present else None


def _build(parser, loc):
    for section in parser.sections():
        if section not in KNOWN:
            raise loc.error(section, None, "unknown section")
        for key in parser.options(section):
            if key not in KNOWN[section]:
                raise loc.error(section, key, "unknown key")

    S = "system"
    fams = ("obe",)
    if parser.has_option(S, "families"):
        fams = tuple(f.strip() for f in parser.get(S, "families").split(",") if f.strip())
        bad = [f for f in fams if f not in FAMILIES]
        if bad or not fams:
            raise loc.error(S, "families", f"expected a list drawn from {', '.join(FAMILIES)}")
    system = {}
    system["gamma_over_omega_L"] = _number(parser, loc, S, "gamma_over_omega_L",
                                           default=1e-4, nonneg=True)
    system["beta_L"] = _number(parser, loc, S, "beta_L", default=10.0, positive=True)
    gk = _one_of(parser, loc, S, G_KEYS, "drive strength")
    dk = _one_of(parser, loc, S, DELTA_KEYS, "detuning")
    system[gk or "g_over_gamma"] = _number(parser, loc, S, gk, default=1.0, nonneg=True) \
        if gk else 1.0
    system[dk or "delta_over_gamma"] = _number(parser, loc, S, dk, default=0.0) if dk else 0.0

    kw = dict(families=fams, system=system, source=loc.source)
    kw["initial"] = _choice(parser, loc, S, "initial", INITIAL_STATES, "thermal")
    kw["seed"] = _number(parser, loc, S, "seed", int, default=0, nonneg=True)

    B = "bath"
    kw["bath_model"] = _choice(parser, loc, B, "model", BATH_MODELS, "flat")
    kw["fme_occupation"] = _choice(parser, loc, B, "fme_occupation", ("exact", "flat"), "exact")
    kw["cutoff_over_omega_L"] = _number(parser, loc, B, "cutoff_over_omega_L", default=10.0,
                                        positive=True)
    kw["width_over_omega_L"] = _number(parser, loc, B, "width_over_omega_L", default=0.1,
                                       positive=True)
    if parser.has_option(B, "table"):
        kw["table"] = parser.get(B, "table").strip()
    if kw["bath_model"] == "table" and not kw.get("table"):
        raise loc.error(B, "model", "model = table needs a table path")

    has_time, has_sweep = parser.has_section("time"), parser.has_section("sweep")
    if has_time and has_sweep:
        raise loc.error("sweep", None, "give either a [time] or a [sweep] grid, not both")
    if has_time:
        T = "time"
        kw["time_unit"] = _choice(parser, loc, T, "unit", ("gamma", "omega_L"), "gamma")
        kw["t_end"] = _number(parser, loc, T, "t_end", default=5.0, positive=True)
        kw["points"] = _number(parser, loc, T, "points", int, default=501)
        if kw["points"] < 2:
            raise loc.error(T, "points", "need at least 2 points")
        if kw["time_unit"] == "gamma" and system["gamma_over_omega_L"] == 0:
            raise loc.error(T, "unit", "times in units of 1/gamma need gamma > 0")
    if has_sweep:
        kw["axes"] = tuple(_axis(parser, loc, a) for a in ("x", "y")
                           if parser.has_option("sweep", a))
        if not kw["axes"]:
            raise loc.error("sweep", None, "needs at least the x axis")
        if len(kw["axes"]) == 2 and kw["axes"][0].key == kw["axes"][1].key:
            raise loc.error("sweep", "y", "both axes sweep the same key")

    if parser.has_section("cascade"):
        kw["cascade"] = _cascade(parser, loc)

    O = "output"
    if parser.has_option(O, "path"):
        kw["out_path"] = parser.get(O, "path").strip()
    kw["out_format"] = _choice(parser, loc, O, "format", ("csv", "json"), "csv")
    if parser.has_option(O, "diagnostics"):
        kw["diagnostics"] = parser.get(O, "diagnostics").strip()
    return RunConfig(**kw)


def _axis(parser, loc, a):
    s = "sweep"
    key = parser.get(s, a).strip()
    if key not in SWEEPABLE:
        raise loc.error(s, a, f"cannot sweep {key!r}; choose from {', '.join(SWEEPABLE)}")
    scale = _choice(parser, loc, s, f"{a}_scale", ("log", "linear"), "linear")
    for k in (f"{a}_min", f"{a}_max"):
        if not parser.has_option(s, k):
            raise loc.error(s, a, f"missing {k}")
    lo = _number(parser, loc, s, f"{a}_min")
    hi = _number(parser, loc, s, f"{a}_max")
    count = _number(parser, loc, s, f"{a}_count", int, default=1)
    if count < 1:
        raise loc.error(s, f"{a}_count", "must be at least 1")
    if hi < lo:
        raise loc.error(s, f"{a}_max", "below the minimum")
    if scale == "log" and not lo > 0:
        raise loc.error(s, f"{a}_min", "log axis needs positive bounds")
    if key in ("beta_L",) and not lo > 0:
        raise loc.error(s, f"{a}_min", f"{key} must stay positive")
    if key in ("gamma_over_omega_L",) + G_KEYS and lo < 0:
        raise loc.error(s, f"{a}_min", f"{key} must stay nonnegative")
    return Axis(key, scale, lo, hi, count)


def _cascade(parser, loc):
    C = "cascade"
    out = {"delta_over_omega_L": _number(parser, loc, C, "delta_over_omega_L", default=0.0)}
    gk = _one_of(parser, loc, C, ("g_over_omega_L", "g0_over_omega_L"), "coupling")
    if gk is None:
        raise loc.error(C, None, "give g_over_omega_L or g0_over_omega_L")
    out[gk] = _number(parser, loc, C, gk, nonneg=True)
    raw = parser.get(C, "alphas", fallback="4, 8, 16")
    try:
        alphas = tuple(float(a) for a in raw.split(",") if a.strip())
    except ValueError:
        raise loc.error(C, "alphas", f"expected a comma-separated list, got {raw!r}") from None
    if not alphas or any(a < 0 or not math.isfinite(a) for a in alphas):
        raise loc.error(C, "alphas", "amplitudes must be finite and nonnegative")
    out["alphas"] = alphas
    tk = _one_of(parser, loc, C, ("periods", "t_end_over_omega_L"), "time span")
    out[tk or "periods"] = _number(parser, loc, C, tk, positive=True) if tk else 1.0
    out["points"] = _number(parser, loc, C, "points", int, default=401)
    if out["points"] < 2:
        raise loc.error(C, "points", "need at least 2 points")
    return out
