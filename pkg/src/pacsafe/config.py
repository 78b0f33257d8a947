"""Run configuration from INI files, presets and command-line overrides.

Grammar (standard INI; ``#`` and ``;`` start comments)::

    [system]
    name = lotka                 # built-in benchmark, or
    plugin = python3 sim.py      # external simulator command line
    timeout = 5                  # seconds per plugin request

    [method]
    name = sbc3                  # rbc1 | rbc1_vc | rbc2 | sbc3
    preset = table1/ex6-sbc3     # optional; fills system and params

    [params]
    alpha1 = 0.01                # any PacParams field
    kappa = 10

    [output]
    dir = out
    seed = 0
    workers = 1

Precedence, lowest first: published defaults for the method (and example,
for built-in systems), the preset, ``[params]``, then command-line flags.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import Method, PacParams
from .errors import ConfigError
from .presets import default_params, example_number, get_preset
from .systems.benchmarks import BUILTIN_NAMES, builtin
from .systems.plugin import DEFAULT_TIMEOUT, PluginSystem

_INT_FIELDS = {"kappa", "N_o", "vc_dim"}
_SECTIONS = {"system", "method", "params", "output"}


@dataclass
class RunConfig:
    system: Optional[str] = None
    plugin: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT
    params: Optional[PacParams] = None
    seed: int = 0
    workers: int = 1
    out_dir: str = "."

    def open_system(self):
        if self.plugin:
            return PluginSystem(self.plugin, timeout=self.timeout, name=self.system)
        if not self.system:
            raise ConfigError("no system given: set [system] name, --system, --preset or --plugin")
        return builtin(self.system)


def param_value(name: str, text: str):
    if name == "method":
        return Method.parse(text)
    if name == "vc_dim" and text.strip().lower() in ("", "none"):
        return None
    try:
        return int(text) if name in _INT_FIELDS else float(text)
    except ValueError:
        raise ConfigError(f"[params] {name} = {text!r} is not a valid number") from None


def _parse_seed(text) -> int:
    try:
        seed = int(str(text), 0)
    except ValueError:
        raise ConfigError(f"seed {text!r} is not an integer") from None
    if not 0 <= seed < 1 << 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


def load_config(path=None, preset: Optional[str] = None, method: Optional[str] = None,
                system: Optional[str] = None, plugin: Optional[str] = None,
                seed=None, workers: Optional[int] = None, out_dir: Optional[str] = None,
                overrides: Optional[dict] = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # parameter names are case-sensitive (U_a, N_o)
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path} not found")
        try:
            cp.read(p, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        unknown = set(cp.sections()) - _SECTIONS
        if unknown:
            raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    sec = lambda s: cp[s] if cp.has_section(s) else {}

    preset = preset or sec("method").get("preset")
    sys_name = system or sec("system").get("name")
    plugin = plugin or sec("system").get("plugin")
    method_name = method or sec("method").get("name")

    if preset:
        p_sys, params = get_preset(preset)
        sys_name = sys_name or p_sys
        if method_name and Method.parse(method_name) is not params.method:
            raise ConfigError(f"method {method_name!r} conflicts with preset {preset!r}")
    else:
        m = Method.parse(method_name or "rbc1")
        example = example_number(sys_name) if (sys_name in BUILTIN_NAMES and not plugin) else 1
        params = default_params(m, example)

    changes = {}
    known = {f.name for f in dataclasses.fields(PacParams)}
    for k, v in dict(sec("params")).items():
        if k not in known:
            raise ConfigError(f"unknown parameter [params] {k}")
        changes[k] = param_value(k, v)
    changes.update(overrides or {})
    if changes:
        params = params.replace(**changes)

    out = sec("output")
    timeout = float(sec("system").get("timeout", DEFAULT_TIMEOUT))
    if not timeout > 0:
        raise ConfigError("plugin timeout must be positive")
    w = workers if workers is not None else int(out.get("workers", 1))
    if w < 1:
        raise ConfigError("workers must be at least 1")
    return RunConfig(
        system=sys_name, plugin=plugin, timeout=timeout, params=params,
        seed=_parse_seed(seed if seed is not None else out.get("seed", 0)),
        workers=w, out_dir=out_dir or out.get("dir", "."))
