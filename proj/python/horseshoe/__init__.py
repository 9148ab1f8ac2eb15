"""Horseshoe classes, composition checks and transverse dimension.

Configs are plain dicts in the run_config schema; missing keys take defaults.
"""

import json
from importlib import resources

from . import _core
from ._core import HorseshoeError, set_worker_count, worker_count

SCHEMA_VERSION = _core.SCHEMA_VERSION

__all__ = [
    "HorseshoeError",
    "SCHEMA_VERSION",
    "build",
    "config_warnings",
    "default_config",
    "dimension",
    "dump_geometry",
    "dump_tangency",
    "exponents",
    "extend",
    "gibbs",
    "h4_region",
    "schema",
    "set_worker_count",
    "verify",
    "worker_count",
]


def _text(config):
    return json.dumps(config or {})


def default_config():
    return json.loads(_core.default_config())


def config_warnings(config=None):
    return list(_core.config_warnings(_text(config)))


def build(config=None):
    """Returns (summary dict, class dump as JSONL str, geometry CSV str)."""
    summary, dump, geometry = _core.build(_text(config))
    return json.loads(summary), dump.decode(), geometry


def extend(dump, config=None):
    summary, out, geometry = _core.extend(dump, _text(config))
    return json.loads(summary), out.decode(), geometry


def dimension(config=None, dump=""):
    return json.loads(_core.dimension(_text(config), dump))


def gibbs(config=None, dump=""):
    return _core.gibbs(_text(config), dump)


def exponents(ds=None, du=None, config=None):
    cfg = dict(config or {})
    if ds is not None:
        cfg["ds"] = ds
    if du is not None:
        cfg["du"] = du
    return json.loads(_core.exponents(_text(cfg)))


def h4_region(n=50):
    return _core.h4_region(_text({"h4_grid": n}))


def dump_tangency(config=None):
    return _core.dump_tangency(_text(config))


def dump_geometry(config=None):
    return _core.dump_geometry(_text(config))


def verify(config=None, criteria=()):
    return json.loads(_core.verify(_text(config), list(criteria)))


def schema(name):
    """Loads a shipped JSON schema by name, e.g. "dimension"."""
    text = resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
