"""Python access to the csmlab solver and theorem monitors.

Configs are plain dicts with the same schema as the JSON files the
command-line tool reads.
"""

import json

from . import _core
from ._core import InvalidInput, __version__, decay_rate_fit, groenwall_fit

__all__ = [
    "InvalidInput",
    "config_digest",
    "decay_rate_fit",
    "groenwall_fit",
    "normalized_config",
    "run",
    "run_pair",
    "verify",
    "__version__",
]


def run(config):
    """Run one model. Returns series columns as numpy arrays and abort info."""
    return _core.run(json.dumps(config))


def run_pair(config):
    """Run a Navier-Stokes / corrected Smagorinsky pair from a Pair config."""
    return _core.run_pair(json.dumps(config))


def verify(theorem, config):
    """Run the config and return the monitor report: 1 energy envelope, 2 error bound, 3 error decay."""
    return json.loads(_core.verify(int(theorem), json.dumps(config)))


def normalized_config(config):
    return json.loads(_core.normalized_config(json.dumps(config)))


def config_digest(config):
    return _core.config_digest(json.dumps(config))
