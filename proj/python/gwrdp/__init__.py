"""Gray-Wyner rate-distortion-perception tools.

The command functions take a config dict (the same schema as the CLI's
``--config`` file) and return a dict with keys ``document``, ``csv``,
``summary`` and ``exit_code``.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    Error,
    Infeasible,
    ResourceLimit,
    __version__,
    default_n0,
    entropy,
    mutual_information,
    seed_rate_overhead,
    selftest,
    tv_distance,
)

__all__ = [
    "ConfigError",
    "Error",
    "Infeasible",
    "ResourceLimit",
    "__version__",
    "default_n0",
    "derand_audit",
    "entropy",
    "mutual_information",
    "rdp",
    "region",
    "seed_rate_overhead",
    "selftest",
    "simulate",
    "tv_distance",
]


def _wrap(fn):
    def call(config, *, seed=None, threads=1, memory_cap=None):
        return json.loads(fn(json.dumps(config), seed, threads, memory_cap))

    call.__name__ = fn.__name__
    call.__doc__ = f"Run the '{fn.__name__}' command on a config dict."
    return call


rdp = _wrap(_core.rdp)
region = _wrap(_core.region)
simulate = _wrap(_core.simulate)
derand_audit = _wrap(_core.derand_audit)
