"""Closed-shell Dirac-Fock atoms on a radial grid.

``run`` takes a configuration dict (schema ``dfatoms-config/1``) and returns
the report dict the command-line tool would write.
"""

import json

from ._core import (
    CONFIG_SCHEMA,
    REPORT_FORMAT,
    SPEED_OF_LIGHT,
    DfAtomsError,
    oracle_sommerfeld,
    oracle_sommerfeld_shifted,
    solve,
    validate_conditions,
)
from . import _core

__all__ = [
    "CONFIG_SCHEMA",
    "REPORT_FORMAT",
    "SPEED_OF_LIGHT",
    "DfAtomsError",
    "full_config",
    "oracle_sommerfeld",
    "oracle_sommerfeld_shifted",
    "run",
    "solve",
    "validate_conditions",
]


def run(config):
    """Run a configuration (dict or JSON text) and return the report as a dict."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.run_json(text))


def full_config(config):
    """The configuration with every default spelled out."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.default_config(text))
