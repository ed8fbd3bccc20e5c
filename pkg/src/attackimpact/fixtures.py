"""Bundled test models, shipped as model documents and loaded on demand.

* ``fig1_example`` - six-state toy with two attack paths over a three-node
  network; the smallest model exercising the combination step.
* ``metrics_example`` - nine-state graph whose middle three states share one
  service node; the reference case for the metric set semantics.
* ``enterprise_scenario`` - the full demonstration model: 18 states, 25
  vectors, 14 vulnerabilities over a ten-node infrastructure network. The
  attack-edge topology is a reconstruction: it satisfies every structural
  fact asserted by the test suite (entry points, path count, choke points,
  hop distances), and is frozen here as the versioned source of truth.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .graphio import load_model
from .model import CombinedModel

_DATA_PACKAGE = "attackimpact.data"


def fixture_text(name: str) -> str:
    return (resources.files(_DATA_PACKAGE) / f"{name}.json").read_text()


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled document (for CLI-style consumers)."""
    return Path(str(resources.files(_DATA_PACKAGE) / f"{name}.json"))


def fig1_example() -> CombinedModel:
    return load_model(fixture_text("fig1_example"))


def metrics_example() -> CombinedModel:
    return load_model(fixture_text("metrics_example"))


def enterprise_scenario() -> CombinedModel:
    return load_model(fixture_text("enterprise_scenario"))
