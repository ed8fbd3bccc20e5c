"""Service-centric impact analysis of attack graphs over weighted networks.

Combines a directed-acyclic attack graph with an undirected weighted
communication network, propagates attack probabilities, computes
service-level expected-impact metrics, and evaluates mitigation scenarios.
"""

__version__ = "0.1.0"

from .cvss import CvssV2Base
from .model import (
    AttackGraph,
    AttackState,
    AttackVector,
    CombinedModel,
    NetworkGraph,
    ServiceGrouping,
    Severity,
    StateKind,
    Violation,
    Vulnerability,
    validate,
)

__all__ = [
    "AttackGraph",
    "AttackState",
    "AttackVector",
    "CombinedModel",
    "CvssV2Base",
    "NetworkGraph",
    "ServiceGrouping",
    "Severity",
    "StateKind",
    "Violation",
    "Vulnerability",
    "validate",
    "__version__",
]
