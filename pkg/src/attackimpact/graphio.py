"""Document formats: models, scenarios, reports, sweeps.

Model documents are self-contained JSON carrying the vulnerability catalog,
attack states and vectors, the network, and the service grouping. Scores may
be given as CVSS v2 vector strings, as explicit decimal values (strings to
sidestep float ambiguity), or both; explicit exploitability always carries a
scale flag ("unit" for 0-1, "cvss10" for 0-10) so a factor-of-ten slip is a
loud error instead of a silent one.

Report output comes in two formats: "rows" (comma-separated, fixed header,
6-decimal values, natural subject order) and "structured" (lossless JSON
mirror). Both are byte-deterministic for identical inputs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

from .combiner import combine
from .cvss import CvssV2Base, VectorParseError
from .metrics import METRIC_NAMES, MetricsReport
from .model import (
    AttackGraph,
    AttackState,
    AttackVector,
    CombinedModel,
    NetworkGraph,
    ServiceGrouping,
    StateKind,
    Vulnerability,
    _natural_key,
    validate,
    Severity,
)
from .scenario import (
    DeltaReport,
    FixVulnerability,
    MonitorNode,
    ScenarioAction,
    SetAllLinkWeights,
    SetLinkWeight,
    SweepPoint,
)

SCHEMA_VERSION = "1"
SCORE_AGREEMENT = 5e-6


class ParseError(ValueError):
    """Malformed document text; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class ValidationError(ValueError):
    """The document parsed but the model breaks invariants."""

    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


class ScoreMismatch(ValueError):
    """Explicit score and CVSS vector disagree beyond tolerance."""


_MODEL_KEYS = {"schema_version", "vulnerabilities", "attack_states",
               "attack_vectors", "network_nodes", "network_edges", "grouping"}
_VULN_KEYS = {"id", "cvss_vector", "exploitability", "scale", "impact"}
_STATE_KEYS = {"id", "kind", "service"}
_VECTOR_KEYS = {"id", "source", "target", "vulnerability"}
_EDGE_KEYS = {"a", "b", "weight"}


def _parse_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc


def _reject_unknown(entry: Mapping, allowed: set[str], where: str, strict: bool):
    if not strict:
        return
    unknown = set(entry) - allowed
    if unknown:
        raise ParseError(f"unknown field(s) {sorted(unknown)} in {where}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or value is None:
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"{where}: {value!r} is not a number") from None
    raise ParseError(f"{where}: expected a number, got {type(value).__name__}")


def _load_vulnerability(entry: Mapping, strict: bool) -> Vulnerability:
    _reject_unknown(entry, _VULN_KEYS, f"vulnerability {entry.get('id')}", strict)
    if "id" not in entry:
        raise ParseError("vulnerability entry missing id")
    vuln_id = entry["id"]
    vector = None
    if entry.get("cvss_vector"):
        try:
            vector = CvssV2Base.from_string(entry["cvss_vector"])
        except VectorParseError as exc:
            raise ParseError(f"vulnerability {vuln_id}: {exc}") from exc

    exploitability = None
    if "exploitability" in entry:
        raw = _number(entry["exploitability"], f"vulnerability {vuln_id}")
        scale = entry.get("scale")
        if scale == "unit":
            exploitability = raw
        elif scale == "cvss10":
            exploitability = raw / 10.0
        elif scale is None:
            raise ParseError(
                f"vulnerability {vuln_id}: explicit exploitability needs a "
                "scale flag (\"unit\" or \"cvss10\")")
        else:
            raise ParseError(f"vulnerability {vuln_id}: unknown scale {scale!r}")

    impact = None
    if "impact" in entry:
        impact = _number(entry["impact"], f"vulnerability {vuln_id}")

    if vector is not None:
        recomputed_e = vector.exploitability()
        recomputed_i = vector.impact()
        if exploitability is None:
            exploitability = recomputed_e
        elif abs(exploitability - recomputed_e) > SCORE_AGREEMENT:
            raise ScoreMismatch(
                f"vulnerability {vuln_id}: explicit exploitability "
                f"{exploitability} disagrees with vector value {recomputed_e:.7f}")
        if impact is None:
            impact = recomputed_i
        elif abs(impact - recomputed_i) > SCORE_AGREEMENT:
            raise ScoreMismatch(
                f"vulnerability {vuln_id}: explicit impact {impact} "
                f"disagrees with vector value {recomputed_i:.7f}")
    if exploitability is None:
        raise ParseError(f"vulnerability {vuln_id}: no exploitability "
                         "(give a cvss_vector or an explicit value)")
    if impact is None:
        raise ParseError(f"vulnerability {vuln_id}: no impact "
                         "(give a cvss_vector or an explicit value)")
    return Vulnerability(vuln_id, exploitability, impact, vector)


def _resolve_includes(value: Any, base_dir: Path | None, where: str) -> Any:
    if isinstance(value, Mapping) and "$include" in value:
        if base_dir is None:
            raise ParseError(f"{where}: $include needs a document path "
                             "(load from a file, not from text)")
        target = base_dir / value["$include"]
        try:
            return _parse_json(target.read_text())
        except OSError as exc:
            raise ParseError(f"{where}: cannot read include {target}: {exc}")
    return value


def load_model(text: str, strict: bool = True,
               base_dir: str | Path | None = None) -> CombinedModel:
    """Parse and validate a model document; returns the combined model.

    Raises ParseError for malformed text, ScoreMismatch for score conflicts,
    and ValidationError when the model breaks structural invariants.
    """
    doc = _parse_json(text)
    if not isinstance(doc, Mapping):
        raise ParseError("model document must be a JSON object")
    _reject_unknown(doc, _MODEL_KEYS, "model document", strict)
    base = Path(base_dir) if base_dir is not None else None

    for key in ("vulnerabilities", "attack_states", "attack_vectors",
                "network_nodes", "network_edges", "grouping"):
        if key not in doc:
            raise ParseError(f"model document missing {key!r}")

    vuln_entries = _resolve_includes(doc["vulnerabilities"], base,
                                     "vulnerabilities")
    catalog = tuple(_load_vulnerability(e, strict) for e in vuln_entries)

    grouping_map = {str(node): frozenset(str(s) for s in states)
                    for node, states in dict(doc["grouping"]).items()}
    grouping = ServiceGrouping(grouping_map)

    states = []
    for entry in doc["attack_states"]:
        _reject_unknown(entry, _STATE_KEYS, f"state {entry.get('id')}", strict)
        if "id" not in entry or "kind" not in entry:
            raise ParseError(f"state entry missing id or kind: {entry}")
        try:
            kind = StateKind(entry["kind"])
        except ValueError:
            raise ParseError(f"state {entry['id']}: unknown kind "
                             f"{entry['kind']!r}") from None
        service = entry.get("service")
        if service is None and kind is StateKind.EXPLOIT:
            service = grouping.service_of(entry["id"])
        if kind is not StateKind.EXPLOIT:
            service = None
        try:
            states.append(AttackState(str(entry["id"]), kind,
                                      str(service) if service else None))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc

    vectors = []
    for entry in doc["attack_vectors"]:
        _reject_unknown(entry, _VECTOR_KEYS, f"vector {entry.get('id')}", strict)
        missing = _VECTOR_KEYS - set(entry)
        if missing:
            raise ParseError(f"vector entry missing {sorted(missing)}: {entry}")
        vectors.append(AttackVector(str(entry["id"]), str(entry["source"]),
                                    str(entry["target"]),
                                    str(entry["vulnerability"])))

    nodes = tuple(str(n) for n in doc["network_nodes"])
    edges = []
    for entry in doc["network_edges"]:
        _reject_unknown(entry, _EDGE_KEYS, "network edge", strict)
        missing = _EDGE_KEYS - set(entry)
        if missing:
            raise ParseError(f"network edge missing {sorted(missing)}: {entry}")
        edges.append((str(entry["a"]), str(entry["b"]),
                      _number(entry["weight"], "network edge weight")))

    attack = AttackGraph(tuple(states), tuple(vectors), catalog)
    network = NetworkGraph(nodes, tuple(edges))
    model = CombinedModel(attack, network, grouping)
    errors = [v for v in validate(model) if v.severity is Severity.ERROR]
    if errors:
        raise ValidationError(errors)
    return model


def load_model_file(path: str | Path, strict: bool = True) -> CombinedModel:
    path = Path(path)
    return load_model(path.read_text(), strict=strict, base_dir=path.parent)


def dump_model(model: CombinedModel) -> str:
    """Canonical serialization: sorted entries, stable float formatting.

    load(dump(m)) is structurally equal to m; the byte output doubles as the
    content-addressing basis for the model store.
    """
    doc = {
        "schema_version": SCHEMA_VERSION,
        "vulnerabilities": [
            {
                "id": v.id,
                **({"cvss_vector": v.cvss_vector.to_string()}
                   if v.cvss_vector else {}),
                "exploitability": repr(v.exploitability),
                "scale": "unit",
                "impact": repr(v.impact),
            }
            for v in sorted(model.attack.catalog,
                            key=lambda v: _natural_key(v.id))
        ],
        "attack_states": [
            {
                "id": s.id,
                "kind": s.kind.value,
                **({"service": s.service} if s.service else {}),
            }
            for s in sorted(model.attack.states,
                            key=lambda s: _natural_key(s.id))
        ],
        "attack_vectors": [
            {"id": v.id, "source": v.source, "target": v.target,
             "vulnerability": v.vulnerability}
            for v in sorted(model.attack.vectors,
                            key=lambda v: _natural_key(v.id))
        ],
        "network_nodes": sorted(model.network.nodes, key=_natural_key),
        "network_edges": [
            {"a": a, "b": b, "weight": repr(w)}
            for a, b, w in sorted(model.network.edges,
                                  key=lambda e: (_natural_key(e[0]),
                                                 _natural_key(e[1])))
        ],
        "grouping": {
            node: sorted(states, key=_natural_key)
            for node, states in sorted(model.grouping.groups.items(),
                                       key=lambda kv: _natural_key(kv[0]))
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# scenario documents


_ACTION_LOADERS = {
    "fix_vulnerability": lambda e: FixVulnerability(str(e["vulnerability"])),
    "monitor_node": lambda e: MonitorNode(str(e["node"]),
                                          _number(e["factor"], "factor")),
    "set_all_link_weights": lambda e: SetAllLinkWeights(
        _number(e["weight"], "weight")),
    "set_link_weight": lambda e: SetLinkWeight(
        str(e["a"]), str(e["b"]), _number(e["weight"], "weight")),
}


def load_scenario(text: str) -> list[ScenarioAction]:
    doc = _parse_json(text)
    if not isinstance(doc, Mapping) or "actions" not in doc:
        raise ParseError("scenario document needs an \"actions\" list")
    actions = []
    for entry in doc["actions"]:
        kind = entry.get("action")
        if kind not in _ACTION_LOADERS:
            raise ParseError(f"unknown scenario action {kind!r}")
        try:
            actions.append(_ACTION_LOADERS[kind](entry))
        except KeyError as exc:
            raise ParseError(f"action {kind}: missing field {exc}") from exc
    return actions


def dump_scenario(actions: Sequence[ScenarioAction]) -> str:
    entries = []
    for action in actions:
        if isinstance(action, FixVulnerability):
            entries.append({"action": "fix_vulnerability",
                            "vulnerability": action.vulnerability})
        elif isinstance(action, MonitorNode):
            entries.append({"action": "monitor_node", "node": action.node,
                            "factor": repr(action.factor)})
        elif isinstance(action, SetAllLinkWeights):
            entries.append({"action": "set_all_link_weights",
                            "weight": repr(action.weight)})
        elif isinstance(action, SetLinkWeight):
            entries.append({"action": "set_link_weight", "a": action.a,
                            "b": action.b, "weight": repr(action.weight)})
        else:
            raise TypeError(f"unknown scenario action {action!r}")
    return json.dumps({"actions": entries}, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# report documents


def _subjects_in_order(table: Mapping[str, float]) -> list[str]:
    return sorted(table, key=_natural_key)


def _metrics_rows(report: MetricsReport) -> list[str]:
    rows = []
    for name in METRIC_NAMES:
        table = report.metric(name)
        for subject in _subjects_in_order(table):
            rows.append(f"{name},{subject},{table[subject]:.6f}")
    return rows


def _delta_rows(report: DeltaReport) -> list[str]:
    rows = []
    for name in METRIC_NAMES:
        after = report.scenario.metric(name)
        for subject in _subjects_in_order(after):
            change = report.relative[name][subject]
            change_text = "" if change is None else f"{change:.6f}"
            rows.append(f"{name},{subject},{after[subject]:.6f},{change_text}")
    return rows


def _metrics_doc(report: MetricsReport) -> dict:
    return {name: dict(report.metric(name)) for name in METRIC_NAMES}


def _metrics_from_doc(doc: Mapping) -> MetricsReport:
    return MetricsReport(*[dict(doc[name]) for name in METRIC_NAMES])


def write_report(report: MetricsReport | DeltaReport,
                 format: str = "rows") -> str:
    """Render a metrics or delta report; output is byte-deterministic."""
    if format == "rows":
        if isinstance(report, MetricsReport):
            lines = ["metric,subject,value"] + _metrics_rows(report)
        elif isinstance(report, DeltaReport):
            lines = (["metric,subject,value,relative_change"]
                     + _delta_rows(report))
        else:
            raise TypeError(f"cannot render {type(report).__name__}")
        return "\n".join(lines) + "\n"
    if format == "structured":
        if isinstance(report, MetricsReport):
            doc = {"kind": "metrics", "metrics": _metrics_doc(report)}
        elif isinstance(report, DeltaReport):
            doc = {
                "kind": "delta",
                "baseline": _metrics_doc(report.baseline),
                "scenario": _metrics_doc(report.scenario),
                "relative": {name: dict(table)
                             for name, table in report.relative.items()},
                "anomalies": [list(pair) for pair in report.anomalies],
            }
        else:
            raise TypeError(f"cannot render {type(report).__name__}")
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def read_report(text: str) -> MetricsReport | DeltaReport:
    """Inverse of the structured format (the rows format is write-only)."""
    doc = _parse_json(text)
    kind = doc.get("kind")
    if kind == "metrics":
        return _metrics_from_doc(doc["metrics"])
    if kind == "delta":
        return DeltaReport(
            baseline=_metrics_from_doc(doc["baseline"]),
            scenario=_metrics_from_doc(doc["scenario"]),
            relative={name: dict(table)
                      for name, table in doc["relative"].items()},
            anomalies=tuple((m, s) for m, s in doc.get("anomalies", [])),
        )
    raise ParseError(f"unknown report kind {kind!r}")


def write_sweep(points: Sequence[SweepPoint], axis: str,
                format: str = "rows") -> str:
    """Render a sweep as one document; points keep their given order."""
    if format == "rows":
        lines = ["axis_value,metric,subject,value,relative_change"]
        for point in points:
            for row in _delta_rows(point.delta):
                lines.append(f"{point.axis_value},{row}")
        return "\n".join(lines) + "\n"
    if format == "structured":
        doc = {
            "kind": "sweep",
            "axis": axis,
            "points": [
                {
                    "value": point.axis_value,
                    "delta": json.loads(write_report(point.delta,
                                                     "structured")),
                }
                for point in points
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown report format {format!r}")
