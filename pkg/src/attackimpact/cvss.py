"""CVSS v2 base-metric arithmetic.

Only the base exploitability and impact subscores are implemented; they are
what vulnerability catalogs in this package are built from. Temporal and
environmental metrics are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class AccessVector(float, Enum):
    LOCAL = 0.395
    ADJACENT = 0.646
    NETWORK = 1.0


class AccessComplexity(float, Enum):
    HIGH = 0.35
    MEDIUM = 0.61
    LOW = 0.71


class Authentication(float, Enum):
    MULTIPLE = 0.45
    SINGLE = 0.56
    NONE = 0.704


class ImpactLevel(float, Enum):
    NONE = 0.0
    PARTIAL = 0.275
    COMPLETE = 0.660


_VECTOR_CODES = {
    "AV": {"L": AccessVector.LOCAL, "A": AccessVector.ADJACENT,
           "N": AccessVector.NETWORK},
    "AC": {"H": AccessComplexity.HIGH, "M": AccessComplexity.MEDIUM,
           "L": AccessComplexity.LOW},
    "Au": {"M": Authentication.MULTIPLE, "S": Authentication.SINGLE,
           "N": Authentication.NONE},
    "C": {"N": ImpactLevel.NONE, "P": ImpactLevel.PARTIAL,
          "C": ImpactLevel.COMPLETE},
    "I": {"N": ImpactLevel.NONE, "P": ImpactLevel.PARTIAL,
          "C": ImpactLevel.COMPLETE},
    "A": {"N": ImpactLevel.NONE, "P": ImpactLevel.PARTIAL,
          "C": ImpactLevel.COMPLETE},
}

_CODE_OF = {
    AccessVector.LOCAL: "L", AccessVector.ADJACENT: "A", AccessVector.NETWORK: "N",
    AccessComplexity.HIGH: "H", AccessComplexity.MEDIUM: "M",
    AccessComplexity.LOW: "L",
    Authentication.MULTIPLE: "M", Authentication.SINGLE: "S",
    Authentication.NONE: "N",
    ImpactLevel.NONE: "N", ImpactLevel.PARTIAL: "P", ImpactLevel.COMPLETE: "C",
}


class VectorParseError(ValueError):
    """Raised for malformed CVSS v2 base vector strings."""


@dataclass(frozen=True)
class CvssV2Base:
    """The six CVSS v2 base components, e.g. AV:N/AC:L/Au:N/C:C/I:C/A:C."""

    access_vector: AccessVector
    access_complexity: AccessComplexity
    authentication: Authentication
    conf_impact: ImpactLevel
    integ_impact: ImpactLevel
    avail_impact: ImpactLevel

    def exploitability(self) -> float:
        """Exploitability subscore scaled to a probability in [0, 1]."""
        raw = (20.0 * self.access_vector.value * self.access_complexity.value
               * self.authentication.value)
        return min(max(raw / 10.0, 0.0), 1.0)

    def impact(self) -> float:
        """Impact subscore on the 0..10.41 scale."""
        return 10.41 * (1.0 - (1.0 - self.conf_impact.value)
                        * (1.0 - self.integ_impact.value)
                        * (1.0 - self.avail_impact.value))

    def to_string(self) -> str:
        return ("AV:{}/AC:{}/Au:{}/C:{}/I:{}/A:{}".format(
            _CODE_OF[self.access_vector], _CODE_OF[self.access_complexity],
            _CODE_OF[self.authentication], _CODE_OF[self.conf_impact],
            _CODE_OF[self.integ_impact], _CODE_OF[self.avail_impact]))

    @classmethod
    def from_string(cls, vector: str) -> "CvssV2Base":
        """Parse a standard base vector like ``AV:N/AC:L/Au:N/C:C/I:C/A:C``."""
        text = vector.strip().strip("()")
        parts: dict[str, str] = {}
        for chunk in text.split("/"):
            if ":" not in chunk:
                raise VectorParseError(f"malformed component {chunk!r} in {vector!r}")
            key, _, code = chunk.partition(":")
            parts[key] = code
        missing = [k for k in _VECTOR_CODES if k not in parts]
        if missing:
            raise VectorParseError(f"{vector!r} missing components {missing}")
        values = {}
        for key, code in parts.items():
            if key not in _VECTOR_CODES:
                raise VectorParseError(f"unknown component {key!r} in {vector!r}")
            try:
                values[key] = _VECTOR_CODES[key][code]
            except KeyError:
                raise VectorParseError(
                    f"unknown value {code!r} for {key} in {vector!r}") from None
        return cls(values["AV"], values["AC"], values["Au"],
                   values["C"], values["I"], values["A"])


def exploitability(vector: CvssV2Base) -> float:
    return vector.exploitability()


def impact(vector: CvssV2Base) -> float:
    return vector.impact()
