"""Three-valued verdicts shared by every certificate and classifier."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class Status(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNDETERMINED = "Undetermined"

    def __str__(self):
        return self.value


HOLDS = Status.HOLDS
FAILS = Status.FAILS
UNDETERMINED = Status.UNDETERMINED


class PreconditionError(ValueError):
    """A criterion was invoked on a system that does not meet its hypotheses."""


class WindowEscape(LookupError):
    """An orbit or support left the materialized window."""

    def __init__(self, atom, message=None):
        self.atom = atom
        super().__init__(message or f"atom {atom} lies outside the materialized window")


@dataclass
class Verdict:
    criterion: str
    status: Status
    reference: str = ""
    witness: Any = None
    tail_model: Optional[str] = None
    values: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def holds(self):
        return self.status is HOLDS

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "status": self.status.value,
            "reference": self.reference,
            "witness": self.witness,
            "tail_model": self.tail_model,
            "values": self.values,
            "notes": list(self.notes),
        }
