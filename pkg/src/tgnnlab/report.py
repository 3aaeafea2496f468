"""Check reports and their JSON/CSV serialization.

Serialized reports omit wall-clock timing by default: outputs of the same
(command, flags, seed) must be byte-identical across runs, and timing is
the one field that is not reproducible. Timings stay on the in-memory
objects and are written only on request.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum


class Status(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


MAX_RECORDED_COUNTEREXAMPLES = 5

CSV_COLUMNS = ("check_id", "status", "trials", "max_discrepancy", "runtime_ms", "seed")


@dataclass
class VerificationReport:
    check_id: str
    status: Status
    trials: int
    max_discrepancy: float
    seed: int
    counterexamples: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    runtime_ms: float | None = None

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def to_json_dict(self, include_runtime: bool = False) -> dict:
        return {
            "check_id": self.check_id,
            "status": self.status.value,
            "trials": self.trials,
            "max_discrepancy": self.max_discrepancy,
            "seed": self.seed,
            "counterexamples": self.counterexamples[:MAX_RECORDED_COUNTEREXAMPLES],
            "notes": list(self.notes),
            "params": dict(self.params),
            "runtime_ms": self.runtime_ms if include_runtime else None,
        }


def reports_to_json(reports, seed: int, include_runtime: bool = False) -> str:
    payload = {
        "suite": "tgnnlab-verify",
        "seed": seed,
        "reports": [r.to_json_dict(include_runtime) for r in reports],
    }
    return json.dumps(payload, indent=2) + "\n"


def reports_to_csv(reports, include_runtime: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        rt = ""
        if include_runtime and r.runtime_ms is not None:
            rt = f"{r.runtime_ms:.1f}"
        writer.writerow(
            [r.check_id, r.status.value, r.trials, repr(r.max_discrepancy), rt, r.seed]
        )
    return buf.getvalue()
