"""Versioned JSON run reports."""
from __future__ import annotations

import hashlib
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Iterator

SCHEMA_VERSION = 1

REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "command", "input_digest", "seed", "timings", "counters", "sizes", "verdicts"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "command": {"type": "string"},
        "input_digest": {"type": "string", "pattern": "^[0-9a-f]{16}$"},
        "seed": {"type": "integer"},
        "timings": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "counters": {
            "type": "object",
            "required": ["work_scanned", "rounds", "retries"],
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "sizes": {
            "type": "object",
            "required": ["n", "m", "p", "s", "kept", "bound_f"],
            "additionalProperties": {"type": ["integer", "null"]},
        },
        "verdicts": {"type": "object"},
        "details": {"type": "object"},
    },
    "additionalProperties": False,
}


def digest_inputs(blobs: list[bytes]) -> str:
    """64-bit blake2b over the inputs, each length-prefixed."""
    h = hashlib.blake2b(digest_size=8)
    for blob in blobs:
        h.update(len(blob).to_bytes(8, "little"))
        h.update(blob)
    return h.hexdigest()


@dataclass
class RunReport:
    command: str
    input_digest: str
    seed: int
    timings: dict[str, float] = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=lambda: {"work_scanned": 0, "rounds": 0, "retries": 0})
    sizes: dict[str, int | None] = field(
        default_factory=lambda: dict.fromkeys(("n", "m", "p", "s", "kept", "bound_f"))
    )
    verdicts: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    @contextmanager
    def timed(self, phase: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[phase] = round((time.perf_counter() - start) * 1000, 3)

    def to_json(self) -> dict[str, Any]:
        out = {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "timings": self.timings,
            "counters": self.counters,
            "sizes": self.sizes,
            "verdicts": self.verdicts,
        }
        if self.details:
            out["details"] = self.details
        return out

    def render(self, fmt: str = "json") -> str:
        data = self.to_json()
        if fmt == "json":
            return json.dumps(data, indent=2, sort_keys=True) + "\n"
        rows = []
        for key, value in _flatten(data):
            rows.append(f"{key}\t{json.dumps(value) if not isinstance(value, str) else value}")
        return "\n".join(rows) + "\n"


def _flatten(data: Any, prefix: str = "") -> Iterator[tuple[str, Any]]:
    if isinstance(data, dict) and data:
        for key in sorted(data):
            yield from _flatten(data[key], f"{prefix}{key}.")
    else:
        yield prefix[:-1], data


def strip_timings(report: dict[str, Any]) -> dict[str, Any]:
    """Copy of a report without wall-clock fields, for determinism checks."""
    return {k: v for k, v in report.items() if k != "timings"}
