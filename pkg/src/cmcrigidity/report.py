"""Versioned JSON documents for rigidity reports and congruence results."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .rigidity import CongruenceResult, RigidityReport, Verdict

SCHEMA_VERSION = 1


@dataclass
class ReportDocument:
    report: RigidityReport | CongruenceResult
    inputs: dict = field(default_factory=dict)
    tool_version: str = __version__
    schema_version: int = SCHEMA_VERSION


def _report_to_dict(report) -> dict:
    if isinstance(report, RigidityReport):
        return {
            "type": "rigidity",
            "subject": report.subject,
            "verdict": report.verdict.value,
            "obstruction": report.obstruction,
            "tolerances": report.tolerances,
            "diagnostic": report.diagnostic,
        }
    if isinstance(report, CongruenceResult):
        return {
            "type": "congruence",
            "rotation": np.asarray(report.rotation).tolist(),
            "translation": np.asarray(report.translation).tolist(),
            "reflection": report.reflection,
            "rms_residual": report.rms_residual,
            "recovered_theta": report.recovered_theta,
        }
    raise TypeError(f"cannot serialize {type(report).__name__}")


def _report_from_dict(d: dict, timestamp: str | None):
    kind = d["type"]
    if kind == "rigidity":
        extra = {"timestamp": timestamp} if timestamp else {}
        return RigidityReport(
            d["subject"], Verdict(d["verdict"]), d["obstruction"], d["tolerances"], d.get("diagnostic"), **extra
        )
    if kind == "congruence":
        return CongruenceResult(
            np.array(d["rotation"], dtype=float),
            np.array(d["translation"], dtype=float),
            bool(d["reflection"]),
            float(d["rms_residual"]),
            d["recovered_theta"],
        )
    raise ValueError(f"unknown report type {kind!r}")


def data_section(doc: ReportDocument) -> dict:
    """Everything except the header; byte-stable for fixed inputs and version."""
    return {"inputs": doc.inputs, "report": _report_to_dict(doc.report)}


def serialize(doc: ReportDocument) -> str:
    """JSON text.  Floats use Python's shortest round-trip repr, so parsing is exact."""
    timestamp = getattr(doc.report, "timestamp", None) or datetime.now(timezone.utc).isoformat()
    payload = {
        "schema_version": doc.schema_version,
        "tool_version": doc.tool_version,
        "header": {"timestamp": timestamp},
        "data": data_section(doc),
    }
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def parse(text: str) -> ReportDocument:
    payload = json.loads(text)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}")
    data = payload["data"]
    report = _report_from_dict(data["report"], payload.get("header", {}).get("timestamp"))
    return ReportDocument(report, data.get("inputs", {}), payload["tool_version"], version)


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
