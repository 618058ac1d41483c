"""Serialization of check reports (JSON schema 1, or one text line per check)."""

from __future__ import annotations

import json

FIELD_ORDER = ("schema", "check_id", "status", "params", "seed", "lhs", "rhs",
               "max_discrepancy", "witness", "details", "runtime_ms")


def ordered(report: dict) -> dict:
    """Top-level fields in the documented order; unknown fields are an error."""
    extra = set(report) - set(FIELD_ORDER)
    if extra:
        raise ValueError(f"unexpected report fields {sorted(extra)}")
    return {k: report.get(k) for k in FIELD_ORDER}


def _short(x, width: int = 60) -> str:
    s = json.dumps(x, ensure_ascii=False)
    return s if len(s) <= width else s[: width - 3] + "..."


def text_line(report: dict) -> str:
    mark = "✓" if report["status"] == "pass" else "✗"
    line = f"{mark} {report['check_id']} [{report['status']}] max_discrepancy={_short(report['max_discrepancy'])}"
    if report.get("runtime_ms") is not None:
        line += f" runtime_ms={report['runtime_ms']}"
    if report["status"] == "error":
        line += f" error={report['details'].get('error')}"
    elif report["status"] == "fail":
        line += f" witness={_short(report['witness'], 200)}"
    return line


def emit_report(reports: list[dict], fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps([ordered(r) for r in reports], indent=2, ensure_ascii=False) + "\n"
    if fmt == "text":
        return "".join(text_line(r) + "\n" for r in reports)
    raise ValueError(f"unknown format {fmt!r}")
