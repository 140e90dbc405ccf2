"""Check report records and deterministic serialisation."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"
NON_CONFORMING = "non-conforming"
STATUSES = (PASS, FAIL, SKIPPED, NON_CONFORMING)


@dataclass
class Entry:
    """One check outcome at one point (``point`` is None for chart summaries)."""

    check: str
    point: Optional[int]
    status: str
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    labels: list = field(default_factory=list)
    theta: Optional[dict] = None
    detail: dict = field(default_factory=dict)
    reason: str = ""
    chart: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    def as_dict(self):
        d = {
            "chart": self.chart,
            "check": self.check,
            "point": self.point,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "labels": list(self.labels),
            "theta": self.theta,
        }
        if self.reason:
            d["reason"] = self.reason
        if self.detail:
            d["detail"] = self.detail
        return d


def judge(check, point, residual, tolerance, **kw):
    """Entry with pass/fail decided by ``residual <= tolerance``."""
    residual = float(residual)
    status = PASS if residual <= tolerance else FAIL
    return Entry(check, point, status, residual, tolerance, **kw)


def skip(check, point, reason, **kw):
    return Entry(check, point, SKIPPED, reason=reason, **kw)


def sort_key(entry):
    point = -1 if entry.point is None else entry.point
    return (entry.chart, entry.check, point)


def _fmt_number(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent=2, _level=0):
    """JSON text with every float written to 17 significant digits.

    Dictionary keys keep insertion order; callers are responsible for
    building dictionaries in a fixed order.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_number(obj)
    if isinstance(obj, str):
        import json

        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number, bool)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + dumps(str(k), indent) + ": " + dumps(v, indent, _level + 1)
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def config_hash(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
