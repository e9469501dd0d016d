"""Audit records and their JSON / CSV serialisation."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence


def _clean(x):
    # JSON has no inf/nan; keep reports valid and byte-stable
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


@dataclass
class CheckReport:
    """One named inequality audit: ``lhs <= rhs`` up to ``tolerance``.

    ``lhs``/``rhs``/``margin`` are ``None`` for purely qualitative checks.
    """

    name: str
    lhs: Optional[float]
    rhs: Optional[float]
    margin: Optional[float]
    tolerance: float
    passed: bool
    grid: Optional[dict] = None
    dt: Optional[float] = None
    eps: Optional[float] = None
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = bool(d.pop("passed"))
        extra = d.pop("extra")
        out = {k: d[k] for k in ("name", "lhs", "rhs", "margin", "tolerance", "pass", "grid", "dt", "eps", "notes")}
        if extra:
            out["extra"] = extra
        return _clean(out)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"[{status}] {self.name}"]
        if self.lhs is not None:
            parts.append(f"lhs={self.lhs:.6g}")
        if self.rhs is not None:
            parts.append(f"rhs={self.rhs:.6g}")
        if self.notes:
            parts.append(self.notes)
        return "  ".join(parts)


def upper_check(name: str, lhs: float, rhs: float, tolerance: float = 0.0, **kw) -> CheckReport:
    """Report for ``lhs <= rhs + tolerance``."""
    lhs, rhs = float(lhs), float(rhs)
    margin = rhs - lhs
    return CheckReport(name, lhs, rhs, margin, tolerance, bool(margin >= -tolerance), **kw)


def reports_to_json(reports: Iterable[CheckReport]) -> str:
    items = sorted((r.to_dict() for r in reports), key=lambda d: d["name"])
    return json.dumps(items, indent=2, sort_keys=False) + "\n"


def write_reports(reports: Sequence[CheckReport], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(reports_to_json(reports))
    return path


def write_table(rows: Sequence[dict], path, columns: Sequence[str] = ("mu", "t", "value")) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([f"{row[c]:.17g}" if isinstance(row[c], float) else row[c] for c in columns])
    return path
