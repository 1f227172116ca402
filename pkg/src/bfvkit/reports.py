"""Structured run reports with a deterministic text serialisation.

A report is a list of rows, one per executed check, each carrying the
stable catalog identifier of the identity it verifies.  The structured
document is byte-deterministic for a fixed run description and seed:
row order is fixed by the stage list, numeric residuals are formatted
with a fixed precision, and wall times are masked out unless timings
are explicitly requested.  The format itself is documented in
docs/report-schema.md next to this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

__all__ = ["ReportRow", "RunReport", "render_structured", "render_table",
           "emit_report"]

FORMAT_LINE = "bfvkit-report 1"


@dataclass
class ReportRow:
    check: str          # display name, unique within the report
    anchor: str         # stable catalog id of the identity checked
    status: str         # pass | fail | skip
    residual: str       # "0" for exact zero, else a norm or witness text
    ms: float = 0.0     # wall time, masked in deterministic output

    @property
    def ok(self) -> bool:
        return self.status != "fail"


@dataclass
class RunReport:
    target: str
    stages: List[str]
    seed: int
    max_degree: int
    rows: List[ReportRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def add(self, check: str, anchor: str, ok: bool, residual: str = "0",
            ms: float = 0.0):
        self.rows.append(ReportRow(check, anchor,
                                   "pass" if ok else "fail", residual, ms))


def fmt_residual(value) -> str:
    """Deterministic residual text: exact zeros stay exact."""
    if isinstance(value, str):
        return value
    v = float(value)
    return "0" if v == 0.0 else "%.3e" % v


def _clean(s: str, limit: int = 200) -> str:
    s = s.replace("\t", " ").replace("\n", " ")
    return s if len(s) <= limit else s[:limit - 3] + "..."


def render_structured(rep: RunReport, timings: bool = False) -> str:
    """The machine-readable document; see docs/report-schema.md."""
    lines = [FORMAT_LINE,
             "meta\ttarget\t%s" % rep.target,
             "meta\tstages\t%s" % ",".join(rep.stages),
             "meta\tseed\t%d" % rep.seed,
             "meta\tmax_degree\t%d" % rep.max_degree,
             "meta\trows\t%d" % len(rep.rows)]
    for r in rep.rows:
        ms = ("%.1f" % r.ms) if timings else "-"
        lines.append("row\t%s\t%s\t%s\t%s\t%s"
                     % (r.check, r.anchor, r.status, _clean(r.residual), ms))
    return "\n".join(lines) + "\n"


def render_table(rep: RunReport, timings: bool = True) -> str:
    """Human-readable summary table."""
    head = ("check", "status", "residual", "ms" if timings else "")
    rows = [(r.check, r.status, _clean(r.residual, 48),
             "%.1f" % r.ms if timings else "") for r in rep.rows]
    widths = [max(len(head[i]), *(len(row[i]) for row in rows)) if rows
              else len(head[i]) for i in range(4)]
    out = []
    fmt = "  ".join("%%-%ds" % w for w in widths)
    out.append(fmt % head)
    out.append(fmt % tuple("-" * w for w in widths))
    for row in rows:
        out.append(fmt % row)
    passed = sum(1 for r in rep.rows if r.status == "pass")
    failed = sum(1 for r in rep.rows if r.status == "fail")
    skipped = len(rep.rows) - passed - failed
    tail = "%d passed, %d failed" % (passed, failed)
    if skipped:
        tail += ", %d skipped" % skipped
    out.append(tail)
    return "\n".join(out) + "\n"


def emit_report(rep: RunReport, path: str, timings: bool = False) -> str:
    """Write the structured document to ``path`` and the table next to
    it (same name with .txt appended).  Returns the structured path."""
    doc = render_structured(rep, timings=timings)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(doc)
    with open(path + ".txt", "w", encoding="utf-8") as fh:
        fh.write(render_table(rep))
    return path
