"""Plain-text reports with fixed field names, stable across runs."""

from __future__ import annotations

from .protocol import FIDELITY_TOL, BranchReport, summarize


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    return f"{value:.12f}"


def run_report(scenario: str, backend: str, report: BranchReport, *, seed=None, forced=None) -> str:
    lines = [f"scenario={scenario}", f"backend={backend}"]
    if forced is not None:
        lines.append(f"forced={forced}")
    else:
        lines.append(f"seed={seed}")
    lines.append(f"branch={report.bit_string}")
    lines.append(f"live={'yes' if report.live else 'no'}")
    if not report.live:
        lines.append(f"dead_site={report.dead_site}")
    for name, value in report.checkpoints.items():
        lines.append(f"checkpoint.{name}={_fmt(value)}")
    lines.append(f"fidelity_final={_fmt(report.fidelity_final)}")
    lines.append(f"messages={report.messages}")
    lines.append(f"drops={report.drops}")
    lines.append(f"audit={'PASS' if report.audit else 'FAIL'}")
    lines.append(f"result={'PASS' if report.passed() else 'FAIL'}")
    return "\n".join(lines) + "\n"


def branches_report(scenario: str, backend: str, reports: list[BranchReport], table: bool = True) -> str:
    s = summarize(reports, FIDELITY_TOL)
    lines = [
        f"scenario={scenario}",
        f"backend={backend}",
        f"branches={s['branches']}",
        f"live={s['live']}",
        f"min_fidelity={_fmt(s['min_fidelity'])}",
        f"messages={','.join(map(str, s['messages']))}",
        f"audit={'PASS' if s['audit'] else 'FAIL'}",
        f"result={'PASS' if s['passed'] else 'FAIL'}",
    ]
    if table:
        names = list(reports[0].checkpoints) if reports else []
        lines.append("\t".join(["#branch", "bits", "live", *names, "fidelity_final", "messages", "audit"]))
        for r in reports:
            row = [str(r.index), r.bit_string, "1" if r.live else "0"]
            row += [_fmt(r.checkpoints.get(n)) for n in names]
            row += [_fmt(r.fidelity_final), str(r.messages), "PASS" if r.audit else "FAIL"]
            lines.append("\t".join(row))
    return "\n".join(lines) + "\n"
