"""Machine- and human-readable rendering of a check run."""

from __future__ import annotations

import json
from importlib import metadata


def tool_version():
    try:
        return f"intforms {metadata.version('intforms')}"
    except metadata.PackageNotFoundError:
        return "intforms unreleased"


def build_report(command, preset, opts, checks, timings=False):
    """Assemble the report dict; key order is the output order.

    Timings are real and therefore nondeterministic, so they stay out of
    the report unless explicitly requested; everything else depends only
    on the input file, the flags, and the seed.
    """
    rows = []
    for check in checks:
        row = {"name": check["name"], "status": check["status"]}
        if check["witness"] is not None:
            row["witness"] = check["witness"]
        if timings:
            row["elapsed"] = round(check["elapsed"], 6)
        rows.append(row)
    counts = {"pass": 0, "fail": 0, "skipped": 0}
    for check in checks:
        counts[check["status"]] += 1
    return {
        "schema": 1,
        "tool": tool_version(),
        "command": command,
        "preset": preset.name,
        "hash": preset.digest,
        "seed": opts.seed,
        "cases": opts.cases,
        "max_len": opts.max_len,
        "max_degree": opts.max_degree,
        "checks": rows,
        "summary": counts,
    }


def render_json(report):
    return json.dumps(report, indent=2) + "\n"


def render_text(report):
    lines = [
        f"{report['preset']}  {report['command']}  ({report['tool']})",
        f"input sha256 {report['hash'][:16]}",
    ]
    for row in report["checks"]:
        mark = {"pass": "PASS", "fail": "FAIL", "skipped": "SKIP"}[row["status"]]
        line = f"{mark}  {row['name']}"
        if row.get("witness"):
            line += f" :: {row['witness']}"
        if "elapsed" in row:
            line += f"  [{row['elapsed']:.3f}s]"
        lines.append(line)
    counts = report["summary"]
    lines.append(
        f"{counts['pass']} passed, {counts['fail']} failed, "
        f"{counts['skipped']} skipped"
    )
    return "\n".join(lines) + "\n"
