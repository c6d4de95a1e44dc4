"""File output for runs, sweeps, and bisections.

Everything is written from plain payload dictionaries so the CLI produces
byte-identical files whether the result came from an in-process run or from
the HTTP service. Floats are printed with 17 significant digits.
"""

from __future__ import annotations

import json
from pathlib import Path

CSV_HEADER = (
    "t,mass,trace,J,I,J_alpha,entropy,rel_entropy,lyapunov,dissipation,"
    "max_density,boundary_mass_fraction"
)

_COLUMNS = CSV_HEADER.split(",")

SWEEP_HEADER = (
    "param,value,detected,t_detect,criterion,terminal_t,terminal_mass,"
    "terminal_max_density,terminal_trace"
)


def fmt(x) -> str:
    """17-significant-digit float formatting; empty cell for missing values."""
    if x is None:
        return ""
    return format(float(x), ".17g")


def write_series_csv(records: list[dict], path: Path) -> None:
    lines = [CSV_HEADER]
    for row in records:
        lines.append(",".join(fmt(row.get(col)) for col in _COLUMNS))
    path.write_text("\n".join(lines) + "\n")


def write_report_json(payload: dict, path: Path) -> None:
    report = {
        "blowup": payload["blowup"],
        "config": payload["config_echo"],
    }
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def write_terminal_field_csv(field: dict, path: Path) -> None:
    lines = []
    if field["kind"] == "1d":
        lines.append("z,value")
        for z, v in zip(field["z"], field["values"]):
            lines.append(f"{fmt(z)},{fmt(v)}")
    else:
        lines.append("y,z,value")
        for j, y in enumerate(field["y"]):
            row = field["values"][j]
            for z, v in zip(field["z"], row):
                lines.append(f"{fmt(y)},{fmt(z)},{fmt(v)}")
    path.write_text("\n".join(lines) + "\n")


def write_run_outputs(payload: dict, outdir: str | Path) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_series_csv(payload["records"], out / "series.csv")
    write_report_json(payload, out / "report.json")
    write_terminal_field_csv(payload["terminal_field"], out / "terminal_field.csv")


def write_sweep_outputs(rows: list[dict], outdir: str | Path) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [SWEEP_HEADER]
    for row in rows:
        term = row["terminal"]
        lines.append(
            ",".join(
                [
                    str(row["param"]),
                    fmt(row["value"]),
                    "true" if row["detected"] else "false",
                    fmt(row["t_detect"]),
                    row["criterion"] or "",
                    fmt(term.get("t")),
                    fmt(term.get("mass")),
                    fmt(term.get("max_density")),
                    fmt(term.get("trace")),
                ]
            )
        )
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")


def write_bisect_outputs(payload: dict, outdir: str | Path) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bisect.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )
