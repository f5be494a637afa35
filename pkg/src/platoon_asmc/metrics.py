"""Post-episode analysis: RMS tracking/gap metrics, CSV trace I/O, plotspec.

The CSV column contract is fixed: `time`, then for each robot r (1-based)
the 23 per-robot columns in `engine.PER_ROBOT_FIELDS` order prefixed with
`r{n}_`, then one `gap_err_{n}{n+1}` column per consecutive pair. Floats are
written with repr(), which round-trips exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import PER_ROBOT_FIELDS, Trace


def rms(series) -> float:
    """Root mean square of a series; empty input is an error."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        raise ValueError("rms of an empty series is undefined")
    return float(np.sqrt(np.mean(arr * arr)))


def masked_rms(series, mask) -> float:
    """RMS over the samples selected by a boolean mask."""
    return rms(np.asarray(series, dtype=float)[np.asarray(mask, dtype=bool)])


def quadrant_mask(trace: Trace, robot: int, quadrant: int) -> np.ndarray:
    """Samples where robot `robot` (0-based) is inside the given quadrant
    (1..4, half-open axes convention)."""
    x = trace["x"][:, robot]
    y = trace["y"][:, robot]
    if quadrant == 1:
        return (x >= 0) & (y >= 0)
    if quadrant == 2:
        return (x < 0) & (y >= 0)
    if quadrant == 3:
        return (x < 0) & (y < 0)
    if quadrant == 4:
        return (x >= 0) & (y < 0)
    raise ValueError(f"quadrant must be 1..4, got {quadrant}")


@dataclass(frozen=True)
class RmsReport:
    """Per-robot x/y tracking RMS and per-pair gap RMS for one episode."""

    controller: str
    scenario: str
    rms_x: tuple[float, ...]
    rms_y: tuple[float, ...]
    rms_gap: tuple[float, ...]
    warmup_cutoff: float = 0.0


def report_from_trace(trace: Trace, warmup_cutoff: float = 0.0) -> RmsReport:
    """Compute the RMS report, optionally discarding an initial warm-up window."""
    keep = trace.t >= warmup_cutoff
    if not np.any(keep):
        raise ValueError(
            f"warmup_cutoff {warmup_cutoff} discards the whole trace")
    ex = trace["e_x"][keep]
    ey = trace["e_y"][keep]
    gaps = trace.gap_err[keep]
    return RmsReport(
        controller=trace.controller,
        scenario=trace.scenario,
        rms_x=tuple(rms(ex[:, r]) for r in range(trace.n_robots)),
        rms_y=tuple(rms(ey[:, r]) for r in range(trace.n_robots)),
        rms_gap=tuple(rms(gaps[:, j]) for j in range(gaps.shape[1])),
        warmup_cutoff=warmup_cutoff,
    )


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    baseline: float
    proposed: float

    @property
    def proposed_lower(self) -> bool:
        return self.proposed < self.baseline

    @property
    def improvement_pct(self) -> float:
        if self.baseline == 0.0:
            return 0.0
        return 100.0 * (self.baseline - self.proposed) / self.baseline


def compare_reports(baseline: RmsReport, proposed: RmsReport) -> list[ComparisonRow]:
    """Side-by-side metric rows; reports must come from the same scenario."""
    if baseline.scenario != proposed.scenario:
        raise ValueError(
            f"scenario mismatch: {baseline.scenario!r} vs {proposed.scenario!r}")
    if len(baseline.rms_x) != len(proposed.rms_x):
        raise ValueError("reports cover different robot counts")
    rows = []
    for r in range(len(baseline.rms_x)):
        rows.append(ComparisonRow(f"rms_x_robot{r + 1}", baseline.rms_x[r],
                                  proposed.rms_x[r]))
        rows.append(ComparisonRow(f"rms_y_robot{r + 1}", baseline.rms_y[r],
                                  proposed.rms_y[r]))
    for j in range(len(baseline.rms_gap)):
        rows.append(ComparisonRow(f"rms_gap_robot{j + 1}{j + 2}",
                                  baseline.rms_gap[j], proposed.rms_gap[j]))
    return rows


def build_report(trace_proposed: Trace, trace_baseline: Trace,
                 warmup_cutoff: float = 0.0
                 ) -> tuple[RmsReport, RmsReport, list[ComparisonRow]]:
    """Reports for both controllers plus the comparison table."""
    if trace_proposed.scenario != trace_baseline.scenario:
        raise ValueError(
            f"scenario mismatch: {trace_proposed.scenario!r} vs "
            f"{trace_baseline.scenario!r}")
    rp = report_from_trace(trace_proposed, warmup_cutoff)
    rb = report_from_trace(trace_baseline, warmup_cutoff)
    return rp, rb, compare_reports(rb, rp)


def report_to_json(reports: list[RmsReport],
                   comparison: list[ComparisonRow] | None = None) -> dict:
    out: dict = {"reports": []}
    for rep in reports:
        out["reports"].append({
            "controller": rep.controller,
            "scenario": rep.scenario,
            "warmup_cutoff": rep.warmup_cutoff,
            "rms_x": list(rep.rms_x),
            "rms_y": list(rep.rms_y),
            "rms_gap": list(rep.rms_gap),
        })
    if comparison is not None:
        out["comparison"] = [
            {
                "metric": row.metric,
                "baseline": row.baseline,
                "proposed": row.proposed,
                "improvement_pct": row.improvement_pct,
                "proposed_lower": row.proposed_lower,
            }
            for row in comparison
        ]
    return out


def render_report_text(reports: list[RmsReport],
                       comparison: list[ComparisonRow] | None = None) -> str:
    """Aligned plain-text rendering of the reports and comparison table."""
    lines: list[str] = []
    for rep in reports:
        lines.append(f"controller={rep.controller}  scenario={rep.scenario}  "
                     f"warmup_cutoff={rep.warmup_cutoff:g}s")
        for r in range(len(rep.rms_x)):
            lines.append(f"  robot{r + 1}  rms_x={rep.rms_x[r]:.6f} m  "
                         f"rms_y={rep.rms_y[r]:.6f} m")
        for j in range(len(rep.rms_gap)):
            lines.append(f"  gap robot{j + 1}-robot{j + 2}  "
                         f"rms={rep.rms_gap[j]:.6f} m")
        lines.append("")
    if comparison is not None:
        w = max(len(row.metric) for row in comparison)
        lines.append(f"{'metric':<{w}}  {'baseline':>10}  {'proposed':>10}  "
                     f"{'improve%':>8}")
        for row in comparison:
            lines.append(f"{row.metric:<{w}}  {row.baseline:>10.6f}  "
                         f"{row.proposed:>10.6f}  {row.improvement_pct:>8.2f}")
        lines.append("")
    return "\n".join(lines)


def csv_header(n_robots: int) -> list[str]:
    cols = ["time"]
    for r in range(1, n_robots + 1):
        cols.extend(f"r{r}_{name}" for name in PER_ROBOT_FIELDS)
    cols.extend(f"gap_err_{j}{j + 1}" for j in range(1, n_robots))
    return cols


def export_trace(trace: Trace, path) -> None:
    """Write the trace as CSV: fixed header, one row per control step."""
    n = trace.n_robots
    cols = [trace.t]
    for r in range(n):
        cols.extend(trace.data[name][:, r] for name in PER_ROBOT_FIELDS)
    cols.extend(trace.gap_err[:, j] for j in range(n - 1))
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(csv_header(n)) + "\n")
            for k in range(trace.n_records):
                fh.write(",".join(repr(float(c[k])) for c in cols) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing trace to {path}: {exc}") from exc


def load_trace(path, controller: str = "", scenario: str = "") -> Trace:
    """Read a trace CSV written by `export_trace` back into a Trace."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    n_robots = sum(1 for c in header if c.endswith("_x") and not c.endswith("_e_x"))
    expected = csv_header(n_robots)
    if header != expected:
        raise ValueError(f"{path}: header does not match the trace column contract")
    raw = np.array([[float(v) for v in row] for row in rows], dtype=float)
    if raw.ndim != 2 or raw.shape[1] != len(header):
        raise ValueError(f"{path}: malformed trace rows")
    t = raw[:, 0]
    data = {}
    for i, name in enumerate(PER_ROBOT_FIELDS):
        data[name] = np.column_stack(
            [raw[:, 1 + r * len(PER_ROBOT_FIELDS) + i] for r in range(n_robots)])
    gap_start = 1 + n_robots * len(PER_ROBOT_FIELDS)
    gap = raw[:, gap_start:]
    cp = float(t[1] - t[0]) if len(t) > 1 else 0.0
    return Trace(controller=controller, scenario=scenario, n_robots=n_robots,
                 control_period=cp, t=t, data=data, gap_err=gap)


def write_plotspec(path, n_robots: int) -> None:
    """Companion file mapping figure names to trace columns, one per line,
    so an external plotter can reproduce the standard figure set."""
    lines = ["# figure_name: x_column y_columns..."]
    for r in range(1, n_robots + 1):
        lines.append(f"tracking_error_r{r}: time r{r}_e_x r{r}_e_y")
    for r in range(1, n_robots + 1):
        lines.append(f"path_r{r}: r{r}_x r{r}_y r{r}_xref r{r}_yref")
    if n_robots > 1:
        gap_cols = " ".join(f"gap_err_{j}{j + 1}" for j in range(1, n_robots))
        lines.append(f"gap_error: time {gap_cols}")
    for r in range(1, n_robots + 1):
        lines.append(f"sliding_r{r}: time r{r}_s_v r{r}_s_w")
    for r in range(1, n_robots + 1):
        gains = " ".join(f"r{r}_{g}" for g in
                         ("K_v0", "K_v1", "K_w2", "K_w0", "K_w1", "K_v2"))
        lines.append(f"gains_r{r}: time {gains}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
