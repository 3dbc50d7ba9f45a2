"""Figure rendering for measurement reports.

Renders PNG files next to the tabular/delimited report output: a
cumulative failure timeline per reliability class, the span's time
partition with the availability figures, support cycle durations by
slice, and (when there are enough gaps) an inter-failure time
histogram. Figures are drawn entirely from the report document, so a
saved report JSON can be re-rendered without the trace.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_PARTITION_COLORS = {"uptime": "#2a9d8f", "downtime": "#e76f51", "removed": "#8d99ae"}
_SCHEDULE_COLORS = {"planned": "#457b9d", "unplanned": "#e63946", "?": "#8d99ae"}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def failure_timeline_figure(report: dict, path: Path) -> Path | None:
    """Cumulative countable failures vs time, one step line per class."""
    span = report.get("span", {})
    duration = span.get("duration_hours", 0.0)
    classes = report.get("reliability", {})
    if not classes:
        return None
    fig, ax = plt.subplots(figsize=(7, 4))
    for cid, block in sorted(classes.items(), key=lambda kv: int(kv[0])):
        times = block.get("failure_times", [])
        xs = [0.0] + list(times) + [duration]
        ys = [0] + list(range(1, len(times) + 1)) + [len(times)]
        ax.step(xs, ys, where="post", label=f"class {cid} ({block.get('class_name', '?')})")
    ax.set_xlabel("span time (h)")
    ax.set_ylabel("cumulative countable failures")
    ax.set_title("Failure occurrence by reliability class")
    ax.legend(loc="upper left", fontsize=8)
    ax.set_xlim(0, duration)
    return _save(fig, path)


def availability_figure(report: dict, path: Path) -> Path | None:
    """Stacked time partition plus the computed availability figures."""
    acct = report.get("time_accounting", {})
    av = report.get("availability", {})
    parts = [
        ("uptime", acct.get("uptime_hours", 0.0)),
        ("downtime", acct.get("downtime_hours", 0.0)),
        ("removed", acct.get("removed_hours", 0.0)),
    ]
    fig, ax = plt.subplots(figsize=(7, 2.8))
    left = 0.0
    for name, value in parts:
        ax.barh([0], [value], left=left, color=_PARTITION_COLORS[name], label=name)
        left += value
    ax.set_yticks([])
    ax.set_xlabel("hours")
    labels = [
        f"{key} = {av[key]:.6f}"
        for key in ("in_service", "inherent", "achieved")
        if av.get(key) is not None
    ]
    ax.set_title("Span partition" + ("  |  " + ", ".join(labels) if labels else ""))
    ax.legend(loc="lower right", ncol=3, fontsize=8)
    return _save(fig, path)


def support_cycles_figure(report: dict, path: Path) -> Path | None:
    """Support cycle durations, colored by schedule, annotated by purpose."""
    cycles = [
        c
        for c in report.get("availability", {}).get("downtime_cycles", [])
        if c.get("complete")
    ]
    if not cycles:
        return None
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(1, len(cycles) + 1)
    heights = [c["supporting_hours"] + c["blocked_hours"] for c in cycles]
    colors = [_SCHEDULE_COLORS.get(c.get("schedule") or "?") for c in cycles]
    ax.bar(xs, heights, color=colors)
    for x, c, h in zip(xs, cycles, heights):
        ax.text(x, h, c.get("purpose") or "?", ha="center", va="bottom", fontsize=7, rotation=45)
    ax.set_xlabel("support cycle")
    ax.set_ylabel("support cycle time (h)")
    ax.set_title("Support cycle times (color = schedule)")
    handles = [
        plt.Rectangle((0, 0), 1, 1, color=color)
        for name, color in _SCHEDULE_COLORS.items()
        if name != "?"
    ]
    ax.legend(handles, [n for n in _SCHEDULE_COLORS if n != "?"], fontsize=8)
    return _save(fig, path)


def tbsf_histogram_figure(report: dict, path: Path, class_id: str = "0") -> Path | None:
    """Histogram of inter-failure gaps for one class, mean and median marked."""
    block = report.get("reliability", {}).get(class_id, {})
    gaps = block.get("tbsf", [])
    if len(gaps) < 2:
        return None
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(gaps, bins=min(30, max(5, len(gaps) // 3)), color="#457b9d", edgecolor="white")
    if block.get("mtbsf") is not None:
        ax.axvline(block["mtbsf"], color="#e63946", label=f"mean {block['mtbsf']:.3g} h")
    if block.get("median_tbsf") is not None:
        ax.axvline(
            block["median_tbsf"],
            color="#2a9d8f",
            linestyle="--",
            label=f"median {block['median_tbsf']:.3g} h",
        )
    ax.set_xlabel("time between failures (h)")
    ax.set_ylabel("occurrences")
    ax.set_title(f"Inter-failure times, class {class_id}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_figures(report: dict, out_dir: str | Path) -> list[Path]:
    """Render every applicable figure into a directory; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for render, name in (
        (failure_timeline_figure, "failure_timeline.png"),
        (availability_figure, "availability.png"),
        (support_cycles_figure, "support_cycles.png"),
        (tbsf_histogram_figure, "tbsf_histogram.png"),
    ):
        result = render(report, out / name)
        if result is not None:
            written.append(result)
    return written
