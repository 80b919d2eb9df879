"""Figure construction: schema checks, styling, and the four figure kinds."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE_VERSION = "1"

DECODE_COLUMNS = ["d", "p", "q", "r", "trials", "failures", "rate", "stderr"]
MC_COLUMNS = [
    "case", "p", "L", "T", "xi_over_L", "err",
    "sweep_acc", "swap_acc", "invalid_samples",
]
PHASE_COLUMNS = ["case", "p", "T_c", "err"]

KINDS = ("error-rate-curves", "threshold-comparison", "crossing-panel", "phase-diagram")

_STYLE = {
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 4,
    "errorbar.capsize": 2,
    "svg.hashsalt": "repplots-" + STYLE_VERSION,
}

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


class SchemaError(ValueError):
    """An input CSV does not match the expected column schema."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: figure kind, input CSV paths, output image path.

    Inputs are never mutated; a schema mismatch raises before any drawing.
    """

    kind: str
    inputs: list
    output: str
    xlim: tuple | None = None
    ylim: tuple | None = None
    nishimori: str | None = None  # manifest JSON with per-p Nishimori temperatures

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected {KINDS}")
        if not self.output:
            raise ValueError("output path required")


def read_table(path, columns):
    """Rows as string dicts; raises SchemaError listing expected columns."""
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if rows:
        missing = [c for c in columns if c not in rows[0]]
        if missing:
            raise SchemaError(
                f"{path}: missing columns {missing}; expected schema {columns}"
            )
    return rows


def _finite(value):
    try:
        x = float(value)
    except ValueError:
        return False
    return x == x  # filters nan


def _setup(n_panels):
    ncols = min(n_panels, 2) or 1
    nrows = max(1, (n_panels + ncols - 1) // ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows), squeeze=False
    )
    return fig, [ax for row in axes for ax in row]


def _save(fig, spec):
    for ax in fig.axes:
        if spec.xlim:
            ax.set_xlim(*spec.xlim)
        if spec.ylim:
            ax.set_ylim(*spec.ylim)
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    # strip metadata so output bytes depend only on the data and style
    if out.suffix == ".svg":
        fig.savefig(out, metadata={"Date": None})
    else:
        fig.savefig(out, metadata={"Software": None})
    plt.close(fig)


def _decode_panel(ax, rows, title):
    points = []
    sizes = sorted({int(r["d"]) for r in rows})
    for k, d in enumerate(sizes):
        sel = sorted(
            (r for r in rows if int(r["d"]) == d), key=lambda r: float(r["p"])
        )
        ax.errorbar(
            [float(r["p"]) for r in sel],
            [float(r["rate"]) for r in sel],
            yerr=[float(r["stderr"]) for r in sel],
            marker="o",
            color=_COLORS[k % len(_COLORS)],
            label=f"d = {d}",
        )
        points.extend({"d": r["d"], "x": r["p"], "y": r["rate"]} for r in sel)
    ax.set_xlabel("p")
    ax.set_ylabel("logical error rate")
    ax.set_title(title)
    if sizes:
        ax.legend()
    return points


def _crossing_panel(ax, rows, title):
    points = []
    sizes = sorted({int(r["L"]) for r in rows})
    for k, L in enumerate(sizes):
        sel = sorted(
            (
                r
                for r in rows
                if int(r["L"]) == L and _finite(r["xi_over_L"]) and _finite(r["err"])
            ),
            key=lambda r: float(r["T"]),
        )
        ax.errorbar(
            [float(r["T"]) for r in sel],
            [float(r["xi_over_L"]) for r in sel],
            yerr=[float(r["err"]) for r in sel],
            marker="s",
            color=_COLORS[k % len(_COLORS)],
            label=f"L = {L}",
        )
        points.extend({"L": r["L"], "x": r["T"], "y": r["xi_over_L"]} for r in sel)
    ax.set_xlabel("T")
    ax.set_ylabel(r"$\xi_L / L$")
    ax.set_title(title)
    if sizes:
        ax.legend()
    return points


def render(spec: FigureSpec) -> list:
    """Draw the figure and return the plotted points as CSV strings."""
    with plt.rc_context(_STYLE):
        if spec.kind in ("error-rate-curves", "threshold-comparison"):
            tables = [read_table(path, DECODE_COLUMNS) for path in spec.inputs]
            fig, axes = _setup(len(tables))
            points = []
            for ax, path, rows in zip(axes, spec.inputs, tables):
                points.extend(_decode_panel(ax, rows, Path(path).parent.name))
            for ax in axes[len(tables):]:
                ax.set_axis_off()
            _save(fig, spec)
            return points

        if spec.kind == "crossing-panel":
            points = []
            tables = [read_table(path, MC_COLUMNS) for path in spec.inputs]
            panels = []
            for path, rows in zip(spec.inputs, tables):
                keys = sorted({(r["case"], r["p"]) for r in rows})
                if not keys:
                    panels.append((f"{Path(path).parent.name}", []))
                for case, p in keys:
                    sel = [r for r in rows if r["case"] == case and r["p"] == p]
                    panels.append((f"case {case}, p = {p}", sel))
            fig, axes = _setup(len(panels))
            for ax, (title, rows) in zip(axes, panels):
                points.extend(_crossing_panel(ax, rows, title))
            for ax in axes[len(panels):]:
                ax.set_axis_off()
            _save(fig, spec)
            return points

        # phase-diagram
        points = []
        fig, axes = _setup(1)
        ax = axes[0]
        for k, path in enumerate(spec.inputs):
            rows = read_table(path, PHASE_COLUMNS)
            for case in sorted({r["case"] for r in rows}):
                sel = sorted(
                    (r for r in rows if r["case"] == case and _finite(r["T_c"])),
                    key=lambda r: float(r["p"]),
                )
                ax.errorbar(
                    [float(r["p"]) for r in sel],
                    [float(r["T_c"]) for r in sel],
                    yerr=[float(r["err"]) for r in sel],
                    marker="o",
                    color=_COLORS[k % len(_COLORS)],
                    label=f"case {case}",
                )
                points.extend({"case": r["case"], "x": r["p"], "y": r["T_c"]} for r in sel)
        if spec.nishimori:
            manifest = json.loads(Path(spec.nishimori).read_text())
            line = sorted(
                (float(p), t) for p, t in manifest.get("nishimori_T", {}).items()
            )
            if line:
                ax.plot(
                    [p for p, _ in line],
                    [t for _, t in line],
                    "k--",
                    linewidth=1,
                    label="Nishimori line",
                )
        ax.set_xlabel("p")
        ax.set_ylabel(r"$T_c$")
        ax.set_title("phase diagram")
        if points or spec.nishimori:
            ax.legend()
        _save(fig, spec)
        return points
