"""Figure data tables and their matplotlib SVG renderings."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy.stats import norm  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 3.6),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
    "svg.hashsalt": "garmats",
    "svg.fonttype": "none",
}


@dataclass
class FigureData:
    """One figure: a table of columns plus how to draw it."""

    stem: str
    title: str
    columns: dict
    kind: str = "line"  # line | stem | scatter
    x: str = "t"
    series: Sequence[str] = ()
    colors: dict = field(default_factory=dict)
    band: Optional[str] = None

    def rows(self):
        names = list(self.columns)
        return names, zip(*(self.columns[k] for k in names))


def qq_pairs(values) -> tuple[np.ndarray, np.ndarray]:
    """Normal quantiles at (i - 0.5)/n against the sorted sample."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    probs = (np.arange(1, n + 1) - 0.5) / n
    return norm.ppf(probs), x


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if np.isnan(v) else repr(v)
    if isinstance(v, np.floating):
        return "" if np.isnan(v) else repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(fig: FigureData, out_dir: Path) -> Path:
    path = out_dir / f"{fig.stem}.csv"
    names, rows = fig.rows()
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _as_float(col) -> np.ndarray:
    return np.array([np.nan if v is None else float(v) for v in col])


def render_svg(fig: FigureData, out_dir: Path) -> Path:
    path = out_dir / f"{fig.stem}.svg"
    with plt.rc_context(STYLE):
        f, ax = plt.subplots()
        x = _as_float(fig.columns[fig.x])
        for name in fig.series:
            y = _as_float(fig.columns[name])
            color = fig.colors.get(name)
            if fig.kind == "stem":
                ax.vlines(x, 0.0, y, colors=color or "k")
                ax.plot(x, y, "o", ms=2.5, color=color or "k")
            elif fig.kind == "scatter":
                ax.plot(x, y, "o", ms=2.5, color=color or "k", label=name)
            else:
                ax.plot(x, y, color=color, label=name)
        if fig.band is not None:
            b = float(fig.columns[fig.band][0])
            ax.axhline(b, ls="--", color="tab:blue", lw=0.8)
            ax.axhline(-b, ls="--", color="tab:blue", lw=0.8)
            ax.axhline(0.0, color="k", lw=0.6)
        if fig.kind == "scatter":
            lo, hi = np.nanmin(x), np.nanmax(x)
            y = _as_float(fig.columns[fig.series[0]])
            slope, icpt = np.nanstd(y), np.nanmean(y)
            ax.plot([lo, hi], [icpt + slope * lo, icpt + slope * hi], color="tab:red", lw=0.8)
        ax.set_title(fig.title)
        ax.set_xlabel(fig.x)
        if len(fig.series) > 1:
            ax.legend(loc="best", frameon=False)
        f.tight_layout()
        f.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(f)
    return path


def emit(figures: Sequence[FigureData], out_dir) -> list[str]:
    """Write CSV + SVG for every figure; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fig in figures:
        paths.append(str(write_csv(fig, out_dir)))
        paths.append(str(render_svg(fig, out_dir)))
    return paths
