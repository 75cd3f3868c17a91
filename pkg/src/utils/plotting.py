"""
Average SSR versus SNR plots (SVG)
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from loguru import logger  # noqa: E402

from ..models import ExperimentSummary, SummaryRow  # noqa: E402

PADDING = 0.05
MARKERS = ["o", "s", "^", "D", "v", "P", "X"]
LABELS = {
    "nn": "Secure NN IA",
    "rnn": "Secure RNN IA",
    "conventional": "Conventional IA (min. leakage)",
}


def _curves(rows: List[SummaryRow]) -> Dict[str, List[SummaryRow]]:
    curves: Dict[str, List[SummaryRow]] = {}
    for row in rows:
        curves.setdefault(row.algorithm, []).append(row)
    for points in curves.values():
        points.sort(key=lambda row: row.snr_db)
    return curves


def padded_limits(low: float, high: float) -> Tuple[float, float]:
    """[low, high] widened by 5 % of its span on both sides"""
    span = high - low
    if span <= 0.0:
        span = max(abs(high), 1.0)
    return low - PADDING * span, high + PADDING * span


def build_figure(
    summary: ExperimentSummary,
    overlay: Optional[ExperimentSummary] = None,
    title: Optional[str] = None,
) -> Figure:
    """Mean SSR against SNR with standard-error bars, one curve per algorithm"""
    rows = list(summary.rows) + (list(overlay.rows) if overlay else [])
    if not rows:
        raise ValueError("summary has no rows to plot")

    external = {row.algorithm for row in overlay.rows} if overlay else set()
    curves = _curves(rows)

    plt.rcParams["svg.hashsalt"] = "secure-ia"
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for index, (algorithm, points) in enumerate(curves.items()):
        ax.errorbar(
            [p.snr_db for p in points],
            [p.mean_ssr for p in points],
            yerr=[p.stderr for p in points],
            label=LABELS.get(algorithm, algorithm),
            marker=MARKERS[index % len(MARKERS)],
            linestyle="--" if algorithm in external else "-",
            capsize=3,
        )

    ax.set_xlim(*padded_limits(min(r.snr_db for r in rows), max(r.snr_db for r in rows)))
    ax.set_ylim(
        *padded_limits(
            min(r.mean_ssr - r.stderr for r in rows), max(r.mean_ssr + r.stderr for r in rows)
        )
    )
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Average SSR (bits/s/Hz)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def emit_plot(
    summary: ExperimentSummary,
    path: Union[str, Path],
    overlay: Optional[ExperimentSummary] = None,
    title: Optional[str] = None,
) -> Path:
    """
    Write the SSR plot as a standalone SVG file

    Args:
        summary: Rows of the experiment
        path: Output SVG file
        overlay: Externally produced curves drawn alongside (dashed)
        title: Optional figure title

    Returns:
        Path of the written file
    """
    fig = build_figure(summary, overlay, title)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Saved plot with {len(fig.axes[0].containers)} curves to {path}")
    return path
