"""
Static SVG renderings: cost-effectiveness plane, acceptability curve and
the sensitivity-to-W interval plot.
"""
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")  # headless
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Fixed salt and no timestamp keep reruns byte-identical.
plt.rcParams["svg.hashsalt"] = "hurdlecea"
_SVG_METADATA = {"Date": None}

MODEL_COLOURS = ["#1f4e79", "#c55a11", "#548235"]


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path


def ce_plane_svg(delta_e: np.ndarray, delta_c: np.ndarray, path: PathLike, k: Optional[float] = None) -> Path:
    """Scatter of (delta e, delta c) draws, with the willingness-to-pay line when ``k`` is given."""
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.axhline(0.0, color="black", linewidth=0.8, alpha=0.4)
    ax.axvline(0.0, color="black", linewidth=0.8, alpha=0.4)
    ax.scatter(delta_e, delta_c, s=6, alpha=0.4, color=MODEL_COLOURS[0], linewidths=0)
    if k is not None:
        lo, hi = ax.get_xlim()
        xs = np.array([lo, hi])
        ax.plot(xs, k * xs, color="grey", linestyle="--", linewidth=1, label=f"k = {k:g}")
        ax.set_xlim(lo, hi)
        ax.legend(loc="upper left", frameon=False)
    ax.set_xlabel("Effectiveness differential")
    ax.set_ylabel("Cost differential")
    ax.set_title("Cost-effectiveness plane")
    fig.tight_layout()
    return _save(fig, path)


def ceac_svg(k: np.ndarray, probability: np.ndarray, path: PathLike) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(k, probability, color=MODEL_COLOURS[0], linewidth=1.5)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("Willingness to pay")
    ax.set_ylabel("Probability of cost-effectiveness")
    ax.set_title("Cost-effectiveness acceptability curve")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def sensitivity_svg(table: pd.DataFrame, path: PathLike) -> Path:
    """
    One panel per arm; per W value a point at the posterior mean of mu_c,
    a thick bar over the 50% interval and a thin bar over the 95% interval.
    Each model gets its own colour and a small horizontal offset.
    """
    models: Sequence[str] = list(dict.fromkeys(table["model"]))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=False)
    for t, ax in enumerate(axes):
        arm_rows = table[table["arm"] == t]
        grid = sorted(arm_rows["W"].unique())
        positions = {W: i for i, W in enumerate(grid)}
        for m, model in enumerate(models):
            rows = arm_rows[arm_rows["model"] == model]
            offset = (m - (len(models) - 1) / 2) * 0.15
            colour = MODEL_COLOURS[m % len(MODEL_COLOURS)]
            x = np.array([positions[W] for W in rows["W"]], dtype=float) + offset
            ax.vlines(x, rows["q2_5"], rows["q97_5"], color=colour, linewidth=1)
            ax.vlines(x, rows["q25"], rows["q75"], color=colour, linewidth=4)
            ax.plot(x, rows["mean"], "o", color=colour, markersize=4, label=model)
            flagged = ~rows["converged"].astype(bool).to_numpy()
            if flagged.any():
                ax.plot(x[flagged], rows["mean"].to_numpy()[flagged], "x", color="red", markersize=8)
        ax.set_xticks(range(len(grid)))
        ax.set_xticklabels([f"{W:g}" for W in grid])
        ax.set_xlabel("W")
        ax.set_ylabel("Mean cost")
        ax.set_title(f"Arm {t}")
        ax.grid(alpha=0.3)
    axes[0].legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)
