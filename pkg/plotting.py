"""
SVG figures for the command reports. The CSV next to each plot is the
authoritative data; these are for looking at.
"""
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

from logger_config import setup_logger

logger = setup_logger("qcodegrad.plotting")

# fixed ids and no Date metadata keep repeated runs byte-identical
plt.rcParams["svg.hashsalt"] = "qcodegrad"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"wrote {path}")
    return path


def plot_delta_convergence(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Gradient norm against delta, one line per (code, codeword)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for (code, word), rows in frame.groupby(["code", "word"], sort=False):
        rows = rows.sort_values("delta")
        ax.plot(rows["delta"], rows["norm"], marker="o", label=f"{code} |{word}_L>")
    ax.set_xscale("log")
    ax.set_xlabel("delta")
    ax.set_ylabel("||grad f||")
    ax.legend(loc="best", fontsize="small")
    return _save(fig, path)


def plot_gradscan(frame: pd.DataFrame, path: Union[str, Path], offset: float = 0.01) -> Path:
    """
    Gradient norm against noise strength per channel. Curves after the first
    are shifted up by `offset` each so identical curves stay visible.
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    for shift, (channel, rows) in enumerate(frame.groupby("channel", sort=False)):
        rows = rows.sort_values("strength")
        label = channel if not offset or shift == 0 else f"{channel} (+{shift * offset:g})"
        ax.plot(rows["strength"], rows["norm"] + shift * offset, marker="o", label=label)
    ax.set_xlabel("noise strength")
    ax.set_ylabel("||grad f||")
    ax.legend(loc="best", fontsize="small")
    return _save(fig, path)


def plot_trajectory(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Fidelity on the left axis, penalty residuals on the right."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(frame["step"], frame["fidelity"], color="tab:blue", label="fidelity")
    ax.set_xlabel("step")
    ax.set_ylabel("fidelity", color="tab:blue")

    twin = ax.twinx()
    twin.plot(frame["step"], frame["max_ortho"], color="tab:orange", linestyle="--", label="max |<i|j>|")
    twin.plot(frame["step"], frame["max_norm_dev"], color="tab:green", linestyle=":", label="max |1 - ||i|||")
    twin.set_ylabel("penalty residual")

    lines = ax.get_lines() + twin.get_lines()
    ax.legend(lines, [line.get_label() for line in lines], loc="best", fontsize="small")
    return _save(fig, path)
