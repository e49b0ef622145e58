"""Matplotlib renderings of tradeoff curves and profiles, written straight to files."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .optimizer import TradeoffPoint  # noqa: E402
from .profile import Profile  # noqa: E402

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _figure(width: float = 6.0):
    return plt.subplots(figsize=(width, width * GOLDEN))


def plot_curve(points: Sequence[TradeoffPoint], path: str | Path, rho_crit: float | None = None) -> Path:
    """Risk against redundancy, with the critical redundancy marked when it is below 1."""
    path = Path(path)
    fig, ax = _figure()
    rho = [pt.rho for pt in points]
    risk = [pt.risk for pt in points]
    ax.plot(rho, risk, "o-", color="tab:blue", ms=3, lw=1.5, label="minimum risk")
    if rho_crit is not None and rho_crit < 1.0:
        ax.axvline(rho_crit, color="tab:red", ls="--", lw=1, label=f"critical redundancy {rho_crit:.4g}")
    ax.set_xlabel("redundancy (forged / total queries)")
    ax.set_ylabel("privacy risk [bits]")
    ax.set_xlim(left=0.0)
    ax.set_ylim(bottom=0.0)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_profiles(profiles: dict[str, Profile], path: str | Path) -> Path:
    """Grouped bars, one group per category and one bar per named profile."""
    path = Path(path)
    names = list(profiles)
    cats = profiles[names[0]].categories
    x = np.arange(len(cats))
    width = 0.8 / len(names)
    fig, ax = _figure(max(6.0, 0.6 * len(cats)))
    for j, name in enumerate(names):
        ax.bar(x + (j - (len(names) - 1) / 2) * width, profiles[name].pmf, width, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(cats, rotation=45 if len(cats) > 6 else 0, ha="right" if len(cats) > 6 else "center")
    ax.set_ylabel("probability")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
