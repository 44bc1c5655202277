"""Matplotlib renderings of sweep results (headless Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_error_rates(result, path) -> Path:
    """Error rate against JSR_N, one line per strategy."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s, curve in result.points.items():
        ax.plot([p.jsr_n_db for p in curve], [p.p_err for p in curve], marker="o", ms=3, label=s.value)
    ax.set_xlabel("JSR_N [dB]")
    ax.set_ylabel("P_err")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return Path(path)


def plot_bandwidth(curves, path) -> Path:
    """Required JSR_N for denial of service against channel bandwidth."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s, c in curves.items():
        bws = sorted(c)
        ax.plot(bws, [c[b] for b in bws], marker="s", ms=4, label=getattr(s, "value", s))
    ax.set_xlabel("Bandwidth [MHz]")
    ax.set_ylabel("JSR_N,DoS [dB]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return Path(path)
