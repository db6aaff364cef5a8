"""Figure rendering for the report paths (Agg backend, deterministic output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KW = dict(dpi=120, metadata={"Software": None})


def scan_figure(rows, path: str, title: str) -> None:
    """Power-family scan: values, derivative candidate, forward differences."""
    alphas = [r.alpha for r in rows]
    hvals = [float(r.h_value) for r in rows]
    psi = [float(r.psi2) for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.4), sharex=True)
    ax1.plot(alphas, hvals, "o-", label="value")
    ax1.set_ylabel("value")
    ax1.set_title(title)
    ax1.legend(loc="best")
    ax2.plot(alphas, psi, "s-", label="derivative candidate")
    fa = [a for a, r in zip(alphas, rows) if r.fwd_diff is not None]
    fd = [r.fwd_diff for r in rows if r.fwd_diff is not None]
    ax2.plot(fa, fd, "x--", label="forward difference")
    ax2.set_xlabel("alpha")
    ax2.set_ylabel("slope")
    ax2.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def bracket_figure(brackets, path: str, title: str) -> None:
    """Horizontal certified intervals, one per query, with truncated minima."""
    fig, ax = plt.subplots(figsize=(6.4, 0.9 * max(2, len(brackets)) + 1))
    labels = []
    for i, b in enumerate(brackets):
        lo = float(b.lower.value)
        hi = float(b.upper.value)
        ax.plot([lo, hi], [i, i], "-", lw=6, alpha=0.45)
        ax.plot([lo], [i], "|", ms=18, mew=3)
        ax.plot([hi], [i], "|", ms=18, mew=3)
        ax.plot([float(b.truncated_minimum)], [i], "v", ms=9)
        labels.append(b.query)
    ax.set_yticks(range(len(brackets)))
    ax.set_yticklabels(labels)
    ax.set_xlabel("value")
    ax.set_title(title)
    ax.grid(True, axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def derivative_figure(rows, path: str, title: str) -> None:
    """Right-derivative candidates against forward quotients per grid pair."""
    a0 = [r["alpha0"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(a0, [float(r["psi2_right"]) for r in rows], "s-", label="right candidate")
    ax.plot(a0, [r["quotient"] for r in rows], "x--", label="forward quotient")
    left = [(a, float(r["psi2_left"])) for a, r in zip(a0, rows) if r["psi2_left"] is not None]
    if left:
        ax.plot([p[0] for p in left], [p[1] for p in left], "^:", label="left diagnostic")
    ax.set_xlabel("alpha")
    ax.set_ylabel("slope")
    ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
