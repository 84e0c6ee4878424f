"""Static figures for the batch outputs, rendered off-screen with the Agg backend."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from toric_coherent.reports import AGGREGATE, NONTRIVIAL, _tag  # noqa: E402

_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def _aggregates(rows: Sequence[Dict[str, object]]) -> List[Dict[str, object]]:
    out = [r for r in rows if r.get("syndrome") == AGGREGATE]
    return sorted(out, key=lambda r: r["theta"])


def _positive(xs, ys):
    pairs = [(a, b) for a, b in zip(xs, ys)
             if a is not None and b is not None and a > 0 and b > 0 and math.isfinite(b)]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def plot_channel(rows: Sequence[Dict[str, object]], L: int, out_dir: Path) -> List[Path]:
    """Off-diagonal scaling on log-log axes, and the distance bound against the infidelity."""
    agg = _aggregates(rows)
    if not agg:
        return []
    written = []
    thetas = [r["theta"] for r in agg]

    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    plotted = False
    for k in NONTRIVIAL:
        xs, ys = _positive(thetas, [r.get(f"abs_nbar_0_{_tag(k)}") for r in agg])
        if xs:
            ax.loglog(xs, ys, "o-", ms=3, label=f"L = ({k})")
            plotted = True
    xs, ys = _positive(thetas, [r.get("abs_nbar_nontrivial") for r in agg])
    if xs:
        ref = [ys[0] * (t / xs[0]) ** L for t in xs]
        ax.loglog(xs, ref, "k--", lw=0.8, label=f"slope {L}")
        plotted = True
    if plotted:
        ax.set_xlabel("theta")
        ax.set_ylabel("sum_S Pr(S) |Nbar_0L|")
        ax.set_title(f"Off-diagonal logical terms, L = {L}")
        ax.legend(fontsize=8)
        p = out_dir / f"nbar_scaling_L{L}.png"
        fig.tight_layout()
        fig.savefig(p, **_SAVE)
        written.append(p)
    plt.close(fig)

    dl = [(r["theta"], r.get("delta_lb"), r.get("infidelity")) for r in agg]
    if any(d[1] is not None for d in dl):
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        ax.plot([d[0] for d in dl if d[1] is not None], [d[1] for d in dl if d[1] is not None],
                "o-", ms=3, label="logical distance bound")
        ax.plot([d[0] for d in dl], [d[2] for d in dl], "s--", ms=3, label="physical infidelity")
        ax.set_xlabel("theta")
        ax.set_title(f"Logical versus physical error, L = {L}")
        ax.legend(fontsize=8)
        p = out_dir / f"delta_lb_L{L}.png"
        fig.tight_layout()
        fig.savefig(p, **_SAVE)
        written.append(p)
        plt.close(fig)
    return written


def plot_compare(rows: Sequence[Dict[str, object]], L: int, out_dir: Path) -> List[Path]:
    """Averaged success probability of the coherent channel against its twirl."""
    agg = _aggregates(rows)
    series = {
        "coherent (exact)": [r.get("averaged_success") for r in agg],
        "twirled (exact)": [r.get("averaged_twirled") for r in agg],
        "coherent (sampled)": [r.get("sampled_estimate") for r in agg],
    }
    if not agg or all(v is None for vs in series.values() for v in vs):
        return []
    thetas = [r["theta"] for r in agg]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for label, ys in series.items():
        pts = [(t, y) for t, y in zip(thetas, ys) if y is not None]
        if not pts:
            continue
        if label.endswith("(sampled)"):
            errs = [r.get("sampled_stderr") or 0.0 for r in agg if r.get("sampled_estimate") is not None]
            ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=errs, fmt="^", ms=3,
                        capsize=2, label=label)
        else:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, label=label)
    ax.set_xlabel("theta")
    ax.set_ylabel("averaged success probability")
    ax.set_title(f"Maximum-likelihood decoding, L = {L}")
    ax.legend(fontsize=8)
    p = out_dir / f"success_L{L}.png"
    fig.tight_layout()
    fig.savefig(p, **_SAVE)
    plt.close(fig)
    return [p]
