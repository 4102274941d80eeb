"""Report figures.  Everything renders off-screen to PNG files."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .refine import Verdict  # noqa: E402


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def class_sizes(verdict: Verdict, path: Path, title: str = "") -> Path:
    """Sorted colour-class sizes on both sides at the last round compared."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for h, label, style in zip(verdict.histograms, ("G", "H"), ("-", "--")):
        sizes = sorted(h.counts.tolist(), reverse=True)
        ax.step(range(1, len(sizes) + 1), sizes, style, where="mid", label=f"{label}: {len(sizes)} classes")
    ax.set_xlabel("colour class (by size)")
    ax.set_ylabel("tuples")
    ax.set_yscale("log")
    ax.set_title(title or f"{verdict.outcome} at round {verdict.round}")
    ax.legend()
    return _save(fig, path)


def ratio_bars(report: dict, path: Path) -> Path:
    """Centralizer-to-centre exponent counts for vertices and sampled elements."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    keys = sorted({int(k) for k in report["vertex_ratio_exponents"]} | {int(k) for k in report["sample_ratio_exponents"]})
    xs = range(len(keys))
    vert = [report["vertex_ratio_exponents"].get(str(k), 0) for k in keys]
    samp = [report["sample_ratio_exponents"].get(str(k), 0) for k in keys]
    ax.bar([x - 0.2 for x in xs], vert, width=0.4, label="vertex generators")
    ax.bar([x + 0.2 for x in xs], samp, width=0.4, label="sampled elements")
    ax.set_xticks(list(xs), [str(k) for k in keys])
    ax.set_xlabel("log_p |C(x)| - log_p |Z|")
    ax.set_yscale("log")
    ax.legend()
    return _save(fig, path)


def degree_histogram(degrees, path: Path, title: str = "") -> Path:
    counts = Counter(int(d) for d in degrees)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    xs = sorted(counts)
    ax.bar(xs, [counts[x] for x in xs])
    ax.set_xlabel("degree")
    ax.set_ylabel("vertices")
    ax.set_yscale("log")
    if title:
        ax.set_title(title)
    return _save(fig, path)
