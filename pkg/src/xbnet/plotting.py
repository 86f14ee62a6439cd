"""PNG figures written next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_trace(trace, out_dir, prefix: str = "") -> list[Path]:
    """Loss and accuracy against epoch for the train and validation splits."""
    epochs = range(1, len(trace) + 1)
    paths = []
    for attr, ylabel, name in (("loss", "cross-entropy loss", "loss.png"),
                               ("accuracy", "accuracy", "accuracy.png")):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(epochs, getattr(trace, f"train_{attr}"), label="train")
        ax.plot(epochs, getattr(trace, f"val_{attr}"), label="validation")
        ax.set_xlabel("epoch")
        ax.set_ylabel(ylabel)
        ax.legend()
        paths.append(_save(fig, Path(out_dir) / f"{prefix}{name}"))
    return paths


def plot_roc(curves: dict, aucs: dict, path) -> Path:
    """ROC curves keyed by class label, with each area in the legend."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for label, c in curves.items():
        ax.plot(c.x, c.y, label=f"{label} (AUC = {aucs[label]:.3f})")
    ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right")
    return _save(fig, path)


def plot_pr(curves: dict, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    for label, c in curves.items():
        ax.step(c.x, c.y, where="post", label=str(label))
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower left")
    return _save(fig, path)
