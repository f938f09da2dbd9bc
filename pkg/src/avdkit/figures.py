"""Figure rendering for evaluation reports.

Writes PNGs next to the delimited report output: a pooled confusion-matrix
heatmap and a per-fold score chart. Uses the Agg backend so it works
headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import CvReport

_CLASS_NAMES = ["non-violence", "violence"]


def render_confusion_figure(report: CvReport, path: str) -> str:
    """Pooled 2x2 confusion-matrix heatmap (rows true, cols predicted)."""
    conf = np.asarray(report.pooled_confusion, dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(conf, cmap="Blues")
    for (r, c), v in np.ndenumerate(conf):
        color = "white" if v > conf.max() / 2 else "black"
        ax.text(c, r, f"{int(v)}", ha="center", va="center", color=color)
    ax.set_xticks([0, 1], _CLASS_NAMES)
    ax.set_yticks([0, 1], _CLASS_NAMES)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"{report.classifier_id} / {report.provider_id} (pooled over {report.k} folds)")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_fold_scores_figure(report: CvReport, path: str) -> str:
    """Per-fold accuracy and macro-F1 bars with mean lines."""
    folds = np.arange(report.k)
    acc = [m.accuracy_pct for m in report.per_fold]
    f1 = [m.macro_f1_pct for m in report.per_fold]
    width = 0.38
    fig, ax = plt.subplots(figsize=(5.4, 3.4))
    ax.bar(folds - width / 2, acc, width, label="accuracy")
    ax.bar(folds + width / 2, f1, width, label="macro F1")
    ax.axhline(report.mean_accuracy, ls="--", lw=0.8, color="C0")
    ax.axhline(report.mean_macro_f1, ls="--", lw=0.8, color="C1")
    ax.set_xticks(folds, [str(f) for f in folds])
    ax.set_xlabel("fold")
    ax.set_ylabel("%")
    ax.set_ylim(0, 105)
    ax.set_title(f"{report.classifier_id} / {report.provider_id} per-fold scores")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
