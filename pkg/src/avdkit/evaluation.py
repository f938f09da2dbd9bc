"""5-fold cross-validation protocol and score reporting.

Splits are stratified by default (the corpus is ~5:1 imbalanced); a
group-aware mode keeps all chunks of one source recording in a single fold.
Metrics are accuracy and macro-averaged F1, reported in percent at two
decimals, plus the 2x2 confusion matrix (rows = true, cols = predicted).
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentError,
    ConflictingOptions,
    EmptyInput,
    LengthMismatch,
    TooFewPerClass,
    TooFewSamples,
)
from .forest import RfConfig, rf_train
from .providers import FeatureVector
from .svm import SvmConfig, svm_train

Confusion = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray  # length n, values in [0, k)
    k: int
    seed: int
    stratified: bool
    group_ids: tuple[str, ...] | None = None

    def test_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.fold_of != fold)[0]


@dataclass(frozen=True)
class Metrics:
    accuracy_pct: float
    macro_f1_pct: float
    confusion: Confusion  # ((tn, fp), (fn, tp))


@dataclass(frozen=True)
class CvReport:
    classifier_id: str
    provider_id: str
    k: int
    seed: int
    per_fold: tuple[Metrics, ...]
    mean_accuracy: float
    mean_macro_f1: float
    pooled_confusion: Confusion


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str  # "rf" | "svm"
    rf_config: RfConfig = field(default_factory=RfConfig)
    svm_config: SvmConfig = field(default_factory=SvmConfig)

    def __post_init__(self):
        if self.kind not in ("rf", "svm"):
            raise ValueError(f"classifier kind must be rf or svm, got {self.kind!r}")

    def train(self, X, y, seed: int):
        if self.kind == "rf":
            return rf_train(X, y, self.rf_config, seed=seed)
        return svm_train(X, y, self.svm_config, seed=seed)


def kfold_split(
    labels,
    k: int = 5,
    seed: int = 0,
    stratified: bool = True,
    group_ids=None,
) -> FoldAssignment:
    """Assign each sample to one of k folds.

    Unstratified: seeded shuffle, then contiguous near-equal slices.
    Stratified: per-class shuffle, then one continuing round-robin rotation
    across classes (per-class and total fold sizes both differ by <= 1).
    Grouped: groups shuffled, ordered by size descending, dealt round-robin.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if n < k or k < 2:
        raise TooFewSamples(f"cannot split {n} samples into {k} folds")
    if stratified and group_ids is not None:
        raise ConflictingOptions("stratified and grouped splits are mutually exclusive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
    fold_of = np.empty(n, dtype=np.int64)

    if group_ids is not None:
        groups = [str(g) for g in group_ids]
        if len(groups) != n:
            raise LengthMismatch("group_ids length differs from labels")
        unique = sorted(set(groups))
        if len(unique) < k:
            raise TooFewSamples(f"{len(unique)} groups cannot fill {k} folds")
        order = rng.permutation(len(unique))
        shuffled = [unique[i] for i in order]
        sizes = Counter(groups)
        shuffled.sort(key=lambda g: -sizes[g])  # stable: shuffle breaks size ties
        fold_of_group = {g: i % k for i, g in enumerate(shuffled)}
        for i, g in enumerate(groups):
            fold_of[i] = fold_of_group[g]
        return FoldAssignment(fold_of=fold_of, k=k, seed=seed, stratified=False,
                              group_ids=tuple(groups))

    if stratified:
        classes = np.unique(labels)
        ptr = 0
        for cls in classes:
            members = np.nonzero(labels == cls)[0]
            if len(members) < k:
                raise TooFewPerClass(
                    f"class {cls!r} has {len(members)} members, fewer than k={k}"
                )
            members = members[rng.permutation(len(members))]
            for m in members:
                fold_of[m] = ptr % k
                ptr += 1
        return FoldAssignment(fold_of=fold_of, k=k, seed=seed, stratified=True)

    perm = rng.permutation(n)
    base, extra = divmod(n, k)
    start = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        fold_of[perm[start:start + size]] = f
        start += size
    return FoldAssignment(fold_of=fold_of, k=k, seed=seed, stratified=False)


def compute_metrics(y_true, y_pred) -> Metrics:
    """Accuracy and macro-F1 in percent (2 decimals) plus the confusion matrix.

    Per-class F1 is 2PR/(P+R) with the zero convention: any zero denominator
    (no predictions, no support, or P+R == 0) yields F1 = 0 for that class.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise LengthMismatch(f"shapes differ: {y_true.shape} vs {y_pred.shape}")
    if len(y_true) == 0:
        raise EmptyInput("no samples to score")
    if not np.all((y_true == 0) | (y_true == 1)) or not np.all((y_pred == 0) | (y_pred == 1)):
        raise ValueError("labels must be in {0, 1}")

    conf = np.zeros((2, 2), dtype=np.int64)
    for t, p in ((0, 0), (0, 1), (1, 0), (1, 1)):
        conf[t, p] = int(np.sum((y_true == t) & (y_pred == p)))
    accuracy = 100.0 * (conf[0, 0] + conf[1, 1]) / len(y_true)

    f1s = []
    for cls in (0, 1):
        tp = conf[cls, cls]
        fp = conf[1 - cls, cls]
        fn = conf[cls, 1 - cls]
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        f1s.append(f1)
    macro_f1 = 100.0 * (f1s[0] + f1s[1]) / 2.0

    return Metrics(
        accuracy_pct=round(accuracy, 2),
        macro_f1_pct=round(macro_f1, 2),
        confusion=((int(conf[0, 0]), int(conf[0, 1])), (int(conf[1, 0]), int(conf[1, 1]))),
    )


def _derived_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def cross_validate(
    features: dict[str, FeatureVector],
    labels: dict[str, int],
    classifier_spec: ClassifierSpec,
    k: int = 5,
    seed: int = 0,
    stratified: bool = True,
    group_ids: dict[str, str] | None = None,
) -> CvReport:
    """Train on k-1 folds, test on the held-out fold, for every fold.

    Deterministic given seed: chunk ids are ordered lexicographically, the
    splitter is seeded, and each fold's training seed derives from
    (seed, fold).
    """
    if set(features) != set(labels):
        missing = set(features) ^ set(labels)
        raise AlignmentError(f"features/labels disagree on {len(missing)} chunk ids")
    ids = sorted(features)
    if not ids:
        raise EmptyInput("no feature records")
    provider_ids = {features[i].provider_id for i in ids}
    if len(provider_ids) != 1:
        raise AlignmentError(f"mixed providers in one run: {sorted(provider_ids)}")

    X = np.stack([features[i].values for i in ids])
    y = np.asarray([labels[i] for i in ids], dtype=np.int64)
    groups = None
    if group_ids is not None:
        try:
            groups = [group_ids[i] for i in ids]
        except KeyError as exc:
            raise AlignmentError(f"group id missing for chunk {exc}") from exc

    assignment = kfold_split(y, k=k, seed=seed, stratified=stratified, group_ids=groups)

    per_fold: list[Metrics] = []
    pooled = np.zeros((2, 2), dtype=np.int64)
    for f in range(k):
        try:
            tr = assignment.train_indices(f)
            te = assignment.test_indices(f)
            model = classifier_spec.train(X[tr], y[tr], seed=_derived_seed(seed, f))
            y_pred = model.predict_labels(X[te])
            metrics = compute_metrics(y[te], y_pred)
        except Exception as exc:
            raise type(exc)(f"fold {f}: {exc}") from exc
        per_fold.append(metrics)
        pooled += np.asarray(metrics.confusion)

    return CvReport(
        classifier_id=classifier_spec.kind,
        provider_id=provider_ids.pop(),
        k=k,
        seed=seed,
        per_fold=tuple(per_fold),
        mean_accuracy=float(np.mean([m.accuracy_pct for m in per_fold])),
        mean_macro_f1=float(np.mean([m.macro_f1_pct for m in per_fold])),
        pooled_confusion=((int(pooled[0, 0]), int(pooled[0, 1])),
                          (int(pooled[1, 0]), int(pooled[1, 1]))),
    )


def render_report(report: CvReport, format: str = "text") -> bytes:
    """Serialize a CvReport: summary text table, per-fold CSV, or JSON."""
    if format == "text":
        return _render_text(report)
    if format == "csv":
        return _render_csv(report)
    if format == "json":
        return _render_json(report)
    raise ValueError(f"unknown report format {format!r}")


def _render_text(report: CvReport) -> bytes:
    lines = [
        f"# crossval classifier={report.classifier_id} provider={report.provider_id} "
        f"k={report.k} seed={report.seed}",
        f"{'provider':<24}{'classifier':<12}{'accuracy':>10}{'macro_f1':>10}",
        f"{report.provider_id:<24}{report.classifier_id:<12}"
        f"{report.mean_accuracy:>10.2f}{report.mean_macro_f1:>10.2f}",
        "",
        f"{'fold':<6}{'accuracy':>10}{'macro_f1':>10}{'tn':>8}{'fp':>8}{'fn':>8}{'tp':>8}",
    ]
    for f, m in enumerate(report.per_fold):
        (tn, fp), (fn, tp) = m.confusion
        lines.append(
            f"{f:<6}{m.accuracy_pct:>10.2f}{m.macro_f1_pct:>10.2f}"
            f"{tn:>8}{fp:>8}{fn:>8}{tp:>8}"
        )
    (tn, fp), (fn, tp) = report.pooled_confusion
    lines.append(
        f"{'mean':<6}{report.mean_accuracy:>10.2f}{report.mean_macro_f1:>10.2f}"
        f"{tn:>8}{fp:>8}{fn:>8}{tp:>8}"
    )
    return ("\n".join(lines) + "\n").encode()


def _render_csv(report: CvReport) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["provider_id", "classifier", "fold", "accuracy_pct",
                     "macro_f1_pct", "tn", "fp", "fn", "tp"])
    for f, m in enumerate(report.per_fold):
        (tn, fp), (fn, tp) = m.confusion
        writer.writerow([report.provider_id, report.classifier_id, f,
                         f"{m.accuracy_pct:.2f}", f"{m.macro_f1_pct:.2f}",
                         tn, fp, fn, tp])
    (tn, fp), (fn, tp) = report.pooled_confusion
    writer.writerow([report.provider_id, report.classifier_id, "mean",
                     repr(report.mean_accuracy), repr(report.mean_macro_f1),
                     tn, fp, fn, tp])
    return buf.getvalue().encode()


def _render_json(report: CvReport) -> bytes:
    doc = {
        "classifier_id": report.classifier_id,
        "provider_id": report.provider_id,
        "k": report.k,
        "seed": report.seed,
        "per_fold": [
            {
                "fold": f,
                "accuracy_pct": m.accuracy_pct,
                "macro_f1_pct": m.macro_f1_pct,
                "confusion": [list(row) for row in m.confusion],
            }
            for f, m in enumerate(report.per_fold)
        ],
        "mean_accuracy": report.mean_accuracy,
        "mean_macro_f1": report.mean_macro_f1,
        "pooled_confusion": [list(row) for row in report.pooled_confusion],
    }
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


def parse_csv_report(data: bytes) -> dict:
    """Parse _render_csv output back into per-fold and mean rows (for tests
    and downstream tooling)."""
    rows = list(csv.DictReader(io.StringIO(data.decode())))
    per_fold = [r for r in rows if r["fold"] != "mean"]
    mean = [r for r in rows if r["fold"] == "mean"]
    if len(mean) != 1:
        raise ValueError("expected exactly one mean row")
    return {"per_fold": per_fold, "mean": mean[0]}
