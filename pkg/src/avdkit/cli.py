"""Operator command line: extract, crossval, train, predict, serve.

Exit codes: 0 ok, 1 I/O-or-decode failure, 2 data/config problem, 3 empty
input (no chunks survived the remainder rule). Randomized commands default
--seed 0 and echo the seed in their output header so runs are reproducible.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import audio_io, errors
from .embedding_file import read_embedding_file, write_embedding_file
from .evaluation import ClassifierSpec, cross_validate, render_report
from .forest import RfConfig
from .mfcc import MfccConfig
from .model_store import PipelineArtifact, load_pipeline, save_pipeline, utc_now_iso
from .pipeline import AGGREGATION_RULES, Predictor, RULE_ANY, TARGET_SAMPLE_RATE_HZ
from .providers import ProviderDescriptor, make_provider
from .svm import SvmConfig

EXIT_OK = 0
EXIT_IO = 1
EXIT_DATA = 2
EXIT_EMPTY = 3

_IO_ERRORS = (
    errors.MalformedContainer, errors.UnsupportedCodec, errors.EmptyAudio,
    errors.PayloadTooLarge, errors.CorruptFile, errors.CorruptArtifact,
    errors.IoFailure, errors.ProviderUnavailable, OSError,
)
_DATA_ERRORS = (
    errors.DegenerateData, errors.AlignmentError, errors.ConflictingOptions,
    errors.TooFewSamples, errors.TooFewPerClass, errors.InvalidConfig,
    errors.UnsupportedVersion, errors.InconsistentDims, errors.DuplicateChunkId,
    errors.ManifestError, errors.ConstantFeatures, errors.LengthMismatch,
    errors.DimMismatch, errors.MissingEmbedding, ValueError,
)
_EMPTY_ERRORS = (errors.AudioTooShort, errors.EmptyChunks, errors.EmptyInput)

LABEL_ALIASES = {
    "0": 0, "1": 1,
    "non-violence": 0, "nonviolence": 0, "non_violence": 0,
    "violence": 1, "violent": 1,
}


def parse_label(text: str) -> int:
    key = text.strip().lower()
    if key not in LABEL_ALIASES:
        raise errors.ManifestError(f"unparseable label {text!r}")
    return LABEL_ALIASES[key]


def read_manifest(path: str) -> list[dict]:
    """CSV with header path,label[,group]; group defaults to the path."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"path", "label"} <= set(reader.fieldnames):
                raise errors.ManifestError(f"{path}: need header columns path,label")
            rows = []
            seen = set()
            for row in reader:
                p = row["path"].strip()
                if not p:
                    raise errors.ManifestError(f"{path}: empty path field")
                if p in seen:
                    raise errors.ManifestError(f"{path}: duplicate path {p!r}")
                seen.add(p)
                rows.append({
                    "path": p,
                    "label": parse_label(row["label"]),
                    "group": (row.get("group") or "").strip() or p,
                })
    except OSError as exc:
        raise errors.ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not rows:
        raise errors.ManifestError(f"{path}: manifest has no rows")
    return rows


def _build_provider(args):
    mfcc_config = MfccConfig(pooling=args.pooling) if hasattr(args, "pooling") else MfccConfig()
    command = args.provider_cmd.split() if getattr(args, "provider_cmd", None) else None
    return make_provider(
        args.provider,
        mfcc_config=mfcc_config,
        dim=getattr(args, "dim", None),
        url=getattr(args, "provider_url", None),
        command=command,
    )


def labels_sidecar_path(out_path: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ".labels.csv"


def cmd_extract(args) -> int:
    rows = read_manifest(args.manifest)
    provider = _build_provider(args)
    print(f"# avdkit extract provider={provider.descriptor.provider_id} "
          f"seed={args.seed} chunk_seconds={args.chunk_seconds}")

    records = []
    label_rows = []
    failures = []
    retained = dropped = 0
    for row in rows:
        try:
            with open(row["path"], "rb") as fh:
                raw = fh.read()
            buf = audio_io.decode_wav(raw)
            buf = audio_io.resample(buf, args.target_rate)
        except (OSError, errors.AvdError) as exc:
            failures.append((row["path"], f"{type(exc).__name__}: {exc}"))
            continue
        chunks = audio_io.chunk_audio(
            buf, source_id=row["path"],
            chunk_seconds=args.chunk_seconds,
            min_keep_fraction=args.min_keep_fraction,
        )
        n_windows = int(len(buf.samples) // round(args.chunk_seconds * buf.sample_rate_hz))
        has_remainder = len(buf.samples) % round(args.chunk_seconds * buf.sample_rate_hz) > 0
        dropped += (n_windows + int(has_remainder)) - len(chunks)
        for chunk in chunks:
            records.append(provider.embed(chunk))
            label_rows.append((chunk.chunk_id, row["label"], row["group"]))
        retained += len(chunks)
        if args.verbose:
            print(f"{row['path']}: {len(chunks)} chunk(s)", file=sys.stderr)
    provider.close()

    for path, reason in failures:
        print(f"error: {path}: {reason}", file=sys.stderr)
    if failures and args.strict:
        print(f"aborting (--strict): {len(failures)} file(s) failed, no output written",
              file=sys.stderr)
        return EXIT_IO
    if retained == 0:
        print("no chunks retained; nothing to write", file=sys.stderr)
        return EXIT_EMPTY

    count = write_embedding_file(records, args.out)
    sidecar = labels_sidecar_path(args.out)
    with open(sidecar, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["chunk_id", "label", "group"])
        writer.writerows(label_rows)
    print(f"wrote {count} embeddings to {args.out} (labels: {sidecar})")
    print(f"chunks retained={retained} dropped={dropped} files_failed={len(failures)}")
    return EXIT_OK


def read_labels_csv(path: str) -> tuple[dict[str, int], dict[str, str]]:
    labels: dict[str, int] = {}
    groups: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"chunk_id", "label"} <= set(reader.fieldnames):
            raise errors.ManifestError(f"{path}: need header columns chunk_id,label")
        for row in reader:
            cid = row["chunk_id"]
            if cid in labels:
                raise errors.DuplicateChunkId(f"{path}: duplicate chunk id {cid!r}")
            labels[cid] = parse_label(row["label"])
            groups[cid] = row.get("group") or cid
    return labels, groups


def _classifier_spec(name: str) -> ClassifierSpec:
    if name == "rf":
        return ClassifierSpec(kind="rf", rf_config=RfConfig())
    if name == "svm":
        return ClassifierSpec(kind="svm", svm_config=SvmConfig())
    raise errors.ManifestError(f"unknown classifier {name!r} (want rf or svm)")


def _load_aligned(embeddings_path: str, labels_path: str):
    features = read_embedding_file(embeddings_path)
    labels, groups = read_labels_csv(labels_path)
    if set(features) != set(labels):
        only_f = len(set(features) - set(labels))
        only_l = len(set(labels) - set(features))
        raise errors.AlignmentError(
            f"embeddings and labels disagree: {only_f} ids only in embeddings, "
            f"{only_l} only in labels"
        )
    return features, labels, groups


def cmd_crossval(args) -> int:
    features, labels, groups = _load_aligned(args.embeddings, args.labels)
    spec = _classifier_spec(args.classifier)
    report = cross_validate(
        features, labels, spec, k=args.k, seed=args.seed,
        stratified=not args.group_split,
        group_ids=groups if args.group_split else None,
    )
    sys.stdout.write(render_report(report, "text").decode())
    if args.out:
        fmt = "json" if args.out.endswith(".json") else "csv"
        with open(args.out, "wb") as fh:
            fh.write(render_report(report, fmt))
        print(f"wrote {fmt} report to {args.out}")
    if args.figures:
        from .figures import render_confusion_figure, render_fold_scores_figure
        os.makedirs(args.figures, exist_ok=True)
        base = f"{args.classifier}_{report.provider_id}".replace(":", "_").replace("/", "_")
        paths = [
            render_confusion_figure(report, os.path.join(args.figures, base + "_confusion.png")),
            render_fold_scores_figure(report, os.path.join(args.figures, base + "_folds.png")),
        ]
        print(f"wrote figures: {', '.join(paths)}")
    if args.dump_folds:
        from .evaluation import kfold_split
        import numpy as np
        ids = sorted(features)
        y = np.asarray([labels[i] for i in ids])
        assignment = kfold_split(
            y, k=args.k, seed=args.seed,
            stratified=not args.group_split,
            group_ids=[groups[i] for i in ids] if args.group_split else None,
        )
        with open(args.dump_folds, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["chunk_id", "fold", "group"])
            for i, cid in enumerate(ids):
                writer.writerow([cid, int(assignment.fold_of[i]), groups[cid]])
        print(f"wrote fold assignment to {args.dump_folds}")
    return EXIT_OK


def cmd_train(args) -> int:
    features, labels, groups = _load_aligned(args.embeddings, args.labels)
    spec = _classifier_spec(args.classifier)
    print(f"# avdkit train classifier={args.classifier} seed={args.seed}")

    import numpy as np
    ids = sorted(features)
    X = np.stack([features[i].values for i in ids])
    y = np.asarray([labels[i] for i in ids], dtype=np.int64)

    snapshot = None
    if args.snapshot_crossval:
        report = cross_validate(features, labels, spec, k=args.k, seed=args.seed)
        snapshot = {
            "k": report.k,
            "seed": report.seed,
            "mean_accuracy": report.mean_accuracy,
            "mean_macro_f1": report.mean_macro_f1,
            "pooled_confusion": [list(r) for r in report.pooled_confusion],
        }

    model = spec.train(X, y, seed=args.seed)
    first = features[ids[0]]
    mfcc_config = None
    if first.provider_id == "mfcc":
        mfcc_config = MfccConfig(pooling=args.pooling)
        if mfcc_config.feature_dim() != first.dim:
            raise errors.InconsistentDims(
                f"--pooling {args.pooling} implies dim {mfcc_config.feature_dim()}, "
                f"but embeddings have dim {first.dim}; re-extract or fix the flag"
            )
    artifact = PipelineArtifact(
        provider=ProviderDescriptor(
            provider_id=first.provider_id, dim=first.dim,
            kind=_provider_kind(first.provider_id),
        ),
        classifier_kind=spec.kind,
        classifier_payload=model,
        train_seed=args.seed,
        created_at=utc_now_iso(),
        mfcc_config=mfcc_config,
        metrics_snapshot=snapshot,
    )
    checksum = save_pipeline(artifact, args.out)
    print(f"wrote artifact {args.out}")
    print(f"model_id {checksum}")
    return EXIT_OK


def _provider_kind(provider_id: str) -> str:
    if provider_id == "mfcc":
        return "internal"
    if provider_id.startswith("mock:"):
        return "mock"
    if provider_id.startswith("precomputed:"):
        return "precomputed"
    return "external"


def cmd_predict(args) -> int:
    artifact = load_pipeline(args.artifact)
    predictor = Predictor.from_artifact(
        artifact,
        provider_url=args.provider_url,
        provider_command=args.provider_cmd.split() if args.provider_cmd else None,
    )
    with open(args.audio, "rb") as fh:
        raw = fh.read()
    response = predictor.predict_wav_bytes(raw, rule=args.rule)
    json.dump(response, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_env(
        artifact_path=args.artifact,
        host=args.host,
        port=args.port,
        aggregation_rule=args.rule,
        max_upload_bytes=args.max_upload_bytes,
        cors_allowed_origins=tuple(args.cors.split(",")) if args.cors else None,
        provider_url=args.provider_url,
        provider_command=args.provider_cmd.split() if args.provider_cmd else None,
    )
    # fail fast before binding; the app itself tolerates a bad artifact
    load_pipeline(config.artifact_path)

    import uvicorn
    app = create_app(config)
    print(f"# avdkit serve artifact={config.artifact_path} rule={config.aggregation_rule} "
          f"addr={config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avdkit",
                                     description="Audio violence detection toolkit")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="decode, chunk, and embed a dataset manifest")
    p.add_argument("--manifest", required=True, help="CSV with header path,label[,group]")
    p.add_argument("--provider", required=True,
                   help="mfcc | mock:<seed> | precomputed:<path> | xvector|ecapa|wavlm|unispeech_sat")
    p.add_argument("--out", required=True, help="embedding file to write (.avde)")
    p.add_argument("--pooling", default="mean_std", choices=["mean", "mean_std"])
    p.add_argument("--dim", type=int, default=None, help="dimension for mock/ecapa providers")
    p.add_argument("--provider-url", default=None, help="HTTP endpoint for external providers")
    p.add_argument("--provider-cmd", default=None, help="stdio command for external providers")
    p.add_argument("--chunk-seconds", type=float, default=audio_io.DEFAULT_CHUNK_SECONDS)
    p.add_argument("--min-keep-fraction", type=float, default=audio_io.DEFAULT_MIN_KEEP_FRACTION)
    p.add_argument("--target-rate", type=int, default=TARGET_SAMPLE_RATE_HZ)
    p.add_argument("--strict", action="store_true",
                   help="fail (exit 1, no output) if any manifest file cannot be processed")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("crossval", help="k-fold cross-validation report")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True, help="sidecar labels CSV from extract")
    p.add_argument("--classifier", required=True, choices=["rf", "svm"])
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None, help="write csv (.csv) or json (.json) report")
    p.add_argument("--group-split", action="store_true",
                   help="keep whole source recordings within one fold (default: stratified)")
    p.add_argument("--figures", default=None, help="directory for confusion/fold PNGs")
    p.add_argument("--dump-folds", default=None, help="write chunk_id,fold,group CSV")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("train", help="train on all rows and save a pipeline artifact")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--classifier", required=True, choices=["rf", "svm"])
    p.add_argument("--out", required=True, help="artifact path (.avdm)")
    p.add_argument("--pooling", default="mean_std", choices=["mean", "mean_std"],
                   help="recorded in the artifact for the mfcc provider")
    p.add_argument("--snapshot-crossval", action="store_true",
                   help="run crossval first and store its summary in the artifact")
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify one audio file with a saved artifact")
    p.add_argument("audio", help="WAV file")
    p.add_argument("--artifact", required=True)
    p.add_argument("--rule", default=RULE_ANY, choices=list(AGGREGATION_RULES))
    p.add_argument("--provider-url", default=None)
    p.add_argument("--provider-cmd", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    p.add_argument("--artifact", default=None, help="pipeline artifact (env ARTIFACT_PATH)")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--rule", default=None, choices=list(AGGREGATION_RULES))
    p.add_argument("--max-upload-bytes", type=int, default=None)
    p.add_argument("--cors", default=None, help="comma-separated allowed origins")
    p.add_argument("--provider-url", default=None)
    p.add_argument("--provider-cmd", default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _EMPTY_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except _DATA_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _IO_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
