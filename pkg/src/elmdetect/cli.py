"""Command-line entry point: ingest, features, run, plot, verify.

Exit codes: 0 success, 2 input error, 3 training/evaluation failure.
Every output file is stamped with the run's config hash and global seed, and
all commands are deterministic given identical inputs and flags (report.json
carries the only timestamp).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .corpus import DocumentSet, FoldPlan, load_dataset, stratified_folds
from .errors import ElmDetectError
from .evaluation import (
    FNIR_REFERENCE_RESULTS,
    METRIC_NAMES,
    ComparisonReport,
    cross_validate,
)
from .features import FEATURE_NAMES, FeatureExtractor
from .plots import render_improvement_svg, render_roc_svg
from .textstats import load_lexicon
from .training import TrainConfig, VARIANTS

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_TRAINING = 3

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's outputs (except the clock)."""

    true_csv: str
    fake_csv: str
    k: int = 10
    seed: int = 42
    variants: tuple[str, ...] = ("base", "enhanced")
    out_dir: str = "out"
    sentiment_lexicon: str | None = None
    urgency_lexicon: str | None = None
    epochs: int = 10
    patience: int = 2
    max_seq_len: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    jobs: int = 1
    emit_plots: bool = False

    def config_hash(self) -> str:
        payload = {
            "true_csv": self.true_csv,
            "fake_csv": self.fake_csv,
            "k": self.k,
            "seed": self.seed,
            "variants": list(self.variants),
            "sentiment_lexicon": self.sentiment_lexicon,
            "urgency_lexicon": self.urgency_lexicon,
            "epochs": self.epochs,
            "patience": self.patience,
            "max_seq_len": self.max_seq_len,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()

    def train_config(self, variant: str) -> TrainConfig:
        return TrainConfig(
            variant=variant,
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            early_stop_patience=self.patience,
            seed=self.seed,
            max_seq_len=self.max_seq_len,
        )


def _extractor(cfg: RunConfig) -> FeatureExtractor:
    sentiment = load_lexicon(cfg.sentiment_lexicon) if cfg.sentiment_lexicon else None
    urgency = load_lexicon(cfg.urgency_lexicon) if cfg.urgency_lexicon else None
    return FeatureExtractor(sentiment=sentiment, urgency=urgency)


def _stamp(cfg_hash: str, seed: int) -> str:
    return f"# config_hash={cfg_hash} seed={seed}"


def _write_csv(path: Path, stamp: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(stamp + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_stamp(path: Path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    out: dict[str, str] = {}
    if first.startswith("#"):
        for part in first[1:].split():
            if "=" in part:
                key, value = part.split("=", 1)
                out[key] = value
    return out


# -- subcommands ----------------------------------------------------------------


def cmd_ingest(args) -> int:
    cfg = _run_config(args)
    corpus = load_dataset(cfg.true_csv, cfg.fake_csv)
    plan = stratified_folds(corpus, cfg.k, cfg.seed)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(cfg.config_hash(), cfg.seed)
    _write_csv(
        out / "folds.csv",
        stamp,
        ["doc_id", "fold"],
        ((doc.id, fold) for doc, fold in zip(corpus, plan.assignments)),
    )
    n_true, n_fake = corpus.class_counts
    fold_sizes = [plan.assignments.count(f) for f in range(cfg.k)]
    summary = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "k": cfg.k,
        "n_documents": len(corpus),
        "class_counts": {"true_news": n_true, "fake_news": n_fake},
        "dropped_rows": corpus.dropped_rows,
        "empty_after_cleaning": sum(1 for d in corpus if d.empty_after_cleaning),
        "fold_sizes": fold_sizes,
    }
    with open(out / "corpus_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"ingested {len(corpus)} documents ({n_true} true, {n_fake} fake), "
          f"{corpus.dropped_rows} empty rows dropped; folds written to {out / 'folds.csv'}")
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _run_config(args)
    corpus = load_dataset(cfg.true_csv, cfg.fake_csv)
    extractor = _extractor(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(cfg.config_hash(), cfg.seed)
    rows = (
        [doc.id, doc.label] + [repr(v) for v in extractor.elm(doc).values]
        for doc in corpus
    )
    _write_csv(out / "features.csv", stamp, ["doc_id", "label", *FEATURE_NAMES], rows)
    print(f"wrote features for {len(corpus)} documents to {out / 'features.csv'}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _run_config(args)
    corpus = load_dataset(cfg.true_csv, cfg.fake_csv)
    extractor = _extractor(cfg)
    plan = stratified_folds(corpus, cfg.k, cfg.seed)
    configs = [cfg.train_config(v) for v in cfg.variants]
    try:
        report = cross_validate(corpus, plan, configs, extractor=extractor, jobs=cfg.jobs)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_run_outputs(cfg, corpus, plan, report, out)
    _print_tables(report)
    if cfg.emit_plots:
        _emit_plots(out)
    return EXIT_OK


def _write_run_outputs(
    cfg: RunConfig, corpus: DocumentSet, plan: FoldPlan, report: ComparisonReport, out: Path
) -> None:
    stamp = _stamp(cfg.config_hash(), cfg.seed)
    _write_csv(
        out / "fold_assignments.csv",
        stamp,
        ["doc_id", "fold"],
        ((doc.id, fold) for doc, fold in zip(corpus, plan.assignments)),
    )
    _write_csv(
        out / "folds.csv",
        stamp,
        ["fold", "variant", "acc", "prec", "rec", "f1", "auc"],
        (
            [
                r.fold_index,
                r.variant,
                repr(r.metric_set.accuracy),
                repr(r.metric_set.precision),
                repr(r.metric_set.recall),
                repr(r.metric_set.f1),
                repr(r.metric_set.roc_auc),
            ]
            for r in report.fold_results
        ),
    )
    for variant in report.variants:
        rows = [r for r in report.fold_results if r.variant == variant]
        for r in rows:
            _write_csv(
                out / f"scores_{variant}_{r.fold_index}.csv",
                stamp,
                ["doc_id", "score", "label"],
                ((d, repr(s), y) for d, s, y in zip(r.doc_ids, r.scores, r.labels)),
            )
        _write_csv(
            out / f"confusion_{variant}.csv",
            stamp,
            ["fold", "tp", "tn", "fp", "fn"],
            (
                [r.fold_index, r.confusion.tp, r.confusion.tn, r.confusion.fp, r.confusion.fn]
                for r in rows
            ),
        )
        # pooled out-of-fold scores give one ROC per variant
        scores = [s for r in rows for s in r.scores]
        labels = [y for r in rows for y in r.labels]
        from .evaluation import roc_curve

        curve = roc_curve(scores, labels)
        _write_csv(
            out / f"roc_{variant}.csv",
            stamp,
            ["fpr", "tpr", "threshold"],
            ((repr(p[0]), repr(p[1]), repr(t)) for p, t in zip(curve.points, curve.thresholds)),
        )
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "k": report.k,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "config": {
            "true_csv": cfg.true_csv,
            "fake_csv": cfg.fake_csv,
            "k": cfg.k,
            "seed": cfg.seed,
            "variants": list(cfg.variants),
            "sentiment_lexicon": cfg.sentiment_lexicon,
            "urgency_lexicon": cfg.urgency_lexicon,
            "epochs": cfg.epochs,
            "patience": cfg.patience,
            "max_seq_len": cfg.max_seq_len,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
        },
        "variants": list(report.variants),
        "mean_metrics": {v: m.as_dict() for v, m in report.mean_metrics.items()},
        "deltas": report.deltas,
        "fold_accuracies": report.fold_accuracies,
        "significance": report.significance,
        "reference_results": {
            v: FNIR_REFERENCE_RESULTS[v] for v in report.variants if v in FNIR_REFERENCE_RESULTS
        },
        "per_fold": [
            {
                "fold": r.fold_index,
                "variant": r.variant,
                "metrics": r.metric_set.as_dict(),
                "confusion": {
                    "tp": r.confusion.tp,
                    "tn": r.confusion.tn,
                    "fp": r.confusion.fp,
                    "fn": r.confusion.fn,
                },
            }
            for r in report.fold_results
        ],
    }
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _print_tables(report: ComparisonReport) -> None:
    variants = list(report.variants)
    print()
    header = ["metric"] + variants + [f"d({v}-base)" for v in variants if v != "base" and "base" in variants]
    widths = [max(10, len(h) + 2) for h in header]
    print("".join(h.ljust(w) for h, w in zip(header, widths)))
    for name in METRIC_NAMES:
        cells = [name]
        for v in variants:
            cells.append(f"{getattr(report.mean_metrics[v], name):.4f}")
        if "base" in variants:
            for v in variants:
                if v != "base":
                    cells.append(f"{report.deltas[v][name]:+.4f}")
        print("".join(c.ljust(w) for c, w in zip(cells, widths)))
    known = [v for v in variants if v in FNIR_REFERENCE_RESULTS]
    if known:
        print("\npublished reference (COVID19-FNIR) vs this run:")
        header = ["metric"] + [f"{v} ref/run" for v in known]
        widths = [max(12, len(h) + 2) for h in header]
        print("".join(h.ljust(w) for h, w in zip(header, widths)))
        for name in METRIC_NAMES:
            cells = [name]
            for v in known:
                ref = FNIR_REFERENCE_RESULTS[v][name]
                run = getattr(report.mean_metrics[v], name)
                cells.append(f"{ref:.4f}/{run:.4f}")
            print("".join(c.ljust(w) for c, w in zip(cells, widths)))
    for variant, sig in report.significance.items():
        print(f"\nsignificance {variant} vs base: " + ", ".join(f"{k}={v}" for k, v in sig.items()))


def cmd_plot(args) -> int:
    out = Path(args.out)
    folds_path = out / "folds.csv"
    if not folds_path.exists():
        print(f"error: {folds_path} not found; run the 'run' command first", file=sys.stderr)
        return EXIT_INPUT
    stamp = _read_stamp(folds_path)
    rows = _read_csv(folds_path)
    if not rows or "variant" not in rows[0]:
        print("error: folds.csv has no per-variant metrics (was it written by 'run'?)", file=sys.stderr)
        return EXIT_INPUT
    variants = sorted({r["variant"] for r in rows})
    curves = {}
    for variant in variants:
        roc_path = out / f"roc_{variant}.csv"
        if not roc_path.exists():
            print(f"error: {roc_path} not found", file=sys.stderr)
            return EXIT_INPUT
        points = _read_csv(roc_path)
        if not points:
            print(f"error: {roc_path} is empty", file=sys.stderr)
            return EXIT_INPUT
        fprs = [float(p["fpr"]) for p in points]
        tprs = [float(p["tpr"]) for p in points]
        aucs = [float(r["auc"]) for r in rows if r["variant"] == variant]
        curves[variant] = (fprs, tprs, sum(aucs) / len(aucs))
    comment = f"<!-- config_hash={stamp.get('config_hash', '?')} seed={stamp.get('seed', '?')} -->\n"
    (out / "roc.svg").write_text(comment + render_roc_svg(curves), encoding="utf-8")
    means = {
        v: {m: _mean([float(r[c]) for r in rows if r["variant"] == v]) for m, c in
            zip(METRIC_NAMES, ("acc", "prec", "rec", "f1", "auc"))}
        for v in variants
    }
    if "base" in means and len(variants) > 1:
        deltas = {
            v: {m: means[v][m] - means["base"][m] for m in METRIC_NAMES}
            for v in variants
            if v != "base"
        }
    else:
        deltas = {v: {m: 0.0 for m in METRIC_NAMES} for v in variants}
    (out / "improvement.svg").write_text(
        comment + render_improvement_svg(METRIC_NAMES, deltas), encoding="utf-8"
    )
    print(f"wrote {out / 'roc.svg'} and {out / 'improvement.svg'}")
    return EXIT_OK


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs)


def _read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def cmd_verify(args) -> int:
    out = Path(args.out)
    report_path = out / "report.json"
    if not report_path.exists():
        print(f"error: {report_path} not found", file=sys.stderr)
        return EXIT_INPUT
    with open(report_path, encoding="utf-8") as fh:
        report = json.load(fh)
    cfg = report["config"]
    recomputed = RunConfig(
        true_csv=cfg["true_csv"],
        fake_csv=cfg["fake_csv"],
        k=cfg["k"],
        seed=cfg["seed"],
        variants=tuple(cfg["variants"]),
        sentiment_lexicon=cfg["sentiment_lexicon"],
        urgency_lexicon=cfg["urgency_lexicon"],
        epochs=cfg["epochs"],
        patience=cfg["patience"],
        max_seq_len=cfg["max_seq_len"],
        batch_size=cfg["batch_size"],
        learning_rate=cfg["learning_rate"],
    ).config_hash()
    problems = []
    if recomputed != report["config_hash"]:
        problems.append("report.json config hash does not match its embedded config")
    for path in sorted(out.glob("*.csv")):
        stamp = _read_stamp(path)
        if stamp.get("config_hash") != report["config_hash"]:
            problems.append(f"{path.name}: config hash stamp mismatch")
    # metrics must be recomputable from the persisted per-document scores
    from .evaluation import confusion, metrics, roc_auc

    for variant in report["variants"]:
        for entry in report["per_fold"]:
            if entry["variant"] != variant:
                continue
            rows = _read_csv(out / f"scores_{variant}_{entry['fold']}.csv")
            scores = [float(r["score"]) for r in rows]
            labels = [int(r["label"]) for r in rows]
            mset = metrics(confusion(scores, labels), roc_auc(scores, labels))
            for name in METRIC_NAMES:
                if abs(getattr(mset, name) - entry["metrics"][name]) > 1e-9:
                    problems.append(
                        f"fold {entry['fold']} {variant}: stored {name} does not match scores"
                    )
    if problems:
        for p in problems:
            print(f"verify: {p}", file=sys.stderr)
        return EXIT_INPUT
    print("verify: all artifacts consistent")
    return EXIT_OK


# -- argument plumbing -----------------------------------------------------------


def _run_config(args) -> RunConfig:
    variants = tuple(args.variants.split(",")) if getattr(args, "variants", None) else ("base", "enhanced")
    for v in variants:
        if v not in VARIANTS:
            raise ElmDetectError(f"unknown variant {v!r}; choose from {','.join(VARIANTS)}")
    return RunConfig(
        true_csv=args.true_csv,
        fake_csv=args.fake_csv,
        k=args.k,
        seed=args.seed,
        variants=variants,
        out_dir=args.out,
        sentiment_lexicon=args.sentiment_lexicon,
        urgency_lexicon=args.urgency_lexicon,
        epochs=args.epochs,
        patience=args.patience,
        max_seq_len=args.max_seq_len,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        jobs=getattr(args, "jobs", 1),
        emit_plots=getattr(args, "plots", False),
    )


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--true-csv", required=True, help="path to the true-news CSV")
    p.add_argument("--fake-csv", required=True, help="path to the fake-news CSV")
    p.add_argument("--k", type=int, default=10, help="fold count (default 10)")
    p.add_argument("--seed", type=int, default=42, help="global RNG seed (default 42)")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.add_argument("--variants", default="base,enhanced",
                   help="comma-separated variants (base,features_only,enhanced,combined)")
    p.add_argument("--sentiment-lexicon", default=None, help="override the bundled sentiment lexicon")
    p.add_argument("--urgency-lexicon", default=None, help="override the bundled urgency lexicon")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--patience", type=int, default=2, help="early-stop patience; 0 disables")
    p.add_argument("--max-seq-len", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.001)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elmdetect",
        description="Health misinformation detection: dual-route features + CNN-LSTM comparison harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load the dataset and write fold assignments")
    _add_dataset_args(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="write the unscaled feature matrix")
    _add_dataset_args(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("run", help="cross-validate the requested variants and write the report")
    _add_dataset_args(p)
    p.add_argument("--jobs", type=int, default=1, help="concurrent fold workers (default 1)")
    p.add_argument("--plots", action="store_true", help="also emit roc.svg / improvement.svg")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("plot", help="render SVG plots from a completed run directory")
    p.add_argument("--out", default="out", help="run directory to read and write")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("verify", help="check run artifacts for hash and metric consistency")
    p.add_argument("--out", default="out", help="run directory to verify")
    p.set_defaults(func=cmd_verify)

    return parser


def _emit_plots(out: Path) -> None:
    ns = argparse.Namespace(out=str(out))
    cmd_plot(ns)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ElmDetectError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
