"""Experiment orchestration: config parsing/validation, the end-to-end
single run, and the comparison/ablation suites.

Every run writes an immutable config snapshot before any work starts, and
derives all randomness from the experiment seed. Reports are deterministic
byte-for-byte; wall-clock data goes to run_meta.json, which is excluded
from reproducibility comparisons.
"""

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    DEFAULT_BALANCING_RATIO,
    build_manifest,
    default_preprocess_spec,
    make_folds,
    split_labeled_ids,
    split_train_test,
    subset_dataset,
    write_manifest_csv,
    write_rejects_csv,
)
from .errors import AblationError, ConfigError, PartialSuiteError, PlotError
from .evaluation import (
    aggregate_reports,
    confusion_from_predictions,
    kfold_cross_validate,
    metrics_from_confusion,
    render_comparison_text,
    write_comparison_csv,
)
from .models import (
    BACKBONE_IDS,
    ModelSpec,
    ablated_spec,
    build_model,
    export_model,
    list_removable_head_layers,
    validate_model_spec,
    write_summary_csv,
)
from .nn import kernel_backend
from .training import (
    MONITORS,
    OPTIMIZER_KINDS,
    TrainingConfig,
    make_optimizer,
    predict_classes,
    train,
    write_history_csv,
)

log = logging.getLogger(__name__)

SUITES = ("single", "compare_architectures", "compare_optimizers", "ablation")

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.3
    stratified: bool = True

    def to_dict(self):
        return {"test_fraction": self.test_fraction, "stratified": self.stratified}


@dataclass(frozen=True)
class KFoldConfig:
    enabled: bool = False
    k: int = 10
    on_train_only: bool = True

    def to_dict(self):
        return {"enabled": self.enabled, "k": self.k, "on_train_only": self.on_train_only}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_root: str
    output_dir: str
    model: ModelSpec
    training: TrainingConfig
    split: SplitConfig = field(default_factory=SplitConfig)
    kfold: KFoldConfig = field(default_factory=KFoldConfig)
    suite: str = "single"
    seed: int = 0
    balancing_ratio: float = DEFAULT_BALANCING_RATIO
    val_fraction: float = 0.15
    channel_means: tuple = None  # None -> backbone defaults
    channel_stds: tuple = None
    save_checkpoints: bool = False

    def to_dict(self):
        return {
            "dataset_root": self.dataset_root,
            "output_dir": self.output_dir,
            "model": self.model.to_dict(),
            "training": self.training.to_dict(),
            "split": self.split.to_dict(),
            "kfold": self.kfold.to_dict(),
            "suite": self.suite,
            "seed": self.seed,
            "balancing_ratio": self.balancing_ratio,
            "val_fraction": self.val_fraction,
            "channel_means": list(self.channel_means) if self.channel_means else None,
            "channel_stds": list(self.channel_stds) if self.channel_stds else None,
            "save_checkpoints": self.save_checkpoints,
        }

    @classmethod
    def from_dict(cls, raw):
        violations = []
        if not isinstance(raw, dict):
            raise ConfigError(["config must be a JSON object"])
        known = {
            "dataset_root",
            "output_dir",
            "model",
            "training",
            "split",
            "kfold",
            "suite",
            "seed",
            "balancing_ratio",
            "val_fraction",
            "channel_means",
            "channel_stds",
            "save_checkpoints",
        }
        for key in raw:
            if key not in known:
                violations.append(f"unknown config field {key!r}")
        for required in ("dataset_root", "output_dir"):
            if not raw.get(required):
                violations.append(f"{required} is required")
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            violations.append(f"seed must be an integer, got {seed!r}")
            seed = 0
        try:
            model = ModelSpec.from_dict(raw.get("model", {"backbone_id": "vgg19"}))
        except (TypeError, ValueError) as exc:
            violations.append(f"model: {exc}")
            model = ModelSpec(backbone_id="vgg19")
        training_raw = dict(raw.get("training", {}))
        if training_raw.get("seed") is None:
            training_raw["seed"] = seed
        try:
            training = TrainingConfig.from_dict(training_raw)
        except (TypeError, ValueError) as exc:
            violations.append(f"training: {exc}")
            training = TrainingConfig(seed=seed)
        try:
            split = SplitConfig(**raw.get("split", {}))
        except TypeError as exc:
            violations.append(f"split: {exc}")
            split = SplitConfig()
        try:
            kfold = KFoldConfig(**raw.get("kfold", {}))
        except TypeError as exc:
            violations.append(f"kfold: {exc}")
            kfold = KFoldConfig()
        config = cls(
            dataset_root=str(raw.get("dataset_root", "")),
            output_dir=str(raw.get("output_dir", "")),
            model=model,
            training=training,
            split=split,
            kfold=kfold,
            suite=raw.get("suite", "single"),
            seed=seed,
            balancing_ratio=raw.get("balancing_ratio", DEFAULT_BALANCING_RATIO),
            val_fraction=raw.get("val_fraction", 0.15),
            channel_means=tuple(raw["channel_means"]) if raw.get("channel_means") else None,
            channel_stds=tuple(raw["channel_stds"]) if raw.get("channel_stds") else None,
            save_checkpoints=bool(raw.get("save_checkpoints", False)),
        )
        violations.extend(config.validate())
        if violations:
            raise ConfigError(violations)
        return config

    @classmethod
    def from_file(cls, path, overrides=None):
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError([f"config file not found: {path}"])
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config file is not valid JSON: {exc}"])
        for key, value in (overrides or {}).items():
            if value is not None:
                raw[key] = value
        return cls.from_dict(raw)

    def validate(self):
        """Collect every violation (empty list means the config is valid)."""
        v = []

        def number(value, field, lo=None, hi=None, lo_open=False, hi_open=False, integer=False):
            """Range-check a numeric field; appends one violation and returns
            False when the value cannot be compared."""
            kind = "an integer" if integer else "a number"
            ok_type = isinstance(value, int) if integer else isinstance(value, (int, float))
            if not ok_type or isinstance(value, bool):
                v.append(f"{field} must be {kind}, got {value!r}")
                return False
            if lo is not None and (value <= lo if lo_open else value < lo):
                v.append(f"{field} must be {'>' if lo_open else '>='} {lo}, got {value}")
                return False
            if hi is not None and (value >= hi if hi_open else value > hi):
                v.append(f"{field} must be {'<' if hi_open else '<='} {hi}, got {value}")
                return False
            return True

        if self.suite not in SUITES:
            v.append(f"suite must be one of {SUITES}, got {self.suite!r}")
        for problem in validate_model_spec(self.model):
            v.append(f"model.{problem}")
        t = self.training
        if t.optimizer_kind not in OPTIMIZER_KINDS:
            v.append(f"training.optimizer_kind must be one of {OPTIMIZER_KINDS}, got {t.optimizer_kind!r}")
        if t.learning_rate is not None:
            number(t.learning_rate, "training.learning_rate", lo=0, lo_open=True)
        if t.momentum is not None:
            if t.optimizer_kind != "sgd":
                v.append("training.momentum applies to sgd only")
            else:
                number(t.momentum, "training.momentum", lo=0.0, hi=1.0, hi_open=True)
        number(t.max_epochs, "training.max_epochs", lo=1, integer=True)
        number(t.batch_size, "training.batch_size", lo=1, integer=True)
        es = t.early_stopping
        if es.monitor not in MONITORS:
            v.append(f"training.early_stopping.monitor must be one of {MONITORS}, got {es.monitor!r}")
        number(es.patience, "training.early_stopping.patience", lo=0, integer=True)
        number(es.min_delta, "training.early_stopping.min_delta", lo=0)
        number(self.split.test_fraction, "split.test_fraction", lo=0.0, hi=1.0)
        if self.kfold.enabled:
            number(self.kfold.k, "kfold.k", lo=2, integer=True)
        number(self.balancing_ratio, "balancing_ratio", lo=1)
        number(self.val_fraction, "val_fraction", lo=0.0, hi=1.0, hi_open=True)
        for name in ("channel_means", "channel_stds"):
            stats = getattr(self, name)
            if stats is None:
                continue
            if len(stats) != 3:
                v.append(f"{name} must have 3 entries, got {len(stats)}")
            elif not all(isinstance(s, (int, float)) and not isinstance(s, bool) for s in stats):
                v.append(f"{name} entries must be numbers, got {stats!r}")
            elif name == "channel_stds" and any(s <= 0 for s in stats):
                v.append("channel_stds must be strictly positive")
        if self.output_dir:
            parent = Path(self.output_dir)
            while not parent.exists():
                parent = parent.parent
            if not os.access(parent, os.W_OK):
                v.append(f"output_dir {self.output_dir} is not writable")
        return v

    # ---- identity -----------------------------------------------------------

    def digest(self):
        """Config hash; excludes output_dir so moving outputs keeps identity."""
        payload = self.to_dict()
        payload.pop("output_dir")
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def run_id(self):
        return f"{self.suite}-{self.seed}-{self.digest()[:8]}"

    def preprocess_spec(self):
        base = default_preprocess_spec(self.model.backbone_id)
        kwargs = {}
        if self.channel_means is not None:
            kwargs["channel_means"] = self.channel_means
        if self.channel_stds is not None:
            kwargs["channel_stds"] = self.channel_stds
        return replace(base, **kwargs) if kwargs else base


@dataclass(frozen=True)
class RunArtifacts:
    report_path: str
    history_paths: tuple
    plot_paths: tuple
    model_export_path: str
    config_snapshot_path: str

    def all_paths(self):
        paths = [self.report_path, self.config_snapshot_path]
        paths.extend(self.history_paths)
        paths.extend(self.plot_paths)
        if self.model_export_path:
            paths.append(self.model_export_path)
        return paths


def _write_json(path, payload):
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_snapshot(config, run_dir):
    snapshot_path = run_dir / "config_snapshot.json"
    _write_json(
        snapshot_path,
        {"config": config.to_dict(), "config_digest": config.digest(), "run_id": config.run_id()},
    )
    return snapshot_path


# ---- plotting -----------------------------------------------------------------


def plot_learning_curves(histories, output):
    """Raster plot of validation accuracy and loss per epoch plus a CSV
    sidecar holding the exact plotted points. Returns (plot, sidecar)."""
    if not histories:
        raise PlotError("no histories to plot")
    for label, history in histories:
        if not history:
            raise PlotError(f"history for series {label!r} is empty")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    output = Path(output)
    fig, (ax_acc, ax_loss) = plt.subplots(1, 2, figsize=(11, 4.2))
    for label, history in histories:
        epochs = [r.epoch for r in history]
        ax_acc.plot(epochs, [r.val_accuracy for r in history], marker="o", markersize=3, label=label)
        ax_loss.plot(epochs, [r.val_loss for r in history], marker="o", markersize=3, label=label)
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("validation accuracy")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("validation loss")
    ax_acc.legend()
    ax_loss.legend()
    fig.tight_layout()
    fig.savefig(output, dpi=120)
    plt.close(fig)

    sidecar = output.with_name(output.stem + "_data.csv")
    import csv

    with open(sidecar, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "epoch", "val_loss", "val_accuracy"])
        for label, history in histories:
            for r in history:
                writer.writerow([label, r.epoch, repr(r.val_loss), repr(r.val_accuracy)])
    return str(output), str(sidecar)


# ---- the single-run core --------------------------------------------------------


def _execute_single(config, run_dir):
    """Dataset -> model -> training -> evaluation for one configuration.

    Returns (report_dict, RunArtifacts). `run_dir` must not be shared with
    any other run.
    """
    started = time.time()
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    snapshot_path = _write_snapshot(config, run_dir)

    manifest, rejects = build_manifest(
        config.dataset_root, seed=config.seed, balancing_ratio=config.balancing_ratio
    )
    write_manifest_csv(manifest, run_dir / "manifest.csv")
    write_rejects_csv(rejects, run_dir / "rejects.csv")
    log.info(
        "run %s: %d samples (%s), %d rejects",
        config.run_id(), len(manifest),
        ", ".join(f"{k}={v}" for k, v in sorted(manifest.class_counts.items())), len(rejects),
    )

    plan = split_train_test(
        manifest, config.split.test_fraction, config.split.stratified, config.seed
    )
    labels_by_id = manifest.labels_by_id()
    fit_ids, val_ids = split_labeled_ids(
        plan.train_ids, labels_by_id, config.val_fraction, True, config.seed
    )

    pp_spec = config.preprocess_spec()
    train_data = subset_dataset(manifest, fit_ids, pp_spec)
    val_data = subset_dataset(manifest, val_ids, pp_spec)
    test_data = subset_dataset(manifest, plan.test_ids, pp_spec)

    model, summary = build_model(config.model, seed=config.seed)
    write_summary_csv(summary, run_dir / "model_summary.csv")

    checkpoint_dir = run_dir / "checkpoints" if config.save_checkpoints else None
    trained = train(model, train_data, val_data, config.training, checkpoint_dir=checkpoint_dir)
    history_path = run_dir / "history.csv"
    write_history_csv(trained.history, history_path)

    test_preds = predict_classes(trained.model, test_data, config.training.batch_size)
    test_cm = confusion_from_predictions(test_data.labels, test_preds)
    test_metrics = metrics_from_confusion(test_cm)

    kfold_section = None
    if config.kfold.enabled:
        fold_source_ids = sorted(plan.train_ids if config.kfold.on_train_only else manifest.ids)
        fold_plan = make_folds(
            {i: labels_by_id[i] for i in fold_source_ids},
            config.kfold.k,
            config.split.stratified,
            config.seed,
        )
        bank = subset_dataset(manifest, fold_source_ids, pp_spec)
        kfold_report = kfold_cross_validate(
            bank,
            fold_plan,
            config.model,
            config.training,
            val_fraction=config.val_fraction,
            out_dir=run_dir,
            config_digest=config.digest(),
        )
        kfold_section = {
            "k": config.kfold.k,
            "on_train_only": config.kfold.on_train_only,
            "mean_metrics": kfold_report.mean_metrics.to_dict() if kfold_report.mean_metrics else None,
            "std_metrics": kfold_report.std_metrics,
            "per_fold": [f.to_dict() for f in kfold_report.per_fold],
            "failed_folds": list(kfold_report.failed_folds),
            "failed_fold_count": len(kfold_report.failed_folds),
        }

    plot_path, sidecar_path = plot_learning_curves(
        [(config.model.backbone_id, trained.history)], run_dir / "learning_curves.png"
    )

    export_dir = run_dir / "model"
    export_info = export_model(trained.model, config.model, export_dir)

    best = trained.history[trained.best_epoch - 1]
    optimizer_info = make_optimizer(
        config.training.optimizer_kind,
        config.training.resolved_learning_rate,
        config.training.resolved_momentum,
    ).describe()
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "run_id": config.run_id(),
        "config_digest": config.digest(),
        "architecture": config.model.backbone_id,
        "model_spec": config.model.to_dict(),
        "optimizer": optimizer_info,
        "training_config": config.training.to_dict(),
        "preprocess": {
            "channel_means": list(pp_spec.channel_means),
            "channel_stds": list(pp_spec.channel_stds),
            "resize_mode": pp_spec.resize_mode,
            "target_size": [pp_spec.target_height, pp_spec.target_width],
        },
        "dataset": {
            "root": str(config.dataset_root),
            "class_counts": dict(manifest.class_counts),
            "balancing_ratio": manifest.balancing_ratio,
            "n_samples": len(manifest),
            "n_rejects": len(rejects),
            "n_train": len(fit_ids),
            "n_val": len(val_ids),
            "n_test": len(plan.test_ids),
            "split_stratified": config.split.stratified,
            "manifest_sha256": hashlib.sha256((run_dir / "manifest.csv").read_bytes()).hexdigest(),
        },
        "seed": config.seed,
        "epochs_run": len(trained.history),
        "stopped_early": trained.stopped_early,
        "best_epoch": trained.best_epoch,
        "train_accuracy": best.train_accuracy,
        "train_loss": best.train_loss,
        "val_accuracy": best.val_accuracy,
        "val_loss": best.val_loss,
        "test_metrics": test_metrics.to_dict(),
        "test_confusion": test_cm.to_dict(),
        "kfold": kfold_section,
        "positive_class": "melanoma",
        "weights": {
            "pretrained": config.model.pretrained,
            "pretrained_provenance": getattr(trained.model, "pretrained_provenance", None),
            "exported_digest": export_info["weights_digest"],
        },
        "artifacts": {
            "history": "history.csv",
            "manifest": "manifest.csv",
            "rejects": "rejects.csv",
            "model_summary": "model_summary.csv",
            "plot": Path(plot_path).name,
            "plot_data": Path(sidecar_path).name,
            "model_export": "model",
        },
    }
    report_path = run_dir / "report.json"
    _write_json(report_path, report)
    _write_json(
        run_dir / "run_meta.json",
        {
            "wall_seconds": time.time() - started,
            "kernel_backend": kernel_backend(),
            "numpy_version": np.__version__,
            "lesiontl_version": __version__,
        },
    )
    artifacts = RunArtifacts(
        report_path=str(report_path),
        history_paths=(str(history_path),),
        plot_paths=(plot_path, sidecar_path),
        model_export_path=str(export_dir),
        config_snapshot_path=str(snapshot_path),
    )
    return report, artifacts


# ---- suites ----------------------------------------------------------------------


def _member_worker(raw_config, run_dir):
    config = ExperimentConfig.from_dict(raw_config)
    report, artifacts = _execute_single(config, Path(run_dir))
    return report, artifacts


def _run_members(members, jobs):
    """Execute (name, config, run_dir) members; returns name->(report, artifacts).

    Failures are collected, not raised; the caller decides suite policy.
    """
    results = {}
    failures = {}
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                name: pool.submit(_member_worker, config.to_dict(), str(run_dir))
                for name, config, run_dir in members
            }
            for name, future in futures.items():
                try:
                    results[name] = future.result()
                except Exception as exc:  # worker already logged details
                    failures[name] = exc
    else:
        for name, config, run_dir in members:
            try:
                results[name] = _member_worker(config.to_dict(), run_dir)
            except Exception as exc:
                failures[name] = exc
    return results, failures


def run_experiment(config, jobs=1):
    """Execute the configured suite end to end; returns RunArtifacts."""
    violations = config.validate()
    if violations:
        raise ConfigError(violations)
    run_dir = Path(config.output_dir) / config.run_id()
    if config.suite == "single":
        _, artifacts = _execute_single(config, run_dir)
        return artifacts
    if config.suite == "compare_architectures":
        return run_architecture_comparison(config, jobs=jobs)
    if config.suite == "compare_optimizers":
        return run_optimizer_comparison(config, jobs=jobs)
    return run_ablation(config, jobs=jobs)


def _suite_scaffold(config, suite):
    config = replace(config, suite=suite)
    run_dir = Path(config.output_dir) / config.run_id()
    run_dir.mkdir(parents=True, exist_ok=True)
    snapshot = _write_snapshot(config, run_dir)
    return config, run_dir, snapshot


def _raise_on_failures(failures, total):
    if failures:
        detail = "; ".join(f"{name}: {exc}" for name, exc in failures.items())
        raise PartialSuiteError(len(failures), total, f"{len(failures)} of {total} suite runs failed ({detail})")


def run_architecture_comparison(config, jobs=1):
    """One run per backbone; emits a Table-1-shaped comparison CSV."""
    config, run_dir, snapshot = _suite_scaffold(config, "compare_architectures")
    members = []
    for backbone in BACKBONE_IDS:
        member = replace(
            config, suite="single", model=replace(config.model, backbone_id=backbone)
        )
        members.append((backbone, member, run_dir / backbone))
    results, failures = _run_members(members, jobs)
    reports = [results[name][0] for name, _, _ in members if name in results]
    comparison_csv = run_dir / "comparison.csv"
    comparison_txt = run_dir / "comparison.txt"
    if reports:
        rows = aggregate_reports(reports)
        write_comparison_csv(rows, comparison_csv)
        comparison_txt.write_text(render_comparison_text(rows), encoding="utf-8")
    _raise_on_failures(failures, len(members))
    histories = tuple(p for name, _, _ in members for p in results[name][1].history_paths)
    plots = tuple(p for name, _, _ in members for p in results[name][1].plot_paths)
    return RunArtifacts(
        report_path=str(comparison_csv),
        history_paths=histories,
        plot_paths=plots,
        model_export_path=None,
        config_snapshot_path=str(snapshot),
    )


def run_optimizer_comparison(config, jobs=1):
    """Two runs differing only in optimizer kind, plus an overlay plot."""
    from .training import read_history_csv

    config, run_dir, snapshot = _suite_scaffold(config, "compare_optimizers")
    members = []
    for kind in OPTIMIZER_KINDS:
        member = replace(
            config,
            suite="single",
            training=replace(config.training, optimizer_kind=kind),
        )
        members.append((kind, member, run_dir / kind))
    results, failures = _run_members(members, jobs)
    plot_paths = ()
    if len(results) == len(members):
        histories = [
            (kind, read_history_csv(results[kind][1].history_paths[0]))
            for kind, _, _ in members
        ]
        plot_paths = plot_learning_curves(histories, run_dir / "optimizer_comparison.png")
    _raise_on_failures(failures, len(members))
    member_plots = tuple(p for kind, _, _ in members for p in results[kind][1].plot_paths)
    return RunArtifacts(
        report_path=str(run_dir / "adam" / "report.json"),
        history_paths=tuple(results[k][1].history_paths[0] for k, _, _ in members),
        plot_paths=tuple(plot_paths) + member_plots,
        model_export_path=None,
        config_snapshot_path=str(snapshot),
    )


def run_ablation(config, jobs=1):
    """Baseline plus one run per removable head layer; emits a delta table."""
    import csv

    removable = list_removable_head_layers(config.model)
    if not removable:
        raise AblationError("the model head has no removable layers")
    config, run_dir, snapshot = _suite_scaffold(config, "ablation")
    members = [("baseline", replace(config, suite="single"), run_dir / "baseline")]
    for layer in removable:
        member = replace(
            config, suite="single", model=ablated_spec(config.model, layer)
        )
        members.append((f"without_{layer}", member, run_dir / f"without_{layer}"))
    results, failures = _run_members(members, jobs)
    deltas_path = run_dir / "ablation_deltas.csv"
    if "baseline" in results:
        baseline_acc = results["baseline"][0]["val_accuracy"]
        with open(deltas_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["layer_name", "baseline_val_accuracy", "ablated_val_accuracy", "delta_val_accuracy"])
            for layer in removable:
                key = f"without_{layer}"
                if key not in results:
                    continue
                acc = results[key][0]["val_accuracy"]
                writer.writerow([layer, repr(baseline_acc), repr(acc), repr(acc - baseline_acc)])
    _raise_on_failures(failures, len(members))
    return RunArtifacts(
        report_path=str(deltas_path),
        history_paths=tuple(results[n][1].history_paths[0] for n, _, _ in members),
        plot_paths=tuple(p for n, _, _ in members for p in results[n][1].plot_paths),
        model_export_path=None,
        config_snapshot_path=str(snapshot),
    )


def describe_plan(config):
    """Human-readable dry-run plan."""
    lines = [
        f"run_id:        {config.run_id()}",
        f"suite:         {config.suite}",
        f"dataset_root:  {config.dataset_root}",
        f"output_dir:    {Path(config.output_dir) / config.run_id()}",
        f"seed:          {config.seed}",
        f"model:         {config.model.backbone_id} (pretrained={config.model.pretrained}, "
        f"head={list(config.model.head_widths)}, dropout={config.model.dropout_rate}, "
        f"freeze_first_n={config.model.freeze.freeze_first_n})",
        f"optimizer:     {config.training.optimizer_kind} "
        f"(lr={config.training.resolved_learning_rate}, max_epochs={config.training.max_epochs}, "
        f"batch_size={config.training.batch_size})",
        f"early stop:    monitor={config.training.early_stopping.monitor}, "
        f"patience={config.training.early_stopping.patience}",
        f"split:         test_fraction={config.split.test_fraction}, "
        f"stratified={config.split.stratified}, val_fraction={config.val_fraction}",
        f"kfold:         enabled={config.kfold.enabled}, k={config.kfold.k}",
    ]
    if config.suite == "compare_architectures":
        lines.append(f"members:       {', '.join(BACKBONE_IDS)}")
    elif config.suite == "compare_optimizers":
        lines.append(f"members:       {', '.join(OPTIMIZER_KINDS)}")
    elif config.suite == "ablation":
        layers = list_removable_head_layers(config.model)
        lines.append(f"members:       baseline, {', '.join('without_' + l for l in layers)}")
    return "\n".join(lines)
