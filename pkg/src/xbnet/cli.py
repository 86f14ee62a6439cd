"""Command-line entry point: ``xbnet train | eval | importance | benchmark``.

Run settings come from built-in defaults, then an optional flat JSON file
(``--config``), then command-line flags.  Exit codes: 0 success, 1 validation
or benchmark failure, 2 I/O or schema error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import artifact, data, gbdt, metrics, network, numeric, optim
from .errors import DataError, DivergenceError, XBNetError

log = logging.getLogger("xbnet")

FIXED_TIMESTAMP = "1970-01-01T00:00:00+00:00"

RUN_DEFAULTS = {
    "dataset": None,
    "schema": None,
    "model": "xbnet",
    "hidden": [16],
    "layers": None,
    "hidden_activation": "relu",
    "boosted_layers": 1,
    "learning_rate": 0.01,
    "epochs": 100,
    "batch_size": 32,
    "l2_lambda": 0.0,
    "epsilon": 0.001,
    "base_optimizer": "adam",
    "beta1": 0.9,
    "beta2": 0.999,
    "adam_eps": 1e-8,
    "tree_refit_interval": 1,
    "phi_mode": "literal",
    "seed": 42,
    "train_fraction": 0.8,
    "n_estimators": 100,
    "max_depth": 6,
    "tree_learning_rate": 0.3,
    "reg_lambda": 1.0,
    "gamma": 0.0,
    "importance_mode": "gain",
    "out_dir": "xbnet-out",
    "plots": True,
    "inference_only": False,
    "fixed_clock": False,
}


class Clock:
    """Wall-clock access; in fixed mode every timestamp and duration is constant."""

    def __init__(self, fixed: bool):
        self.fixed = fixed

    def now(self) -> str:
        if self.fixed:
            return FIXED_TIMESTAMP
        return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")

    def timer(self):
        start = time.perf_counter()
        return lambda: 0.0 if self.fixed else round(time.perf_counter() - start, 3)


# ---------------------------------------------------------------- run settings

def load_flat_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise DataError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise DataError(f"config file {path} must hold a JSON object")
    return raw


def merge_run(*layers: dict) -> dict:
    """Later mappings override earlier ones; ``None`` values never override."""
    run = dict(RUN_DEFAULTS)
    for layer in layers:
        unknown = set(layer) - set(RUN_DEFAULTS)
        if unknown:
            raise DataError(f"unknown run settings: {sorted(unknown)}")
        run.update({k: v for k, v in layer.items() if v is not None})
    return run


def schema_path(run: dict) -> Path:
    if run["schema"]:
        return Path(run["schema"])
    return Path(run["dataset"]).with_suffix(".schema.json")


def layer_sizes(run: dict, n_classes: int) -> list:
    if run["layers"]:
        return [int(s) for s in run["layers"]]
    return [int(s) for s in run["hidden"]] + [1 if n_classes == 2 else n_classes]


def gbt_config(run: dict) -> gbdt.GbtConfig:
    return gbdt.GbtConfig(
        n_estimators=run["n_estimators"], max_depth=run["max_depth"],
        learning_rate=run["tree_learning_rate"], reg_lambda=run["reg_lambda"],
        gamma=run["gamma"], importance_mode=run["importance_mode"],
    )


def train_config(run: dict, n_train: int) -> optim.TrainConfig:
    bs = run["batch_size"]
    return optim.TrainConfig(
        learning_rate=run["learning_rate"], epochs=run["epochs"],
        batch_size=n_train if bs == "full" else int(bs),
        l2_lambda=run["l2_lambda"], epsilon=run["epsilon"], boosted_layers=run["boosted_layers"],
        base_optimizer=run["base_optimizer"], beta1=run["beta1"], beta2=run["beta2"],
        adam_eps=run["adam_eps"], tree=gbt_config(run),
        tree_refit_interval=run["tree_refit_interval"], phi_mode=run["phi_mode"], seed=run["seed"],
    )


def config_snapshot(run: dict) -> dict:
    return {k: run[k] for k in sorted(run) if k not in ("out_dir", "plots", "fixed_clock")}


# ---------------------------------------------------------------- model runs

def fit_xbnet(split: data.SplitPair, run: dict, on_importance=None, on_epoch=None):
    """Build and train a network on ``split``; returns ``(model, trace, importances)``.

    ``importances`` holds the input-feature vector and the last stored vector of
    every boosted layer.
    """
    K = split.train.n_classes
    cfg = train_config(run, split.train.n_samples)
    model = network.build_model(
        split.train.n_features, layer_sizes(run, K), K, numeric.make_rng([run["seed"], 1]),
        run["hidden_activation"], split.train.feature_names, split.train.class_names,
    )
    seen = {}

    def record(i, vec):
        seen[i] = np.asarray(vec, dtype=np.float64)
        if on_importance is not None:
            on_importance(i, vec)

    trace = optim.train(model, split.train, split.test, cfg, on_epoch=on_epoch, on_importance=record)
    importances = {
        "input": seen[-1].tolist() if -1 in seen else None,
        "layers": {str(i): v.tolist() for i, v in sorted(seen.items()) if i >= 0},
    }
    return model, trace, importances


def fit_gbt(split: data.SplitPair, run: dict) -> gbdt.GbtModel:
    return gbdt.fit(split.train.X.T, split.train.y, gbt_config(run), n_classes=split.train.n_classes)


def probabilities(kind: str, model, X) -> np.ndarray:
    """Class probabilities (samples x classes) for a features x samples matrix."""
    if kind == "xbnet":
        return network.predict_proba(model, X)
    return gbdt.predict_proba(model, np.asarray(X).T)


def labels_from_proba(proba: np.ndarray) -> np.ndarray:
    if proba.shape[1] == 2:
        return (proba[:, 1] > 0.5).astype(np.int64)
    return np.argmax(proba, axis=1)


def split_report(kind: str, model, ds: data.Dataset) -> tuple[dict, dict, dict]:
    """Metrics for one labelled set, plus its ROC and PR curves keyed by class."""
    proba = probabilities(kind, model, ds.X)
    pred = labels_from_proba(proba)
    K = ds.n_classes
    rep = metrics.classification_report(ds.y, pred, K, ds.class_names)
    out = {
        "n_samples": ds.n_samples,
        "accuracy": rep["accuracy"],
        "log_loss": metrics.log_loss(ds.y, proba, K),
        "report": rep,
    }
    rocs, prs, aucs = {}, {}, {}
    positive = [1] if K == 2 else range(K)
    for k in positive:
        yk = (ds.y == k).astype(np.int64)
        name = ds.class_names[k]
        if 0 < yk.sum() < yk.size:
            rocs[name], aucs[name] = metrics.roc_auc(yk, proba[:, k])
        if yk.sum() > 0:
            prs[name] = metrics.pr_curve(yk, proba[:, k])
    out["auc"] = aucs
    return out, rocs, prs


def write_trace(path, trace: optim.TrainTrace) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_loss", "train_acc", "val_acc"])
        for row in trace.rows():
            w.writerow([row[0], *(repr(float(v)) for v in row[1:])])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n")


def write_curve_files(out: Path, prefix: str, rocs: dict, aucs: dict, prs: dict, plots: bool) -> None:
    metrics.write_curves(out / f"{prefix}roc.csv", rocs)
    metrics.write_curves(out / f"{prefix}pr.csv", prs)
    if plots:
        from . import plotting

        if rocs:
            plotting.plot_roc(rocs, aucs, out / f"{prefix}roc.png")
        if prs:
            plotting.plot_pr(prs, out / f"{prefix}pr.png")


def preprocessing_block(split: data.SplitPair, schema: data.Schema) -> dict:
    stats = split.train.provenance.get("stats", {})
    return {
        "schema": {"label": schema.label, "classes": split.train.class_names,
                   "missing": list(schema.missing), "drop": list(schema.drop)},
        "stats": stats,
        "feature_names": split.train.feature_names,
        "split": {"seed": split.seed, "train_fraction": split.train_fraction},
    }


# ---------------------------------------------------------------- commands

def cmd_train(run: dict) -> int:
    if not run["dataset"]:
        raise DataError("no dataset given (use --dataset or a config file)")
    clock = Clock(run["fixed_clock"])
    out = Path(run["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    schema = data.Schema.load(schema_path(run))
    split = data.prepare(run["dataset"], schema, run["train_fraction"], run["seed"])
    elapsed = clock.timer()
    kind = run["model"]
    trace = None
    importances = None
    if kind == "xbnet":
        model, trace, importances = fit_xbnet(
            split, run, on_epoch=lambda r: log.info("epoch %d train_loss %.4f val_loss %.4f "
                                                    "train_acc %.4f val_acc %.4f", *r))
    elif kind == "gbt":
        model = fit_gbt(split, run)
    else:
        raise DataError(f"unknown model kind {kind!r}")
    seconds = elapsed()

    train_rep, _, _ = split_report(kind, model, split.train)
    test_rep, rocs, prs = split_report(kind, model, split.test)
    trained = kind == "gbt" or run["epochs"] > 0
    report = {
        "kind": kind,
        "dataset": str(run["dataset"]),
        "generated_at": clock.now(),
        "trained": trained,
        "train": train_rep,
        "test": test_rep,
        "train_seconds": seconds,
    }
    if trace is not None:
        report["epochs"] = len(trace)
        if len(trace):
            report["final_loss"] = {"train": trace.train_loss[-1], "val": trace.val_loss[-1]}
    summary = {"train_accuracy": train_rep["accuracy"], "test_accuracy": test_rep["accuracy"],
               "test_log_loss": test_rep["log_loss"]}
    train_time = None
    if importances is not None and not run["inference_only"]:
        train_time = {"importance": importances}
    if kind == "xbnet":
        model = network.strip_training_state(model)
    art = artifact.ModelArtifact(kind, model, preprocessing_block(split, schema),
                                 config_snapshot(run), summary, train_time)
    artifact.save(art, out / "model.json")
    write_json(out / "report.json", report)
    data.export_rows(run["dataset"], out / "test_split.csv", split.test_index)
    if trace is not None:
        write_trace(out / "trace.csv", trace)
    write_curve_files(out, "", rocs, test_rep["auc"], prs, run["plots"])
    if trace is not None and run["plots"] and len(trace):
        from . import plotting

        plotting.plot_trace(trace, out)
    print(metrics.format_report(test_rep["report"]))
    if not trained:
        print("note: epochs=0, model is untrained")
    print(f"wrote {out}")
    return 0


def cmd_eval(model_path, dataset_path, out_dir, fixed_clock: bool) -> int:
    art = artifact.load(model_path)
    pre = art.preprocessing
    sch = pre["schema"]
    schema = data.Schema(label=sch["label"], classes=sch["classes"], missing=sch["missing"],
                         drop=sch.get("drop", []))
    ds = data.apply_stats(dataset_path, schema, pre["stats"], pre["feature_names"])
    rep, rocs, prs = split_report(art.kind, art.model, ds)
    report = {"kind": art.kind, "dataset": str(dataset_path), "model": str(model_path),
              "generated_at": Clock(fixed_clock).now(), "eval": rep}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "eval_report.json", report)
        metrics.write_curves(out / "eval_roc.csv", rocs)
        metrics.write_curves(out / "eval_pr.csv", prs)
    print(metrics.format_report(rep["report"]))
    return 0


def importance_tables(art: artifact.ModelArtifact) -> tuple[list, list] | None:
    """Rows ``(feature, importance)`` and ``(layer, unit, importance)``; None if not stored."""
    if art.kind == "gbt":
        f = gbdt.feature_importance(art.model)
        return list(zip(art.preprocessing.get("feature_names", []), f.tolist())), []
    if art.train_time is None or "importance" not in art.train_time:
        return None
    imp = art.train_time["importance"]
    names = art.model.feature_names
    feature_rows = [] if imp["input"] is None else list(zip(names, imp["input"]))
    layer_rows = [(int(layer), unit, v) for layer, vec in sorted(imp["layers"].items(), key=lambda x: int(x[0]))
                  for unit, v in enumerate(vec)]
    return feature_rows, layer_rows


def cmd_importance(art: artifact.ModelArtifact, out_dir) -> int:
    tables = importance_tables(art)
    if tables is None:
        print("notice: train-time data absent (inference-only artifact); no importances stored")
        return 0
    feature_rows, layer_rows = tables
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "importance_features.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "importance"])
        w.writerows([n, repr(float(v))] for n, v in feature_rows)
    with (out / "importance_layers.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["layer", "unit", "importance"])
        w.writerows([l, u, repr(float(v))] for l, u, v in layer_rows)
    for name, v in sorted(feature_rows, key=lambda r: -r[1])[:10]:
        print(f"{name:>30} {v:.4f}")
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------- benchmark

def _check(value, bounds: dict, key: str):
    """``(bound, status)`` for one metric against ``min``/``max`` bounds."""
    lo = bounds.get("min", {}).get(key)
    hi = bounds.get("max", {}).get(key)
    if lo is None and hi is None:
        return None, "recorded"
    ok = (lo is None or value >= lo) and (hi is None or value <= hi)
    return (lo if lo is not None else hi), ("pass" if ok else "fail")


class ImportanceAudit:
    """Running check that importance vectors are non-negative and sum to one."""

    def __init__(self):
        self.count = 0
        self.max_sum_error = 0.0
        self.min_entry = float("inf")

    def __call__(self, _layer, vec):
        v = np.asarray(vec, dtype=np.float64)
        self.count += 1
        self.max_sum_error = max(self.max_sum_error, abs(float(v.sum()) - 1.0))
        self.min_entry = min(self.min_entry, float(v.min()))

    def summary(self) -> dict:
        return {"vectors": self.count, "max_sum_error": self.max_sum_error,
                "min_entry": self.min_entry if self.count else None}


def run_benchmark(suite: dict, base_dir: Path, out: Path, base_run: dict) -> tuple[dict, list]:
    """Run every dataset row and loss configuration in ``suite``; returns ``(report, csv rows)``."""
    clock = Clock(base_run["fixed_clock"])
    data_dir = (base_dir / suite.get("data_dir", ".")).resolve()
    defaults = merge_run(base_run, suite.get("defaults", {}))
    audit = ImportanceAudit()
    rows = []
    datasets = {}
    curves = out / "curves"

    for entry in sorted(suite.get("datasets", []), key=lambda e: e["name"]):
        name = entry["name"]
        if entry.get("unsupported"):
            datasets[name] = {"status": "unsupported", "reason": entry.get("reason", "")}
            rows.append(["dataset", name, "", "", "", "unsupported"])
            continue
        path = data_dir / entry.get("file", f"{name}.csv")
        if not path.exists():
            log.warning("dataset %s missing at %s; row skipped", name, path)
            datasets[name] = {"status": "absent", "path": str(path)}
            rows.append(["dataset", name, "", "", "", "absent"])
            continue
        run = merge_run(defaults, entry.get("run", {}), {"dataset": str(path)})
        schema = data.Schema.load(data_dir / entry.get("schema", f"{name}.schema.json"))
        split = data.prepare(path, schema, run["train_fraction"], run["seed"])
        curves.mkdir(parents=True, exist_ok=True)

        timer = clock.timer()
        model, trace, _ = fit_xbnet(split, run, on_importance=audit)
        xb_seconds = timer()
        timer = clock.timer()
        tree_model = fit_gbt(split, run)
        gbt_seconds = timer()

        xb_train, _, _ = split_report("xbnet", model, split.train)
        xb_test, rocs, prs = split_report("xbnet", model, split.test)
        gb_train, _, _ = split_report("gbt", tree_model, split.train)
        gb_test, _, _ = split_report("gbt", tree_model, split.test)
        values = {
            "xbnet_train_accuracy": xb_train["accuracy"],
            "xbnet_test_accuracy": xb_test["accuracy"],
            "xbnet_test_log_loss": xb_test["log_loss"],
            "xbnet_test_weighted_f1": xb_test["report"]["weighted"]["f1"],
            "gbt_train_accuracy": gb_train["accuracy"],
            "gbt_test_accuracy": gb_test["accuracy"],
            "gbt_test_log_loss": gb_test["log_loss"],
        }
        if split.train.n_classes == 2:
            values["xbnet_test_auc"] = next(iter(xb_test["auc"].values()))
        checks = {}
        for key, value in values.items():
            bound, status = _check(value, entry.get("bounds", {}), key)
            checks[key] = status
            rows.append(["dataset", name, key, value, bound, status])
        write_trace(curves / f"{name}_trace.csv", trace)
        write_curve_files(curves, f"{name}_", rocs, xb_test["auc"], prs, defaults["plots"])
        if defaults["plots"]:
            from . import plotting

            plotting.plot_trace(trace, curves, prefix=f"{name}_")
        datasets[name] = {
            "status": "fail" if "fail" in checks.values() else "pass",
            "metrics": values,
            "checks": checks,
            "xbnet_report": xb_test["report"],
            "seconds": {"xbnet": xb_seconds, "gbt": gbt_seconds},
        }

    loss_configs = {}
    for entry in suite.get("loss_configs", []):
        name = entry["name"]
        ds_name = entry["dataset"]
        path = data_dir / entry.get("file", f"{ds_name}.csv")
        if not path.exists():
            log.warning("dataset %s missing at %s; loss config %s skipped", ds_name, path, name)
            loss_configs[name] = {"status": "absent"}
            rows.append(["loss_config", name, "", "", "", "absent"])
            continue
        run = merge_run(defaults, entry.get("run", {}), {"dataset": str(path)})
        schema = data.Schema.load(data_dir / entry.get("schema", f"{ds_name}.schema.json"))
        split = data.prepare(path, schema, run["train_fraction"], run["seed"])
        try:
            _, trace, _ = fit_xbnet(split, run, on_importance=audit)
            values = {"train_loss": trace.train_loss[-1], "val_loss": trace.val_loss[-1]}
        except DivergenceError as exc:
            # a diverging configuration is a result to record, not a crash
            loss_configs[name] = {"status": "diverged", "error": str(exc)}
            rows.append(["loss_config", name, "val_loss", "", "", "diverged"])
            continue
        checks = {}
        for key, value in values.items():
            bound, status = _check(value, entry.get("bounds", {}), key)
            checks[key] = status
            rows.append(["loss_config", name, key, value, bound, status])
        loss_configs[name] = {
            "status": "fail" if "fail" in checks.values() else "pass",
            "layers": layer_sizes(run, split.train.n_classes),
            "boosted_layers": run["boosted_layers"],
            "batch_size": run["batch_size"],
            "metrics": values,
            "checks": checks,
        }

    report = {
        "generated_at": clock.now(),
        "seed": defaults["seed"],
        "datasets": datasets,
        "loss_configs": loss_configs,
        "importance_audit": audit.summary(),
    }
    return report, rows


def comparison_table(report: dict) -> str:
    lines = [f"{'dataset':>16} {'XBNet train':>12} {'XBNet test':>11} {'GBT train':>10} {'GBT test':>9}  status"]
    for name, d in report["datasets"].items():
        m = d.get("metrics")
        if m is None:
            lines.append(f"{name:>16} {'':>12} {'':>11} {'':>10} {'':>9}  {d['status']}")
            continue
        lines.append(f"{name:>16} {m['xbnet_train_accuracy']:12.4f} {m['xbnet_test_accuracy']:11.4f} "
                     f"{m['gbt_train_accuracy']:10.4f} {m['gbt_test_accuracy']:9.4f}  {d['status']}")
    for name, d in report["loss_configs"].items():
        m = d.get("metrics")
        detail = "" if m is None else f"train_loss {m['train_loss']:.4f} val_loss {m['val_loss']:.4f}"
        lines.append(f"{name:>16} {detail}  {d['status']}")
    return "\n".join(lines)


def cmd_benchmark(suite_path, base_run: dict, data_dir=None) -> int:
    suite = load_flat_config(suite_path)
    if data_dir is not None:
        suite["data_dir"] = str(Path(data_dir).resolve())
    out = Path(base_run["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    report, rows = run_benchmark(suite, Path(suite_path).resolve().parent, out, base_run)
    write_json(out / "report.json", report)
    with (out / "benchmark.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["section", "name", "metric", "value", "bound", "status"])
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    print(comparison_table(report))
    failed = [r for r in rows if r[-1] in ("fail",)]
    return 1 if failed else 0


# ---------------------------------------------------------------- argument parsing

def _int_list(text: str) -> list:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _batch(text: str):
    return "full" if text == "full" else int(text)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON file of run settings")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--fixed-clock", dest="fixed_clock", action="store_true", default=None,
                   help="constant timestamps and zero durations, for reproducible reports")
    p.add_argument("--no-plots", dest="plots", action="store_false", default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset")
    p.add_argument("--schema")
    p.add_argument("--model", choices=("xbnet", "gbt"))
    p.add_argument("--hidden", type=_int_list, help="hidden widths, e.g. 16 or 32,16")
    p.add_argument("--layers", type=_int_list, help="all widths including the output, e.g. 16,1")
    p.add_argument("--hidden-activation", dest="hidden_activation", choices=("relu", "sigmoid", "identity"))
    p.add_argument("--boosted-layers", dest="boosted_layers", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=_batch, help="integer or 'full'")
    p.add_argument("--l2-lambda", dest="l2_lambda", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--optimizer", dest="base_optimizer", choices=("adam", "sgd"))
    p.add_argument("--tree-refit-interval", dest="tree_refit_interval", type=int)
    p.add_argument("--phi-mode", dest="phi_mode", choices=("literal", "floor_exponent"))
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--n-estimators", dest="n_estimators", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--inference-only", dest="inference_only", action="store_true", default=None,
                   help="omit train-time importances from model.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xbnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model and write model, report, trace and curves")
    _common(p)
    _run_flags(p)

    p = sub.add_parser("eval", help="evaluate a saved model on a CSV file")
    p.add_argument("model_path")
    p.add_argument("dataset_path")
    _common(p)

    p = sub.add_parser("importance", help="write input and per-layer importance tables")
    p.add_argument("model_path", nargs="?", help="saved model; omit to train from the run settings")
    _common(p)
    _run_flags(p)

    p = sub.add_parser("benchmark", help="run a benchmark suite")
    p.add_argument("suite", help="suite JSON file")
    p.add_argument("--data-dir", dest="data_dir", help="override the suite's data directory")
    _common(p)
    return parser


RUN_FLAG_KEYS = set(RUN_DEFAULTS)


def run_from_args(args: argparse.Namespace) -> dict:
    file_layer = load_flat_config(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k in RUN_FLAG_KEYS}
    return merge_run(file_layer, flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        run = run_from_args(args)
        if args.command == "train":
            return cmd_train(run)
        if args.command == "eval":
            return cmd_eval(args.model_path, args.dataset_path,
                            args.out_dir, bool(run["fixed_clock"]))
        if args.command == "importance":
            if args.model_path:
                art = artifact.load(args.model_path)
            else:
                train_run = {**run, "plots": False}
                cmd_train(train_run)
                art = artifact.load(Path(run["out_dir"]) / "model.json")
            return cmd_importance(art, run["out_dir"])
        if args.command == "benchmark":
            return cmd_benchmark(args.suite, run, args.data_dir)
    except XBNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
