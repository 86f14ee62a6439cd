"""Tabular data loading and preprocessing.

A :class:`Dataset` stores features as a features x samples matrix.  Categorical
columns hold integer codes into ``categories[name]`` until :func:`encode` expands
them.  Missing values are NaN until :func:`impute` fills them.  Every step
records the statistics it used in ``provenance["stats"]``, and
:func:`apply_stats` replays them on a freshly loaded file.
"""

from __future__ import annotations

import copy
import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import numeric
from .errors import DataError, SchemaMismatchError, ValidationError

ONE_HOT_MAX = 16
DEFAULT_MISSING = ("", "NA", "?")


@dataclass
class Schema:
    label: str
    classes: list | None = None
    kinds: dict = field(default_factory=dict)
    missing: list = field(default_factory=lambda: list(DEFAULT_MISSING))
    drop: list = field(default_factory=list)

    @classmethod
    def load(cls, path) -> "Schema":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise DataError(f"schema file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"schema file {path} is not valid JSON: {exc}") from None
        unknown = set(raw) - {"label", "classes", "kinds", "missing", "drop"}
        if "label" not in raw or unknown:
            raise DataError(f"schema {path} needs a 'label' key; unknown keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list
    class_names: list
    column_kinds: dict
    categories: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.X.shape[1]

    @property
    def n_features(self) -> int:
        return self.X.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return replace(self, X=self.X[:, idx], y=self.y[idx], provenance=copy.deepcopy(self.provenance))


@dataclass
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_fraction: float
    train_index: np.ndarray
    test_index: np.ndarray


def _log(ds: Dataset, step: str, stats=None) -> dict:
    prov = copy.deepcopy(ds.provenance)
    prov.setdefault("steps", []).append(step)
    if stats is not None:
        prov.setdefault("stats", {}).update(stats)
    return prov


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path, schema: Schema) -> Dataset:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"dataset file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path} line {reader.line_num}: expected {len(header)} fields, got {len(row)}"
                )
            rows.append([v.strip() for v in row])
    if schema.label not in header:
        raise DataError(f"{path}: label column {schema.label!r} not in header")
    if not rows:
        raise DataError(f"{path} has no data rows")
    missing = set(schema.missing)
    li = header.index(schema.label)

    labels = [r[li] for r in rows]
    if any(v in missing for v in labels):
        raise DataError(f"{path}: label column has missing values")
    if schema.classes is not None:
        class_names = [str(c) for c in schema.classes]
        unknown = sorted(set(labels) - set(class_names))
        if unknown:
            raise DataError(f"{path}: labels {unknown} not among declared classes {class_names}")
    else:
        class_names = list(dict.fromkeys(labels))
    lookup = {c: i for i, c in enumerate(class_names)}
    y = np.array([lookup[v] for v in labels], dtype=np.int64)

    names, cols, kinds, cats = [], [], {}, {}
    for ci, name in enumerate(header):
        if ci == li or name in schema.drop:
            continue
        values = [r[ci] for r in rows]
        present = [v for v in values if v not in missing]
        kind = schema.kinds.get(name)
        if kind is None:
            kind = "numeric" if present and all(_is_float(v) for v in present) else "categorical"
        if kind == "numeric":
            col = np.empty(len(values))
            for ri, v in enumerate(values):
                if v in missing:
                    col[ri] = np.nan
                    continue
                try:
                    col[ri] = float(v)
                except ValueError:
                    raise DataError(f"{path} line {ri + 2}: column {name!r} value {v!r} is not numeric") from None
                if not math.isfinite(col[ri]):
                    raise DataError(f"{path} line {ri + 2}: column {name!r} value {v!r} is not finite")
        elif kind == "categorical":
            levels = list(dict.fromkeys(present))
            code = {c: i for i, c in enumerate(levels)}
            col = np.array([np.nan if v in missing else code[v] for v in values], dtype=np.float64)
            cats[name] = levels
        else:
            raise DataError(f"unknown column kind {kind!r} for {name!r}")
        names.append(name)
        cols.append(col)
        kinds[name] = kind

    X = np.vstack(cols) if cols else np.zeros((0, len(rows)))
    prov = {"source": str(path), "steps": ["load"], "stats": {"raw_columns": names, "raw_kinds": kinds}}
    return Dataset(X, y, names, class_names, kinds, cats, prov)


def impute(ds: Dataset) -> Dataset:
    """Numeric gaps take the column median, categorical gaps the most frequent level."""
    X = ds.X.copy()
    fills = {}
    filled = []
    for i, name in enumerate(ds.feature_names):
        col = X[i]
        gaps = np.isnan(col)
        if gaps.all():
            raise DataError(f"column {name!r} has no values to impute from")
        if ds.column_kinds[name] == "numeric":
            value = float(np.median(col[~gaps]))
            fills[name] = value
        else:
            counts = np.bincount(col[~gaps].astype(np.int64), minlength=len(ds.categories[name]))
            value = float(np.argmax(counts))
            fills[name] = ds.categories[name][int(value)]
        if gaps.any():
            X[i, gaps] = value
            filled.append(name)
    step = f"impute({','.join(filled)})" if filled else "impute()"
    return replace(ds, X=X, provenance=_log(ds, step, {"impute": fills}))


def encode(ds: Dataset) -> Dataset:
    """One-hot categoricals with at most 16 levels, ordinal codes above that."""
    rows, names, kinds, enc = [], [], {}, {}
    for i, name in enumerate(ds.feature_names):
        if ds.column_kinds[name] != "categorical":
            rows.append(ds.X[i])
            names.append(name)
            kinds[name] = ds.column_kinds[name]
            continue
        levels = ds.categories[name]
        if len(levels) <= ONE_HOT_MAX:
            enc[name] = {"mode": "onehot", "categories": list(levels)}
            for code, level in enumerate(levels):
                col_name = f"{name}={level}"
                rows.append((ds.X[i] == code).astype(np.float64))
                names.append(col_name)
                kinds[col_name] = "numeric"
        else:
            enc[name] = {"mode": "ordinal", "categories": list(levels)}
            rows.append(ds.X[i].copy())
            names.append(name)
            kinds[name] = "numeric"
    if not enc:
        return ds
    X = np.vstack(rows) if rows else np.zeros((0, ds.n_samples))
    return replace(ds, X=X, feature_names=names, column_kinds=kinds, categories={},
                   provenance=_log(ds, "encode", {"encode": enc}))


def _scale(X, mean, std):
    return (X - mean[:, None]) / std[:, None]


def standardize(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    """Z-score every numeric column with statistics of the training set only."""
    if train.feature_names != test.feature_names:
        raise SchemaMismatchError("train and test columns differ")
    numeric_rows = np.array([train.column_kinds[n] == "numeric" for n in train.feature_names], dtype=bool)
    mean = np.where(numeric_rows, train.X.mean(axis=1), 0.0)
    std = train.X.std(axis=1)
    std = np.where(numeric_rows & (std >= 1e-12), std, 1.0)
    stats = {"standardize": {"mean": mean.tolist(), "std": std.tolist()}}
    return (
        replace(train, X=_scale(train.X, mean, std), provenance=_log(train, "standardize", stats)),
        replace(test, X=_scale(test.X, mean, std), provenance=_log(test, "standardize", stats)),
    )


def stratified_split(ds: Dataset, train_fraction: float = 0.8, seed: int = 42) -> SplitPair:
    """Per-class shuffled split; each class sends ceil(fraction * n_c) rows to train (at least one to test)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError("train_fraction must lie in (0, 1)")
    rng = numeric.make_rng(seed)
    tr, te = [], []
    for c in range(ds.n_classes):
        idx = np.flatnonzero(ds.y == c)
        if idx.size == 0:
            continue
        if idx.size < 2:
            raise ValidationError(f"class {ds.class_names[c]!r} has a single sample; cannot stratify")
        idx = rng.permutation(idx)
        n_tr = min(math.ceil(train_fraction * idx.size - 1e-9), idx.size - 1)
        tr.append(idx[:n_tr])
        te.append(idx[n_tr:])
    tr_idx = np.sort(np.concatenate(tr))
    te_idx = np.sort(np.concatenate(te))
    return SplitPair(ds.subset(tr_idx), ds.subset(te_idx), seed, train_fraction, tr_idx, te_idx)


def batches(ds: Dataset, batch_size: int, seed: int, epoch: int):
    """Yield ``(X_batch, y_batch)``; the order is reshuffled per (seed, epoch) and the last batch may be short."""
    if batch_size < 1:
        raise ValidationError("batch_size must be >= 1")
    order = numeric.make_rng((seed, epoch)).permutation(ds.n_samples)
    for start in range(0, ds.n_samples, batch_size):
        idx = order[start:start + batch_size]
        yield ds.X[:, idx], ds.y[idx]


def prepare(path, schema: Schema, train_fraction: float = 0.8, seed: int = 42) -> SplitPair:
    """load -> impute -> encode -> stratified split -> standardize."""
    ds = encode(impute(load_csv(path, schema)))
    split = stratified_split(ds, train_fraction, seed)
    split.train, split.test = standardize(split.train, split.test)
    return split


def apply_stats(path, schema: Schema, stats: dict, feature_names: list) -> Dataset:
    """Load a CSV and preprocess it with stored training statistics.

    The raw columns must match the ones seen at training time.  Categorical
    levels are matched by name; a level unseen in training encodes as all zeros
    (one-hot) or -1 (ordinal).
    """
    ds = load_csv(path, replace(schema, kinds={**schema.kinds, **stats.get("raw_kinds", {})}))
    expected = stats["raw_columns"]
    if ds.feature_names != expected:
        missing = [c for c in expected if c not in ds.feature_names]
        extra = [c for c in ds.feature_names if c not in expected]
        raise SchemaMismatchError(f"column mismatch: missing {missing}, extra {extra}")

    fills = stats.get("impute", {})
    enc = stats.get("encode", {})
    rows, names = [], []
    for i, name in enumerate(ds.feature_names):
        if ds.column_kinds[name] == "categorical":
            levels = ds.categories[name]
            raw = [fills.get(name) if np.isnan(v) else levels[int(v)] for v in ds.X[i]]
            spec = enc[name]
            if spec["mode"] == "onehot":
                for level in spec["categories"]:
                    rows.append(np.array([1.0 if v == level else 0.0 for v in raw]))
                    names.append(f"{name}={level}")
            else:
                code = {c: j for j, c in enumerate(spec["categories"])}
                rows.append(np.array([float(code.get(v, -1)) for v in raw]))
                names.append(name)
        else:
            col = ds.X[i].copy()
            gaps = np.isnan(col)
            if gaps.any():
                if name not in fills:
                    raise DataError(f"no stored fill value for column {name!r}")
                col[gaps] = fills[name]
            rows.append(col)
            names.append(name)
    if names != list(feature_names):
        raise SchemaMismatchError(f"encoded columns {names} differ from model features {list(feature_names)}")
    X = np.vstack(rows)
    st = stats.get("standardize")
    if st is not None:
        X = _scale(X, np.asarray(st["mean"]), np.asarray(st["std"]))
    kinds = {n: "numeric" for n in names}
    return Dataset(X, ds.y, names, ds.class_names, kinds, {}, {"source": str(path), "steps": ["apply_stats"]})



def export_rows(src, dst, index) -> None:
    """Copy the header and the data rows at ``index`` (0-based, blank lines skipped) to ``dst``."""
    with Path(src).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    with Path(dst).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows[int(i)] for i in index)
