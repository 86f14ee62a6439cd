#!/usr/bin/env python3
"""Materialize the benchmark datasets as local CSV files plus schema files.

Canonical public sources:

  iris            UCI Iris (Fisher, 1936)                      scikit-learn bundle
  breast_cancer   UCI Breast Cancer Wisconsin (Diagnostic)      scikit-learn bundle
  wine            UCI Wine                                      scikit-learn bundle
  digits          UCI Optical Recognition of Handwritten Digits (8x8), scikit-learn bundle
  diabetes        Pima Indians Diabetes (UCI / OpenML 37)       copy shipped in the
                                                                `imbalanced-databases` wheel
  titanic         Titanic passengers (OpenML 40945, 1309 rows)  copy shipped in the `dabl` wheel
  german_credit   UCI Statlog German Credit (categorical form)  copy shipped in the
                                                                `imbalanced-databases` wheel

The scikit-learn sets need scikit-learn installed; the other three are read out of
wheels fetched with `pip download`, so only the package index has to be reachable.

Usage:
    python scripts/fetch_datasets.py [--out data]
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

MISSING = ["", "NA", "?"]

GERMAN_COLUMNS = [
    "checking_status", "duration", "credit_history", "purpose", "credit_amount",
    "savings", "employment", "installment_rate", "personal_status", "other_parties",
    "residence_since", "property", "age", "other_installment_plans", "housing",
    "existing_credits", "job", "num_dependents", "telephone", "foreign_worker",
]
PIMA_COLUMNS = [
    "pregnancies", "glucose", "blood_pressure", "skin_thickness", "insulin",
    "bmi", "pedigree", "age",
]
TITANIC_KEEP = ["pclass", "sex", "age", "sibsp", "parch", "fare", "embarked"]


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_schema(path: Path, label: str, classes: list[str] | None = None,
                 kinds: dict[str, str] | None = None) -> None:
    schema = {"label": label, "missing": MISSING}
    if classes:
        schema["classes"] = classes
    if kinds:
        schema["kinds"] = kinds
    path.write_text(json.dumps(schema, indent=2) + "\n")


def fmt(v: float) -> str:
    return repr(float(v))


def sklearn_sets(out: Path) -> None:
    from sklearn import datasets

    for name, loader in [
        ("iris", datasets.load_iris),
        ("breast_cancer", datasets.load_breast_cancer),
        ("wine", datasets.load_wine),
        ("digits", datasets.load_digits),
    ]:
        bunch = loader()
        if name == "digits":
            features = [f"pixel_{i}" for i in range(bunch.data.shape[1])]
            names = [str(c) for c in bunch.target_names]
        else:
            features = [f.replace(" ", "_") for f in bunch.feature_names]
            names = [str(c) for c in bunch.target_names]
        rows = [[fmt(v) for v in x] + [names[t]] for x, t in zip(bunch.data, bunch.target)]
        write_csv(out / f"{name}.csv", features + ["label"], rows)
        write_schema(out / f"{name}.schema.json", "label", classes=names)
        print(f"{name}: {len(rows)} rows")


def wheel(package: str, tmp: Path) -> zipfile.ZipFile:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", package, "--no-deps", "-q", "-d", str(tmp)],
        check=True,
    )
    found = sorted(tmp.glob(package.replace("-", "_") + "-*.whl"))
    if not found:
        raise SystemExit(f"no wheel downloaded for {package}")
    return zipfile.ZipFile(found[-1])


def imbalanced_sets(out: Path, tmp: Path) -> None:
    zf = wheel("imbalanced-databases", tmp)

    text = zf.read("imbalanced_databases/data/pima/pima.dat").decode()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([v.strip() for v in line.split(",")])
    write_csv(out / "diabetes.csv", PIMA_COLUMNS + ["outcome"], rows)
    write_schema(out / "diabetes.schema.json", "outcome", classes=["negative", "positive"])
    print(f"diabetes: {len(rows)} rows")

    text = zf.read("imbalanced_databases/data/german/german.data.txt").decode()
    rows = []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        parts[-1] = {"1": "good", "2": "bad"}[parts[-1]]
        rows.append(parts)
    write_csv(out / "german_credit.csv", GERMAN_COLUMNS + ["risk"], rows)
    write_schema(out / "german_credit.schema.json", "risk", classes=["good", "bad"])
    print(f"german_credit: {len(rows)} rows")


def titanic(out: Path, tmp: Path) -> None:
    zf = wheel("dabl", tmp)
    reader = csv.DictReader(io.StringIO(zf.read("dabl/datasets/titanic.csv").decode()))
    rows = [[r[c] for c in TITANIC_KEEP] + [r["survived"]] for r in reader]
    write_csv(out / "titanic.csv", TITANIC_KEEP + ["survived"], rows)
    write_schema(out / "titanic.schema.json", "survived", classes=["0", "1"],
                 kinds={"pclass": "numeric"})
    print(f"titanic: {len(rows)} rows")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    sklearn_sets(args.out)
    with tempfile.TemporaryDirectory() as tmp:
        imbalanced_sets(args.out, Path(tmp))
        titanic(args.out, Path(tmp))


if __name__ == "__main__":
    main()
