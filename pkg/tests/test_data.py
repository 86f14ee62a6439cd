import json
from collections import Counter

import numpy as np
import pytest

from xbnet import data
from xbnet.errors import DataError, SchemaMismatchError, ValidationError

DATA = __import__("pathlib").Path(__file__).resolve().parents[1] / "data"


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_small_csv(tmp_path):
    ds = data.load_csv(write(tmp_path, "a,b,label\n1,2,yes\n3,4,no\n5,6,yes\n"), data.Schema("label"))
    assert ds.n_features == 2 and ds.n_samples == 3
    assert ds.class_names == ["yes", "no"]
    assert ds.y.tolist() == [0, 1, 0]
    assert ds.X.tolist() == [[1, 3, 5], [2, 4, 6]]


def test_load_errors(tmp_path):
    with pytest.raises(DataError, match="line 3"):
        data.load_csv(write(tmp_path, "a,b,label\n1,2,x\n1,2\n"), data.Schema("label"))
    with pytest.raises(DataError, match="not found"):
        data.load_csv(tmp_path / "nope.csv", data.Schema("label"))
    with pytest.raises(DataError, match="label"):
        data.load_csv(write(tmp_path, "a,b\n1,2\n"), data.Schema("label"))
    with pytest.raises(DataError, match="not numeric"):
        data.load_csv(write(tmp_path, "a,label\nx,0\n"), data.Schema("label", kinds={"a": "numeric"}))


def test_iris_dimensions():
    ds = data.load_csv(DATA / "iris.csv", data.Schema.load(DATA / "iris.schema.json"))
    assert (ds.n_samples, ds.n_features, ds.n_classes) == (150, 4, 3)


def test_missing_markers_and_kind_inference(tmp_path):
    ds = data.load_csv(write(tmp_path, "a,c,label\n1,red,0\nNA,?,1\n3,blue,0\n"), data.Schema("label"))
    assert ds.column_kinds == {"a": "numeric", "c": "categorical"}
    assert np.isnan(ds.X[0, 1]) and np.isnan(ds.X[1, 1])
    assert ds.categories["c"] == ["red", "blue"]


def test_impute(tmp_path):
    ds = data.load_csv(write(tmp_path, "a,c,label\n1,red,0\n,,1\n3,blue,0\n5,red,1\n"), data.Schema("label"))
    out = data.impute(ds)
    assert out.X[0].tolist() == [1.0, 3.0, 3.0, 5.0]
    assert out.X[1, 1] == 0.0  # mode "red"
    assert out.provenance["stats"]["impute"] == {"a": 3.0, "c": "red"}
    clean = data.load_csv(write(tmp_path, "a,label\n1,0\n2,1\n", "e.csv"), data.Schema("label"))
    assert np.array_equal(data.impute(clean).X, clean.X)
    with pytest.raises(DataError):
        data.impute(data.load_csv(write(tmp_path, "a,b,label\n,1,0\n,2,1\n", "f.csv"),
                                  data.Schema("label", kinds={"a": "numeric"})))


def test_impute_median_example(tmp_path):
    ds = data.load_csv(write(tmp_path, "a,label\n1,0\nNA,1\n3,0\n"), data.Schema("label"))
    assert data.impute(ds).X[0].tolist() == [1.0, 2.0, 3.0]


def test_encode(tmp_path):
    ds = data.load_csv(write(tmp_path, "c,n,label\nred,1,0\nblue,2,1\nred,3,0\n"), data.Schema("label"))
    out = data.encode(data.impute(ds))
    assert out.feature_names == ["c=red", "c=blue", "n"]
    assert out.X.tolist() == [[1, 0, 1], [0, 1, 0], [1, 2, 3]]
    numeric_only = data.load_csv(write(tmp_path, "n,label\n1,0\n2,1\n", "n.csv"), data.Schema("label"))
    assert data.encode(numeric_only) is numeric_only
    many = "".join(f"v{i},{i % 2}\n" for i in range(20))
    wide = data.encode(data.load_csv(write(tmp_path, "c,label\n" + many, "w.csv"), data.Schema("label")))
    assert wide.feature_names == ["c"] and wide.X[0].tolist() == list(range(20))


def two_sets(train_rows, test_rows):
    def make(rows):
        X = np.array(rows, dtype=float).T
        return data.Dataset(X, np.zeros(X.shape[1], dtype=np.int64), ["a", "b"][:X.shape[0]], ["0"],
                            {"a": "numeric", "b": "numeric"})
    return make(train_rows), make(test_rows)


def test_standardize_uses_train_statistics():
    train, test = two_sets([[0, 5], [2, 5]], [[4, 7]])
    tr, te = data.standardize(train, test)
    assert tr.X[0].tolist() == [-1.0, 1.0]
    assert te.X[0].tolist() == [3.0]
    assert tr.X[1].tolist() == [0.0, 0.0] and te.X[1].tolist() == [2.0]  # constant column: centered only


def test_stratified_split():
    y = np.repeat([0, 1], 50)
    ds = data.Dataset(np.arange(100.0)[None, :], y, ["a"], ["0", "1"], {"a": "numeric"})
    sp = data.stratified_split(ds, 0.8, seed=3)
    assert sp.train.n_samples == 80 and sp.test.n_samples == 20
    assert Counter(sp.train.y.tolist()) == {0: 40, 1: 40}
    assert set(sp.train_index).isdisjoint(sp.test_index)
    assert sorted(np.r_[sp.train_index, sp.test_index].tolist()) == list(range(100))
    again = data.stratified_split(ds, 0.8, seed=3)
    assert np.array_equal(again.train_index, sp.train_index)
    lonely = data.Dataset(np.zeros((1, 3)), np.array([0, 0, 1]), ["a"], ["0", "1"], {"a": "numeric"})
    with pytest.raises(ValidationError):
        data.stratified_split(lonely)


def test_split_keeps_class_proportions_on_real_data():
    ds = data.encode(data.impute(data.load_csv(DATA / "wine.csv", data.Schema.load(DATA / "wine.schema.json"))))
    sp = data.stratified_split(ds, 0.8, 42)
    for c in range(ds.n_classes):
        n_c = int((ds.y == c).sum())
        assert abs(int((sp.train.y == c).sum()) - 0.8 * n_c) <= 1


def test_batches():
    ds = data.Dataset(np.arange(10.0)[None, :], np.zeros(10, dtype=np.int64), ["a"], ["0"], {"a": "numeric"})
    sizes = [b[1].size for b in data.batches(ds, 4, 0, 1)]
    assert sizes == [4, 4, 2]
    assert [b[1].size for b in data.batches(ds, 50, 0, 1)] == [10]
    e1 = np.concatenate([b[0][0] for b in data.batches(ds, 4, 0, 1)])
    e2 = np.concatenate([b[0][0] for b in data.batches(ds, 4, 0, 2)])
    assert sorted(e1.tolist()) == list(range(10)) and not np.array_equal(e1, e2)


def test_preprocessing_is_idempotent():
    sch = data.Schema.load(DATA / "titanic.schema.json")
    once = data.encode(data.impute(data.load_csv(DATA / "titanic.csv", sch)))
    twice = data.encode(data.impute(once))
    np.testing.assert_array_equal(once.X, twice.X)
    sp = data.stratified_split(once)
    a, b = data.standardize(sp.train, sp.test)
    a2, b2 = data.standardize(a, b)
    np.testing.assert_allclose(a2.X, a.X, atol=1e-9)
    np.testing.assert_allclose(b2.X, b.X, atol=1e-9)
    assert np.all(np.isfinite(a.X))


def test_apply_stats_reproduces_test_split(tmp_path):
    sch = data.Schema.load(DATA / "titanic.schema.json")
    sp = data.prepare(DATA / "titanic.csv", sch)
    dst = tmp_path / "test.csv"
    data.export_rows(DATA / "titanic.csv", dst, sp.test_index)
    replay = data.apply_stats(dst, data.Schema(sch.label, classes=sp.train.class_names),
                              sp.train.provenance["stats"], sp.train.feature_names)
    np.testing.assert_array_equal(replay.X, sp.test.X)
    np.testing.assert_array_equal(replay.y, sp.test.y)


def test_apply_stats_reports_renamed_columns(tmp_path):
    sch = data.Schema.load(DATA / "iris.schema.json")
    sp = data.prepare(DATA / "iris.csv", sch)
    text = (DATA / "iris.csv").read_text().splitlines()
    header = text[0].split(",")
    header[0] = "renamed"
    write(tmp_path, "\n".join([",".join(header)] + text[1:]) + "\n", "r.csv")
    with pytest.raises(SchemaMismatchError, match="renamed"):
        data.apply_stats(tmp_path / "r.csv", sch, sp.train.provenance["stats"], sp.train.feature_names)


def test_schema_file_errors(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"lable": "x"}))
    with pytest.raises(DataError):
        data.Schema.load(tmp_path / "s.json")
