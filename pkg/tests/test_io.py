"""Feature-file and score-CSV round trips, validation, and offline fusion."""

import numpy as np
import pytest

from texens.io import (
    FeatureFileError,
    FeatureTable,
    ScoreFileError,
    ScoreTable,
    fuse_score_tables,
    read_feature_file,
    read_score_csv,
    score_table_accuracy,
    write_feature_file,
    write_score_csv,
)


def _table(rng, n=5, d=4):
    vals = rng.normal(size=(n, d)) * 10.0
    return FeatureTable("LTP", "abc123def456",
                        tuple(f"s{i:02d}" for i in range(n)),
                        rng.integers(1, 4, size=n), vals)


def _scores(rng, n=6, k=3, folds=(0, 0, 0, 1, 1, 1)):
    labels = np.arange(n) % k + 1  # fixed, so member tables always agree
    return ScoreTable(tuple(f"img{i}" for i in range(n)), np.array(folds),
                      labels, ("a", "b", "c")[:k], rng.normal(size=(n, k)))


# ---------------------------------------------------------------- features

def test_feature_file_round_trip(tmp_path):
    t = _table(np.random.default_rng(0))
    p = tmp_path / "ltp.tsv"
    write_feature_file(p, t)
    back = read_feature_file(p)
    assert back.tag == t.tag and back.fingerprint == t.fingerprint
    assert back.sample_ids == t.sample_ids
    assert np.array_equal(back.labels, t.labels)
    np.testing.assert_allclose(back.values, t.values, rtol=1e-8)


def test_feature_file_bytes_stable(tmp_path):
    t = _table(np.random.default_rng(1))
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    write_feature_file(a, t)
    write_feature_file(b, t)
    assert a.read_bytes() == b.read_bytes()


def test_feature_file_fingerprint_check(tmp_path):
    p = tmp_path / "f.tsv"
    write_feature_file(p, _table(np.random.default_rng(2)))
    assert read_feature_file(p, expect_fingerprint="abc123def456").dim == 4
    with pytest.raises(FeatureFileError, match="fingerprint"):
        read_feature_file(p, expect_fingerprint="000000000000")


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("no header\n", "header"),
    ("# tag=X\tfingerprint=f\tdim=oops\ns\t1\t1\n", "dim"),
    ("# tag=X\tfingerprint=f\tdim=2\ns\t1\t1,2,3\n", "promised"),
    ("# tag=X\tfingerprint=f\tdim=1\ns\tone\t1\n", "label"),
    ("# tag=X\tfingerprint=f\tdim=1\ns\t1\tbad\n", "numeric"),
    ("# tag=X\tfingerprint=f\tdim=1\ntoo\tfew\n", "fields"),
    ("# tag=X\tfingerprint=f\tdim=1\n", "no sample rows"),
])
def test_feature_file_rejects_malformed(tmp_path, text, msg):
    p = tmp_path / "bad.tsv"
    p.write_text(text)
    with pytest.raises(FeatureFileError, match=msg):
        read_feature_file(p)


def test_feature_table_rejects_duplicates_and_separators(tmp_path):
    with pytest.raises(FeatureFileError, match="duplicate"):
        FeatureTable("T", "f", ("a", "a"), [1, 2], np.ones((2, 3)))
    t = FeatureTable("T", "f", ("a\tb",), [1], np.ones((1, 3)))
    with pytest.raises(FeatureFileError, match="separator"):
        write_feature_file(tmp_path / "x.tsv", t)


# ------------------------------------------------------------------ scores

def test_score_csv_round_trip(tmp_path):
    t = _scores(np.random.default_rng(3))
    p = tmp_path / "s.csv"
    write_score_csv(p, t)
    back = read_score_csv(p)
    canon = t.sorted_by_fold()
    assert back.sample_ids == canon.sample_ids
    assert back.class_names == canon.class_names
    assert np.array_equal(back.folds, canon.folds)
    assert np.array_equal(back.true_labels, canon.true_labels)
    np.testing.assert_allclose(back.scores, canon.scores, rtol=1e-8)


def test_score_csv_row_order_is_canonical(tmp_path):
    t = _scores(np.random.default_rng(4), folds=(1, 0, 1, 0, 1, 0))
    perm = [3, 0, 5, 1, 4, 2]
    shuffled = ScoreTable(tuple(t.sample_ids[i] for i in perm), t.folds[perm],
                          t.true_labels[perm], t.class_names, t.scores[perm])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_score_csv(a, t)
    write_score_csv(b, shuffled)
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "sample_id,fold,true_label,score:a,score:b,score:c"


def test_score_table_accuracy():
    t = ScoreTable(("x", "y"), [0, 0], [1, 2], ("p", "q"),
                   [[3.0, 1.0], [0.0, 2.0]])
    assert score_table_accuracy(t) == 1.0
    wrong = ScoreTable(("x", "y"), [0, 0], [2, 2], ("p", "q"),
                       [[3.0, 1.0], [0.0, 2.0]])
    assert score_table_accuracy(wrong) == 0.5


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("sample,fold,true_label,score:a\nx,0,1,1.0\n", "header"),
    ("sample_id,fold,true_label,other\nx,0,1,1.0\n", "score:"),
    ("sample_id,fold,true_label\nx,0,1\n", "no score columns"),
    ("sample_id,fold,true_label,score:a\nx,0,1\n", "fields"),
    ("sample_id,fold,true_label,score:a\nx,zero,1,1.0\n", "non-integer"),
    ("sample_id,fold,true_label,score:a\nx,0,1,huh\n", "non-numeric"),
    ("sample_id,fold,true_label,score:a\nx,0,1,nan\n", "finite"),
    ("sample_id,fold,true_label,score:a\nx,0,1,1.0\nx,0,1,2.0\n", "duplicate"),
    ("sample_id,fold,true_label,score:a\n", "no score rows"),
])
def test_score_csv_rejects_malformed(tmp_path, text, msg):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(ScoreFileError, match=msg):
        read_score_csv(p)


# ------------------------------------------------------------------ fusion

def test_fuse_single_table_keeps_argmax():
    t = _scores(np.random.default_rng(5))
    fused = fuse_score_tables([t])
    canon = t.sorted_by_fold()
    assert np.array_equal(np.argmax(fused.scores, axis=1),
                          np.argmax(canon.scores, axis=1))
    assert score_table_accuracy(fused) == score_table_accuracy(t)


def test_fuse_matches_hand_computation():
    # one fold, two samples, two classes; z over all four entries
    a = ScoreTable(("u", "v"), [0, 0], [1, 2], ("p", "q"),
                   [[2.0, 0.0], [0.0, 2.0]])
    b = ScoreTable(("u", "v"), [0, 0], [1, 2], ("p", "q"),
                   [[1.0, 3.0], [3.0, 1.0]])
    za = (np.array([[2.0, 0.0], [0.0, 2.0]]) - 1.0) / np.array([[2, 0], [0, 2.]]).std(ddof=1)
    zb = (np.array([[1.0, 3.0], [3.0, 1.0]]) - 2.0) / np.array([[1, 3], [3, 1.]]).std(ddof=1)
    fused = fuse_score_tables([a, b], names=["A", "B"])
    np.testing.assert_array_equal(fused.scores, za + zb)


def test_fuse_commutes_exactly():
    rng = np.random.default_rng(6)
    a, b, c = (_scores(rng) for _ in range(3))
    f1 = fuse_score_tables([a, b, c], names=["x", "y", "z"])
    f2 = fuse_score_tables([c, a, b], names=["z", "x", "y"])
    assert np.array_equal(f1.scores, f2.scores)
    assert f1.sample_ids == f2.sample_ids


def test_fuse_ignores_input_row_order():
    t = _scores(np.random.default_rng(7))
    perm = [5, 2, 0, 4, 1, 3]
    shuffled = ScoreTable(tuple(t.sample_ids[i] for i in perm), t.folds[perm],
                          t.true_labels[perm], t.class_names, t.scores[perm])
    other = _scores(np.random.default_rng(8))
    f1 = fuse_score_tables([t, other], names=["m", "n"])
    f2 = fuse_score_tables([shuffled, other], names=["m", "n"])
    assert np.array_equal(f1.scores, f2.scores)


def test_fuse_affine_rescale_keeps_predictions():
    rng = np.random.default_rng(9)
    a, b = _scores(rng), _scores(rng)
    scaled = ScoreTable(b.sample_ids, b.folds, b.true_labels, b.class_names,
                        3.7 * b.scores - 11.0)
    f1 = fuse_score_tables([a, b], names=["a", "b"])
    f2 = fuse_score_tables([a, scaled], names=["a", "b"])
    assert np.array_equal(np.argmax(f1.scores, axis=1),
                          np.argmax(f2.scores, axis=1))


def test_fuse_reports_first_mismatch():
    rng = np.random.default_rng(10)
    a = _scores(rng)
    missing = ScoreTable(a.sample_ids[:-1] + ("stranger",), a.folds,
                         a.true_labels, a.class_names, a.scores)
    with pytest.raises(ScoreFileError, match=r"img5.*missing in 'deep'"):
        fuse_score_tables([a, missing], names=["hand", "deep"])

    refolded = ScoreTable(a.sample_ids, np.array([0, 0, 1, 1, 1, 1]),
                          a.true_labels, a.class_names, a.scores)
    with pytest.raises(ScoreFileError, match=r"img2.*fold"):
        fuse_score_tables([a, refolded], names=["hand", "deep"])

    renamed = ScoreTable(a.sample_ids, a.folds, a.true_labels,
                         ("a", "b", "zed"), a.scores)
    with pytest.raises(ScoreFileError, match=r"column 3.*'c'.*'zed'"):
        fuse_score_tables([a, renamed], names=["hand", "deep"])

    relabeled = ScoreTable(a.sample_ids, a.folds,
                           np.where(np.arange(6) == 4, 3, a.true_labels),
                           a.class_names, a.scores)
    with pytest.raises(ScoreFileError, match=r"img4.*true label"):
        fuse_score_tables([a, relabeled], names=["hand", "deep"])


def test_fuse_rejects_duplicate_names_and_empty():
    t = _scores(np.random.default_rng(11))
    with pytest.raises(ScoreFileError, match="duplicate member name"):
        fuse_score_tables([t, t], names=["same", "same"])
    with pytest.raises(ScoreFileError, match="nothing"):
        fuse_score_tables([])
