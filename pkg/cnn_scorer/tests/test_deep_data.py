"""Readers for fold plans, export manifests, and image directories."""

import numpy as np
import pytest
from PIL import Image

from cnn_scorer import (FoldPlan, ManifestRow, ScorerError, image_path,
                        list_eval_samples, load_gray, manifest_classes,
                        manifest_epochs, manifest_ids, read_manifest,
                        standardize)


# ---------------------------------------------------------------- fold plans

def test_plan_round_trip_from_cli_export(plan_path):
    plan = FoldPlan.from_file(plan_path)
    assert plan.k == 3 and plan.seed == 11
    all_ids = sorted(plan.assignment)
    assert len(all_ids) == 36
    seen = []
    for f in range(plan.k):
        test = plan.test_ids(f)
        train = plan.train_ids(f)
        assert sorted(test + train) == all_ids
        assert not set(test) & set(train)
        seen += test
    assert sorted(seen) == all_ids  # folds partition the set


def test_plan_rejects_small_k():
    with pytest.raises(ScorerError, match="k >= 2"):
        FoldPlan(1, 0, {"a": 0})


def test_plan_rejects_out_of_range_fold():
    with pytest.raises(ScorerError, match="outside"):
        FoldPlan(2, 0, {"a": 2})


@pytest.mark.parametrize("text", [
    "not json",
    "{}",
    '{"k": 2, "seed": 0}',
])
def test_plan_rejects_malformed_files(tmp_path, text):
    p = tmp_path / "plan.json"
    p.write_text(text)
    with pytest.raises(ScorerError, match="malformed fold plan"):
        FoldPlan.from_file(p)


# ----------------------------------------------------------------- manifests

def test_manifest_matches_export(app1_dirs, plan_path):
    plan = FoldPlan.from_file(plan_path)
    rows = read_manifest(app1_dirs[0] / "manifest.tsv")
    assert len(rows) == 24 * 20  # training ids x epochs
    assert manifest_epochs(rows) == 20
    assert manifest_classes(rows) == ("checker", "grating", "noise")
    assert list(manifest_ids(rows)) == plan.train_ids(0)
    for row in (rows[0], rows[-1]):
        assert image_path(app1_dirs[0], row).is_file()


@pytest.mark.parametrize("text, match", [
    ("sample\tclass\n1\tx\n", "not an augmentation manifest"),
    ("epoch\tsample_id\tclass\nx\ta\tb\n", "bad epoch"),
    ("epoch\tsample_id\tclass\n1\tonly-two\n", "fields"),
    ("epoch\tsample_id\tclass\n", "empty manifest"),
])
def test_manifest_rejects_malformed_files(tmp_path, text, match):
    p = tmp_path / "manifest.tsv"
    p.write_text(text)
    with pytest.raises(ScorerError, match=match):
        read_manifest(p)


def test_manifest_epochs_must_be_contiguous():
    rows = (ManifestRow(1, "a", "c"), ManifestRow(3, "a", "c"))
    with pytest.raises(ScorerError, match="contiguous"):
        manifest_epochs(rows)


def test_manifest_epochs_must_cover_same_samples():
    rows = (ManifestRow(1, "a", "c"), ManifestRow(2, "b", "c"))
    with pytest.raises(ScorerError, match="different sample set"):
        manifest_epochs(rows)


# ------------------------------------------------------------ eval datasets

def test_list_eval_samples_layout(dataset_dir):
    classes, samples = list_eval_samples(dataset_dir)
    assert classes == ("checker", "grating", "noise")
    assert len(samples) == 36
    labels = {c: i + 1 for i, c in enumerate(classes)}
    for s in samples:
        cname, fname = s.sample_id.split("/")
        assert s.label == labels[cname]
        assert s.path.endswith(fname)


def test_list_eval_samples_rejects_bad_roots(tmp_path):
    with pytest.raises(ScorerError, match="not a directory"):
        list_eval_samples(tmp_path / "nope")
    (tmp_path / "empty_class").mkdir()
    with pytest.raises(ScorerError, match="no image files"):
        list_eval_samples(tmp_path)


# -------------------------------------------------------------- image loads

def test_load_gray_resizes_and_scales(tmp_path):
    arr = np.arange(32 * 32, dtype=np.uint8).reshape(32, 32)
    p = tmp_path / "t.png"
    Image.fromarray(arr, mode="L").save(p)
    out = load_gray(p, 64)
    assert out.shape == (64, 64) and out.dtype == np.float32
    assert 0.0 <= out.min() and out.max() <= 1.0


def test_standardize_centers_and_scales():
    rng = np.random.default_rng(0)
    z = standardize(rng.uniform(0, 1, (40, 40)).astype(np.float32))
    assert abs(float(z.mean())) < 1e-4
    assert abs(float(z.std()) - 1.0) < 1e-3
