import hashlib
from pathlib import Path

import numpy as np
import pytest
from PIL import Image as PILImage

from texens.augmentation import LeakageError, export_augmented, fit_pca_bases
from texens.augmentation.export import MANIFEST_HEADER
from texens.datasets import load_dataset, make_folds
from texens.images import GrayImage


@pytest.fixture
def small_dataset(tmp_path):
    rng = np.random.default_rng(0)
    root = tmp_path / "data"
    for cls in ("alpha", "beta"):
        d = root / cls
        d.mkdir(parents=True)
        for i in range(4):
            arr = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
            PILImage.fromarray(arr, mode="L").save(d / f"{cls}_{i}.png")
    return load_dataset(root)


def _tree_digest(out_dir: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(out_dir.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(out_dir)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_export_counts_and_layout(small_dataset, tmp_path):
    out = tmp_path / "aug"
    manifest = export_augmented(small_dataset, app=1, epochs=3, seed=5, out_dir=out)
    pngs = sorted(out.rglob("*.png"))
    assert len(pngs) == 8 * 3
    for e in (1, 2, 3):
        for cls in ("alpha", "beta"):
            assert len(list((out / f"epoch_{e}" / cls).glob("*.png"))) == 4
    lines = manifest.read_text().splitlines()
    assert lines[0] == MANIFEST_HEADER
    assert len(lines) == 1 + 24
    # rows sorted by (epoch, sample_id)
    keys = [(int(l.split("\t")[0]), l.split("\t")[1]) for l in lines[1:]]
    assert keys == sorted(keys)


def test_export_rerun_byte_identical(small_dataset, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    export_augmented(small_dataset, app=2, epochs=2, seed=9, out_dir=a)
    export_augmented(small_dataset, app=2, epochs=2, seed=9, out_dir=b)
    assert _tree_digest(a) == _tree_digest(b)


def test_export_seed_changes_output(small_dataset, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    export_augmented(small_dataset, app=3, epochs=1, seed=1, out_dir=a)
    export_augmented(small_dataset, app=3, epochs=1, seed=2, out_dir=b)
    assert _tree_digest(a) != _tree_digest(b)


def test_export_fold_restricts_to_training(small_dataset, tmp_path):
    plan = make_folds(small_dataset, k=2, seed=3)
    out = tmp_path / "aug"
    export_augmented(small_dataset, app=1, epochs=1, seed=0, out_dir=out,
                     plan=plan, fold=0)
    exported = {p.stem for p in out.rglob("*.png")}
    train = {Path(i).stem for i in plan.train_ids(0)}
    test = {Path(i).stem for i in plan.test_ids(0)}
    assert exported == train
    assert not exported & test


def test_export_plan_without_fold_rejected(small_dataset, tmp_path):
    plan = make_folds(small_dataset, k=2, seed=3)
    with pytest.raises(ValueError):
        export_augmented(small_dataset, app=1, epochs=1, seed=0,
                         out_dir=tmp_path / "x", plan=plan)


def test_export_app5_and_6_run(small_dataset, tmp_path):
    for app in (5, 6):
        out = tmp_path / f"app{app}"
        export_augmented(small_dataset, app=app, epochs=1, seed=4, out_dir=out,
                         work_size=32)
        assert len(list(out.rglob("*.png"))) == 8


def test_export_swap_method_runs(small_dataset, tmp_path):
    out = tmp_path / "swap"
    export_augmented(small_dataset, app=6, epochs=1, seed=4, out_dir=out,
                     method="three", work_size=32)
    assert len(list(out.rglob("*.png"))) == 8


def test_fit_on_test_sample_raises():
    imgs = {f"s{i}": GrayImage(np.full((8, 8), float(i))) for i in range(4)}
    with pytest.raises(LeakageError) as exc:
        fit_pca_bases(imgs, fit_ids=["s0", "s3"], train_ids=["s0", "s1"],
                      work_size=8)
    assert "s3" in str(exc.value)


def test_fit_pca_bases_empty_training():
    with pytest.raises(LeakageError):
        fit_pca_bases({}, fit_ids=[], train_ids=[], work_size=8)
