"""End-to-end checks of the deep-scoring contract on the toy benchmark:
convergence of the headline fine-tune, schema validity of the exported
scores, byte-level agreement between delegated and direct fusion, and the
exclusion of an injected untrained network.
"""

import filecmp
import json

from cnn_scorer import STATUS_CONVERGED, STATUS_EXCLUDED_RANDOM, ensemble_deep

from conftest import texens_cli


def _report(name: str, detail: str) -> None:
    print(f"[acceptance] {name}: PASS ({detail})")


def test_toy_finetune_converges_well_past_chance(member_a):
    assert member_a.run.status == STATUS_CONVERGED
    assert member_a.csv_path is not None and member_a.csv_path.is_file()
    assert all(acc > 0.90 for acc in member_a.fold_accuracies)
    accs = ", ".join(f"{a:.3f}" for a in member_a.fold_accuracies)
    _report("deep toy fine-tune", f"train accuracy per fold: {accs}")


def test_exported_csv_passes_fuse_validation(member_a, tmp_path):
    proc = texens_cli("fuse", member_a.csv_path, "--out", tmp_path / "val.csv",
                      check=False)
    assert proc.returncode == 0, proc.stderr
    assert "accuracy:" in proc.stdout
    assert "Warning" not in proc.stderr
    n_rows = len((tmp_path / "val.csv").read_text().splitlines()) - 1
    assert n_rows == 36
    _report("deep score schema", "member CSV accepted by the fuse command, "
                                 f"{n_rows} rows")


def test_ensemble_deep_matches_direct_fuse_byte_for_byte(member_a, member_b,
                                                         excluded_member,
                                                         tmp_path):
    fused = ensemble_deep([member_a, excluded_member, member_b],
                          tmp_path / "deep.csv")
    direct = tmp_path / "direct.csv"
    texens_cli("fuse", member_a.csv_path, member_b.csv_path, "--out", direct)
    assert filecmp.cmp(fused, direct, shallow=False)
    sidecar = json.loads((fused.parent / (fused.name + ".members.json")).read_text())
    assert excluded_member.run.run_id not in sidecar["members"]
    _report("deep fusion delegation",
            "fused CSV byte-identical to the fuse command; "
            f"members: {', '.join(sidecar['members'])}")


def test_injected_random_model_is_excluded(excluded_member):
    assert excluded_member.run.status == STATUS_EXCLUDED_RANDOM
    assert excluded_member.csv_path is None
    acc = excluded_member.fold_accuracies[0]
    _report("deep exclusion guard",
            f"untrained network at {acc:.3f} train accuracy -> "
            f"{excluded_member.run.status}, no scores emitted")
