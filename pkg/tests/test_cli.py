"""End-to-end tests for the command-line interface."""

import json
import math

import numpy as np
import pytest

from hqreg.cli import main
from hqreg.pipeline import load_table


@pytest.fixture(scope="module")
def prepared(tmp_path_factory):
    """One full `data prepare` run shared by the training tests."""
    out = tmp_path_factory.mktemp("prepared")
    assert main(["data", "prepare", "--output-dir", str(out), "--pca-k", "9"]) == 0
    return out


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def tiny_train(prepared, out_dir, *extra):
    argv = [
        "train", "--input", str(prepared / "prepared.csv"), "--output-dir", str(out_dir),
        "--qubits", "2", "--epochs", "2", "--seed", "3", *extra,
    ]
    return main(argv)


# ------------------------------------------------------------------- prepare


def test_prepare_outputs_and_95_percent_claim(prepared, capsys):
    table = load_table(prepared / "prepared.csv", target="medv")
    assert table.features.shape == (506, 9)
    assert table.feature_names == tuple(f"pc_{i}" for i in range(1, 10))

    variance = load_table(prepared / "explained_variance.csv")
    assert variance.features.shape == (13, 3)
    cumulative = variance.features[:, 2]
    assert cumulative[8] >= 0.95
    assert cumulative[7] < 0.95
    assert abs(cumulative[12] - 1.0) < 1e-9


def test_prepare_prints_minimal_component_count(tmp_path, capsys):
    assert main(["data", "prepare", "--output-dir", str(tmp_path / "p")]) == 0
    assert "95% cumulative variance: 9" in capsys.readouterr().out


def test_prepare_correlation_signs(prepared):
    corr = load_table(prepared / "correlation_matrix.csv")
    medv = corr.feature_names.index("medv")
    assert corr.features[corr.feature_names.index("rm"), medv] > 0
    assert corr.features[corr.feature_names.index("lstat"), medv] < 0
    assert corr.features[corr.feature_names.index("ptratio"), medv] < 0


def test_prepare_full_rank_cumulative_is_one(tmp_path):
    out = tmp_path / "full"
    assert main(["data", "prepare", "--output-dir", str(out), "--pca-k", "13"]) == 0
    variance = load_table(out / "explained_variance.csv")
    assert abs(variance.features[-1, 2] - 1.0) < 1e-9
    table = load_table(out / "prepared.csv", target="medv")
    assert table.features.shape == (506, 13)


def test_prepare_missing_input_exits_2(tmp_path, capsys):
    code = main(["data", "prepare", "--input", str(tmp_path / "nope.csv"),
                 "--output-dir", str(tmp_path / "out")])
    assert code == 2
    assert "nope.csv" in capsys.readouterr().err


def test_prepare_bad_k_exits_2(tmp_path):
    assert main(["data", "prepare", "--output-dir", str(tmp_path / "o"), "--pca-k", "0"]) == 2


# --------------------------------------------------------------------- train


def test_train_writes_history_predictions_manifest(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 20})
    out = tmp_path / "run"
    assert tiny_train(prepared, out, "--config", cfg) == 0

    history = load_table(out / "loss_history.csv")
    assert history.feature_names == ("epoch", "train_mse", "val_mse")
    assert history.features.shape == (2, 3)
    np.testing.assert_array_equal(history.features[:, 0], [1.0, 2.0])
    assert np.all(np.isfinite(history.features))

    predictions = load_table(out / "predictions.csv")
    assert predictions.feature_names == ("actual", "predicted")
    assert predictions.features.shape == (101, 2)

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["qubits"] == 2
    assert manifest["config"]["epochs"] == 2
    assert manifest["config"]["train_rows"] == 20
    assert manifest["config"]["backend"] == "statevector"
    assert manifest["seed"] == 3
    assert manifest["final_train_mse"] == history.features[-1, 1]
    assert manifest["wall_time_s"] > 0
    assert set(manifest["final_params"]) == {"w_in", "b_in", "middle", "w_out", "b_out"}


def test_train_is_deterministic(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 15})
    a, b = tmp_path / "a", tmp_path / "b"
    assert tiny_train(prepared, a, "--config", cfg) == 0
    assert tiny_train(prepared, b, "--config", cfg) == 0
    assert (a / "loss_history.csv").read_bytes() == (b / "loss_history.csv").read_bytes()
    assert (a / "predictions.csv").read_bytes() == (b / "predictions.csv").read_bytes()


def test_train_reruns_from_manifest(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 15})
    first, second = tmp_path / "first", tmp_path / "second"
    assert tiny_train(prepared, first, "--config", cfg) == 0
    code = main(["train", "--config", str(first / "manifest.json"),
                 "--output-dir", str(second)])
    assert code == 0
    assert (first / "loss_history.csv").read_bytes() == (second / "loss_history.csv").read_bytes()


def test_flags_override_config_file(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 15, "epochs": 5, "seed": 9})
    out = tmp_path / "run"
    assert tiny_train(prepared, out, "--config", cfg) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["epochs"] == 2    # flag wins
    assert manifest["config"]["seed"] == 3
    assert manifest["config"]["train_rows"] == 15


def test_classical_model_trains_with_same_harness(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 30})
    out = tmp_path / "classical"
    assert tiny_train(prepared, out, "--model", "classical", "--config", cfg) == 0
    history = load_table(out / "loss_history.csv")
    assert history.features.shape == (2, 3)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["model"] == "classical"


def test_photonic_model_trains_and_scales_features(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 10})
    out = tmp_path / "photonic"
    code = tiny_train(prepared, out, "--model", "photonic", "--epochs", "1", "--config", cfg)
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["backend"] == "fock"
    assert manifest["feature_scale"] is not None and manifest["feature_scale"] > 0
    assert math.isfinite(manifest["final_train_mse"])


def test_photonic_six_modes_hits_resource_limit(prepared, tmp_path, capsys):
    code = main(["train", "--input", str(prepared / "prepared.csv"),
                 "--output-dir", str(tmp_path / "boom"),
                 "--model", "photonic", "--features", "6", "--seed", "0"])
    assert code == 4
    err = capsys.readouterr().err
    assert "8**6" in err and "262144" in err


def test_sampled_predictions_are_deterministic(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 15})
    a, b = tmp_path / "sa", tmp_path / "sb"
    assert tiny_train(prepared, a, "--shots", "64", "--config", cfg) == 0
    assert tiny_train(prepared, b, "--shots", "64", "--config", cfg) == 0
    assert (a / "predictions.csv").read_bytes() == (b / "predictions.csv").read_bytes()
    exact = tmp_path / "exact"
    assert tiny_train(prepared, exact, "--config", cfg) == 0
    assert (a / "predictions.csv").read_bytes() != (exact / "predictions.csv").read_bytes()


def test_train_requires_input(tmp_path):
    assert main(["train", "--output-dir", str(tmp_path / "o")]) == 2


def test_train_rejects_non_angle_encoding(prepared, tmp_path, capsys):
    code = main(["train", "--input", str(prepared / "prepared.csv"),
                 "--output-dir", str(tmp_path / "o"), "--encoding", "amplitude"])
    assert code == 2
    assert "angle" in capsys.readouterr().err


def test_train_rejects_mismatched_backend(prepared, tmp_path):
    code = main(["train", "--input", str(prepared / "prepared.csv"),
                 "--output-dir", str(tmp_path / "o"),
                 "--model", "photonic", "--backend", "statevector"])
    assert code == 2


def test_unknown_config_key_exits_2(prepared, tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"optimzer": "sgd"})
    assert tiny_train(prepared, tmp_path / "o", "--config", cfg) == 2
    assert "optimzer" in capsys.readouterr().err


def test_malformed_config_exits_2(prepared, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert tiny_train(prepared, tmp_path / "o", "--config", str(bad)) == 2


@pytest.mark.filterwarnings("ignore:overflow")
def test_divergent_run_exits_3(prepared, tmp_path, capsys):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 10})
    code = main(["train", "--input", str(prepared / "prepared.csv"),
                 "--output-dir", str(tmp_path / "o"), "--model", "classical",
                 "--qubits", "2", "--epochs", "2", "--lr", "1e12",
                 "--seed", "0", "--config", cfg])
    assert code == 3
    assert "epoch" in capsys.readouterr().err


# ------------------------------------------------------------------- predict


def test_predict_round_trip(prepared, tmp_path):
    cfg = write_config(tmp_path, "c.json", {"train_rows": 15})
    run = tmp_path / "run"
    assert tiny_train(prepared, run, "--config", cfg) == 0
    out = tmp_path / "scored"
    code = main(["predict", "--config", str(run / "manifest.json"),
                 "--output-dir", str(out)])
    assert code == 0
    scored = load_table(out / "predictions.csv")
    assert scored.features.shape == (506, 2)
    again = tmp_path / "scored2"
    assert main(["predict", "--config", str(run / "manifest.json"),
                 "--output-dir", str(again)]) == 0
    assert (out / "predictions.csv").read_bytes() == (again / "predictions.csv").read_bytes()


def test_predict_requires_manifest(tmp_path):
    assert main(["predict", "--output-dir", str(tmp_path / "o")]) == 2


def test_predict_rejects_non_manifest(prepared, tmp_path, capsys):
    fake = write_config(tmp_path, "fake.json", {"epochs": 2})
    code = main(["predict", "--config", fake, "--output-dir", str(tmp_path / "o")])
    assert code == 2
    assert "missing keys" in capsys.readouterr().err


# --------------------------------------------------------------- descriptors


def test_descriptors_report_and_determinism(tmp_path):
    cfg = write_config(tmp_path, "c.json", {"samples": 300})
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code = main(["descriptors", "--qubits", "3", "--scan-qubits", "2,3",
                     "--seed", "5", "--output-dir", str(out), "--config", cfg])
        assert code == 0
    assert (a / "descriptors.json").read_bytes() == (b / "descriptors.json").read_bytes()
    report = json.loads((a / "descriptors.json").read_text())
    assert report["expressibility_kl"] > 0
    assert 0 < report["entangling_capability"] <= 1
    assert set(report["gradient_variance_by_qubits"]) == {"2", "3"}
    assert report["config"]["qubits"] == 3
    assert report["config"]["scan_qubits"] == [2, 3]
    assert report["seed"] == 5


def test_descriptors_rotations_only_has_no_entangling_power(tmp_path):
    cfg = write_config(tmp_path, "c.json", {"ansatz": "rotations", "samples": 200})
    out = tmp_path / "rot"
    assert main(["descriptors", "--qubits", "3", "--seed", "1",
                 "--output-dir", str(out), "--config", cfg]) == 0
    report = json.loads((out / "descriptors.json").read_text())
    assert abs(report["entangling_capability"]) < 1e-10


def test_descriptors_invalid_layers_exit_2(tmp_path):
    assert main(["descriptors", "--qubits", "3", "--layers", "0",
                 "--output-dir", str(tmp_path / "o")]) == 2


def test_bad_scan_list_exits_2(tmp_path, capsys):
    code = main(["descriptors", "--qubits", "2", "--scan-qubits", "2,x",
                 "--output-dir", str(tmp_path / "o")])
    assert code == 2
    assert "qubit counts" in capsys.readouterr().err


# ------------------------------------------------------------------ dispatch


def test_no_subcommand_exits_2(capsys):
    assert main([]) == 2
    capsys.readouterr()


def test_unknown_flag_exits_2(capsys):
    assert main(["train", "--optimizer", "adam"]) == 2
    capsys.readouterr()
