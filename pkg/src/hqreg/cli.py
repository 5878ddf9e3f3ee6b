"""Command-line experiment runner.

Four subcommands cover the full workflow: ``data prepare`` standardizes a
housing-style CSV and reduces it with PCA, ``train`` fits a hybrid, classical
or photonic regressor on the prepared features, ``predict`` re-scores a saved
run, and ``descriptors`` reports circuit-quality measures.  Every run writes
a manifest holding the fully resolved configuration so it can be repeated
bit-for-bit; settings come from defaults, then an optional JSON config file,
then explicit flags.

Exit codes: 0 success, 2 input or configuration error, 3 numeric failure
(divergence or truncation), 4 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .ansatz import AnsatzSpec, rotation_layers, strongly_entangling_layers
from .descriptors import (
    ExpressibilityConfig,
    entangling_capability,
    expressibility,
    gradient_variance_scan,
)
from .exceptions import (
    ContractError,
    DivergenceError,
    ResourceLimitError,
    SchemaError,
    TruncationError,
)
from .models import DenseLayer, HybridRegressor
from .pipeline import (
    PrincipalComponents,
    Standardizer,
    bundled_housing_path,
    correlation_matrix,
    load_table,
    train_test_split,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4

MODEL_CHOICES = ("hybrid", "classical", "photonic")
_MIDDLE_FOR_MODEL = {"hybrid": "quantum", "classical": "classical", "photonic": "photonic"}
_BACKEND_FOR_MODEL = {"hybrid": "statevector", "classical": "statevector", "photonic": "fock"}

PREPARE_DEFAULTS = {
    "input": None,
    "output_dir": "runs/prepare",
    "pca_k": 9,
    "seed": 0,
}
TRAIN_DEFAULTS = {
    "input": None,
    "output_dir": "runs/train",
    "model": "hybrid",
    "epochs": 25,
    "lr": 0.08,
    "batch_size": 5,
    "split_fraction": 0.2,
    "qubits": 9,
    "layers": 1,
    "encoding": "angle",
    "backend": None,
    "cutoff": 8,
    "budget": 100_000,
    "shots": None,
    "train_rows": None,
    "seed": 0,
}
DESCRIPTORS_DEFAULTS = {
    "output_dir": "runs/descriptors",
    "qubits": 4,
    "layers": 1,
    "ansatz": "strong",
    "entangler": "cnot",
    "samples": 5000,
    "bins": 75,
    "scan_qubits": None,
    "scan_samples": 500,
    "seed": 0,
}


# ------------------------------------------------------------- configuration


def _load_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ContractError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ContractError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ContractError(f"config file {path} must hold a JSON object")
    if isinstance(data.get("config"), dict):
        # run manifests embed their resolved config; accept them directly
        data = data["config"]
    return data


def _resolve(defaults: dict, args: argparse.Namespace) -> dict:
    """defaults, then config-file values, then explicit flags."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        for key, value in _load_config_file(args.config).items():
            if key not in defaults:
                raise ContractError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _parse_counts(value) -> list[int]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise ContractError(f"cannot parse qubit counts from {value!r}") from None
    return [int(v) for v in value]


# ------------------------------------------------------------------- outputs


def _format_cell(value):
    if isinstance(value, (int, np.integer)):
        return int(value)
    return repr(float(value))


def _write_csv(path: Path, header, rows) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- subcommands


def cmd_data_prepare(args: argparse.Namespace) -> int:
    cfg = _resolve(PREPARE_DEFAULTS, args)
    source = Path(cfg["input"]) if cfg["input"] else bundled_housing_path()
    dataset = load_table(source, target="medv")
    n_cols = dataset.features.shape[1]
    k = int(cfg["pca_k"])
    if not 1 <= k <= n_cols:
        raise ContractError(f"pca_k must lie in [1, {n_cols}], got {k}")
    out = _out_dir(cfg)

    names = list(dataset.feature_names) + [dataset.target_name]
    _write_csv(out / "correlation_matrix.csv", names, correlation_matrix(dataset))

    standardized = Standardizer().fit(dataset.features).transform(dataset.features)
    pca = PrincipalComponents(n_components=k).fit(standardized)
    ratios = pca.full_variance_ratio_
    cumulative = np.cumsum(ratios)
    _write_csv(
        out / "explained_variance.csv",
        ["component", "variance_ratio", "cumulative_ratio"],
        [(i + 1, ratios[i], cumulative[i]) for i in range(n_cols)],
    )

    header = [f"pc_{i + 1}" for i in range(k)] + [dataset.target_name]
    prepared = np.hstack([pca.transform(standardized), dataset.targets[:, None]])
    _write_csv(out / "prepared.csv", header, prepared)

    minimal = int(np.searchsorted(cumulative, 0.95) + 1)
    cfg["input"] = str(source)
    _write_json(out / "manifest.json", {"command": "data prepare", "config": cfg, "seed": int(cfg["seed"])})
    print(f"prepared {prepared.shape[0]} rows with {k} components -> {out}")
    print(f"minimal components reaching 95% cumulative variance: {minimal}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _resolve(TRAIN_DEFAULTS, args)
    if not cfg["input"]:
        raise ContractError("train requires --input pointing at a prepared CSV")
    model_kind = cfg["model"]
    if model_kind not in MODEL_CHOICES:
        raise ContractError(f"model must be one of {MODEL_CHOICES}, got {model_kind!r}")
    if cfg["encoding"] != "angle":
        raise ContractError(f"training supports only the angle encoding, got {cfg['encoding']!r}")
    backend = cfg["backend"] or _BACKEND_FOR_MODEL[model_kind]
    if backend != _BACKEND_FOR_MODEL[model_kind]:
        raise ContractError(
            f"model {model_kind!r} runs on the {_BACKEND_FOR_MODEL[model_kind]} backend, got {backend!r}"
        )
    cfg["backend"] = backend

    dataset = load_table(cfg["input"], target="medv")
    train_set, test_set = train_test_split(dataset, float(cfg["split_fraction"]), int(cfg["seed"]))
    if cfg["train_rows"] is not None:
        rows = int(cfg["train_rows"])
        if not 1 <= rows <= train_set.n_rows:
            raise ContractError(f"train_rows must lie in [1, {train_set.n_rows}], got {rows}")
        train_set = train_set.take(range(rows))

    X_train, X_test = train_set.features, test_set.features
    feature_scale = None
    if model_kind == "photonic":
        # displacement amplitudes must stay well inside the Fock cutoff
        feature_scale = float(np.max(np.abs(X_train))) or 1.0
        X_train = X_train / feature_scale
        X_test = X_test / feature_scale

    model = HybridRegressor(
        middle=_MIDDLE_FOR_MODEL[model_kind],
        n_wires=int(cfg["qubits"]),
        n_layers=int(cfg["layers"]),
        epochs=int(cfg["epochs"]),
        learning_rate=float(cfg["lr"]),
        batch_size=int(cfg["batch_size"]),
        seed=int(cfg["seed"]),
        cutoff=int(cfg["cutoff"]),
        max_elements=int(cfg["budget"]),
    )
    start = time.perf_counter()
    model.fit(X_train, train_set.targets, X_test, test_set.targets)
    wall = time.perf_counter() - start

    out = _out_dir(cfg)
    _write_csv(
        out / "loss_history.csv",
        ["epoch", "train_mse", "val_mse"],
        [(i + 1, t, v) for i, (t, v) in enumerate(zip(model.train_losses_, model.val_losses_))],
    )
    if cfg["shots"]:
        predicted = model.predict_sampled(X_test, int(cfg["shots"]))
    else:
        predicted = model.predict(X_test)
    _write_csv(out / "predictions.csv", ["actual", "predicted"], zip(test_set.targets, predicted))
    _write_json(out / "manifest.json", {
        "command": "train",
        "config": {key: cfg[key] for key in TRAIN_DEFAULTS},
        "seed": int(cfg["seed"]),
        "wall_time_s": wall,
        "final_train_mse": model.train_losses_[-1],
        "final_val_mse": model.val_losses_[-1],
        "n_features": int(model.n_features_in_),
        "feature_scale": feature_scale,
        "target_offset": model.target_offset_,
        "target_scale": model.target_scale_,
        "final_params": {k: np.asarray(v).tolist() for k, v in model.report_.final_params.items()},
    })
    print(f"trained {model_kind} model for {cfg['epochs']} epochs in {wall:.1f}s -> {out}")
    print(f"final train mse {model.train_losses_[-1]:.4f}, val mse {model.val_losses_[-1]:.4f}")
    return EXIT_OK


def _read_manifest(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ContractError(f"manifest not found: {path}")
    manifest = json.loads(path.read_text())
    required = {"config", "final_params", "target_offset", "target_scale", "n_features"}
    missing = required - set(manifest)
    if missing:
        raise ContractError(f"{path} is not a train manifest; missing keys {sorted(missing)}")
    return manifest


def _model_from_manifest(manifest: dict, sample_seed=None) -> tuple[HybridRegressor, float | None]:
    cfg = manifest["config"]
    model = HybridRegressor(
        middle=_MIDDLE_FOR_MODEL[cfg["model"]],
        n_wires=int(cfg["qubits"]),
        n_layers=int(cfg["layers"]),
        cutoff=int(cfg["cutoff"]),
        max_elements=int(cfg["budget"]),
        seed=int(cfg["seed"]),
    )
    params = manifest["final_params"]
    model.input_layer_ = DenseLayer(
        np.asarray(params["w_in"], dtype=float), np.asarray(params["b_in"], dtype=float)
    )
    model.middle_ = model._build_middle()
    model.middle_params_ = np.asarray(params["middle"], dtype=float).reshape(-1)
    model.output_layer_ = DenseLayer(
        np.asarray(params["w_out"], dtype=float), np.asarray(params["b_out"], dtype=float)
    )
    model.target_offset_ = float(manifest["target_offset"])
    model.target_scale_ = float(manifest["target_scale"])
    model.n_features_in_ = int(manifest["n_features"])
    seed = manifest["seed"] if sample_seed is None else sample_seed
    model._sample_rng = np.random.default_rng(int(seed))
    return model, manifest.get("feature_scale")


def cmd_predict(args: argparse.Namespace) -> int:
    if not args.config:
        raise ContractError("predict requires --config pointing at a train manifest")
    manifest = _read_manifest(args.config)
    model, feature_scale = _model_from_manifest(manifest, sample_seed=args.seed)
    source = args.input or manifest["config"]["input"]
    dataset = load_table(source, target="medv")
    X = dataset.features if feature_scale is None else dataset.features / feature_scale
    shots = args.shots if args.shots is not None else manifest["config"].get("shots")
    predicted = model.predict_sampled(X, int(shots)) if shots else model.predict(X)
    out = Path(args.output_dir or "runs/predict")
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "predictions.csv", ["actual", "predicted"], zip(dataset.targets, predicted))
    print(f"scored {dataset.n_rows} rows -> {out / 'predictions.csv'}")
    return EXIT_OK


def cmd_descriptors(args: argparse.Namespace) -> int:
    cfg = _resolve(DESCRIPTORS_DEFAULTS, args)
    spec = AnsatzSpec(int(cfg["qubits"]), int(cfg["layers"]), cfg["entangler"])
    if cfg["ansatz"] == "strong":
        circuit = strongly_entangling_layers(spec)
    elif cfg["ansatz"] == "rotations":
        circuit = rotation_layers(spec)
    else:
        raise ContractError(f"ansatz must be 'strong' or 'rotations', got {cfg['ansatz']!r}")
    if circuit.n_params == 0:
        raise ContractError("circuit has no trainable parameters to sample")

    seed = int(cfg["seed"])
    expr_config = ExpressibilityConfig(
        n_samples=int(cfg["samples"]), n_bins=int(cfg["bins"]), seed=seed
    )
    scan: dict[int, float] = {}
    if cfg["scan_qubits"]:
        cfg["scan_qubits"] = _parse_counts(cfg["scan_qubits"])
        scan = gradient_variance_scan(cfg["scan_qubits"], n_samples=int(cfg["scan_samples"]), seed=seed)

    # paths stay out of the report so reruns into fresh directories stay
    # byte-identical
    echoed = {key: cfg[key] for key in DESCRIPTORS_DEFAULTS if key != "output_dir"}
    report = {
        "expressibility_kl": expressibility(circuit, expr_config),
        "entangling_capability": entangling_capability(circuit, n_samples=int(cfg["samples"]), seed=seed),
        "gradient_variance_by_qubits": {str(n): v for n, v in scan.items()},
        "config": echoed,
        "seed": seed,
    }
    out = _out_dir(cfg)
    _write_json(out / "descriptors.json", report)
    print(f"expressibility KL {report['expressibility_kl']:.4f}, "
          f"entangling capability {report['entangling_capability']:.4f} -> {out}")
    return EXIT_OK


# ----------------------------------------------------------------- dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hqreg",
        description="hybrid quantum-classical regression experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    data = sub.add_parser("data", help="dataset preparation")
    data_sub = data.add_subparsers(dest="data_command", required=True)
    prepare = data_sub.add_parser("prepare", help="standardize, run PCA, export prepared features")
    prepare.add_argument("--input", help="source CSV (defaults to the bundled housing data)")
    prepare.add_argument("--output-dir", dest="output_dir")
    prepare.add_argument("--pca-k", dest="pca_k", type=int)
    prepare.add_argument("--seed", type=int)
    prepare.add_argument("--config", help="JSON config file")
    prepare.set_defaults(handler=cmd_data_prepare)

    train = sub.add_parser("train", help="fit a model on a prepared CSV")
    train.add_argument("--input", help="prepared CSV from `data prepare`")
    train.add_argument("--output-dir", dest="output_dir")
    train.add_argument("--model", choices=MODEL_CHOICES)
    train.add_argument("--epochs", type=int)
    train.add_argument("--lr", type=float)
    train.add_argument("--batch-size", dest="batch_size", type=int)
    train.add_argument("--split-fraction", dest="split_fraction", type=float)
    train.add_argument("--qubits", "--features", dest="qubits", type=int,
                       help="width of the middle block (wires or modes)")
    train.add_argument("--layers", type=int)
    train.add_argument("--encoding", choices=("angle", "basis", "amplitude"))
    train.add_argument("--backend", choices=("statevector", "fock"))
    train.add_argument("--cutoff", type=int)
    train.add_argument("--budget", type=int, help="photonic element budget (cutoff ** modes)")
    train.add_argument("--shots", type=int, help="sample test predictions with this many shots")
    train.add_argument("--seed", type=int)
    train.add_argument("--config", help="JSON config file or previous train manifest")
    train.set_defaults(handler=cmd_train)

    predict = sub.add_parser("predict", help="score a CSV with a saved run")
    predict.add_argument("--input", help="CSV to score (defaults to the manifest's input)")
    predict.add_argument("--output-dir", dest="output_dir")
    predict.add_argument("--shots", type=int)
    predict.add_argument("--seed", type=int)
    predict.add_argument("--config", help="train manifest JSON", required=False)
    predict.set_defaults(handler=cmd_predict)

    descriptors = sub.add_parser("descriptors", help="circuit quality report")
    descriptors.add_argument("--output-dir", dest="output_dir")
    descriptors.add_argument("--qubits", "--features", dest="qubits", type=int)
    descriptors.add_argument("--layers", type=int)
    descriptors.add_argument("--scan-qubits", dest="scan_qubits",
                             help="comma-separated qubit counts for the gradient-variance scan")
    descriptors.add_argument("--seed", type=int)
    descriptors.add_argument("--config", help="JSON config file")
    descriptors.set_defaults(handler=cmd_descriptors)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ContractError, SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, TruncationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
