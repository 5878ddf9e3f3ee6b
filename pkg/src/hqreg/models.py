"""Hybrid dense-quantum-dense regression models.

The estimator sandwiches an exchangeable "middle" block between two classical
dense layers: a parameterised qubit circuit read out via per-wire <Z>, a
photonic layer read out via per-mode <x>, a classical dense block of the same
width, or a pass-through.  Training is plain mini-batch SGD on mean squared
error; quantum gradients flow through the exact parameter-shift rule (or
finite differences on request) and are chained with the dense layers by
:func:`hqreg.gradients.hybrid_loss_gradient`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from . import fock
from .ansatz import AnsatzSpec, strongly_entangling_layers
from .encodings import EncodingSpec, angle_encoding_program
from .exceptions import ContractError, DivergenceError
from .gradients import (
    FiniteDiffConfig,
    batched_fd_jacobian,
    batched_shift_jacobian,
    hybrid_loss_gradient,
)
from .statevector import expectations_z

MIDDLE_KINDS = ("quantum", "classical", "photonic", "identity")
ACTIVATIONS = ("linear", "relu")


@dataclass
class DenseLayer:
    """Fully connected layer y = act(W x + b)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "linear"

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float).reshape(-1)
        if self.weights.ndim != 2:
            raise ContractError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.size != self.weights.shape[0]:
            raise ContractError(
                f"bias length {self.bias.size} does not match {self.weights.shape[0]} output(s)"
            )
        if self.activation not in ACTIVATIONS:
            raise ContractError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")

    def activate(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(z, 0.0) if self.activation == "relu" else z

    def activate_grad(self, z: np.ndarray) -> np.ndarray:
        return (z > 0.0).astype(float) if self.activation == "relu" else np.ones_like(z)

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.activate(x @ self.weights.T + self.bias)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the SGD loop."""

    epochs: int = 25
    learning_rate: float = 0.08
    batch_size: int = 5
    seed: int = 0
    gradient_method: str = "shift"
    fd_epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ContractError(f"epochs must be positive, got {self.epochs}")
        if not (np.isfinite(self.learning_rate) and self.learning_rate >= 0.0):
            raise ContractError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ContractError(f"batch_size must be positive, got {self.batch_size}")
        if self.gradient_method not in ("shift", "fd"):
            raise ContractError(f"gradient_method must be 'shift' or 'fd', got {self.gradient_method!r}")
        if not (0.0 < self.fd_epsilon < 1.0):
            raise ContractError(f"fd_epsilon must lie in (0, 1), got {self.fd_epsilon}")


@dataclass
class TrainReport:
    """Per-epoch loss history, wall time, and final parameters of one fit call."""

    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] | None = None
    wall_time_s: float = 0.0
    final_params: dict[str, np.ndarray] | None = None

    @property
    def final_train_loss(self) -> float:
        return self.train_losses[-1]

    @property
    def final_val_loss(self) -> float | None:
        return None if not self.val_losses else self.val_losses[-1]


def mse_loss(predictions, targets) -> float:
    """Mean squared error."""
    predictions = np.asarray(predictions, dtype=float).reshape(-1)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    if predictions.size != targets.size:
        raise ContractError(f"{predictions.size} predictions for {targets.size} targets")
    if predictions.size == 0:
        raise ContractError("cannot score zero samples")
    return float(np.mean((predictions - targets) ** 2))


def sgd_step(params: dict, grads: dict, learning_rate: float) -> dict:
    """One vanilla SGD update; returns a new dict, inputs untouched."""
    if not (np.isfinite(learning_rate) and learning_rate >= 0.0):
        raise ContractError(f"learning_rate must be non-negative, got {learning_rate}")
    if set(params) != set(grads):
        raise ContractError(f"parameter/gradient keys differ: {sorted(params)} vs {sorted(grads)}")
    out = {}
    for key, value in params.items():
        grad = np.asarray(grads[key], dtype=float)
        value = np.asarray(value, dtype=float)
        if grad.shape != value.shape:
            raise ContractError(f"gradient shape {grad.shape} != parameter shape {value.shape} for {key!r}")
        out[key] = value - learning_rate * grad
    return out


class QuantumMiddle:
    """Angle encoding into a strongly entangling circuit with <Z> readout.

    The encoding slots and ansatz slots live in one combined program, so a
    single batched parameter-shift pass yields both the trainable-parameter
    jacobian and the input jacobian.
    """

    def __init__(self, n_wires, n_layers=1, entangler="cnot", rotation_axis="y",
                 gradient_method="shift", fd_epsilon=1e-6):
        self.encoding = EncodingSpec("angle", n_wires, rotation_axis)
        self.circuit = strongly_entangling_layers(AnsatzSpec(n_wires, n_layers, entangler))
        self.program = angle_encoding_program(self.encoding).concat(self.circuit)
        self.n_inputs = n_wires
        self.n_outputs = n_wires
        self.n_params = self.circuit.n_params
        self.gradient_method = gradient_method
        self.fd_config = FiniteDiffConfig(epsilon=fd_epsilon)

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 2.0 * np.pi, size=self.n_params)

    def _full(self, inputs: np.ndarray, params: np.ndarray) -> np.ndarray:
        return np.hstack([inputs, np.tile(params, (inputs.shape[0], 1))])

    def forward(self, inputs: np.ndarray, params: np.ndarray) -> np.ndarray:
        amps = self.program.run_batch(self._full(inputs, params))
        return expectations_z(amps, self.program.n_qubits, range(self.n_outputs))

    def value_and_jacobian(self, inputs: np.ndarray, params: np.ndarray):
        full = self._full(inputs, params)
        wires = range(self.n_outputs)
        if self.gradient_method == "fd":
            values, jac = batched_fd_jacobian(self.program, full, wires, self.fd_config)
        else:
            values, jac = batched_shift_jacobian(self.program, full, wires)
        n = self.n_inputs
        return values, jac[:, :, n:], jac[:, :, :n]

    def states(self, inputs: np.ndarray, params: np.ndarray) -> np.ndarray:
        """Raw output amplitudes, used for measurement sampling."""
        return self.program.run_batch(self._full(inputs, params))


class ClassicalMiddle:
    """Linear dense block of matching width, the drop-in classical baseline.

    Same width and harness as the quantum block, but a plain W u + b hidden
    layer.  The parameter vector is the C-order weight matrix followed by the
    biases.
    """

    def __init__(self, n_wires):
        self.n_inputs = n_wires
        self.n_outputs = n_wires
        self.n_params = n_wires * n_wires + n_wires

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        bound = 1.0 / np.sqrt(self.n_inputs)
        return rng.uniform(-bound, bound, size=self.n_params)

    def _split(self, params: np.ndarray):
        w = params[: self.n_inputs * self.n_outputs].reshape(self.n_outputs, self.n_inputs)
        return w, params[self.n_inputs * self.n_outputs :]

    def forward(self, inputs: np.ndarray, params: np.ndarray) -> np.ndarray:
        w, b = self._split(params)
        return inputs @ w.T + b

    def value_and_jacobian(self, inputs: np.ndarray, params: np.ndarray):
        w, _ = self._split(params)
        z = self.forward(inputs, params)
        batch, n_out, n_in = inputs.shape[0], self.n_outputs, self.n_inputs
        j_inputs = np.broadcast_to(w, (batch, n_out, n_in)).copy()
        j_params = np.zeros((batch, n_out, self.n_params))
        for o in range(n_out):
            j_params[:, o, o * n_in : (o + 1) * n_in] = inputs
            j_params[:, o, n_out * n_in + o] = 1.0
        return z, j_params, j_inputs


class IdentityMiddle:
    """Pass-through block; the model collapses to linear regression."""

    def __init__(self, n_wires):
        self.n_inputs = n_wires
        self.n_outputs = n_wires
        self.n_params = 0

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        return np.empty(0)

    def forward(self, inputs: np.ndarray, params: np.ndarray) -> np.ndarray:
        return np.asarray(inputs, dtype=float)

    def value_and_jacobian(self, inputs: np.ndarray, params: np.ndarray):
        batch = inputs.shape[0]
        eye = np.broadcast_to(np.eye(self.n_inputs), (batch, self.n_inputs, self.n_inputs))
        return np.asarray(inputs, dtype=float), np.empty((batch, self.n_outputs, 0)), eye.copy()


class FockMiddle:
    """Displacement embedding into one photonic layer with <x> readout.

    Gradients are central finite differences; there is no shift rule for the
    non-Gaussian Kerr gate.  Magnitude-type parameters (squeeze and
    displacement amplitudes) are initialised near zero so a freshly built
    layer respects the truncation leak tolerance; phases are free on
    [0, 2*pi).
    """

    _MAGNITUDE_INIT = 0.05

    def __init__(self, n_modes, cutoff=fock.DEFAULT_CUTOFF,
                 max_elements=fock.DEFAULT_MAX_ELEMENTS, leak_tol=fock.DEFAULT_LEAK_TOL,
                 fd_epsilon=1e-6):
        # fail at construction, not at the first forward pass
        fock.vacuum(n_modes, cutoff, max_elements)
        self.n_modes = n_modes
        self.n_inputs = n_modes
        self.n_outputs = n_modes
        self.n_params = fock.CVLayerParams.n_params(n_modes)
        self.cutoff = cutoff
        self.max_elements = max_elements
        self.leak_tol = leak_tol
        self.fd_epsilon = fd_epsilon

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        m = self.n_modes
        pairs = m * (m - 1) // 2
        mag = self._MAGNITUDE_INIT
        segments = [
            rng.uniform(0.0, 2.0 * np.pi, pairs),   # bs1 theta
            rng.uniform(0.0, 2.0 * np.pi, pairs),   # bs1 phi
            rng.uniform(0.0, 2.0 * np.pi, m),       # rot1
            rng.uniform(-mag, mag, m),              # squeeze r
            rng.uniform(0.0, 2.0 * np.pi, pairs),   # bs2 theta
            rng.uniform(0.0, 2.0 * np.pi, pairs),   # bs2 phi
            rng.uniform(0.0, 2.0 * np.pi, m),       # rot2
            rng.uniform(-mag, mag, m),              # displacement r
            rng.uniform(0.0, 2.0 * np.pi, m),       # displacement phi
            rng.uniform(0.0, 2.0 * np.pi, m),       # kerr
        ]
        return np.concatenate(segments)

    def _outputs(self, inputs_row: np.ndarray, params: np.ndarray) -> np.ndarray:
        state = fock.displacement_embedding(
            inputs_row, self.n_modes, self.cutoff, self.max_elements, self.leak_tol
        )
        fock.cv_layer(state, fock.CVLayerParams.from_vector(self.n_modes, params), self.leak_tol)
        return np.array([fock.quadrature_x(state, m) for m in range(self.n_modes)])

    def forward(self, inputs: np.ndarray, params: np.ndarray) -> np.ndarray:
        return np.stack([self._outputs(row, params) for row in np.asarray(inputs, dtype=float)])

    def value_and_jacobian(self, inputs: np.ndarray, params: np.ndarray):
        inputs = np.asarray(inputs, dtype=float)
        batch = inputs.shape[0]
        eps = self.fd_epsilon
        values = np.empty((batch, self.n_outputs))
        j_params = np.empty((batch, self.n_outputs, self.n_params))
        j_inputs = np.empty((batch, self.n_outputs, self.n_inputs))
        for b in range(batch):
            values[b] = self._outputs(inputs[b], params)
            for j in range(self.n_params):
                bumped = params.copy()
                bumped[j] += eps
                hi = self._outputs(inputs[b], bumped)
                bumped[j] -= 2.0 * eps
                lo = self._outputs(inputs[b], bumped)
                j_params[b, :, j] = (hi - lo) / (2.0 * eps)
            for j in range(self.n_inputs):
                bumped = inputs[b].copy()
                bumped[j] += eps
                hi = self._outputs(bumped, params)
                bumped[j] -= 2.0 * eps
                lo = self._outputs(bumped, params)
                j_inputs[b, :, j] = (hi - lo) / (2.0 * eps)
        return values, j_params, j_inputs


class HybridRegressor(BaseEstimator, RegressorMixin):
    """Dense -> middle -> dense regressor trained with mini-batch SGD.

    ``middle`` picks the central block: "quantum" (default), "photonic",
    "classical" or "identity".  The input layer maps the feature width to
    ``n_wires``; the output layer maps the middle's outputs to one target.

    Targets are min-max normalized to [0, 1] inside ``fit``; a fixed learning
    rate against raw dollar-scale residuals either freezes or destabilizes
    the bounded middle block.  Predictions and recorded losses are always in
    the original target units.  With a fixed seed fits are bit-reproducible.
    """

    def __init__(self, middle="quantum", n_wires=9, n_layers=1, entangler="cnot",
                 rotation_axis="y", epochs=25, learning_rate=0.08, batch_size=5,
                 seed=0, gradient_method="shift", fd_epsilon=1e-6,
                 cutoff=fock.DEFAULT_CUTOFF, max_elements=fock.DEFAULT_MAX_ELEMENTS,
                 leak_tol=fock.DEFAULT_LEAK_TOL, input_activation="linear"):
        self.middle = middle
        self.n_wires = n_wires
        self.n_layers = n_layers
        self.entangler = entangler
        self.rotation_axis = rotation_axis
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed
        self.gradient_method = gradient_method
        self.fd_epsilon = fd_epsilon
        self.cutoff = cutoff
        self.max_elements = max_elements
        self.leak_tol = leak_tol
        self.input_activation = input_activation

    def _build_middle(self):
        if self.middle == "quantum":
            return QuantumMiddle(self.n_wires, self.n_layers, self.entangler,
                                 self.rotation_axis, self.gradient_method, self.fd_epsilon)
        if self.middle == "classical":
            return ClassicalMiddle(self.n_wires)
        if self.middle == "photonic":
            return FockMiddle(self.n_wires, self.cutoff, self.max_elements,
                              self.leak_tol, self.fd_epsilon)
        if self.middle == "identity":
            return IdentityMiddle(self.n_wires)
        raise ContractError(f"middle must be one of {MIDDLE_KINDS}, got {self.middle!r}")

    def fit(self, X, y, X_val=None, y_val=None):
        """Train on (X, y); optional (X_val, y_val) adds a validation curve."""
        config = TrainConfig(self.epochs, self.learning_rate, self.batch_size,
                             self.seed, self.gradient_method, self.fd_epsilon)
        X = _check_matrix(X, "X")
        y = _check_targets(y, X.shape[0])
        if X_val is not None:
            X_val = _check_matrix(X_val, "X_val")
            if X_val.shape[1] != X.shape[1]:
                raise ContractError(
                    f"X_val has {X_val.shape[1]} columns, X has {X.shape[1]}"
                )
            y_val = _check_targets(y_val, X_val.shape[0])
        elif y_val is not None:
            raise ContractError("y_val given without X_val")

        start = time.perf_counter()
        middle = self._build_middle()
        # constant targets degrade to offset-only normalization
        self.target_offset_ = float(y.min())
        span = float(y.max() - y.min())
        self.target_scale_ = span if span > 0.0 else 1.0
        y_scaled = (y - self.target_offset_) / self.target_scale_
        init_rng, shuffle_rng, sample_rng = [
            np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(3)
        ]
        n_features = X.shape[1]
        bound_in = 1.0 / np.sqrt(n_features)
        bound_out = 1.0 / np.sqrt(middle.n_outputs)
        # draw order is fixed: input weights, input bias, middle, output weights, output bias
        self.input_layer_ = DenseLayer(
            init_rng.uniform(-bound_in, bound_in, (middle.n_inputs, n_features)),
            init_rng.uniform(-bound_in, bound_in, middle.n_inputs),
            self.input_activation,
        )
        self.middle_ = middle
        self.middle_params_ = middle.init_params(init_rng)
        self.output_layer_ = DenseLayer(
            init_rng.uniform(-bound_out, bound_out, (1, middle.n_outputs)),
            init_rng.uniform(-bound_out, bound_out, 1),
        )
        self._sample_rng = sample_rng
        self.n_features_in_ = n_features

        train_losses: list[float] = []
        val_losses: list[float] | None = None if X_val is None else []
        n = X.shape[0]
        for epoch in range(1, config.epochs + 1):
            order = shuffle_rng.permutation(n)
            for batch_index, start_row in enumerate(range(0, n, config.batch_size)):
                rows = order[start_row : start_row + config.batch_size]
                try:
                    grads = hybrid_loss_gradient(self, X[rows], y_scaled[rows])
                except DivergenceError as exc:
                    raise DivergenceError(
                        f"training diverged at epoch {epoch}, batch {batch_index}: {exc}"
                    ) from exc
                self._write_params(sgd_step(self._params(), grads, config.learning_rate))
            train_loss = mse_loss(self.predict(X), y)
            if not np.isfinite(train_loss):
                raise DivergenceError(f"non-finite training loss after epoch {epoch}")
            train_losses.append(train_loss)
            if val_losses is not None:
                val_losses.append(mse_loss(self.predict(X_val), y_val))
        self.train_losses_ = train_losses
        self.val_losses_ = val_losses
        final = {k: np.array(v, copy=True) for k, v in self._params().items()}
        self.report_ = TrainReport(train_losses, val_losses, time.perf_counter() - start, final)
        return self

    def predict(self, X) -> np.ndarray:
        """Deterministic predictions from exact expectations."""
        self._check_fitted()
        X = _check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        u = self.input_layer_.forward(X)
        z = self.middle_.forward(u, self.middle_params_)
        raw = (z @ self.output_layer_.weights.T + self.output_layer_.bias)[:, 0]
        return raw * self.target_scale_ + self.target_offset_

    def predict_sampled(self, X, shots: int, seed=None) -> np.ndarray:
        """Predictions with binomial measurement noise on each wire's <Z>.

        Only meaningful for the quantum middle; ``shots`` simulated
        measurements per wire replace the exact expectations.
        """
        self._check_fitted()
        if not isinstance(self.middle_, QuantumMiddle):
            raise ContractError("sampled prediction requires the quantum middle")
        if shots < 1:
            raise ContractError(f"shots must be positive, got {shots}")
        X = _check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        u = self.input_layer_.forward(X)
        amps = self.middle_.states(u, self.middle_params_)
        z = expectations_z(amps, self.middle_.program.n_qubits, range(self.middle_.n_outputs))
        p_up = np.clip((1.0 + z) / 2.0, 0.0, 1.0)
        rng = self._sample_rng if seed is None else np.random.default_rng(seed)
        z_hat = 2.0 * rng.binomial(shots, p_up) / shots - 1.0
        raw = (z_hat @ self.output_layer_.weights.T + self.output_layer_.bias)[:, 0]
        return raw * self.target_scale_ + self.target_offset_

    def _params(self) -> dict:
        return {
            "w_in": self.input_layer_.weights,
            "b_in": self.input_layer_.bias,
            "middle": self.middle_params_,
            "w_out": self.output_layer_.weights,
            "b_out": self.output_layer_.bias,
        }

    def _write_params(self, params: dict) -> None:
        self.input_layer_.weights = params["w_in"]
        self.input_layer_.bias = params["b_in"]
        self.middle_params_ = params["middle"]
        self.output_layer_.weights = params["w_out"]
        self.output_layer_.bias = params["b_out"]

    def _check_fitted(self) -> None:
        if not hasattr(self, "input_layer_"):
            raise NotFittedError("HybridRegressor is not fitted")


def _check_matrix(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ContractError(f"{name} must be a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractError(f"{name} entries must be finite")
    return X


def _check_targets(y, n_rows: int) -> np.ndarray:
    if y is None:
        raise ContractError("targets are required")
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != n_rows:
        raise ContractError(f"{y.size} target(s) for {n_rows} row(s)")
    if not np.all(np.isfinite(y)):
        raise ContractError("targets must be finite")
    return y
