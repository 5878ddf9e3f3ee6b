"""Gradients for circuit expectations and the hybrid model loss.

Two routes are provided: generic finite differences over any scalar function,
and the exact parameter-shift rule for per-wire <Z> expectations of circuit
programs.  Every rotation gate here has a generator with eigenvalues +-1/2,
so d<Z>/dt = (<Z>(t + pi/2) - <Z>(t - pi/2)) / 2 exactly.

Shifted evaluations are batched: one run_batch call evaluates all 2P shifted
parameter rows (chunked to bound memory), which is what makes descriptor
scans and training tractable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encodings import EncodingSpec, angle_encoding_program
from .exceptions import ContractError, DivergenceError
from .statevector import CircuitProgram, ROTATION_KINDS, expectations_z

SCHEMES = ("forward", "central")

# cap on amplitudes held at once by a chunked shifted-batch evaluation
_CHUNK_BUDGET = 2_000_000


@dataclass(frozen=True)
class FiniteDiffConfig:
    """Step size and scheme for numeric differentiation."""

    epsilon: float = 1e-6
    scheme: str = "central"

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 1.0):
            raise ContractError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.scheme not in SCHEMES:
            raise ContractError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


@dataclass
class QuantumJacobian:
    """Circuit outputs with jacobians w.r.t. trainable angles and input angles."""

    values: np.ndarray
    d_theta: np.ndarray
    d_x: np.ndarray


def finite_diff_gradient(f, theta, config: FiniteDiffConfig = FiniteDiffConfig()) -> np.ndarray:
    """Numeric gradient of scalar ``f`` at ``theta``.

    Forward differences cost P+1 evaluations, central 2P; central error decays
    as epsilon^2 versus epsilon for forward.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    grad = np.empty_like(theta)
    eps = config.epsilon
    base = float(f(theta)) if config.scheme == "forward" else None
    if base is not None and not np.isfinite(base):
        raise DivergenceError("non-finite function value at the base point")
    for i in range(theta.size):
        bumped = theta.copy()
        bumped[i] += eps
        hi = float(f(bumped))
        if config.scheme == "forward":
            lo = base
            denom = eps
        else:
            bumped[i] -= 2.0 * eps
            lo = float(f(bumped))
            denom = 2.0 * eps
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise DivergenceError(f"non-finite function value at coordinate {i}")
        grad[i] = (hi - lo) / denom
    return grad


def batched_shift_jacobian(program: CircuitProgram, pmat: np.ndarray, wires) -> tuple[np.ndarray, np.ndarray]:
    """Values and full parameter-shift jacobian for a batch of parameter rows.

    ``pmat`` has shape (batch, n_params); returns values of shape
    (batch, len(wires)) and a jacobian of shape (batch, len(wires), n_params).
    """
    _require_shift_rule(program)
    pmat = np.asarray(pmat, dtype=float)
    if pmat.ndim != 2 or pmat.shape[1] != program.n_params:
        raise ContractError(
            f"parameter matrix of shape {pmat.shape} does not match n_params={program.n_params}"
        )
    batch, n_params = pmat.shape
    wires = list(wires)
    rows_per_sample = 2 * n_params + 1
    dim = 1 << program.n_qubits
    chunk = max(1, _CHUNK_BUDGET // max(1, rows_per_sample * dim))
    values = np.empty((batch, len(wires)))
    jac = np.empty((batch, len(wires), n_params))
    for start in range(0, batch, chunk):
        rows = pmat[start : start + chunk]
        blocks = [rows]
        for j in range(n_params):
            plus = rows.copy()
            plus[:, j] += np.pi / 2.0
            minus = rows.copy()
            minus[:, j] -= np.pi / 2.0
            blocks.extend((plus, minus))
        evs = expectations_z(
            program.run_batch(np.concatenate(blocks, axis=0)), program.n_qubits, wires
        )
        b = rows.shape[0]
        values[start : start + b] = evs[:b]
        for j in range(n_params):
            plus = evs[(2 * j + 1) * b : (2 * j + 2) * b]
            minus = evs[(2 * j + 2) * b : (2 * j + 3) * b]
            jac[start : start + b, :, j] = (plus - minus) / 2.0
    return values, jac


def batched_fd_jacobian(
    program: CircuitProgram, pmat: np.ndarray, wires, config: FiniteDiffConfig = FiniteDiffConfig()
) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference counterpart of :func:`batched_shift_jacobian`.

    Same shapes and batching strategy, but slots are bumped by ``epsilon``
    instead of pi/2.  Kept for parity checks against the exact rule and for
    runs that deliberately reproduce numeric differentiation.
    """
    pmat = np.asarray(pmat, dtype=float)
    if pmat.ndim != 2 or pmat.shape[1] != program.n_params:
        raise ContractError(
            f"parameter matrix of shape {pmat.shape} does not match n_params={program.n_params}"
        )
    batch, n_params = pmat.shape
    wires = list(wires)
    eps = config.epsilon
    values = expectations_z(program.run_batch(pmat), program.n_qubits, wires)
    jac = np.empty((batch, len(wires), n_params))
    blocks = []
    for j in range(n_params):
        plus = pmat.copy()
        plus[:, j] += eps
        blocks.append(plus)
        if config.scheme == "central":
            minus = pmat.copy()
            minus[:, j] -= eps
            blocks.append(minus)
    evs = expectations_z(
        program.run_batch(np.concatenate(blocks, axis=0)), program.n_qubits, wires
    )
    per = 2 if config.scheme == "central" else 1
    for j in range(n_params):
        hi = evs[per * j * batch : (per * j + 1) * batch]
        if config.scheme == "central":
            lo = evs[(per * j + 1) * batch : (per * j + 2) * batch]
            jac[:, :, j] = (hi - lo) / (2.0 * eps)
        else:
            jac[:, :, j] = (hi - values) / eps
    if not np.all(np.isfinite(jac)):
        raise DivergenceError("non-finite finite-difference jacobian")
    return values, jac


def shift_derivative(program: CircuitProgram, pmat: np.ndarray, slot: int, wire: int) -> np.ndarray:
    """d<Z_wire>/d(slot) for every parameter row; returns shape (batch,)."""
    _require_shift_rule(program)
    pmat = np.asarray(pmat, dtype=float)
    if not 0 <= slot < program.n_params:
        raise ContractError(f"slot {slot} out of range for {program.n_params} parameter(s)")
    plus = pmat.copy()
    plus[:, slot] += np.pi / 2.0
    minus = pmat.copy()
    minus[:, slot] -= np.pi / 2.0
    evs = expectations_z(
        program.run_batch(np.concatenate([plus, minus], axis=0)), program.n_qubits, [wire]
    )[:, 0]
    batch = pmat.shape[0]
    return (evs[:batch] - evs[batch:]) / 2.0


def param_shift_jacobian(circuit: CircuitProgram, theta, x, encoding: EncodingSpec, wires=None) -> QuantumJacobian:
    """Exact jacobians of per-wire <Z> after angle encoding plus ``circuit``.

    The feature vector ``x`` enters as encoding angles, so the same shift rule
    yields d<Z>/dx (the input jacobian) alongside d<Z>/dtheta.
    """
    if encoding.scheme != "angle":
        raise ContractError(
            f"input jacobians need an angle encoding, got scheme {encoding.scheme!r}"
        )
    if encoding.n_wires != circuit.n_qubits:
        raise ContractError(
            f"encoding covers {encoding.n_wires} wire(s) but circuit has {circuit.n_qubits}"
        )
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != encoding.n_wires:
        raise ContractError(f"expected {encoding.n_wires} feature(s), got {x.size}")
    theta = np.asarray(theta, dtype=float).reshape(-1)
    combined = angle_encoding_program(encoding).concat(circuit)
    pvec = np.concatenate([x, theta])[None, :]
    if wires is None:
        wires = range(circuit.n_qubits)
    values, jac = batched_shift_jacobian(combined, pvec, wires)
    n = encoding.n_wires
    return QuantumJacobian(values=values[0], d_theta=jac[0, :, n:], d_x=jac[0, :, :n])


def hybrid_loss_gradient(model, X, y) -> dict[str, np.ndarray]:
    """Exact MSE gradient for a dense -> quantum/middle -> dense model.

    ``model`` must expose ``input_layer_``, ``middle_``, ``middle_params_``
    and ``output_layer_`` (see models.HybridRegressor).  Returns a dict with
    keys w_in, b_in, middle, w_out, b_out.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ContractError(f"X of shape {X.shape} does not match {y.size} target(s)")
    batch = X.shape[0]
    inp, out = model.input_layer_, model.output_layer_
    u_pre = X @ inp.weights.T + inp.bias
    u = inp.activate(u_pre)
    z, j_params, j_inputs = model.middle_.value_and_jacobian(u, model.middle_params_)
    y_hat = (z @ out.weights.T + out.bias)[:, 0]
    if not np.all(np.isfinite(y_hat)):
        raise DivergenceError("non-finite model output in gradient pass")
    resid = 2.0 * (y_hat - y) / batch
    g_w_out = (resid[:, None] * z).sum(axis=0)[None, :]
    g_b_out = np.array([resid.sum()])
    dz = resid[:, None] * out.weights[0][None, :]
    g_middle = np.einsum("bo,bop->p", dz, j_params)
    du = np.einsum("bo,bom->bm", dz, j_inputs) * inp.activate_grad(u_pre)
    g_w_in = du.T @ X
    g_b_in = du.sum(axis=0)
    return {
        "w_in": g_w_in,
        "b_in": g_b_in,
        "middle": g_middle,
        "w_out": g_w_out,
        "b_out": g_b_out,
    }


def _require_shift_rule(program: CircuitProgram) -> None:
    for gate in program.instructions:
        if gate.slot_indices() and gate.kind not in ROTATION_KINDS:
            raise ContractError(f"gate kind {gate.kind!r} has no parameter-shift rule")
