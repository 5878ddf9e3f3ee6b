"""Dense statevector simulator for small qubit registers.

Conventions:
  * Wire 0 is the most significant bit of the computational-basis index, so
    for two wires the amplitude order is |00>, |01>, |10>, |11>.
  * Rotation gates follow the exp(-i * theta * G / 2) convention, e.g.
    ``RY(t) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]``, and
    ``rot(a, b, c)`` is the matrix product ``RZ(c) @ RY(b) @ RZ(a)`` (the
    ``RZ(a)`` factor acts on the state first).
  * Amplitudes are complex128.  Gates are applied by reshaping the amplitude
    array; no 2^n x 2^n matrix is ever materialised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError, ResourceLimitError

MAX_QUBITS = 14

ROTATION_KINDS = ("rx", "ry", "rz", "rot")

# kind -> (number of wires, number of parameters)
GATE_SHAPES = {
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "rot": (1, 3),
    "h": (1, 0),
    "cnot": (2, 0),
    "cz": (2, 0),
}

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class Slot:
    """Symbolic reference to entry ``index`` of a parameter vector."""

    index: int

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index < 0:
            raise ContractError(f"slot index must be a non-negative int, got {self.index!r}")


@dataclass(frozen=True)
class GateInstruction:
    """One gate with target wires and parameters (floats or Slots)."""

    kind: str
    wires: tuple[int, ...]
    params: tuple = ()

    def __post_init__(self) -> None:
        kind = str(self.kind).lower()
        if kind not in GATE_SHAPES:
            raise ContractError(f"unknown gate kind {self.kind!r}")
        wires = self.wires if isinstance(self.wires, (tuple, list)) else (self.wires,)
        wires = tuple(int(w) for w in wires)
        params = self.params if isinstance(self.params, (tuple, list)) else (self.params,)
        params = tuple(p if isinstance(p, Slot) else float(p) for p in params)
        n_wires, n_params = GATE_SHAPES[kind]
        if len(wires) != n_wires:
            raise ContractError(f"{kind} acts on {n_wires} wire(s), got {wires}")
        if len(set(wires)) != len(wires):
            raise ContractError(f"gate wires must be distinct, got {wires}")
        if len(params) != n_params:
            raise ContractError(f"{kind} takes {n_params} parameter(s), got {len(params)}")
        for p in params:
            if not isinstance(p, Slot) and not np.isfinite(p):
                raise ContractError(f"{kind} parameter must be finite, got {p!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "wires", wires)
        object.__setattr__(self, "params", params)

    def slot_indices(self) -> list[int]:
        return [p.index for p in self.params if isinstance(p, Slot)]


@dataclass(frozen=True)
class CircuitProgram:
    """An ordered gate list over ``n_qubits`` wires with ``n_params`` free slots.

    Programs are symbolic: parameters may be concrete floats or :class:`Slot`
    references into a parameter vector supplied at run time.
    """

    n_qubits: int
    instructions: tuple[GateInstruction, ...]
    n_params: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ContractError(f"need at least one qubit, got {self.n_qubits}")
        if self.n_params < 0:
            raise ContractError(f"n_params must be non-negative, got {self.n_params}")
        instructions = tuple(self.instructions)
        for gate in instructions:
            for w in gate.wires:
                if not 0 <= w < self.n_qubits:
                    raise ContractError(f"wire {w} out of range for {self.n_qubits} qubit(s)")
            for s in gate.slot_indices():
                if s >= self.n_params:
                    raise ContractError(
                        f"slot {s} out of range; program declares {self.n_params} parameter(s)"
                    )
        object.__setattr__(self, "instructions", instructions)

    def __len__(self) -> int:
        return len(self.instructions)

    def concat(self, other: "CircuitProgram") -> "CircuitProgram":
        """Append ``other``, shifting its slots past this program's slots."""
        if other.n_qubits != self.n_qubits:
            raise ContractError(
                f"cannot concatenate programs on {self.n_qubits} and {other.n_qubits} qubits"
            )
        shifted = []
        for gate in other.instructions:
            params = tuple(
                Slot(p.index + self.n_params) if isinstance(p, Slot) else p for p in gate.params
            )
            shifted.append(GateInstruction(gate.kind, gate.wires, params))
        return CircuitProgram(
            self.n_qubits,
            self.instructions + tuple(shifted),
            self.n_params + other.n_params,
        )

    def run(self, theta=(), initial=None) -> "StateVector":
        """Evolve |0...0> (or ``initial``) under the program with slots bound to ``theta``."""
        row = np.asarray(theta, dtype=float).reshape(1, -1)
        return StateVector(self.n_qubits, self.run_batch(row, initial=initial)[0])

    def run_batch(self, thetas, initial=None) -> np.ndarray:
        """Evolve one register per row of ``thetas``; returns (batch, 2**n) amplitudes."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim != 2:
            raise ContractError(f"thetas must be 2-D (batch, n_params), got shape {thetas.shape}")
        if thetas.shape[1] != self.n_params:
            raise ContractError(
                f"binding length {thetas.shape[1]} does not match n_params={self.n_params}"
            )
        if thetas.size and not np.all(np.isfinite(thetas)):
            raise ContractError("parameter bindings must be finite")
        batch = thetas.shape[0]
        dim = 1 << self.n_qubits
        if initial is None:
            amps = np.zeros((batch, dim), dtype=complex)
            amps[:, 0] = 1.0
        else:
            base = initial.amps if isinstance(initial, StateVector) else np.asarray(initial, dtype=complex)
            if base.shape != (dim,):
                raise ContractError(f"initial state has length {base.shape}, expected ({dim},)")
            amps = np.tile(base, (batch, 1))
        for gate in self.instructions:
            amps = _apply_batch(amps, self.n_qubits, gate, thetas)
        return amps


@dataclass
class StateVector:
    """A pure state over ``n_qubits`` wires; ``amps`` has length 2**n_qubits."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ContractError(f"need at least one qubit, got {self.n_qubits}")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ContractError(
                f"amplitude array of shape {amps.shape} does not match {self.n_qubits} qubit(s)"
            )
        self.amps = amps

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def init_zero(n_qubits: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    """Allocate |0...0>.  Raises ResourceLimitError above ``max_qubits`` wires."""
    if n_qubits < 1:
        raise ContractError(f"need at least one qubit, got {n_qubits}")
    if n_qubits > max_qubits:
        raise ResourceLimitError(
            f"{n_qubits} qubits exceed the ceiling of {max_qubits} "
            f"(the statevector would need {1 << n_qubits} amplitudes)"
        )
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def apply_gate(state: StateVector, gate: GateInstruction, bound_params=None) -> StateVector:
    """Apply one gate to ``state`` in place and return it.

    ``bound_params`` supplies the parameter vector for any Slot the gate
    carries; concrete float parameters need no binding.
    """
    for w in gate.wires:
        if not 0 <= w < state.n_qubits:
            raise ContractError(f"wire {w} out of range for {state.n_qubits} qubit(s)")
    slots = gate.slot_indices()
    if bound_params is None:
        if slots:
            raise ContractError(f"gate has unbound slot(s) {slots} and no bound_params")
        theta = np.empty((1, 0))
    else:
        theta = np.asarray(bound_params, dtype=float).reshape(1, -1)
        if slots and max(slots) >= theta.shape[1]:
            raise ContractError(
                f"slot {max(slots)} out of range for binding of length {theta.shape[1]}"
            )
    batch = state.amps.reshape(1, -1)
    result = _apply_batch(batch, state.n_qubits, gate, theta)
    if result is not batch:
        state.amps = result.reshape(-1)
    return state


def expectation_z(state: StateVector, wire: int) -> float:
    """Exact <Z> on ``wire``: +1 for |0>, -1 for |1>."""
    _check_wire(state.n_qubits, wire)
    probs = state.probabilities.reshape(1 << wire, 2, -1)
    return float(probs[:, 0, :].sum() - probs[:, 1, :].sum())


def expectations_z(amps: np.ndarray, n_qubits: int, wires) -> np.ndarray:
    """Per-wire <Z> for a (batch, 2**n) amplitude array; returns (batch, len(wires))."""
    probs = np.abs(amps) ** 2
    out = np.empty((amps.shape[0], len(wires)))
    for k, w in enumerate(wires):
        _check_wire(n_qubits, w)
        t = probs.reshape(probs.shape[0], 1 << w, 2, -1)
        out[:, k] = t[:, :, 0, :].sum(axis=(1, 2)) - t[:, :, 1, :].sum(axis=(1, 2))
    return out


def sample_expectation_z(state: StateVector, wire: int, shots: int, seed) -> float:
    """Binomial estimate of <Z> from ``shots`` simulated measurements."""
    if shots <= 0:
        raise ContractError(f"shots must be positive, got {shots}")
    z = expectation_z(state, wire)
    p_up = min(max((1.0 + z) / 2.0, 0.0), 1.0)
    ups = np.random.default_rng(seed).binomial(shots, p_up)
    return float(2.0 * ups - shots) / shots


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 between two pure states on the same register."""
    if a.n_qubits != b.n_qubits:
        raise ContractError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def single_qubit_purity(state: StateVector, wire: int) -> float:
    """Tr(rho_wire^2) of the reduced one-qubit state; 1 iff unentangled with the rest."""
    _check_wire(state.n_qubits, wire)
    t = state.amps.reshape(1 << wire, 2, -1)
    rho = np.einsum("aib,ajb->ij", t, t.conj())
    return float(np.real(np.trace(rho @ rho)))


def single_qubit_purities(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    """Per-wire reduced purities for a (batch, 2**n) amplitude array."""
    batch = amps.shape[0]
    out = np.empty((batch, n_qubits))
    for w in range(n_qubits):
        t = amps.reshape(batch, 1 << w, 2, -1)
        rho = np.einsum("bpiq,bpjq->bij", t, t.conj())
        out[:, w] = np.einsum("bij,bji->b", rho, rho).real
    return out


def _check_wire(n_qubits: int, wire: int) -> None:
    if not 0 <= wire < n_qubits:
        raise ContractError(f"wire {wire} out of range for {n_qubits} qubit(s)")


def _resolve(params, thetas: np.ndarray, batch: int) -> np.ndarray:
    """Per-row angle columns for one gate: Slots read from thetas, floats broadcast."""
    if not params:
        return np.empty((batch, 0))
    cols = [
        thetas[:, p.index] if isinstance(p, Slot) else np.full(batch, p) for p in params
    ]
    return np.stack(cols, axis=1)


def _batch_matrices(kind: str, angles: np.ndarray) -> np.ndarray:
    """(batch, 2, 2) unitaries for a single-qubit gate with per-row angles."""
    batch = angles.shape[0]
    out = np.zeros((batch, 2, 2), dtype=complex)
    if kind == "h":
        out[:] = _H
    elif kind == "rx":
        t = angles[:, 0] / 2.0
        c, s = np.cos(t), np.sin(t)
        out[:, 0, 0] = c
        out[:, 0, 1] = -1j * s
        out[:, 1, 0] = -1j * s
        out[:, 1, 1] = c
    elif kind == "ry":
        t = angles[:, 0] / 2.0
        c, s = np.cos(t), np.sin(t)
        out[:, 0, 0] = c
        out[:, 0, 1] = -s
        out[:, 1, 0] = s
        out[:, 1, 1] = c
    elif kind == "rz":
        ph = np.exp(-0.5j * angles[:, 0])
        out[:, 0, 0] = ph
        out[:, 1, 1] = ph.conj()
    elif kind == "rot":
        # fused RZ(c) @ RY(b) @ RZ(a)
        a, b, c = angles[:, 0], angles[:, 1], angles[:, 2]
        cb, sb = np.cos(b / 2.0), np.sin(b / 2.0)
        out[:, 0, 0] = np.exp(-0.5j * (a + c)) * cb
        out[:, 0, 1] = -np.exp(0.5j * (a - c)) * sb
        out[:, 1, 0] = np.exp(-0.5j * (a - c)) * sb
        out[:, 1, 1] = np.exp(0.5j * (a + c)) * cb
    else:  # pragma: no cover - guarded by GateInstruction validation
        raise ContractError(f"unknown single-qubit kind {kind!r}")
    return out


def _apply_batch(amps: np.ndarray, n_qubits: int, gate: GateInstruction, thetas: np.ndarray) -> np.ndarray:
    """Apply one gate to every row of ``amps``.

    Single-qubit gates return a fresh array; two-qubit gates permute ``amps``
    in place and return it.
    """
    batch, dim = amps.shape
    if gate.kind in ("cnot", "cz"):
        t = amps.reshape((batch,) + (2,) * n_qubits)
        control, target = gate.wires
        sel = [slice(None)] * (n_qubits + 1)
        if gate.kind == "cnot":
            i10 = list(sel)
            i10[1 + control], i10[1 + target] = 1, 0
            i11 = list(sel)
            i11[1 + control], i11[1 + target] = 1, 1
            tmp = t[tuple(i10)].copy()
            t[tuple(i10)] = t[tuple(i11)]
            t[tuple(i11)] = tmp
        else:
            i11 = list(sel)
            i11[1 + control], i11[1 + target] = 1, 1
            t[tuple(i11)] = -t[tuple(i11)]
        return amps
    angles = _resolve(gate.params, thetas, batch)
    mats = _batch_matrices(gate.kind, angles)
    wire = gate.wires[0]
    pre = 1 << wire
    post = dim >> (wire + 1)
    t = amps.reshape(batch, pre, 2, post)
    return np.einsum("bij,bpjq->bpiq", mats, t).reshape(batch, dim)
