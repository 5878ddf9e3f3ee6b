"""Encodings that load classical feature vectors into quantum states.

Three schemes are supported: basis (uniform superposition over bitstrings),
angle (one rotation per wire, angle = feature value) and amplitude (features
become normalised amplitudes).  Angle encoding is expressed as a
:class:`~hqreg.statevector.CircuitProgram` so it can be composed with an
ansatz and differentiated; the other two build states directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError
from .statevector import CircuitProgram, GateInstruction, Slot, StateVector, init_zero

SCHEMES = ("basis", "angle", "amplitude")
AXES = ("x", "y", "z")


@dataclass(frozen=True)
class EncodingSpec:
    """How to map a feature vector onto ``n_wires`` qubits."""

    scheme: str
    n_wires: int
    rotation_axis: str = "y"

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ContractError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.n_wires < 1:
            raise ContractError(f"n_wires must be positive, got {self.n_wires}")
        if self.rotation_axis not in AXES:
            raise ContractError(f"rotation_axis must be one of {AXES}, got {self.rotation_axis!r}")


def basis_encode(bitstrings) -> StateVector:
    """Uniform superposition over the given computational basis bitstrings.

    Duplicates are collapsed first, so amplitudes are 1/sqrt(#unique).
    """
    unique = sorted(set(str(b) for b in bitstrings))
    if not unique:
        raise ContractError("need at least one bitstring")
    n_wires = len(unique[0])
    if n_wires == 0:
        raise ContractError("bitstrings must be non-empty")
    indices = []
    for bits in unique:
        if len(bits) != n_wires:
            raise ContractError(f"bitstring lengths differ: {bits!r} vs {n_wires} wires")
        if any(ch not in "01" for ch in bits):
            raise ContractError(f"bitstring {bits!r} contains characters other than 0/1")
        indices.append(int(bits, 2))
    state = init_zero(n_wires)
    state.amps[0] = 0.0
    state.amps[indices] = 1.0 / np.sqrt(len(indices))
    return state


def angle_encoding_program(spec: EncodingSpec) -> CircuitProgram:
    """Symbolic angle-encoding fragment with one slot per wire (slot i on wire i)."""
    if spec.scheme != "angle":
        raise ContractError(f"expected an angle spec, got scheme {spec.scheme!r}")
    return CircuitProgram(
        spec.n_wires,
        _angle_instructions([Slot(i) for i in range(spec.n_wires)], spec),
        n_params=spec.n_wires,
    )


def angle_encode(x, spec: EncodingSpec) -> CircuitProgram:
    """Concrete angle-encoding fragment for feature vector ``x``.

    Feature i becomes the rotation angle on wire i; with fewer features than
    wires the trailing wires are left untouched.
    """
    if spec.scheme != "angle":
        raise ContractError(f"expected an angle spec, got scheme {spec.scheme!r}")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size > spec.n_wires:
        raise ContractError(f"{x.size} features do not fit on {spec.n_wires} wire(s)")
    if x.size and not np.all(np.isfinite(x)):
        raise ContractError("features must be finite")
    return CircuitProgram(spec.n_wires, _angle_instructions(x.tolist(), spec))


def amplitude_encode(x, n_qubits: int) -> StateVector:
    """Normalise ``x``, zero-pad to 2**n_qubits and use it as the amplitude vector."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 0:
        raise ContractError("feature vector is empty")
    if not np.all(np.isfinite(x)):
        raise ContractError("features must be finite")
    dim = 1 << n_qubits
    if x.size > dim:
        raise ContractError(f"{x.size} features exceed {dim} amplitudes on {n_qubits} qubit(s)")
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ContractError("cannot amplitude-encode the zero vector")
    state = init_zero(n_qubits)
    state.amps[0] = 0.0
    state.amps[: x.size] = x / norm
    return state


def encode_state(x, spec: EncodingSpec) -> StateVector:
    """Run the chosen encoding and return the prepared state."""
    if spec.scheme == "basis":
        return basis_encode(x)
    if spec.scheme == "amplitude":
        return amplitude_encode(x, spec.n_wires)
    return angle_encode(x, spec).run()


def _angle_instructions(values, spec: EncodingSpec) -> tuple[GateInstruction, ...]:
    kind = "r" + spec.rotation_axis
    gates = []
    for wire, value in enumerate(values):
        if spec.rotation_axis == "z":
            # RZ alone is a phase on |0>; H first makes the angle observable
            gates.append(GateInstruction("h", wire))
        gates.append(GateInstruction(kind, wire, (value,)))
    return tuple(gates)
