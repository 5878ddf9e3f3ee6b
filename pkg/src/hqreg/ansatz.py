"""Layered variational circuit templates.

The main template is the strongly entangling layout: every layer applies a
general three-angle rotation to each wire and then a ring of two-qubit
entanglers whose step size grows with the layer index.  A rotations-only
variant (same rotation grid, no entanglers) is provided as a comparison
circuit for descriptor studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError
from .statevector import CircuitProgram, GateInstruction, Slot

ENTANGLERS = ("cnot", "cz")


@dataclass(frozen=True)
class AnsatzSpec:
    """Shape of a layered ansatz: wire count, layer count and entangler kind."""

    n_wires: int
    n_layers: int = 1
    entangler: str = "cnot"

    def __post_init__(self) -> None:
        if self.n_wires < 1:
            raise ContractError(f"n_wires must be positive, got {self.n_wires}")
        if self.n_layers < 1:
            raise ContractError(f"n_layers must be positive, got {self.n_layers}")
        if self.entangler not in ENTANGLERS:
            raise ContractError(f"entangler must be one of {ENTANGLERS}, got {self.entangler!r}")


def param_count(spec: AnsatzSpec) -> int:
    """Three rotation angles per wire per layer."""
    return 3 * spec.n_layers * spec.n_wires


def strongly_entangling_layers(spec: AnsatzSpec) -> CircuitProgram:
    """Rotation grid plus ring entanglers.

    Slot layout is the C-order flattening of a (layers, wires, 3) tensor.  In
    layer l (0-based) wire i is entangled with wire (i + r) mod n where
    r = (l mod (n - 1)) + 1, so consecutive layers use different ring strides.
    """
    n = spec.n_wires
    gates = []
    for layer in range(spec.n_layers):
        gates.extend(_rotation_row(layer, n))
        if n >= 2:
            stride = (layer % (n - 1)) + 1
            for i in range(n):
                gates.append(GateInstruction(spec.entangler, (i, (i + stride) % n)))
    return CircuitProgram(n, tuple(gates), n_params=param_count(spec))


def rotation_layers(spec: AnsatzSpec) -> CircuitProgram:
    """The same rotation grid with no entanglers; product states only."""
    gates = []
    for layer in range(spec.n_layers):
        gates.extend(_rotation_row(layer, spec.n_wires))
    return CircuitProgram(spec.n_wires, tuple(gates), n_params=param_count(spec))


def init_ansatz_params(spec: AnsatzSpec, rng: np.random.Generator) -> np.ndarray:
    """Angles drawn uniformly from [0, 2*pi), flattened to match the slot layout."""
    return rng.uniform(0.0, 2.0 * np.pi, size=param_count(spec))


def _rotation_row(layer: int, n_wires: int):
    for wire in range(n_wires):
        base = 3 * (layer * n_wires + wire)
        yield GateInstruction("rot", wire, (Slot(base), Slot(base + 1), Slot(base + 2)))
