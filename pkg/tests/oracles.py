"""Brute-force reference implementations used only by the test suite.

Everything here builds explicit 2^n x 2^n matrices or does full partial
traces, trading speed for obviousness, so the production code can be checked
against an independent formulation.
"""

import numpy as np

from hqreg.statevector import CircuitProgram, GateInstruction, Slot

I2 = np.eye(2, dtype=complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def rx(t):
    return np.array(
        [[np.cos(t / 2), -1j * np.sin(t / 2)], [-1j * np.sin(t / 2), np.cos(t / 2)]]
    )


def ry(t):
    return np.array(
        [[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]], dtype=complex
    )


def rz(t):
    return np.array([[np.exp(-0.5j * t), 0.0], [0.0, np.exp(0.5j * t)]])


def rot(a, b, c):
    return rz(c) @ ry(b) @ rz(a)


def embed(n_qubits, ops):
    """Kron product over wires 0..n-1 with wire 0 as the most significant bit."""
    out = np.array([[1.0 + 0.0j]])
    for w in range(n_qubits):
        out = np.kron(out, ops.get(w, I2))
    return out


def gate_unitary(n_qubits, gate, theta=()):
    theta = np.asarray(theta, dtype=float)
    vals = [theta[p.index] if isinstance(p, Slot) else p for p in gate.params]
    kind = gate.kind
    if kind == "h":
        return embed(n_qubits, {gate.wires[0]: H})
    if kind in ("rx", "ry", "rz"):
        mat = {"rx": rx, "ry": ry, "rz": rz}[kind](vals[0])
        return embed(n_qubits, {gate.wires[0]: mat})
    if kind == "rot":
        return embed(n_qubits, {gate.wires[0]: rot(*vals)})
    control, target = gate.wires
    p0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    p1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    tgt = X if kind == "cnot" else Z
    return embed(n_qubits, {control: p0}) + embed(n_qubits, {control: p1, target: tgt})


def program_unitary(program, theta=()):
    dim = 1 << program.n_qubits
    u = np.eye(dim, dtype=complex)
    for gate in program.instructions:
        u = gate_unitary(program.n_qubits, gate, theta) @ u
    return u


def run_oracle(program, theta=(), initial=None):
    dim = 1 << program.n_qubits
    if initial is None:
        vec = np.zeros(dim, dtype=complex)
        vec[0] = 1.0
    else:
        vec = np.asarray(initial, dtype=complex)
    return program_unitary(program, theta) @ vec


def reduced_density(amps, n_qubits, wire):
    """One-qubit reduced density matrix by full partial trace."""
    psi = np.moveaxis(np.asarray(amps).reshape((2,) * n_qubits), wire, 0).reshape(2, -1)
    return psi @ psi.conj().T


def random_state(rng, n_qubits):
    dim = 1 << n_qubits
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def random_program(rng, n_qubits, n_gates, n_params=0):
    """A random mixed-gate program; slots are drawn uniformly if n_params > 0."""
    kinds = ["rx", "ry", "rz", "rot", "h"] + (["cnot", "cz"] if n_qubits > 1 else [])
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind in ("cnot", "cz"):
            wires = tuple(rng.choice(n_qubits, size=2, replace=False).tolist())
            gates.append(GateInstruction(kind, wires))
            continue
        wire = int(rng.integers(n_qubits))
        arity = 3 if kind == "rot" else (0 if kind == "h" else 1)
        params = []
        for _ in range(arity):
            if n_params and rng.random() < 0.5:
                params.append(Slot(int(rng.integers(n_params))))
            else:
                params.append(float(rng.uniform(0.0, 2.0 * np.pi)))
        gates.append(GateInstruction(kind, wire, tuple(params)))
    return CircuitProgram(n_qubits, tuple(gates), n_params)
