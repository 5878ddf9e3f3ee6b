"""Circuit-quality descriptors.

Three diagnostics for parameterised circuits: expressibility (KL divergence
between the circuit's state-pair fidelity distribution and the Haar one),
entangling capability (mean Meyer-Wallach entanglement over random parameter
draws) and a gradient-variance scan over qubit counts that exposes barren
plateaus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, strongly_entangling_layers
from .exceptions import ContractError
from .gradients import shift_derivative
from .statevector import CircuitProgram, MAX_QUBITS, StateVector, single_qubit_purities

_SMOOTHING = 1e-9


@dataclass(frozen=True)
class ExpressibilityConfig:
    """Sampling plan for the fidelity histogram."""

    n_samples: int = 5000
    n_bins: int = 75
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_samples < 100:
            raise ContractError(f"n_samples must be at least 100, got {self.n_samples}")
        if self.n_bins < 2:
            raise ContractError(f"n_bins must be at least 2, got {self.n_bins}")


@dataclass
class DescriptorReport:
    """Bundle of descriptor values for one circuit family."""

    expressibility_kl: float
    entangling_capability: float
    gradient_variance_by_qubits: dict[int, float]


def haar_fidelity_pdf(fid, hilbert_dim: int):
    """Density of |<a|b>|^2 for Haar-random pure states: (N-1)(1-F)^(N-2)."""
    if hilbert_dim < 2:
        raise ContractError(f"hilbert_dim must be at least 2, got {hilbert_dim}")
    fid = np.asarray(fid, dtype=float)
    if np.any(fid < 0.0) or np.any(fid > 1.0):
        raise ContractError("fidelities must lie in [0, 1]")
    out = (hilbert_dim - 1) * (1.0 - fid) ** (hilbert_dim - 2)
    return float(out) if out.ndim == 0 else out


def sample_fidelities(circuit: CircuitProgram, config: ExpressibilityConfig = ExpressibilityConfig()) -> np.ndarray:
    """Fidelities between pairs of states from independent uniform parameter draws.

    Both parameter sets are drawn from [0, 2*pi); the first full (S, P) block
    is drawn before the second so results are reproducible under the seed.
    """
    if circuit.n_params < 1:
        raise ContractError("circuit has no free parameters to sample")
    rng = np.random.default_rng(config.seed)
    shape = (config.n_samples, circuit.n_params)
    first = circuit.run_batch(rng.uniform(0.0, 2.0 * np.pi, size=shape))
    second = circuit.run_batch(rng.uniform(0.0, 2.0 * np.pi, size=shape))
    overlaps = np.einsum("bd,bd->b", first.conj(), second)
    return np.clip(np.abs(overlaps) ** 2, 0.0, 1.0)


def expressibility(circuit: CircuitProgram, config: ExpressibilityConfig = ExpressibilityConfig()) -> float:
    """KL divergence of the sampled fidelity histogram from the Haar prediction.

    Uses uniform bins on [0, 1]; both distributions get 1e-9 additive
    smoothing and renormalisation so empty bins stay finite.  Smaller is more
    expressive; 0 means Haar-indistinguishable at this resolution.
    """
    fids = sample_fidelities(circuit, config)
    edges = np.linspace(0.0, 1.0, config.n_bins + 1)
    empirical = np.histogram(fids, bins=edges)[0].astype(float) / config.n_samples
    dim = 1 << circuit.n_qubits
    # exact Haar mass per bin from the CDF 1 - (1 - F)^(N-1)
    haar = (1.0 - edges[:-1]) ** (dim - 1) - (1.0 - edges[1:]) ** (dim - 1)
    empirical = empirical + _SMOOTHING
    empirical /= empirical.sum()
    haar = haar + _SMOOTHING
    haar /= haar.sum()
    return float(np.sum(empirical * np.log(empirical / haar)))


def meyer_wallach_q(state: StateVector) -> float:
    """Global entanglement measure: 2 * (1 - mean single-qubit purity), in [0, 1]."""
    purities = single_qubit_purities(state.amps[None, :], state.n_qubits)[0]
    return float(2.0 * (1.0 - purities.mean()))


def entangling_capability(circuit: CircuitProgram, n_samples: int = 5000, seed=0) -> float:
    """Mean Meyer-Wallach measure over uniform [0, 2*pi) parameter draws."""
    if circuit.n_params < 1:
        raise ContractError("circuit has no free parameters to sample")
    if n_samples < 1:
        raise ContractError(f"n_samples must be positive, got {n_samples}")
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, 2.0 * np.pi, size=(n_samples, circuit.n_params))
    purities = single_qubit_purities(circuit.run_batch(thetas), circuit.n_qubits)
    q = 2.0 * (1.0 - purities.mean(axis=1))
    return float(q.mean())


def gradient_variance_scan(
    qubit_counts,
    n_samples: int = 500,
    seed=0,
    n_layers: int | None = None,
    slot: int = 1,
) -> dict[int, float]:
    """Variance of one <Z_0> partial derivative across uniform parameter draws.

    For each qubit count n a strongly entangling circuit with n layers
    (overridable via ``n_layers``) is sampled at ``n_samples`` uniform points
    and differentiated at ``slot`` via the shift rule.  Slot 1 is the middle
    (RY) angle of the first rotation, whose derivative is generically nonzero.
    Returns {n: variance}; shrinking variance with n is the barren-plateau
    signature.
    """
    if n_samples < 100:
        raise ContractError(f"n_samples must be at least 100, got {n_samples}")
    out: dict[int, float] = {}
    for n in qubit_counts:
        n = int(n)
        if not 1 <= n <= MAX_QUBITS:
            raise ContractError(f"qubit count {n} outside [1, {MAX_QUBITS}]")
        layers = n if n_layers is None else n_layers
        program = strongly_entangling_layers(AnsatzSpec(n, layers))
        rng = np.random.default_rng(seed)
        thetas = rng.uniform(0.0, 2.0 * np.pi, size=(n_samples, program.n_params))
        derivs = shift_derivative(program, thetas, slot, wire=0)
        out[n] = float(np.var(derivs))
    return out
