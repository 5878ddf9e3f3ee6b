"""Truncated-Fock simulator for photonic continuous-variable circuits.

States live in a (cutoff,)*n_modes complex tensor holding number-basis
amplitudes.  Gate matrices for displacement, squeezing and beamsplitters are
built by exponentiating the exact generator in a padded number basis and then
cutting back to the working cutoff: the cut operator is genuinely subunitary,
so amplitude that would escape past the cutoff is really lost.  Each gate
application compares the norm before and after; a drop beyond the leak
tolerance raises TruncationError, and the cumulative deficit is tracked on
the state.  Rotation and Kerr gates are diagonal in the number basis and
therefore exact at any cutoff.

Conventions: displacement D(r, phi) = exp(alpha a+ - conj(alpha) a) with
alpha = r e^{i phi}; squeeze S(r) = exp((a^2 - a+^2) r / 2); beamsplitter
BS(theta, phi) = exp(theta (e^{i phi} a+ b - e^{-i phi} a b+)) so the
transmittance is cos^2(theta); rotation R(phi) = e^{i phi n}; Kerr
K(kappa) = e^{i kappa n^2}.  The position quadrature is x = (a + a+)/sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ContractError, ResourceLimitError, TruncationError

DEFAULT_CUTOFF = 8
DEFAULT_MAX_ELEMENTS = 100_000
DEFAULT_LEAK_TOL = 1e-4

# extra levels beyond 2*cutoff when exponentiating single-mode generators
_PAD = 8


@dataclass
class FockState:
    """Number-basis amplitudes for ``n_modes`` modes truncated at ``cutoff``."""

    n_modes: int
    cutoff: int
    amps: np.ndarray
    norm_deficit: float = 0.0

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise ContractError(f"need at least one mode, got {self.n_modes}")
        if self.cutoff < 2:
            raise ContractError(f"cutoff must be at least 2, got {self.cutoff}")
        self.amps = np.asarray(self.amps, dtype=complex)
        expected = (self.cutoff,) * self.n_modes
        if self.amps.shape != expected:
            raise ContractError(f"amplitude tensor shape {self.amps.shape}, expected {expected}")

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def copy(self) -> "FockState":
        return FockState(self.n_modes, self.cutoff, self.amps.copy(), self.norm_deficit)


def vacuum(
    n_modes: int,
    cutoff: int = DEFAULT_CUTOFF,
    max_elements: int = DEFAULT_MAX_ELEMENTS,
) -> FockState:
    """All modes in |0>.  Raises ResourceLimitError if cutoff**n_modes > max_elements."""
    if n_modes < 1:
        raise ContractError(f"need at least one mode, got {n_modes}")
    if cutoff < 2:
        raise ContractError(f"cutoff must be at least 2, got {cutoff}")
    elements = cutoff**n_modes
    if elements > max_elements:
        raise ResourceLimitError(
            f"cutoff**n_modes = {cutoff}**{n_modes} = {elements} elements "
            f"exceeds the budget of {max_elements}"
        )
    amps = np.zeros((cutoff,) * n_modes, dtype=complex)
    amps[(0,) * n_modes] = 1.0
    return FockState(n_modes, cutoff, amps)


def _lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def _expm_antihermitian(gen: np.ndarray) -> np.ndarray:
    """exp(gen) for anti-Hermitian gen via the eigendecomposition of i*gen."""
    evals, evecs = np.linalg.eigh(1j * gen)
    return (evecs * np.exp(-1j * evals)) @ evecs.conj().T


@lru_cache(maxsize=512)
def displacement_matrix(r: float, phi: float, cutoff: int) -> np.ndarray:
    """Cutoff x cutoff block of D(r, phi) exponentiated at a padded dimension."""
    pad = 2 * cutoff + _PAD
    a = _lowering(pad)
    alpha = r * np.exp(1j * phi)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return np.ascontiguousarray(_expm_antihermitian(gen)[:cutoff, :cutoff])


@lru_cache(maxsize=512)
def squeeze_matrix(r: float, cutoff: int) -> np.ndarray:
    """Cutoff x cutoff block of S(r) exponentiated at a padded dimension."""
    pad = 2 * cutoff + _PAD
    a = _lowering(pad)
    gen = (a @ a - a.conj().T @ a.conj().T) * (r / 2.0)
    return np.ascontiguousarray(_expm_antihermitian(gen)[:cutoff, :cutoff])


@lru_cache(maxsize=512)
def beamsplitter_matrix(theta: float, phi: float, cutoff: int) -> np.ndarray:
    """(cutoff^2, cutoff^2) block of BS(theta, phi).

    The generator conserves total photon number, so it is exponentiated block
    by block; a padded dimension of 2*cutoff makes every block that touches
    the kept indices complete, and the kept block is then cut out.
    """
    pad = 2 * cutoff
    dim = cutoff * cutoff
    out = np.zeros((dim, dim), dtype=complex)
    coeff = theta * np.exp(1j * phi)
    for total in range(2 * cutoff - 1):
        ms = np.arange(max(0, total - pad + 1), min(total, pad - 1) + 1)
        size = ms.size
        gen = np.zeros((size, size), dtype=complex)
        for i in range(size - 1):
            m, n = ms[i], total - ms[i]
            # <m+1, n-1| a+ b |m, n> = sqrt((m+1) n)
            amp = coeff * np.sqrt((m + 1.0) * n)
            gen[i + 1, i] = amp
            gen[i, i + 1] = -np.conj(amp)
        block = _expm_antihermitian(gen)
        keep = [i for i in range(size) if ms[i] < cutoff and total - ms[i] < cutoff]
        for i in keep:
            row = ms[i] * cutoff + (total - ms[i])
            for j in keep:
                col = ms[j] * cutoff + (total - ms[j])
                out[row, col] = block[i, j]
    return out


def _check_mode(state: FockState, mode: int) -> None:
    if not 0 <= mode < state.n_modes:
        raise ContractError(f"mode {mode} out of range for {state.n_modes} mode(s)")


def _check_finite(name: str, *values) -> None:
    for v in values:
        if not np.isfinite(v):
            raise ContractError(f"{name} parameter must be finite, got {v!r}")


def _account(state: FockState, before: float, label: str, leak_tol) -> None:
    after = state.norm_squared()
    drop = before - after
    if leak_tol is not None and drop > leak_tol:
        raise TruncationError(
            f"{label} leaked {drop:.3e} of squared norm (tolerance {leak_tol:g}); "
            f"raise the cutoff above {state.cutoff}"
        )
    state.norm_deficit = max(0.0, 1.0 - after)


def _apply_matrix(state: FockState, mode: int, matrix: np.ndarray) -> None:
    moved = np.tensordot(matrix, state.amps, axes=([1], [mode]))
    state.amps = np.ascontiguousarray(np.moveaxis(moved, 0, mode))


def _apply_diagonal(state: FockState, mode: int, diag: np.ndarray) -> None:
    shape = [1] * state.n_modes
    shape[mode] = state.cutoff
    state.amps = state.amps * diag.reshape(shape)


def displacement(state: FockState, mode: int, r: float, phi: float = 0.0, leak_tol=DEFAULT_LEAK_TOL) -> FockState:
    """Apply D(r, phi) to one mode in place."""
    _check_mode(state, mode)
    _check_finite("displacement", r, phi)
    before = state.norm_squared()
    _apply_matrix(state, mode, displacement_matrix(float(r), float(phi), state.cutoff))
    _account(state, before, f"displacement on mode {mode}", leak_tol)
    return state


def squeeze(state: FockState, mode: int, r: float, leak_tol=DEFAULT_LEAK_TOL) -> FockState:
    """Apply S(r) to one mode in place."""
    _check_mode(state, mode)
    _check_finite("squeeze", r)
    before = state.norm_squared()
    _apply_matrix(state, mode, squeeze_matrix(float(r), state.cutoff))
    _account(state, before, f"squeeze on mode {mode}", leak_tol)
    return state


def rotation(state: FockState, mode: int, phi: float) -> FockState:
    """Apply the exact number-basis phase e^{i phi n} to one mode."""
    _check_mode(state, mode)
    _check_finite("rotation", phi)
    n = np.arange(state.cutoff)
    _apply_diagonal(state, mode, np.exp(1j * phi * n))
    return state


def kerr(state: FockState, mode: int, kappa: float) -> FockState:
    """Apply the exact Kerr phase e^{i kappa n^2} to one mode."""
    _check_mode(state, mode)
    _check_finite("kerr", kappa)
    n = np.arange(state.cutoff)
    _apply_diagonal(state, mode, np.exp(1j * kappa * n.astype(float) ** 2))
    return state


def beamsplitter(state: FockState, mode_a: int, mode_b: int, theta: float, phi: float = 0.0, leak_tol=DEFAULT_LEAK_TOL) -> FockState:
    """Apply BS(theta, phi) to a mode pair in place."""
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise ContractError(f"beamsplitter modes must be distinct, got {mode_a}")
    _check_finite("beamsplitter", theta, phi)
    before = state.norm_squared()
    d = state.cutoff
    moved = np.moveaxis(state.amps, (mode_a, mode_b), (0, 1))
    flat = moved.reshape(d * d, -1)
    mixed = beamsplitter_matrix(float(theta), float(phi), d) @ flat
    state.amps = np.ascontiguousarray(
        np.moveaxis(mixed.reshape(moved.shape), (0, 1), (mode_a, mode_b))
    )
    _account(state, before, f"beamsplitter on modes ({mode_a}, {mode_b})", leak_tol)
    return state


def displacement_embedding(
    x,
    n_modes: int,
    cutoff: int = DEFAULT_CUTOFF,
    max_elements: int = DEFAULT_MAX_ELEMENTS,
    leak_tol=DEFAULT_LEAK_TOL,
) -> FockState:
    """Encode features as per-mode displacement amplitudes on vacuum."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size > n_modes:
        raise ContractError(f"{x.size} features do not fit on {n_modes} mode(s)")
    if x.size and not np.all(np.isfinite(x)):
        raise ContractError("features must be finite")
    state = vacuum(n_modes, cutoff, max_elements)
    for mode, value in enumerate(x):
        displacement(state, mode, float(value), 0.0, leak_tol)
    return state


def mesh_pairs(n_modes: int) -> list[tuple[int, int]]:
    """Adjacent-pair triangular mesh covering n*(n-1)/2 beamsplitters."""
    return [(i, i + 1) for row in range(n_modes - 1) for i in range(n_modes - 1 - row)]


@dataclass(frozen=True)
class CVLayerParams:
    """Parameters of one photonic layer on M modes.

    Layout: first interferometer (theta, phi per mesh pair, then a rotation
    per mode), squeeze magnitudes, second interferometer, displacement
    magnitudes and phases, Kerr strengths.  Total 2*M^2 + 4*M scalars.
    """

    bs1_theta: np.ndarray
    bs1_phi: np.ndarray
    rot1: np.ndarray
    squeeze_r: np.ndarray
    bs2_theta: np.ndarray
    bs2_phi: np.ndarray
    rot2: np.ndarray
    disp_r: np.ndarray
    disp_phi: np.ndarray
    kerr_kappa: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.rot1, dtype=float).reshape(-1).size
        pairs = m * (m - 1) // 2
        fields = {
            "bs1_theta": pairs, "bs1_phi": pairs, "rot1": m, "squeeze_r": m,
            "bs2_theta": pairs, "bs2_phi": pairs, "rot2": m,
            "disp_r": m, "disp_phi": m, "kerr_kappa": m,
        }
        for name, size in fields.items():
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if arr.size != size:
                raise ContractError(f"{name} must have {size} entries, got {arr.size}")
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self) -> int:
        return self.rot1.size

    @staticmethod
    def n_params(n_modes: int) -> int:
        return 2 * n_modes * n_modes + 4 * n_modes

    @classmethod
    def from_vector(cls, n_modes: int, vector) -> "CVLayerParams":
        vector = np.asarray(vector, dtype=float).reshape(-1)
        expected = cls.n_params(n_modes)
        if vector.size != expected:
            raise ContractError(f"expected {expected} parameters for {n_modes} mode(s), got {vector.size}")
        pairs = n_modes * (n_modes - 1) // 2
        sizes = [pairs, pairs, n_modes, n_modes, pairs, pairs, n_modes, n_modes, n_modes, n_modes]
        chunks = np.split(vector, np.cumsum(sizes)[:-1])
        return cls(*chunks)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([
            self.bs1_theta, self.bs1_phi, self.rot1, self.squeeze_r,
            self.bs2_theta, self.bs2_phi, self.rot2,
            self.disp_r, self.disp_phi, self.kerr_kappa,
        ])


def _interferometer(state: FockState, thetas, phis, rots, leak_tol) -> None:
    for (a, b), theta, phi in zip(mesh_pairs(state.n_modes), thetas, phis):
        beamsplitter(state, a, b, theta, phi, leak_tol)
    for mode, phi in enumerate(rots):
        rotation(state, mode, phi)


def cv_layer(state: FockState, params: CVLayerParams, leak_tol=DEFAULT_LEAK_TOL) -> FockState:
    """One photonic layer: interferometer, squeeze, interferometer, displace, Kerr."""
    if params.n_modes != state.n_modes:
        raise ContractError(
            f"parameters cover {params.n_modes} mode(s) but state has {state.n_modes}"
        )
    _interferometer(state, params.bs1_theta, params.bs1_phi, params.rot1, leak_tol)
    for mode, r in enumerate(params.squeeze_r):
        squeeze(state, mode, r, leak_tol)
    _interferometer(state, params.bs2_theta, params.bs2_phi, params.rot2, leak_tol)
    for mode, (r, phi) in enumerate(zip(params.disp_r, params.disp_phi)):
        displacement(state, mode, r, phi, leak_tol)
    for mode, kappa in enumerate(params.kerr_kappa):
        kerr(state, mode, kappa)
    return state


@lru_cache(maxsize=64)
def _quadrature_matrix(cutoff: int) -> np.ndarray:
    a = _lowering(cutoff)
    return (a + a.conj().T) / np.sqrt(2.0)


def quadrature_x(state: FockState, mode: int) -> float:
    """<x> on one mode; the imaginary residue (< 1e-10 for valid states) is dropped."""
    _check_mode(state, mode)
    moved = np.tensordot(_quadrature_matrix(state.cutoff), state.amps, axes=([1], [mode]))
    value = np.vdot(state.amps, np.moveaxis(moved, 0, mode))
    return float(value.real)


def number_expectation(state: FockState, mode: int) -> float:
    """<n> on one mode."""
    _check_mode(state, mode)
    probs = np.abs(state.amps) ** 2
    axes = tuple(i for i in range(state.n_modes) if i != mode)
    per_level = probs.sum(axis=axes)
    return float(np.dot(per_level, np.arange(state.cutoff)))
