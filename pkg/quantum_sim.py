"""
quantum_sim.py

Exact simulation of the single-layer quantum perceptron circuit.

The input register holds |x⟩ = |x_1⟩⊗...⊗|x_N⟩ with x_j ∈ {-1, +1}; the
output qubit starts in |-1⟩. The gate

  U(w, λ) = exp(-(i/2)(λ/‖w‖) Σ_j w_j σ_z^(j) ⊗ σ_y)

is block diagonal over computational basis strings y of the input register:
on block y it rotates the output qubit about y by θ_y = λ(w·y)/‖w‖.

Basis ordering everywhere is {|-1⟩, |1⟩}, so σ_z = diag(-1, 1). Composite
indices put the input register first, bit 0 of each qubit meaning -1.

Usage:
  python quantum_sim.py --n 4 --cases 50 --seed 1
"""

from __future__ import annotations

import argparse
import logging
import math
from typing import Callable, Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from errors import DimensionCapError, InvalidPointError, UnsupportedActivationError

logger = logging.getLogger(__name__)

MAX_QUBITS = 12
STATE_TOL = 1e-12

_PAULI: Dict[str, np.ndarray] = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise InvalidPointError(f"unknown Pauli axis {axis!r}; expected x, y or z") from None


# ---------- Models ----------

class BinaryPattern(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bits: np.ndarray

    @field_validator("bits", mode="before")
    @classmethod
    def _pm_one(cls, v):
        arr = np.asarray(v)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("pattern must be a non-empty vector")
        if not np.all(np.isin(arr, (-1, 1))):
            raise ValueError("pattern entries must be -1 or +1")
        return arr.astype(np.int8)

    @property
    def n(self) -> int:
        return int(self.bits.size)


class WeightVector(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    w: np.ndarray
    norm: float

    @field_validator("w", mode="before")
    @classmethod
    def _vector(cls, v):
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 1 or arr.size < 1 or not np.all(np.isfinite(arr)):
            raise ValueError("weights must be a non-empty finite vector")
        return arr

    @model_validator(mode="after")
    def _norm_matches(self) -> "WeightVector":
        actual = float(np.linalg.norm(self.w))
        if not self.norm > 0:
            raise ValueError("weight vector must be nonzero")
        if abs(actual - self.norm) > 1e-12 * max(1.0, actual):
            raise ValueError(f"cached norm {self.norm} does not match {actual}")
        return self

    @classmethod
    def of(cls, w) -> "WeightVector":
        arr = np.asarray(w, dtype=float)
        return cls(w=arr, norm=float(np.linalg.norm(arr)))

    @property
    def n(self) -> int:
        return int(self.w.size)


class OutputQubitState(BaseModel):
    """2×2 density matrix of the output qubit."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rho: np.ndarray

    @field_validator("rho", mode="before")
    @classmethod
    def _density_matrix(cls, v):
        rho = np.asarray(v, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"rho must be 2x2, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
            raise ValueError("rho is not Hermitian")
        if abs(np.trace(rho) - 1.0) > STATE_TOL:
            raise ValueError(f"trace(rho) = {np.trace(rho)}")
        if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -STATE_TOL:
            raise ValueError("rho is not positive semidefinite")
        return rho


class CircuitCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    cases: int
    seed: int
    max_gap: float
    sigma_x_residual: float
    sigma_z_residual: float


# ---------- Closed forms ----------

def _dot(w: WeightVector, x: BinaryPattern) -> float:
    if w.n != x.n:
        raise InvalidPointError(f"weight length {w.n} does not match pattern length {x.n}")
    return float(np.dot(w.w, x.bits))


def _rotated_minus_one(theta: float) -> np.ndarray:
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    return np.array([[c * c, s * c], [s * c, s * s]], dtype=complex)


def heaviside(h: float) -> float:
    return 1.0 if h > 0 else 0.0


def output_state_theta(w: WeightVector, x: BinaryPattern) -> OutputQubitState:
    """(1 - Θ(w·x))|-1⟩⟨-1| + Θ(w·x)|1⟩⟨1|, Θ(0) = 0."""
    t = heaviside(_dot(w, x))
    return OutputQubitState(rho=np.diag([1.0 - t, t]).astype(complex))


def output_state_lambda(w: WeightVector, x: BinaryPattern, lam: float) -> OutputQubitState:
    if not (math.isfinite(lam) and lam >= 0):
        raise InvalidPointError(f"lambda must be >= 0, got {lam}")
    theta = lam * _dot(w, x) / w.norm
    return OutputQubitState(rho=_rotated_minus_one(theta))


# ---------- Dense circuit ----------

def _basis_strings(n: int) -> np.ndarray:
    """All ±1 strings of length n, row i is the binary expansion of i (MSB first)."""
    idx = np.arange(2**n)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)) & 1
    return 2 * bits - 1


def _pattern_index(x: BinaryPattern) -> int:
    index = 0
    for b in x.bits:
        index = 2 * index + (1 if b > 0 else 0)
    return index


def _y_rotations(thetas: np.ndarray) -> np.ndarray:
    """exp(-iθσ_y/2) for each θ, from the eigendecomposition of σ_y."""
    evals, evecs = np.linalg.eigh(pauli("y"))
    phases = np.exp(-0.5j * thetas[:, None] * evals[None, :])
    return np.einsum("ij,bj,kj->bik", evecs, phases, evecs.conj())


def circuit_unitary_blocks(w: WeightVector, lam: float) -> np.ndarray:
    """Blocks U_y, shape (2^N, 2, 2), of U(w, λ) over input basis strings."""
    if w.n > MAX_QUBITS:
        raise DimensionCapError(f"dense simulation supports N <= {MAX_QUBITS}, got {w.n}")
    thetas = lam * (_basis_strings(w.n) @ w.w) / w.norm
    return _y_rotations(thetas)


def partial_trace_input(state: np.ndarray, n_input: int) -> np.ndarray:
    """Trace out the first n_input qubits.

    state is either a (2^{n_input+1})² density matrix or a pure state vector of
    length 2^{n_input+1}; the vector form never builds the full density matrix.
    """
    dim = 2**n_input
    state = np.asarray(state)
    if state.ndim == 1:
        if state.size != 2 * dim:
            raise InvalidPointError(f"state vector of length {state.size} does not hold {n_input} + 1 qubits")
        psi = np.reshape(state, [dim, 2])
        return np.einsum("yi,yj->ij", psi, psi.conj())
    if state.shape != (2 * dim, 2 * dim):
        raise InvalidPointError(f"density matrix of shape {state.shape} does not hold {n_input} + 1 qubits")
    rho = np.reshape(state, [dim, 2, dim, 2])
    return np.trace(rho, axis1=0, axis2=2)


def full_circuit_output(w: WeightVector, x: BinaryPattern, lam: float) -> OutputQubitState:
    if not (math.isfinite(lam) and lam >= 0):
        raise InvalidPointError(f"lambda must be >= 0, got {lam}")
    if w.n != x.n:
        raise InvalidPointError(f"weight length {w.n} does not match pattern length {x.n}")
    blocks = circuit_unitary_blocks(w, lam)
    psi = np.zeros((2**w.n, 2), dtype=complex)
    psi[_pattern_index(x), 0] = 1.0
    psi = np.einsum("bij,bj->bi", blocks, psi)
    return OutputQubitState(rho=partial_trace_input(psi.reshape(-1), w.n))


def expect_pauli(state: OutputQubitState, axis: str) -> float:
    value = np.trace(state.rho @ pauli(axis))
    if abs(value.imag) > STATE_TOL:
        raise ArithmeticError(f"<sigma_{axis}> has imaginary part {value.imag:.3g}")
    return float(value.real)


# ---------- General gate ----------

ACTIVATIONS: Dict[str, Callable[[float], float]] = {"heaviside": heaviside}


def theta_gate_output_generic(w: WeightVector, x: BinaryPattern, f: str = "heaviside") -> OutputQubitState:
    """Output of the general gate with angle 2·arcsin(√f(w·x)), zero bias, single layer."""
    if f not in ACTIVATIONS:
        raise UnsupportedActivationError(f"unsupported activation {f!r}; supported: {sorted(ACTIVATIONS)}")
    value = ACTIVATIONS[f](_dot(w, x))
    theta = 2.0 * math.asin(math.sqrt(value))
    rho = _rotated_minus_one(theta)
    # f ∈ {0, 1} leaves no coherence
    rho[0, 1] = rho[1, 0] = 0.0
    return OutputQubitState(rho=rho)


# ---------- Equivalence suite ----------

def circuit_equivalence_suite(n: int, cases: int, seed: int = 0, lam_max: float = 10.0) -> CircuitCheck:
    """Random (w, x, λ) cases: dense circuit vs closed form, plus the readout identities."""
    if n < 1:
        raise InvalidPointError(f"n must be >= 1, got {n}")
    if n > MAX_QUBITS:
        raise DimensionCapError(f"dense simulation supports N <= {MAX_QUBITS}, got {n}")
    if cases < 1:
        raise InvalidPointError(f"cases must be >= 1, got {cases}")
    rng = np.random.default_rng(seed)
    max_gap = sx_res = sz_res = 0.0
    for _ in range(cases):
        w = WeightVector.of(rng.standard_normal(n))
        x = BinaryPattern(bits=rng.choice((-1, 1), size=n))
        lam = float(rng.uniform(0.0, lam_max))
        closed = output_state_lambda(w, x, lam)
        dense = full_circuit_output(w, x, lam)
        max_gap = max(max_gap, float(np.max(np.abs(dense.rho - closed.rho))))
        theta = lam * _dot(w, x) / w.norm
        sx_res = max(sx_res, abs(expect_pauli(dense, "x") - math.sin(theta)))
        sz_res = max(sz_res, abs(expect_pauli(dense, "z") + math.cos(theta)))
    logger.info(f"circuit suite n={n} cases={cases}: max gap {max_gap:.3g}")
    return CircuitCheck(
        n=n, cases=cases, seed=seed, max_gap=max_gap, sigma_x_residual=sx_res, sigma_z_residual=sz_res
    )


def main() -> None:
    parser = argparse.ArgumentParser(description="Dense quantum perceptron circuit check")
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--cases", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    check = circuit_equivalence_suite(args.n, args.cases, args.seed)
    print("=== Circuit Equivalence ===")
    print(f"N={check.n} cases={check.cases} seed={check.seed}")
    print(f"max entrywise gap : {check.max_gap:.3e}")
    print(f"<sigma_x> residual: {check.sigma_x_residual:.3e}")
    print(f"<sigma_z> residual: {check.sigma_z_residual:.3e}")


if __name__ == "__main__":
    main()
