"""
Noise channels as Kraus-operator stacks.

A QuantumChannel holds its Kraus operators as one (m, d, d) complex array,
so applying it is a batched matmul followed by a sum over the first axis.
The sum is always taken in stored operator order, which keeps results
bit-reproducible.
"""
from dataclasses import dataclass
from itertools import product
from typing import Literal, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import settings
from errors import DimensionError, ProbabilityError
from logger_config import setup_logger
from operator_algebra import I2, X, Y, Z, ComplexMatrix, as_matrix, dagger, kron_all, max_dimension

logger = setup_logger("qcodegrad.channels")

COMPLETENESS_ATOL = 1e-10
PROB_SLACK = 1e-12


@dataclass(frozen=True)
class QuantumChannel:
    kraus: npt.NDArray[np.complex128]
    label: str = ""
    # rank of N(sigma) for Petz recoveries; None means complete on the full space
    support_rank: Optional[int] = None

    def __post_init__(self):
        ops = np.array(self.kraus, dtype=np.complex128)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or ops.shape[0] < 1:
            raise DimensionError(f"Kraus stack must be (m, d, d) with m >= 1, got {ops.shape}")
        if ops.shape[1] > max_dimension():
            raise DimensionError(f"channel dimension {ops.shape[1]} exceeds the {settings.max_qubits}-qubit limit")
        if not np.all(np.isfinite(ops)):
            raise ValueError("Kraus operators have non-finite entries")
        ops.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    @property
    def size(self) -> int:
        return self.kraus.shape[0]

    def __len__(self) -> int:
        return self.size


class PauliParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_x: float = Field(default=0.0, ge=0.0, le=1.0)
    p_y: float = Field(default=0.0, ge=0.0, le=1.0)
    p_z: float = Field(default=0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _total(self):
        if self.p_x + self.p_y + self.p_z > 1.0 + PROB_SLACK:
            raise ValueError(f"p_x + p_y + p_z = {self.p_x + self.p_y + self.p_z} exceeds 1")
        return self

    @classmethod
    def isotropic(cls, p: float) -> "PauliParams":
        return cls(p_x=p, p_y=p, p_z=p)


def _prune(ops: npt.NDArray[np.complex128], threshold: Optional[float] = None) -> npt.NDArray[np.complex128]:
    threshold = settings.prune_threshold if threshold is None else threshold
    keep = np.linalg.norm(ops, axis=(1, 2)) >= threshold
    if not keep.any():
        raise ValueError("every Kraus operator fell below the prune threshold")
    return ops[keep]


def _check_probability(name: str, value: float):
    if not (0.0 <= value <= 1.0) or not np.isfinite(value):
        raise ProbabilityError(f"{name}={value} is outside [0, 1]")


def completeness_deviation(ch: QuantumChannel) -> float:
    """max |sum K^dagger K - I| entry."""
    total = np.einsum("kba,kbc->ac", ch.kraus.conj(), ch.kraus)
    return float(np.max(np.abs(total - np.eye(ch.dim))))


def check_completeness(ch: QuantumChannel, atol: float = COMPLETENESS_ATOL) -> bool:
    return completeness_deviation(ch) <= atol


def identity_channel(dim: int, label: str = "identity") -> QuantumChannel:
    return QuantumChannel(np.eye(dim, dtype=np.complex128)[None], label)


def unitary_channel(u: ComplexMatrix, label: str = "unitary") -> QuantumChannel:
    return QuantumChannel(as_matrix(u)[None], label)


def pauli_channel_1q(p: PauliParams) -> QuantumChannel:
    p_i = 1.0 - p.p_x - p.p_y - p.p_z
    if p_i < -PROB_SLACK:
        raise ProbabilityError(f"Pauli probabilities sum past 1: {p}")
    weights = np.sqrt(np.clip([p_i, p.p_x, p.p_y, p.p_z], 0.0, None))
    ops = weights[:, None, None] * np.stack([I2, X, Y, Z])
    return QuantumChannel(_prune(ops), f"pauli(px={p.p_x},py={p.p_y},pz={p.p_z})")


def amplitude_damping_1q(gamma: float) -> QuantumChannel:
    _check_probability("gamma", gamma)
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=np.complex128)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return QuantumChannel(_prune(np.stack([k0, k1])), f"damping(gamma={gamma})")


def lift_iid(ch: QuantumChannel, n: int) -> QuantumChannel:
    """The same single-qubit channel applied independently to each of n qubits."""
    if ch.dim != 2:
        raise DimensionError(f"lift_iid needs a single-qubit channel, got dimension {ch.dim}")
    if n < 1 or n > settings.max_qubits:
        raise DimensionError(f"cannot lift to {n} qubits (limit {settings.max_qubits})")
    ops = np.stack([kron_all(combo) for combo in product(ch.kraus, repeat=n)])
    lifted = QuantumChannel(_prune(ops), f"{ch.label}^{n}")
    logger.debug(f"lifted '{ch.label}' to {n} qubits: {lifted.size} Kraus operators")
    return lifted


def embed(ch: QuantumChannel, qubit: int, n: int) -> QuantumChannel:
    """A single-qubit channel acting on one qubit of an n-qubit register."""
    if ch.dim != 2:
        raise DimensionError(f"embed needs a single-qubit channel, got dimension {ch.dim}")
    if n > settings.max_qubits:
        raise DimensionError(f"cannot embed into {n} qubits (limit {settings.max_qubits})")
    if not 0 <= qubit < n:
        raise DimensionError(f"qubit {qubit} out of range for {n} qubits")
    ops = np.stack([kron_all([k if q == qubit else I2 for q in range(n)]) for k in ch.kraus])
    return QuantumChannel(ops, f"{ch.label}@q{qubit}")


def pauli_single_error_channel(n: int, p: float) -> QuantumChannel:
    """
    Identity with weight 1 - 3np plus every single-qubit Pauli with weight p.
    Every error in it is correctable by a distance-3 code.
    """
    _check_probability("3np", 3 * n * p)
    ops = [np.sqrt(1.0 - 3 * n * p) * np.eye(2 ** n, dtype=np.complex128)]
    for q in range(n):
        for pauli in (X, Y, Z):
            ops.append(np.sqrt(p) * kron_all([pauli if j == q else I2 for j in range(n)]))
    return QuantumChannel(_prune(np.stack(ops)), f"single-error(n={n},p={p})")


def _check_dims(ch: QuantumChannel, rho: ComplexMatrix):
    if rho.shape != (ch.dim, ch.dim):
        raise DimensionError(f"operator shape {rho.shape} does not match channel dimension {ch.dim}")


def apply(ch: QuantumChannel, rho: ComplexMatrix) -> ComplexMatrix:
    """sum_k K rho K^dagger; rho may be any square operator."""
    rho = as_matrix(rho)
    _check_dims(ch, rho)
    return (ch.kraus @ rho @ dagger(ch.kraus)).sum(axis=0)


def adjoint_apply(ch: QuantumChannel, x: ComplexMatrix) -> ComplexMatrix:
    """Heisenberg picture: sum_k K^dagger X K."""
    x = as_matrix(x)
    _check_dims(ch, x)
    return (dagger(ch.kraus) @ x @ ch.kraus).sum(axis=0)


def compose(after: QuantumChannel, before: QuantumChannel) -> QuantumChannel:
    """after o before, Kraus set {A_i B_j}."""
    if after.dim != before.dim:
        raise DimensionError(f"cannot compose channels of dimension {after.dim} and {before.dim}")
    ops = np.einsum("iab,jbc->ijac", after.kraus, before.kraus).reshape(-1, after.dim, after.dim)
    return QuantumChannel(_prune(ops), f"{after.label}*{before.label}")


class ChannelSpec(BaseModel):
    """
    Run-config channel entry: an i.i.d. lift of a single-qubit channel, or
    the same channel on target_qubit alone when that is set.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["pauli", "damping"] = "pauli"
    px: float = Field(default=0.0, ge=0.0, le=1.0)
    py: float = Field(default=0.0, ge=0.0, le=1.0)
    pz: float = Field(default=0.0, ge=0.0, le=1.0)
    gamma: float = Field(default=0.0, ge=0.0, le=1.0)
    qubits: int = Field(default=5, ge=1)
    target_qubit: Optional[int] = Field(default=None, ge=0)

    def single_qubit(self) -> QuantumChannel:
        if self.kind == "damping":
            return amplitude_damping_1q(self.gamma)
        return pauli_channel_1q(PauliParams(p_x=self.px, p_y=self.py, p_z=self.pz))


def from_spec(spec: ChannelSpec, qubits: Optional[int] = None) -> QuantumChannel:
    n = spec.qubits if qubits is None else qubits
    if spec.target_qubit is None:
        ch = lift_iid(spec.single_qubit(), n)
    else:
        ch = embed(spec.single_qubit(), spec.target_qubit, n)
    logger.info(f"noise channel {ch.label}: {ch.size} Kraus operators on dimension {ch.dim}")
    return ch
