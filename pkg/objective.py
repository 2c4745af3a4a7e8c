"""
Fidelity of a code under noise followed by recovery, and the stabilized loss

    Loss = (1 - F)^2 + alpha * sum_{i<j} |<i|j>|^2 + beta * sum_i (1 - ||i||_2)^2
"""
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from channels import QuantumChannel
from codespace import Code, Codeword
from errors import CodewordIndexError, DimensionError, ZeroNormError


class FidelityKind(str, Enum):
    AVG_CODEWORD = "avg"
    PER_CODEWORD = "per"
    ENTANGLEMENT = "entanglement"


class FidelitySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: FidelityKind = FidelityKind.AVG_CODEWORD
    index: int = Field(default=0, ge=0)
    # evaluate on the raw codewords instead of their normalized copies
    raw: bool = False

    @classmethod
    def parse(cls, text: str, raw: bool = False) -> "FidelitySpec":
        """'avg', 'entanglement' or 'per:<k>'."""
        text = text.strip().lower()
        if text.startswith("per"):
            _, _, index = text.partition(":")
            return cls(kind=FidelityKind.PER_CODEWORD, index=int(index or 0), raw=raw)
        return cls(kind=FidelityKind(text), raw=raw)

    def label(self) -> str:
        if self.kind is FidelityKind.PER_CODEWORD:
            return f"per:{self.index}"
        return self.kind.value


class LossParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=2.0, ge=0.0, allow_inf_nan=False)
    beta: float = Field(default=2.0, ge=0.0, allow_inf_nan=False)


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    fidelity: float
    fidelity_term: float
    ortho_term: float
    norm_term: float

    def to_dict(self) -> dict:
        return asdict(self)


def _prepared_words(code: Code, raw: bool) -> npt.NDArray[np.complex128]:
    norms = code.norms()
    if np.any(norms == 0.0):
        raise ZeroNormError(f"codeword {int(np.argmin(norms))} has zero norm")
    if raw:
        return code.words
    return code.words / norms[:, None]


def _check_dims(code: Code, *channels: QuantumChannel):
    for ch in channels:
        if ch.dim != code.dim:
            raise DimensionError(f"channel '{ch.label}' has dimension {ch.dim}, codewords have {code.dim}")


def response_matrix(code: Code, noise: QuantumChannel, rec: QuantumChannel, raw: bool = False) -> npt.NDArray[np.complex128]:
    """
    M_ij = <i| R(N(|i><j|)) |j>.

    N(|i><j|) = sum_k (K_k|i>)(K_k|j>)^dagger, and <i|R(X)|j> = sum_r (R_r^dagger|i>)^dagger X (R_r^dagger|j>),
    so each entry costs O(m d^2) instead of a full channel application.
    """
    _check_dims(code, noise, rec)
    words = _prepared_words(code, raw)
    kd = words.shape[0]
    noisy = noise.kraus @ words.T  # (m, d, K)
    pulled = np.swapaxes(rec.kraus.conj(), 1, 2) @ words.T  # (r, d, K): R^dagger |i>
    m = np.empty((kd, kd), dtype=np.complex128)
    for i in range(kd):
        for j in range(kd):
            out = noisy[:, :, i].T @ noisy[:, :, j].conj()
            m[i, j] = np.einsum("ra,ab,rb->", pulled[:, :, i].conj(), out, pulled[:, :, j])
    return m


def codeword_fidelities(code: Code, noise: QuantumChannel, rec: QuantumChannel, raw: bool = False) -> npt.NDArray[np.float64]:
    """F_i = <i|R(N(|i><i|))|i> for each codeword."""
    _check_dims(code, noise, rec)
    words = _prepared_words(code, raw)
    out = np.empty(code.k)
    for i, word in enumerate(words):
        noisy = noise.kraus @ word  # (m, d)
        rho = noisy.T @ noisy.conj()
        pulled = np.swapaxes(rec.kraus.conj(), 1, 2) @ word  # (r, d)
        out[i] = np.einsum("ra,ab,rb->", pulled.conj(), rho, pulled).real
    return out


def fidelity(code: Code, noise: QuantumChannel, rec: QuantumChannel, spec: FidelitySpec = FidelitySpec()) -> float:
    if spec.kind is FidelityKind.PER_CODEWORD:
        if spec.index >= code.k:
            raise CodewordIndexError(f"codeword {spec.index} requested from a code with {code.k} codewords")
        single = code.with_words(code.words[spec.index : spec.index + 1])
        return float(codeword_fidelities(single, noise, rec, spec.raw)[0])
    if spec.kind is FidelityKind.AVG_CODEWORD:
        return float(np.mean(codeword_fidelities(code, noise, rec, spec.raw)))
    m = response_matrix(code, noise, rec, spec.raw)
    return float(m.sum().real) / code.k ** 2


def inner_product_parts(i: Codeword, j: Codeword) -> tuple:
    """
    <i|j> = f + ig with f = sum(x u + y v), g = sum(y u - x v), for
    |i> = x + iy and |j> = u + iv.

    This convention conjugates |j> rather than |i>, so g has the opposite
    sign of the physics inner product's imaginary part; |<i|j>|^2 agrees.
    """
    a, b = i.amplitudes, j.amplitudes
    if a.shape != b.shape:
        raise DimensionError(f"codewords of length {a.size} and {b.size}")
    x, y, u, v = a.real, a.imag, b.real, b.imag
    return float(np.sum(x * u + y * v)), float(np.sum(y * u - x * v))


def _pair_overlaps(code: Code) -> npt.NDArray[np.float64]:
    gram = np.abs(code.words.conj() @ code.words.T) ** 2
    upper = np.triu_indices(code.k, k=1)
    return gram[upper]


def penalty_terms(code: Code, params: LossParams) -> tuple:
    """(alpha * sum_{i<j} |<i|j>|^2, beta * sum_i (1 - ||i||)^2)"""
    ortho = params.alpha * float(np.sum(_pair_overlaps(code)))
    norm = params.beta * float(np.sum((1.0 - code.norms()) ** 2))
    return ortho, norm


def ortho_residual(code: Code) -> float:
    overlaps = _pair_overlaps(code)
    return float(np.sqrt(overlaps.max())) if overlaps.size else 0.0


def norm_residual(code: Code) -> float:
    return float(np.max(np.abs(1.0 - code.norms())))


def loss(code: Code, noise: QuantumChannel, rec: QuantumChannel, fspec: FidelitySpec, params: LossParams) -> LossBreakdown:
    f = fidelity(code, noise, rec, fspec)
    fidelity_term = (1.0 - f) ** 2
    ortho, norm = penalty_terms(code, params)
    return LossBreakdown(
        total=fidelity_term + ortho + norm,
        fidelity=f,
        fidelity_term=fidelity_term,
        ortho_term=ortho,
        norm_term=norm,
    )
