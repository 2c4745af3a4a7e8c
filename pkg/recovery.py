"""
Recovery channels: the Petz map of a noise channel, and the trivial recovery.
"""
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from channels import QuantumChannel, apply, identity_channel
from codespace import Code, code_projector, gram_schmidt
from errors import DimensionError, NotPSDError
from logger_config import setup_logger
from operator_algebra import ComplexMatrix, as_matrix, dagger, is_hermitian, psd_pinv_sqrt, psd_sqrt, support_rank

logger = setup_logger("qcodegrad.recovery")

SIGMA_TRACE_TOL = 1e-8


class RecoveryKind(str, Enum):
    PETZ = "petz"
    IDENTITY = "identity"


class Anchor(str, Enum):
    CODE_PROJECTOR = "code_projector"
    CUSTOM = "custom"


class Refresh(str, Enum):
    FROZEN = "frozen"
    PER_STEP = "per_step"


class RecoverySpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: RecoveryKind = RecoveryKind.PETZ
    anchor: Anchor = Anchor.CODE_PROJECTOR
    custom_sigma: Optional[Any] = None
    refresh: Refresh = Refresh.FROZEN

    @model_validator(mode="after")
    def _sigma_matches_anchor(self):
        if (self.anchor is Anchor.CUSTOM) != (self.custom_sigma is not None):
            raise ValueError("custom_sigma must be given exactly when anchor is 'custom'")
        if self.custom_sigma is not None:
            _check_state(as_matrix(self.custom_sigma))
        return self


def _check_state(sigma: ComplexMatrix):
    if sigma.shape[0] != sigma.shape[1]:
        raise DimensionError(f"anchor state must be square, got {sigma.shape}")
    if not is_hermitian(sigma):
        raise NotPSDError("anchor state is not Hermitian")
    trace = np.trace(sigma).real
    if abs(trace - 1.0) > SIGMA_TRACE_TOL:
        raise NotPSDError(f"anchor state has trace {trace}, expected 1")
    # raises NotPSDError on negative eigenvalues
    psd_sqrt(sigma)


def petz(ch: QuantumChannel, sigma: ComplexMatrix, cutoff: Optional[float] = None) -> QuantumChannel:
    """
    Petz recovery of `ch` anchored on `sigma`:
    R_k = sigma^(1/2) K_k^dagger N(sigma)^(-1/2).

    N(sigma)^(-1/2) is taken on its support only, so the result is trace
    preserving on that support; `support_rank` records its dimension.
    """
    sigma = as_matrix(sigma)
    if sigma.shape != (ch.dim, ch.dim):
        raise DimensionError(f"anchor state {sigma.shape} does not match channel dimension {ch.dim}")
    _check_state(sigma)

    out = apply(ch, sigma)
    out = 0.5 * (out + dagger(out))
    inv_sqrt = psd_pinv_sqrt(out, cutoff)
    rank = support_rank(out, cutoff)
    ops = psd_sqrt(sigma) @ dagger(ch.kraus) @ inv_sqrt
    if rank < ch.dim:
        logger.debug(f"N(sigma) has rank {rank} of {ch.dim}; Petz map is trace preserving on that support only")
    return QuantumChannel(ops, f"petz({ch.label})", support_rank=rank)


def identity_recovery(dim: int) -> QuantumChannel:
    return identity_channel(dim, "identity-recovery")


def code_anchor(code: Code) -> ComplexMatrix:
    """Maximally mixed state on the code space, Pi / K, from the orthonormalized code."""
    ortho = gram_schmidt(code)
    return code_projector(ortho) / ortho.k


def build_recovery(spec: RecoverySpec, noise: QuantumChannel, code: Code) -> QuantumChannel:
    if spec.kind is RecoveryKind.IDENTITY:
        return identity_recovery(noise.dim)
    sigma = as_matrix(spec.custom_sigma) if spec.anchor is Anchor.CUSTOM else code_anchor(code)
    return petz(noise, sigma)
