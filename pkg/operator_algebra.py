"""
Dense complex matrix kernel.

Everything here is a pure function of numpy arrays: Kronecker products,
Hermitian eigendecomposition and the PSD matrix functions the Petz map
needs. Matrices are complex128 ndarrays, validated by `as_matrix`.
"""
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Optional

import numpy as np
import numpy.typing as npt

from config import settings
from errors import DimensionError, NonHermitianError, NotPSDError

ComplexMatrix = npt.NDArray[np.complex128]

HERMITIAN_ATOL = 1e-10

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def as_matrix(m) -> ComplexMatrix:
    """Coerce to a finite 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(np.swapaxes(m, -1, -2))


def frobenius(m: ComplexMatrix) -> float:
    return float(np.linalg.norm(m))


def max_dimension() -> int:
    return 2 ** settings.max_qubits


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    limit = max_dimension()
    if rows > limit or cols > limit:
        raise DimensionError(
            f"kron result {rows}x{cols} exceeds the {settings.max_qubits}-qubit limit ({limit})"
        )
    return np.kron(a, b)


def kron_all(ops: Iterable[ComplexMatrix]) -> ComplexMatrix:
    return reduce(kron, ops)


def pauli_string(label: str) -> ComplexMatrix:
    """'XZZXI' -> X (x) Z (x) Z (x) X (x) I, qubit 0 leftmost (most significant)."""
    try:
        return kron_all(PAULIS[ch] for ch in label.upper())
    except KeyError as exc:
        raise ValueError(f"not a Pauli label: {label!r}") from exc


def is_hermitian(m: ComplexMatrix, atol: float = HERMITIAN_ATOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= atol * scale)


@dataclass(frozen=True)
class HermitianEigenResult:
    eigenvalues: npt.NDArray[np.float64]  # ascending
    eigenvectors: ComplexMatrix  # columns

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_eig(m: ComplexMatrix) -> HermitianEigenResult:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"eigendecomposition needs a square matrix, got {m.shape}")
    if not is_hermitian(m):
        raise NonHermitianError("matrix is not Hermitian within 1e-10")
    sym = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(sym)
    return HermitianEigenResult(eigenvalues=w, eigenvectors=v)


def _cutoff_for(w: npt.NDArray[np.float64], cutoff: Optional[float]) -> float:
    if cutoff is not None:
        return float(cutoff)
    top = float(w[-1]) if w.size else 0.0
    return settings.pinv_rtol * max(top, 0.0)


def _psd_spectrum(m: ComplexMatrix, cutoff: Optional[float]):
    eig = hermitian_eig(m)
    w = eig.eigenvalues
    tol = _cutoff_for(w, cutoff)
    if w.size and w[0] < -tol:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below -cutoff ({-tol:.3e})")
    return np.clip(w, 0.0, None), eig.eigenvectors, tol


def psd_sqrt(m: ComplexMatrix, cutoff: Optional[float] = None) -> ComplexMatrix:
    """V diag(sqrt(max(lambda, 0))) V^dagger; small negatives are clamped."""
    w, v, _ = _psd_spectrum(m, cutoff)
    return (v * np.sqrt(w)) @ dagger(v)


def psd_pinv_sqrt(m: ComplexMatrix, cutoff: Optional[float] = None) -> ComplexMatrix:
    """Inverse square root on the support of m (eigenvalues above cutoff), zero elsewhere."""
    w, v, tol = _psd_spectrum(m, cutoff)
    g = np.zeros_like(w)
    keep = w > tol
    g[keep] = 1.0 / np.sqrt(w[keep])
    return (v * g) @ dagger(v)


def support_rank(m: ComplexMatrix, cutoff: Optional[float] = None) -> int:
    w, _, tol = _psd_spectrum(m, cutoff)
    return int(np.count_nonzero(w > tol))
