"""
Generators and oracles for the test suite.

SeededGenerator draws 53-bit integers from PCG64 and turns them into floats
with exact integer arithmetic (u = (n + 0.5) / 2^53), then into Gaussian
pairs by Box-Muller. PCG64's integer stream is fixed by its seed on every
platform, so a seed pins down every matrix, code and parameter drawn from it.

Run as a script to rewrite fixtures/derived_values.json:

    python testkit.py fixtures/derived_values.json
"""
import sys
from pathlib import Path
from typing import Callable

import numpy as np
import numpy.typing as npt
import orjson

from channels import PauliParams, QuantumChannel, apply, lift_iid, pauli_channel_1q
from codespace import Code, gram_schmidt, standard_code
from errors import DimensionError, NonFiniteObjectiveError
from gradient import FDConfig, FDScheme, PenaltyMode, fd_gradient, nonanalyticity_check, penalty_gradient
from logger_config import setup_logger
from objective import FidelitySpec, LossParams, fidelity
from operator_algebra import X, Z, kron
from recovery import identity_recovery

logger = setup_logger("qcodegrad.testkit")

_MANTISSA = 2 ** 53
DERIVED_VALUES = Path(__file__).resolve().parent / "fixtures" / "derived_values.json"


class SeededGenerator:
    """Reproducible random matrices, codes and Pauli parameters."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._bits = np.random.PCG64(self.seed)

    def uniform(self, size) -> npt.NDArray[np.float64]:
        """Uniform draws in (0, 1)."""
        count = int(np.prod(size))
        raw = self._bits.random_raw(count) >> np.uint64(11)
        return ((raw.astype(np.float64) + 0.5) / _MANTISSA).reshape(size)

    def normal(self, size) -> npt.NDArray[np.float64]:
        count = int(np.prod(size))
        half = (count + 1) // 2
        u1, u2 = self.uniform(half), self.uniform(half)
        radius = np.sqrt(-2.0 * np.log(u1))
        pairs = np.concatenate([radius * np.cos(2 * np.pi * u2), radius * np.sin(2 * np.pi * u2)])
        return pairs[:count].reshape(size)

    def complex_gaussian(self, shape) -> npt.NDArray[np.complex128]:
        return self.normal(shape) + 1j * self.normal(shape)

    def hermitian(self, dim: int) -> npt.NDArray[np.complex128]:
        g = self.complex_gaussian((dim, dim))
        return 0.5 * (g + g.conj().T)

    def density(self, dim: int, rank: int = None) -> npt.NDArray[np.complex128]:
        """G G^dagger / tr, with G of shape (dim, rank)."""
        g = self.complex_gaussian((dim, rank or dim))
        rho = g @ g.conj().T
        return rho / np.trace(rho).real

    def unitary(self, dim: int) -> npt.NDArray[np.complex128]:
        q, r = np.linalg.qr(self.complex_gaussian((dim, dim)))
        phases = np.diag(r) / np.abs(np.diag(r))
        return q * phases

    def code(self, qubits: int, k: int = 2, normalized: bool = True) -> Code:
        words = self.complex_gaussian((k, 2 ** qubits))
        if normalized:
            words /= np.linalg.norm(words, axis=1, keepdims=True)
        return Code(words, f"seed-{self.seed}")

    def pauli(self, max_total: float = 0.3) -> PauliParams:
        px, py, pz = self.uniform(3) * (max_total / 3.0)
        return PauliParams(p_x=float(px), p_y=float(py), p_z=float(pz))


def fd_oracle(f: Callable[[npt.NDArray[np.float64]], float], point, delta: float = 1e-5) -> npt.NDArray[np.float64]:
    """Central-difference gradient of a real function of a real vector."""
    point = np.asarray(point, dtype=np.float64)
    grad = np.empty_like(point)
    for i in range(point.size):
        step = np.zeros_like(point)
        step.flat[i] = delta
        up, down = float(f(point + step)), float(f(point - step))
        if not (np.isfinite(up) and np.isfinite(down)):
            raise NonFiniteObjectiveError(up if not np.isfinite(up) else down, index=i, word=0, component="x")
        grad.flat[i] = (up - down) / (2.0 * delta)
    return grad


def code_as_vector(code: Code) -> npt.NDArray[np.float64]:
    """[x..., y...] over all coefficients."""
    return np.concatenate([code.words.real.ravel(), code.words.imag.ravel()])


def vector_as_code(vec: npt.NDArray[np.float64], like: Code) -> Code:
    n = like.size
    return like.with_words((vec[:n] + 1j * vec[n:]).reshape(like.words.shape))


def random_channel(gen: SeededGenerator, dim: int, m: int = 3) -> QuantumChannel:
    """A random CPTP map: m blocks of an isometry dim -> m*dim."""
    g = gen.complex_gaussian((m * dim, dim))
    q, _ = np.linalg.qr(g)
    return QuantumChannel(q.reshape(m, dim, dim), f"random(seed={gen.seed})")


def remix_kraus(ch: QuantumChannel, u: npt.NDArray[np.complex128]) -> QuantumChannel:
    """K'_i = sum_j u_ij K_j, the same channel for any unitary u."""
    if u.shape != (ch.size, ch.size):
        raise DimensionError(f"mixing unitary must be {ch.size}x{ch.size}, got {u.shape}")
    return QuantumChannel(np.einsum("ij,jab->iab", u, ch.kraus), f"remix({ch.label})")


def channel_action_equal(a: QuantumChannel, b: QuantumChannel, trials: int = 8, seed: int = 0) -> float:
    """max over seeded random density matrices of ||a(rho) - b(rho)||_F."""
    if a.dim != b.dim:
        raise DimensionError(f"channels act on dimensions {a.dim} and {b.dim}")
    gen = SeededGenerator(seed)
    worst = 0.0
    for _ in range(trials):
        rho = gen.density(a.dim)
        worst = max(worst, float(np.linalg.norm(apply(a, rho) - apply(b, rho))))
    return worst


# --- derived reference values ---

def _entry(name: str, oracle: str, value, seed=None, **inputs) -> dict:
    return {"name": name, "oracle": oracle, "seed": seed, "input": inputs, "value": value}


def _complex_pairs(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def derive_values() -> dict:
    entries = []

    entries.append(_entry("kron_x_z", "numpy.kron", _complex_pairs(kron(X, Z))))

    gs = gram_schmidt(Code(np.array([[2.0, 0.0], [1.0, 1.0]]), "gs"))
    entries.append(_entry("gram_schmidt_2d", "hand", _complex_pairs(gs.words), words=[[2, 0], [1, 1]]))

    entries.append(_entry(
        "fd_oracle_sum_squares", "fd_oracle",
        fd_oracle(lambda v: float(np.sum(v ** 2)), [1.0, 2.0]).tolist(), point=[1, 2], delta=1e-5,
    ))

    one_plus_i = Code(np.array([[1.0 + 1.0j, 0.0]]), "z")
    central = FDConfig(delta=1e-5, scheme=FDScheme.CENTRAL)
    abs2 = fd_gradient(lambda c: float(abs(c.words[0, 0]) ** 2), one_plus_i, central)
    entries.append(_entry(
        "abs2_gradient", "fd_gradient central",
        [float(abs2.dx[0, 0]), float(abs2.dy[0, 0])], z=[1, 1], delta=1e-5,
    ))
    entries.append(_entry(
        "abs2_nonanalyticity", "fd_gradient central",
        float(nonanalyticity_check(abs2)[0, 0]), z=[1, 1],
    ))

    long_word = Code(np.array([[2.0, 0.0]]), "long")
    unit = LossParams(alpha=0.0, beta=1.0)
    entries.append(_entry(
        "penalty_norm_exact", "penalty_gradient",
        float(penalty_gradient(long_word, unit, PenaltyMode.EXACT).dx[0, 0]), word=[2, 0], beta=1,
    ))
    entries.append(_entry(
        "penalty_norm_literal", "penalty_gradient",
        float(penalty_gradient(long_word, unit, PenaltyMode.LITERAL).dx[0, 0]), word=[2, 0], beta=1,
    ))

    overlap = Code(np.array([[1.0, 0.0], [1.0, 0.0]]), "overlap")
    entries.append(_entry(
        "penalty_ortho_dx0", "penalty_gradient",
        float(penalty_gradient(overlap, LossParams(alpha=1.0, beta=0.0)).dx[0, 0]),
        words=[[1, 0], [1, 0]], alpha=1,
    ))

    p = 0.194
    zzz = standard_code("ZZZ")
    noise = lift_iid(pauli_channel_1q(PauliParams.isotropic(p)), 3)
    spec = FidelitySpec.parse("per:0", raw=True)
    record = fd_gradient(lambda c: fidelity(c, noise, identity_recovery(8), spec), zzz, central)
    entries.append(_entry(
        "zzz_raw_identity_norm", "fd_gradient central", record.norm, p=p, closed_form="4(1-2p)^3",
    ))

    return {"entries": entries}


def load_derived_values(path=DERIVED_VALUES) -> dict:
    doc = orjson.loads(Path(path).read_bytes())
    return {e["name"]: e for e in doc["entries"]}


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else DERIVED_VALUES
    target.write_bytes(orjson.dumps(derive_values(), option=orjson.OPT_INDENT_2) + b"\n")
    logger.info(f"wrote {target}")
