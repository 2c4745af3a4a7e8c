"""
Codewords, codes and their file format.

A Code is K complex amplitude vectors of length 2^n stacked as a (K, 2^n)
array. Codewords are deliberately not required to be normalized: the
stabilized optimizer moves through unnormalized vectors and lets penalties
pull them back.
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from errors import (
    CodeFileError,
    DimensionError,
    NotOrthonormalError,
    RankDeficiencyError,
    UnknownCodeError,
)
from logger_config import setup_logger
from operator_algebra import H, ComplexMatrix, X, kron_all, pauli_string

logger = setup_logger("qcodegrad.codespace")

GS_RANK_TOL = 1e-10
PROJECTOR_ORTHO_TOL = 1e-8
FIVE_QUBIT_GENERATORS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")


def _qubits_for(length: int) -> int:
    if length < 2 or length & (length - 1):
        raise DimensionError(f"codeword length {length} is not a power of two >= 2")
    return length.bit_length() - 1


@dataclass(frozen=True)
class Codeword:
    amplitudes: npt.NDArray[np.complex128]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        _qubits_for(amps.size)
        if not np.all(np.isfinite(amps)):
            raise ValueError("codeword has non-finite amplitudes")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def qubits(self) -> int:
        return _qubits_for(self.amplitudes.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class Code:
    words: npt.NDArray[np.complex128]
    label: str = ""

    def __post_init__(self):
        words = np.array(self.words, dtype=np.complex128)
        if words.ndim == 1:
            words = words[None, :]
        if words.ndim != 2 or words.shape[0] < 1:
            raise DimensionError(f"a code needs a (K, 2^n) array with K >= 1, got {words.shape}")
        _qubits_for(words.shape[1])
        if not np.all(np.isfinite(words)):
            raise ValueError("code has non-finite amplitudes")
        words.setflags(write=False)
        object.__setattr__(self, "words", words)

    @classmethod
    def from_codewords(cls, codewords: Sequence[Codeword], label: str = "") -> "Code":
        sizes = {w.amplitudes.size for w in codewords}
        if len(sizes) != 1:
            raise DimensionError(f"codewords have mixed lengths {sorted(sizes)}")
        return cls(np.stack([w.amplitudes for w in codewords]), label)

    @property
    def k(self) -> int:
        return self.words.shape[0]

    @property
    def dim(self) -> int:
        return self.words.shape[1]

    @property
    def qubits(self) -> int:
        return _qubits_for(self.dim)

    @property
    def size(self) -> int:
        """Total number of complex coefficients."""
        return self.words.size

    @property
    def codewords(self) -> tuple:
        return tuple(Codeword(w) for w in self.words)

    def __iter__(self) -> Iterator[Codeword]:
        return iter(self.codewords)

    def with_words(self, words, label: Optional[str] = None) -> "Code":
        return Code(words, self.label if label is None else label)

    def norms(self) -> npt.NDArray[np.float64]:
        return np.linalg.norm(self.words, axis=1)

    def allclose(self, other: "Code", atol: float = 1e-12) -> bool:
        return self.words.shape == other.words.shape and bool(
            np.allclose(self.words, other.words, rtol=0.0, atol=atol)
        )


class StandardCode(str, Enum):
    XXX = "XXX"
    ZZZ = "ZZZ"
    FIVE_QUBIT = "FIVE_QUBIT"


class PerturbationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    magnitude: float = Field(default=0.05, ge=0.0)
    renormalize: bool = True


def stabilizer_generators() -> list:
    """The four [[5,1,3]] generators: XZZXI and its cyclic shifts."""
    return [pauli_string(label) for label in FIVE_QUBIT_GENERATORS]


def _basis(dim: int, index: int) -> npt.NDArray[np.complex128]:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def _five_qubit_code() -> Code:
    dim = 32
    projector = reduce(
        lambda acc, g: acc @ (0.5 * (np.eye(dim) + g)), stabilizer_generators(), np.eye(dim, dtype=np.complex128)
    )
    zero = projector @ _basis(dim, 0)
    zero = zero / np.linalg.norm(zero)
    one = kron_all([X] * 5) @ zero
    return Code(np.stack([zero, one]), "FIVE_QUBIT")


def hadamard_all(code: Code) -> Code:
    """Apply H on every qubit of every codeword."""
    h = kron_all([H] * code.qubits)
    return code.with_words(code.words @ h.T)


def standard_code(name: Union[StandardCode, str]) -> Code:
    try:
        name = StandardCode(name.value if isinstance(name, StandardCode) else str(name).upper())
    except ValueError as exc:
        raise UnknownCodeError(f"unknown standard code {name!r}; choose from {[c.value for c in StandardCode]}") from exc

    if name is StandardCode.ZZZ:
        return Code(np.stack([_basis(8, 0), _basis(8, 7)]), "ZZZ")
    if name is StandardCode.XXX:
        return Code(hadamard_all(standard_code(StandardCode.ZZZ)).words, "XXX")
    return _five_qubit_code()


def perturb(code: Code, spec: PerturbationSpec, pattern=None) -> Code:
    """
    Shift every coefficient by magnitude * pattern and optionally renormalize.

    pattern=None is the uniform real offset (+magnitude on each real part);
    otherwise it is a complex array with one entry per coefficient, either
    flat or shaped like code.words.
    """
    if pattern is None:
        offsets = np.ones(code.words.shape, dtype=np.complex128)
    else:
        offsets = np.asarray(pattern, dtype=np.complex128)
        if offsets.size != code.size:
            raise DimensionError(f"pattern has {offsets.size} entries, the code has {code.size} coefficients")
        offsets = offsets.reshape(code.words.shape)

    words = code.words + spec.magnitude * offsets
    if spec.renormalize:
        words = words / np.linalg.norm(words, axis=1, keepdims=True)
    return code.with_words(words)


def gram_schmidt(code: Code) -> Code:
    """Classical Gram-Schmidt in list order; the first codeword is only normalized."""
    basis = []
    for index, word in enumerate(code.words):
        residual = word.copy()
        for q in basis:
            residual = residual - np.vdot(q, word) * q
        norm = np.linalg.norm(residual)
        if norm < GS_RANK_TOL * max(1.0, np.linalg.norm(word)):
            raise RankDeficiencyError(f"codeword {index} is linearly dependent on the ones before it (residual {norm:.3e})")
        basis.append(residual / norm)
    return code.with_words(np.stack(basis))


def gram_matrix(code: Code) -> ComplexMatrix:
    """G_ij = <i|j> in the physics convention (conjugate-linear in the first slot)."""
    return code.words.conj() @ code.words.T


def code_projector(code: Code) -> ComplexMatrix:
    gram = gram_matrix(code)
    deviation = float(np.max(np.abs(gram - np.eye(code.k))))
    if deviation > PROJECTOR_ORTHO_TOL:
        raise NotOrthonormalError(f"codewords deviate from orthonormal by {deviation:.3e}")
    return code.words.T @ code.words.conj()


def random_code(qubits: int, k: int, rng: np.random.Generator, label: str = "random") -> Code:
    """K normalized complex Gaussian codewords."""
    dim = 2 ** qubits
    words = rng.standard_normal((k, dim)) + 1j * rng.standard_normal((k, dim))
    words /= np.linalg.norm(words, axis=1, keepdims=True)
    return Code(words, label)


# --- Code files ---

class CodeFile(BaseModel):
    """On-disk schema; amplitudes are [re, im] decimal strings."""

    label: str
    qubits: int = Field(ge=1)
    codewords: list[list[tuple[str, str]]] = Field(min_length=1)

    @field_validator("codewords")
    @classmethod
    def _parse_numbers(cls, value):
        for word in value:
            for re_str, im_str in word:
                if not (math.isfinite(float(re_str)) and math.isfinite(float(im_str))):
                    raise ValueError(f"non-finite amplitude [{re_str}, {im_str}]")
        return value


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def code_to_dict(code: Code) -> dict:
    return {
        "label": code.label,
        "qubits": code.qubits,
        "codewords": [[[_fmt(a.real), _fmt(a.imag)] for a in word] for word in code.words],
    }


def code_from_dict(data) -> Code:
    try:
        doc = CodeFile.model_validate(data)
    except ValidationError as exc:
        raise CodeFileError(f"malformed code document: {exc}") from exc

    lengths = {len(word) for word in doc.codewords}
    if len(lengths) != 1:
        raise CodeFileError(f"codewords have mixed lengths {sorted(lengths)}")
    length = lengths.pop()
    if length < 2 or length & (length - 1):
        raise CodeFileError(f"codeword length {length} is not a power of two")
    if length != 2 ** doc.qubits:
        raise CodeFileError(f"qubits={doc.qubits} but codewords have length {length}")

    words = np.array(
        [[complex(float(re_str), float(im_str)) for re_str, im_str in word] for word in doc.codewords],
        dtype=np.complex128,
    )
    return Code(words, doc.label)


def save_code(code: Code, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(code_to_dict(code), option=orjson.OPT_INDENT_2) + b"\n")
    logger.debug(f"wrote code '{code.label}' ({code.k}x{code.dim}) to {path}")
    return path


def load_code(path: Union[str, Path]) -> Code:
    path = Path(path)
    try:
        data = orjson.loads(path.read_bytes())
    except FileNotFoundError as exc:
        raise CodeFileError(f"code file not found: {path}") from exc
    except orjson.JSONDecodeError as exc:
        raise CodeFileError(f"{path} is not valid JSON: {exc}") from exc
    return code_from_dict(data)


FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures" / "codes"


def resolve_code(source: str) -> Code:
    """A standard-code name, a fixture name (e.g. 'five_qubit_optimized') or a path."""
    try:
        return standard_code(source)
    except UnknownCodeError:
        pass
    fixture = FIXTURE_DIR / f"{source}.json"
    if fixture.exists():
        return load_code(fixture)
    return load_code(source)
