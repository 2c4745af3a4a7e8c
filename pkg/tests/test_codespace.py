import numpy as np
import orjson
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from codespace import (
    FIXTURE_DIR,
    Code,
    Codeword,
    PerturbationSpec,
    StandardCode,
    code_projector,
    gram_matrix,
    gram_schmidt,
    hadamard_all,
    load_code,
    perturb,
    random_code,
    resolve_code,
    save_code,
    stabilizer_generators,
    standard_code,
)
from errors import CodeFileError, DimensionError, NotOrthonormalError, RankDeficiencyError, UnknownCodeError
from operator_algebra import X, kron_all
from testkit import SeededGenerator

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

ZERO_PLUS = [0, 5, 9, 10, 18, 20]
ZERO_MINUS = [3, 6, 12, 15, 17, 23, 24, 27, 29, 30]


def test_repetition_codes():
    zzz = standard_code("ZZZ")
    assert zzz.words.shape == (2, 8)
    assert zzz.words[0, 0] == 1 and zzz.words[1, 7] == 1
    xxx = standard_code(StandardCode.XXX)
    assert np.allclose(xxx.words, hadamard_all(zzz).words)
    assert np.allclose(np.abs(xxx.words), 1 / np.sqrt(8))
    assert xxx.label == "XXX"


def test_five_qubit_code_is_stabilized():
    code = standard_code("five_qubit")
    assert code.qubits == 5 and code.k == 2
    for g in stabilizer_generators():
        assert np.allclose(code.words @ g.T, code.words, atol=1e-12)
    assert np.allclose(gram_matrix(code), np.eye(2), atol=1e-12)
    assert np.allclose(kron_all([X] * 5) @ code.words[0], code.words[1])


def test_five_qubit_sign_pattern():
    zero = standard_code("FIVE_QUBIT").words[0]
    assert np.allclose(zero[ZERO_PLUS], 0.25)
    assert np.allclose(zero[ZERO_MINUS], -0.25)
    others = np.setdiff1d(np.arange(32), ZERO_PLUS + ZERO_MINUS)
    assert np.allclose(zero[others], 0.0)


@pytest.mark.parametrize("name, fixture", [("ZZZ", "zzz"), ("XXX", "xxx"), ("FIVE_QUBIT", "five_qubit")])
def test_fixture_files_match_constructors(name, fixture):
    stored = load_code(FIXTURE_DIR / f"{fixture}.json")
    assert stored.allclose(standard_code(name), atol=1e-15)


def test_unknown_standard_code():
    with pytest.raises(UnknownCodeError):
        standard_code("steane")


@pytest.mark.parametrize("member", list(StandardCode))
def test_standard_code_accepts_enum_members_and_names(member):
    from_member = standard_code(member)
    from_name = standard_code(member.value.lower())
    assert from_member.label == member.value
    assert from_member.allclose(from_name, atol=0.0)


def test_gram_schmidt_matches_derived(derived):
    code = gram_schmidt(Code(np.array([[2.0, 0.0], [1.0, 1.0]])))
    expected = np.array([[complex(re, im) for re, im in row] for row in derived["gram_schmidt_2d"]["value"]])
    assert np.allclose(code.words, expected, atol=1e-15)


@given(seeds, st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=3))
@hsettings(max_examples=30, deadline=None)
def test_gram_schmidt_orthonormal_and_span_preserving(seed, qubits, k):
    k = min(k, 2 ** qubits)
    code = SeededGenerator(seed).code(qubits, k, normalized=False)
    ortho = gram_schmidt(code)
    assert np.allclose(gram_matrix(ortho), np.eye(k), atol=1e-12)
    # every original word lies in the new span
    residual = code.words.T - code_projector(ortho) @ code.words.T
    assert np.max(np.abs(residual)) < 1e-10 * max(1.0, np.max(np.abs(code.words)))


def test_gram_schmidt_rank_deficiency():
    with pytest.raises(RankDeficiencyError):
        gram_schmidt(Code(np.array([[1.0, 0.0], [2.0, 0.0]])))


def test_code_projector():
    projector = code_projector(standard_code("ZZZ"))
    assert np.allclose(np.diag(projector), [1, 0, 0, 0, 0, 0, 0, 1])
    with pytest.raises(NotOrthonormalError):
        code_projector(Code(np.array([[1.0, 0.0], [1.0, 1.0]])))


def test_perturb():
    zzz = standard_code("ZZZ")
    assert perturb(zzz, PerturbationSpec(magnitude=0.0)).allclose(zzz)

    raw = perturb(zzz, PerturbationSpec(magnitude=0.05, renormalize=False))
    assert np.allclose(raw.words - zzz.words, 0.05)

    normed = perturb(zzz, PerturbationSpec(magnitude=0.05))
    assert np.allclose(normed.norms(), 1.0)

    pattern = np.zeros(zzz.size, dtype=complex)
    pattern[1] = 1j
    shifted = perturb(zzz, PerturbationSpec(magnitude=0.1, renormalize=False), pattern)
    assert shifted.words[0, 1] == 0.1j
    with pytest.raises(DimensionError):
        perturb(zzz, PerturbationSpec(), np.ones(3))


def test_code_is_read_only():
    code = standard_code("ZZZ")
    with pytest.raises(ValueError):
        code.words[0, 0] = 2.0
    assert Codeword(code.words[0]).qubits == 3
    with pytest.raises(DimensionError):
        Codeword(np.ones(3))


def test_save_and_load(tmp_path):
    code = random_code(2, 2, np.random.default_rng(7), label="r")
    path = save_code(code, tmp_path / "nested" / "r.json")
    loaded = load_code(path)
    assert loaded.label == "r"
    assert np.array_equal(loaded.words, code.words)


def test_load_code_errors(tmp_path):
    with pytest.raises(CodeFileError):
        load_code(tmp_path / "missing.json")

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(CodeFileError):
        load_code(bad)

    mixed = tmp_path / "mixed.json"
    mixed.write_bytes(orjson.dumps({"label": "m", "qubits": 1, "codewords": [[["1", "0"], ["0", "0"]], [["1", "0"]]]}))
    with pytest.raises(CodeFileError, match="mixed"):
        load_code(mixed)

    wrong = tmp_path / "wrong.json"
    wrong.write_bytes(orjson.dumps({"label": "w", "qubits": 2, "codewords": [[["1", "0"], ["0", "0"]]]}))
    with pytest.raises(CodeFileError, match="qubits"):
        load_code(wrong)

    for bad_value in ("nan", "inf", "-inf"):
        nonfinite = tmp_path / f"nonfinite_{bad_value}.json"
        nonfinite.write_bytes(
            orjson.dumps({"label": "n", "qubits": 1, "codewords": [[["1", "0"], [bad_value, "0"]]]})
        )
        with pytest.raises(CodeFileError, match="non-finite"):
            load_code(nonfinite)


def test_resolve_code():
    assert resolve_code("zzz").label == "ZZZ"
    optimized = resolve_code("five_qubit_optimized")
    assert optimized.words.shape == (2, 32)
    # the stored optimized code is close to, not exactly, normalized
    assert np.allclose(optimized.norms(), 1.0, atol=0.1)
    with pytest.raises(CodeFileError):
        resolve_code("no_such_code")
