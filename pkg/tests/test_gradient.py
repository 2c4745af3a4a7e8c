import numpy as np
import pytest

from channels import PauliParams, lift_iid, pauli_channel_1q
from codespace import Code, standard_code
from errors import NonFiniteObjectiveError, ZeroNormError
from gradient import (
    FDConfig,
    FDScheme,
    GradientRecord,
    PenaltyMode,
    extrapolated_gradient,
    fd_gradient,
    nonanalyticity_check,
    penalty_gradient,
    richardson,
)
from objective import FidelitySpec, LossParams, fidelity, penalty_terms
from recovery import RecoverySpec, build_recovery, identity_recovery
from testkit import SeededGenerator, code_as_vector, fd_oracle, vector_as_code

ONE_PLUS_I = Code(np.array([[1.0 + 1.0j, 0.0]]))


def abs2(code):
    return float(abs(code.words[0, 0]) ** 2)


def test_central_gradient_of_abs2(derived):
    record = fd_gradient(abs2, ONE_PLUS_I, FDConfig(delta=1e-5, scheme=FDScheme.CENTRAL))
    assert [record.dx[0, 0], record.dy[0, 0]] == pytest.approx(derived["abs2_gradient"]["value"], abs=1e-8)
    assert record.dx[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert nonanalyticity_check(record)[0, 0] == pytest.approx(derived["abs2_nonanalyticity"]["value"], abs=1e-8)


def test_forward_gradient_has_first_order_bias():
    record = fd_gradient(abs2, ONE_PLUS_I, FDConfig(delta=1e-4))
    # (f(x + d) - f(x)) / d = 2x + d for f = x^2
    assert record.dx[0, 0] == pytest.approx(2.0 + 1e-4, abs=1e-9)
    assert record.objective_at_base == pytest.approx(2.0)


@pytest.mark.parametrize("scheme, calls", [(FDScheme.FORWARD, 5), (FDScheme.CENTRAL, 9)])
def test_evaluation_count(scheme, calls):
    seen = []

    def counting(code):
        seen.append(code)
        return abs2(code)

    fd_gradient(counting, ONE_PLUS_I, FDConfig(scheme=scheme), threads=1)
    assert len(seen) == calls


def test_constant_objective_is_analytic():
    record = fd_gradient(lambda c: 3.0, standard_code("ZZZ"))
    assert record.norm == 0.0
    assert np.all(nonanalyticity_check(record) == 0.0)


def test_thread_count_does_not_change_record():
    zzz = standard_code("ZZZ")
    noise = lift_iid(pauli_channel_1q(PauliParams.isotropic(0.05)), 3)
    rec = build_recovery(RecoverySpec(), noise, zzz)

    def objective(code):
        return fidelity(code, noise, rec)

    serial = fd_gradient(objective, zzz, threads=1)
    pooled = fd_gradient(objective, zzz, threads=4)
    assert np.array_equal(serial.dx, pooled.dx)
    assert np.array_equal(serial.dy, pooled.dy)


def test_non_finite_objective_is_located():
    def blows_up(code):
        return float("nan") if code.words[0, 1].real != 0 else 1.0

    with pytest.raises(NonFiniteObjectiveError) as info:
        fd_gradient(blows_up, Code(np.array([[1.0, 0.0]])))
    assert (info.value.word, info.value.index, info.value.component) == (0, 1, "x")

    with pytest.raises(NonFiniteObjectiveError, match="base point"):
        fd_gradient(lambda c: float("inf"), ONE_PLUS_I)


def test_record_geometry():
    record = GradientRecord(dx=np.array([[3.0]]), dy=np.array([[4.0]]), delta=1e-4, objective_at_base=0.0)
    assert record.slope[0, 0] == 5.0
    assert record.angle[0, 0] == pytest.approx(np.arctan2(4, 3))
    assert record.norm == 5.0
    assert record.complex[0, 0] == 3 + 4j
    doubled = record + record
    assert doubled.norm == 10.0
    dump = record.to_dict()
    assert dump["coefficients"][0]["slope"] == 5.0
    assert (dump["coefficients"][0]["word"], dump["coefficients"][0]["index"]) == (0, 0)
    assert dump["norm"] == 5.0


def test_gradient_noise_is_seeded():
    record = GradientRecord(dx=np.zeros((1, 2)), dy=np.zeros((1, 2)), delta=1e-4, objective_at_base=0.0)
    assert record.with_noise(np.random.default_rng(0), 0.0) is record
    a = record.with_noise(np.random.default_rng(3), 0.1)
    b = record.with_noise(np.random.default_rng(3), 0.1)
    assert np.array_equal(a.dx, b.dx) and a.norm > 0


def test_richardson_is_exact_on_quartics():
    code = Code(np.array([[1.0 + 2.0j, 0.0]]))

    def quartic(c):
        return float(abs(c.words[0, 0]) ** 4)

    record = extrapolated_gradient(quartic, code, delta=1e-3)
    # d/dx (x^2 + y^2)^2 = 4 |a|^2 x
    assert record.dx[0, 0] == pytest.approx(20.0, abs=1e-8)
    assert record.dy[0, 0] == pytest.approx(40.0, abs=1e-8)

    fine = fd_gradient(quartic, code, FDConfig(delta=1e-3, scheme=FDScheme.CENTRAL))
    with pytest.raises(ValueError):
        richardson(fine, fine)


def test_repetition_gradient_norm_matches_derived(derived):
    p = 0.194
    zzz = standard_code("ZZZ")
    noise = lift_iid(pauli_channel_1q(PauliParams.isotropic(p)), 3)
    spec = FidelitySpec.parse("per:0", raw=True)
    record = extrapolated_gradient(lambda c: fidelity(c, noise, identity_recovery(8), spec), zzz)
    assert record.norm == pytest.approx(derived["zzz_raw_identity_norm"]["value"], abs=1e-9)
    assert record.norm == pytest.approx(4 * (1 - 2 * p) ** 3, abs=1e-9)


def _codeword_norms(code, noise, rec):
    norms = []
    for k in range(code.k):
        spec = FidelitySpec.parse(f"per:{k}", raw=True)
        norms.append(extrapolated_gradient(lambda c: fidelity(c, noise, rec, spec), code).norm)
    return np.array(norms)


@pytest.mark.parametrize("recovery", ["identity", "petz"])
@pytest.mark.parametrize("p", [0.01, 0.05, 0.1])
def test_repetition_codes_share_gradient_norms(p, recovery):
    noise = lift_iid(pauli_channel_1q(PauliParams.isotropic(p)), 3)
    norms = {}
    for name in ("XXX", "ZZZ"):
        code = standard_code(name)
        norms[name] = _codeword_norms(code, noise, build_recovery(RecoverySpec(kind=recovery), noise, code))
        # a transversal Pauli exchanges |0_L> and |1_L> and commutes with the noise
        assert np.ptp(norms[name]) < 1e-9
    assert np.max(np.abs(norms["XXX"] - norms["ZZZ"])) < 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_exact_penalty_gradient_matches_oracle(seed):
    code = SeededGenerator(seed).code(2, 3, normalized=False)
    params = LossParams(alpha=2.0, beta=2.0)
    delta = 1e-5

    def objective(v):
        return sum(penalty_terms(vector_as_code(v, code), params))

    oracle = fd_oracle(objective, code_as_vector(code), delta)
    record = penalty_gradient(code, params, PenaltyMode.EXACT)
    analytic = np.concatenate([record.dx.ravel(), record.dy.ravel()])
    assert np.max(np.abs(oracle - analytic)) < 50 * delta


def test_literal_norm_term(derived):
    long_word = Code(np.array([[2.0, 0.0]]))
    params = LossParams(alpha=0.0, beta=1.0)
    exact = penalty_gradient(long_word, params, PenaltyMode.EXACT)
    literal = penalty_gradient(long_word, params, PenaltyMode.LITERAL)
    assert exact.dx[0, 0] == derived["penalty_norm_exact"]["value"]
    assert literal.dx[0, 0] == derived["penalty_norm_literal"]["value"]
    # -4 beta xi x with xi = 1 - ||i|| = -1
    assert literal.dx[0, 0] == -4 * 1.0 * (1 - 2.0) * 2.0


def test_penalty_modes_agree_on_unit_norm_words():
    code = SeededGenerator(5).code(2, 2)
    params = LossParams()
    exact = penalty_gradient(code, params, PenaltyMode.EXACT)
    literal = penalty_gradient(code, params, PenaltyMode.LITERAL)
    assert np.allclose(exact.dx, literal.dx, atol=1e-12)
    assert np.allclose(exact.dy, literal.dy, atol=1e-12)


def test_orthogonality_gradient(derived):
    overlap = Code(np.array([[1.0, 0.0], [1.0, 0.0]]))
    record = penalty_gradient(overlap, LossParams(alpha=1.0, beta=0.0))
    assert record.dx[0, 0] == derived["penalty_ortho_dx0"]["value"]
    assert record.dx[1, 0] == 2.0
    assert record.objective_at_base == 1.0


def test_penalty_gradient_zero_norm():
    with pytest.raises(ZeroNormError):
        penalty_gradient(Code(np.array([[0.0, 0.0]])), LossParams())
