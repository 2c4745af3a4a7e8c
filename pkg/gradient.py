"""
Wirtinger finite-difference gradients over code coefficients.

Each complex coefficient a = x + iy is perturbed along x and along y; the
pair (df/dx, df/dy) gives the steepest directional slope sqrt(dx^2 + dy^2)
at angle atan2(dy, dx), and the aggregate norm is the 2-norm over all of
them. Perturbed evaluations are independent and may run on a thread pool;
results are placed by position, so the record never depends on completion
order.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from codespace import Code
from config import resolve_threads
from errors import NonFiniteObjectiveError, ZeroNormError
from logger_config import setup_logger
from objective import LossParams, penalty_terms

logger = setup_logger("qcodegrad.gradient")

Objective = Callable[[Code], float]


class FDScheme(str, Enum):
    FORWARD = "forward"
    CENTRAL = "central"


class FDConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float = Field(default=1e-4, gt=0.0, allow_inf_nan=False)
    scheme: FDScheme = FDScheme.FORWARD


@dataclass(frozen=True)
class GradientRecord:
    dx: npt.NDArray[np.float64]  # (K, d)
    dy: npt.NDArray[np.float64]
    delta: float
    objective_at_base: float

    @property
    def slope(self) -> npt.NDArray[np.float64]:
        return np.sqrt(self.dx ** 2 + self.dy ** 2)

    @property
    def angle(self) -> npt.NDArray[np.float64]:
        return np.arctan2(self.dy, self.dx)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.slope ** 2)))

    @property
    def complex(self) -> npt.NDArray[np.complex128]:
        """dx + i dy, the update direction of each coefficient."""
        return self.dx + 1j * self.dy

    def per_word_norms(self) -> npt.NDArray[np.float64]:
        return np.sqrt(np.sum(self.slope ** 2, axis=1))

    def __add__(self, other: "GradientRecord") -> "GradientRecord":
        return GradientRecord(
            dx=self.dx + other.dx,
            dy=self.dy + other.dy,
            delta=self.delta or other.delta,
            objective_at_base=self.objective_at_base + other.objective_at_base,
        )

    def with_noise(self, rng: np.random.Generator, scale: float) -> "GradientRecord":
        if scale <= 0.0:
            return self
        return GradientRecord(
            dx=self.dx + scale * rng.standard_normal(self.dx.shape),
            dy=self.dy + scale * rng.standard_normal(self.dy.shape),
            delta=self.delta,
            objective_at_base=self.objective_at_base,
        )

    def to_dict(self) -> dict:
        slope, angle = self.slope, self.angle
        coefficients = [
            {
                "word": int(k),
                "index": int(i),
                "dx": float(self.dx[k, i]),
                "dy": float(self.dy[k, i]),
                "slope": float(slope[k, i]),
                "angle": float(angle[k, i]),
            }
            for k, i in np.ndindex(self.dx.shape)
        ]
        return {"delta": self.delta, "norm": self.norm, "coefficients": coefficients}


def _shifted(code: Code, flat_index: int, step: complex) -> Code:
    words = code.words.copy()
    words.flat[flat_index] += step
    return code.with_words(words)


def _evaluate(objective: Objective, codes: list, threads: int) -> list:
    if threads <= 1 or len(codes) <= 1:
        return [objective(c) for c in codes]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map keeps input order
        return list(pool.map(objective, codes))


def _check_finite(values: npt.NDArray[np.float64], shape: tuple, component: str):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        word, index = np.unravel_index(bad[0], shape)
        raise NonFiniteObjectiveError(values[bad[0]], int(word), int(index), component)


def fd_gradient(
    objective: Objective,
    code: Code,
    cfg: FDConfig = FDConfig(),
    threads: Optional[int] = None,
) -> GradientRecord:
    """
    Forward scheme: df/dx_i = (f(a_i + delta) - f(a)) / delta and
    df/dy_i = (f(a_i + i delta) - f(a)) / delta, sharing one base evaluation
    (2N + 1 calls). Central scheme: (f(a + h) - f(a - h)) / (2 delta), 4N + 1 calls.
    """
    workers = resolve_threads(threads)
    n = code.size
    delta = cfg.delta

    base = float(objective(code))
    if not np.isfinite(base):
        raise NonFiniteObjectiveError(base)

    steps = [delta, 1j * delta]
    if cfg.scheme is FDScheme.CENTRAL:
        steps += [-delta, -1j * delta]
    codes = [_shifted(code, i, s) for s in steps for i in range(n)]
    values = np.array(_evaluate(objective, codes, workers), dtype=np.float64).reshape(len(steps), n)

    _check_finite(values[0], code.words.shape, "x")
    _check_finite(values[1], code.words.shape, "y")
    if cfg.scheme is FDScheme.CENTRAL:
        _check_finite(values[2], code.words.shape, "x")
        _check_finite(values[3], code.words.shape, "y")
        dx = (values[0] - values[2]) / (2.0 * delta)
        dy = (values[1] - values[3]) / (2.0 * delta)
    else:
        dx = (values[0] - base) / delta
        dy = (values[1] - base) / delta

    logger.debug(f"fd_gradient: {len(codes) + 1} evaluations, delta={delta}, workers={workers}")
    return GradientRecord(
        dx=dx.reshape(code.words.shape),
        dy=dy.reshape(code.words.shape),
        delta=delta,
        objective_at_base=base,
    )


def nonanalyticity_check(record: GradientRecord) -> npt.NDArray[np.float64]:
    """|df/dz-bar| = |(dx + i dy) / 2| per coefficient; nonzero means f is not holomorphic there."""
    return np.abs(0.5 * (record.dx + 1j * record.dy))


def richardson(fine: GradientRecord, coarse: GradientRecord) -> GradientRecord:
    """
    Combine central records at delta and 2 delta: (4 D(delta) - D(2 delta)) / 3
    cancels the delta^2 truncation term.
    """
    if not np.isclose(coarse.delta, 2.0 * fine.delta, rtol=1e-12, atol=0.0):
        raise ValueError(f"coarse step {coarse.delta} is not twice the fine step {fine.delta}")
    return GradientRecord(
        dx=(4.0 * fine.dx - coarse.dx) / 3.0,
        dy=(4.0 * fine.dy - coarse.dy) / 3.0,
        delta=fine.delta,
        objective_at_base=fine.objective_at_base,
    )


def extrapolated_gradient(objective: Objective, code: Code, delta: float = 1e-5, threads: Optional[int] = None) -> GradientRecord:
    """Richardson-extrapolated central differences, accurate to O(delta^4)."""
    fine = fd_gradient(objective, code, FDConfig(delta=delta, scheme=FDScheme.CENTRAL), threads)
    coarse = fd_gradient(objective, code, FDConfig(delta=2.0 * delta, scheme=FDScheme.CENTRAL), threads)
    return richardson(fine, coarse)


class PenaltyMode(str, Enum):
    EXACT = "exact"
    LITERAL = "literal"


def penalty_gradient(code: Code, params: LossParams, mode: PenaltyMode = PenaltyMode.EXACT) -> GradientRecord:
    """
    Analytic gradient of alpha * sum_{i<j} |<i|j>|^2 + beta * sum_i xi_i^2, xi_i = 1 - ||i||_2.

    EXACT norm part: -2 beta xi_i x_p / ||i||. LITERAL: -4 beta xi_i x_p, which
    is the derivative of (1 - ||i||^2)^2 with xi_i in place of 1 - ||i||^2.
    Orthogonality part, with
    <i|j> = f + ig (see objective.inner_product_parts):
        dK/dx = 2f u - 2g v,  dK/dy = 2f v + 2g u,
        dK/du = 2f x + 2g y,  dK/dv = 2f y - 2g x.
    """
    words = code.words
    x, y = words.real, words.imag
    norms = code.norms()
    xi = 1.0 - norms

    if mode is PenaltyMode.EXACT:
        if np.any(norms == 0.0):
            raise ZeroNormError(f"codeword {int(np.argmin(norms))} has zero norm")
        scale = -2.0 * params.beta * xi / norms
    else:
        scale = -4.0 * params.beta * xi
    dx = scale[:, None] * x
    dy = scale[:, None] * y

    for i in range(code.k):
        for j in range(i + 1, code.k):
            u, v = x[j], y[j]
            f = float(np.sum(x[i] * u + y[i] * v))
            g = float(np.sum(y[i] * u - x[i] * v))
            dx[i] += params.alpha * (2 * f * u - 2 * g * v)
            dy[i] += params.alpha * (2 * f * v + 2 * g * u)
            dx[j] += params.alpha * (2 * f * x[i] + 2 * g * y[i])
            dy[j] += params.alpha * (2 * f * y[i] - 2 * g * x[i])

    ortho, norm = penalty_terms(code, params)
    return GradientRecord(dx=dx, dy=dy, delta=0.0, objective_at_base=ortho + norm)
