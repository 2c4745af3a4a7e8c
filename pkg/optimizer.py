"""
Gradient descent on codewords.

PLAIN descends 1 - F and Gram-Schmidts the code after every step.
STABILIZED descends the penalty loss and leaves orthonormality to the
penalties. Both update a -> a - lr * (df/dx + i df/dy) with a fixed step.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from channels import QuantumChannel
from codespace import Code, code_to_dict, gram_schmidt, random_code
from errors import NonFiniteObjectiveError, QCodeGradError
from gradient import FDConfig, GradientRecord, PenaltyMode, fd_gradient, penalty_gradient
from logger_config import setup_logger
from objective import (
    FidelitySpec,
    LossBreakdown,
    LossParams,
    fidelity,
    loss,
    norm_residual,
    ortho_residual,
)
from recovery import RecoverySpec, Refresh, build_recovery

logger = setup_logger("qcodegrad.optimizer")


class OptimizerMode(str, Enum):
    PLAIN = "plain"
    STABILIZED = "stabilized"


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: OptimizerMode = OptimizerMode.STABILIZED
    learning_rate: float = Field(default=1e-3, ge=0.0, allow_inf_nan=False)
    steps: int = Field(default=100, ge=0)
    fd: FDConfig = FDConfig()
    loss: LossParams = LossParams()
    fidelity: FidelitySpec = FidelitySpec()
    recovery: RecoverySpec = RecoverySpec()
    penalty_gradient: Literal["exact", "literal", "fd"] = "exact"
    # Gram-Schmidt after each update; None = on for PLAIN, off for STABILIZED
    project: Optional[bool] = None
    init: Literal["code", "random"] = "code"
    seed: Optional[int] = None
    gradient_noise: float = Field(default=0.0, ge=0.0)

    def projects(self) -> bool:
        if self.project is not None:
            return self.project
        return self.mode is OptimizerMode.PLAIN

    def loss_params(self) -> LossParams:
        # PLAIN ignores the penalty weights
        if self.mode is OptimizerMode.PLAIN:
            return LossParams(alpha=0.0, beta=0.0)
        return self.loss

    def echo(self) -> dict:
        return self.model_dump(mode="json", exclude={"recovery": {"custom_sigma"}})


@dataclass(frozen=True)
class StepRecord:
    step: int
    fidelity: float
    loss: float
    fidelity_term: float
    ortho_term: float
    norm_term: float
    grad_norm: Optional[float]
    max_ortho: float
    max_norm_dev: float


@dataclass
class Trajectory:
    config: OptimizerConfig
    initial_code: Code
    final_code: Code
    steps: list = field(default_factory=list)
    error: Optional[str] = None

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def fidelities(self) -> list:
        return [s.fidelity for s in self.steps]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(s) for s in self.steps])

    def to_dict(self) -> dict:
        return {
            "config": self.config.echo(),
            "steps": [vars(s) for s in self.steps],
            "final_code": code_to_dict(self.final_code),
            "error": self.error,
        }


def _record(step: int, code: Code, breakdown: LossBreakdown, grad: Optional[GradientRecord]) -> StepRecord:
    return StepRecord(
        step=step,
        fidelity=breakdown.fidelity,
        loss=breakdown.total,
        fidelity_term=breakdown.fidelity_term,
        ortho_term=breakdown.ortho_term,
        norm_term=breakdown.norm_term,
        grad_norm=None if grad is None else grad.norm,
        max_ortho=ortho_residual(code),
        max_norm_dev=norm_residual(code),
    )


def _step_gradient(code: Code, noise: QuantumChannel, rec: QuantumChannel, cfg: OptimizerConfig, threads) -> GradientRecord:
    fspec = cfg.fidelity
    if cfg.mode is OptimizerMode.PLAIN:
        return fd_gradient(lambda c: 1.0 - fidelity(c, noise, rec, fspec), code, cfg.fd, threads)

    params = cfg.loss
    if cfg.penalty_gradient == "fd":
        return fd_gradient(lambda c: loss(c, noise, rec, fspec, params).total, code, cfg.fd, threads)
    fidelity_part = fd_gradient(lambda c: (1.0 - fidelity(c, noise, rec, fspec)) ** 2, code, cfg.fd, threads)
    return fidelity_part + penalty_gradient(code, params, PenaltyMode(cfg.penalty_gradient))


def _starting_code(code: Code, cfg: OptimizerConfig) -> Code:
    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        code = random_code(code.qubits, code.k, rng, label=f"{code.label}-random")
    if cfg.projects():
        code = gram_schmidt(code)
    return code


def _run(code: Code, noise: QuantumChannel, cfg: OptimizerConfig, threads=None) -> Trajectory:
    code = _starting_code(code, cfg)
    traj = Trajectory(config=cfg, initial_code=code, final_code=code)
    rng = np.random.default_rng(cfg.seed)
    params = cfg.loss_params()
    rec = build_recovery(cfg.recovery, noise, code)

    for step in range(cfg.steps + 1):
        try:
            if step > 0 and cfg.recovery.refresh is Refresh.PER_STEP:
                rec = build_recovery(cfg.recovery, noise, code)
            breakdown = loss(code, noise, rec, cfg.fidelity, params)
            if not np.isfinite(breakdown.total):
                raise NonFiniteObjectiveError(breakdown.total)
            grad = _step_gradient(code, noise, rec, cfg, threads)
        except QCodeGradError as exc:
            traj.error = f"step {step}: {exc}"
            logger.error(f"optimization aborted at {traj.error}")
            break

        traj.steps.append(_record(step, code, breakdown, grad))
        traj.final_code = code
        logger.info(f"step {step}/{cfg.steps}: fidelity={breakdown.fidelity:.6f} loss={breakdown.total:.6e} |grad|={grad.norm:.4e}")
        if step == cfg.steps:
            break

        grad = grad.with_noise(rng, cfg.gradient_noise)
        updated = code.with_words(code.words - cfg.learning_rate * grad.complex)
        if cfg.projects():
            try:
                updated = gram_schmidt(updated)
            except QCodeGradError as exc:
                traj.error = f"step {step + 1}: {exc}"
                logger.error(f"optimization aborted at {traj.error}")
                break
        code = updated

    return traj


def plain_gd(code: Code, noise: QuantumChannel, cfg: OptimizerConfig, threads=None) -> Trajectory:
    if cfg.mode is not OptimizerMode.PLAIN:
        raise ValueError("plain_gd needs mode='plain'")
    return _run(code, noise, cfg, threads)


def stabilized_gd(code: Code, noise: QuantumChannel, cfg: OptimizerConfig, threads=None) -> Trajectory:
    if cfg.mode is not OptimizerMode.STABILIZED:
        raise ValueError("stabilized_gd needs mode='stabilized'")
    return _run(code, noise, cfg, threads)


def optimize(code: Code, noise: QuantumChannel, cfg: OptimizerConfig, threads=None) -> Trajectory:
    runner = plain_gd if cfg.mode is OptimizerMode.PLAIN else stabilized_gd
    return runner(code, noise, cfg, threads)


def evaluate_code(code: Code, noise: QuantumChannel, cfg: OptimizerConfig, recovery: Optional[QuantumChannel] = None) -> LossBreakdown:
    """One loss evaluation; the recovery is built from `code` unless given."""
    rec = recovery if recovery is not None else build_recovery(cfg.recovery, noise, code)
    return loss(code, noise, rec, cfg.fidelity, cfg.loss)
