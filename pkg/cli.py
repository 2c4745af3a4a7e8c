"""
qcodegrad command line: sanity, gradscan, optimize, eval and calibrate.

Every command reads one RunConfig, merged as flag > --config file > --preset
> defaults, and writes its artifacts (report.json, report.csv, plot.svg,
final_code.json, gradients.json) into --out. Exit status: 0 ok, 1 error or
aborted run, 2 failed symmetry check.
"""
import copy
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import orjson
import pandas as pd
import typer
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from rich.console import Console
from rich.table import Table

from channels import ChannelSpec, QuantumChannel, from_spec
from codespace import FIXTURE_DIR, Code, PerturbationSpec, StandardCode, perturb, resolve_code, save_code, standard_code
from errors import QCodeGradError
from gradient import FDConfig, FDScheme, GradientRecord, extrapolated_gradient, fd_gradient
from logger_config import setup_logger
from objective import FidelityKind, FidelitySpec, LossParams, codeword_fidelities, fidelity
from optimizer import OptimizerConfig, OptimizerMode, evaluate_code, optimize as run_optimizer
from plotting import plot_delta_convergence, plot_gradscan, plot_trajectory
from recovery import RecoveryKind, RecoverySpec, build_recovery

logger = setup_logger("qcodegrad.cli")
console = Console(stderr=True)

PRESET_DIR = Path(__file__).resolve().parent / "presets"
# short names for the shipped presets
PRESET_ALIASES = {
    "fig1": "repetition_sweep",
    "table1": "repetition_table",
    "fig2": "five_qubit_scan",
    "sec4": "five_qubit_plain",
    "fig3": "five_qubit_stabilized",
}

EXIT_ERROR = 1
EXIT_SYMMETRY = 2

DIVERGENCE_MIN = 1e-3
CONVERGENCE_TOL = 1e-3
REPETITION_TARGET = 0.917
# isotropic strength -> baseline fidelity of the five-qubit code
FIVE_QUBIT_TARGETS = {0.05: 0.783, 0.01: 0.9821}
OPTIMIZED_FIXTURE = "five_qubit_optimized"
OPTIMIZED_TARGET = (0.05, 0.915)
ANCHOR_TOL = 1e-3
# share of a single strength p given to each of X, Y and Z
STRENGTH_CONVENTIONS = {"each": 1.0, "split": 1.0 / 3.0}

app = typer.Typer(help="Gradient-based optimization of quantum error-correcting codewords.", no_args_is_help=True)


# --- run configuration ---

class OptimizerSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: OptimizerMode = OptimizerMode.STABILIZED
    learning_rate: float = Field(default=1e-3, ge=0.0, allow_inf_nan=False)
    steps: int = Field(default=100, ge=0)
    loss: LossParams = LossParams()
    penalty_gradient: Literal["exact", "literal", "fd"] = "exact"
    project: Optional[bool] = None
    init: Literal["code", "random"] = "code"
    seed: Optional[int] = None
    gradient_noise: float = Field(default=0.0, ge=0.0)


def _calibration_grid() -> list:
    return [round(0.002 * i, 3) for i in range(151)]


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    code: str = "FIVE_QUBIT"
    channel: ChannelSpec = ChannelSpec()
    recovery: RecoverySpec = RecoverySpec()
    fidelity: str = "avg"
    raw_fidelity: bool = False
    fd: FDConfig = FDConfig()
    optimizer: OptimizerSection = OptimizerSection()

    # sanity
    deltas: list[float] = Field(default_factory=lambda: [1e-1, 5e-2, 1e-2, 5e-3, 1e-3, 5e-4, 2e-4, 1e-4], min_length=1)
    perturbation: PerturbationSpec = PerturbationSpec()
    check_delta: float = Field(default=1e-5, gt=0.0)
    symmetry_tol: float = Field(default=1e-9, ge=0.0)

    # gradscan / calibrate
    strengths: list[float] = Field(default_factory=lambda: [0.0, 0.01, 0.03, 0.05, 0.1], min_length=1)
    family: Literal["pauli", "damping"] = "pauli"
    plot_offset: float = Field(default=0.01, ge=0.0)
    calibration_grid: list[float] = Field(default_factory=_calibration_grid, min_length=1)

    threads: Optional[int] = Field(default=None, ge=0)
    out: str = "results"

    @field_validator("code")
    @classmethod
    def _code_exists(cls, value):
        if value.upper() in StandardCode.__members__:
            return value
        if (FIXTURE_DIR / f"{value}.json").exists() or Path(value).exists():
            return value
        raise ValueError(f"code {value!r} is neither a standard code, a fixture nor an existing file")

    @field_validator("fidelity")
    @classmethod
    def _fidelity_parses(cls, value):
        FidelitySpec.parse(value)
        return value

    @field_validator("deltas", "strengths", "calibration_grid")
    @classmethod
    def _non_negative(cls, value):
        if any(not np.isfinite(v) or v < 0 for v in value):
            raise ValueError("grid values must be finite and non-negative")
        return value

    def fidelity_spec(self) -> FidelitySpec:
        return FidelitySpec.parse(self.fidelity, raw=self.raw_fidelity)

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            fd=self.fd,
            fidelity=self.fidelity_spec(),
            recovery=self.recovery,
            **self.optimizer.model_dump(),
        )

    def echo(self) -> dict:
        """The config as written into reports; run-local fields are left out."""
        return self.model_dump(mode="json", exclude={"threads": True, "out": True, "recovery": {"custom_sigma"}})


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read_json(path: Path) -> dict:
    try:
        return orjson.loads(path.read_bytes())
    except FileNotFoundError as exc:
        raise typer.BadParameter(f"{path} does not exist") from exc
    except orjson.JSONDecodeError as exc:
        raise typer.BadParameter(f"{path} is not valid JSON: {exc}") from exc


def load_run_config(preset: Optional[str] = None, config: Optional[Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    doc = {}
    if preset:
        path = PRESET_DIR / f"{PRESET_ALIASES.get(preset, preset)}.json"
        if not path.exists():
            known = sorted(p.stem for p in PRESET_DIR.glob("*.json")) + sorted(PRESET_ALIASES)
            raise typer.BadParameter(f"unknown preset {preset!r}; choose from {known}")
        doc = _deep_merge(doc, _read_json(path))
    if config:
        doc = _deep_merge(doc, _read_json(Path(config)))
    doc = _deep_merge(doc, {k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig.model_validate(doc)


def _settle(preset, config, overrides) -> RunConfig:
    try:
        cfg = load_run_config(preset, config, overrides)
    except ValidationError as exc:
        logger.error(f"invalid configuration:\n{exc}")
        raise typer.Exit(EXIT_ERROR)
    except typer.BadParameter as exc:
        logger.error(str(exc))
        raise typer.Exit(EXIT_ERROR)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    return cfg


# --- outputs ---

def write_json(path: Path, doc) -> Path:
    path.write_bytes(orjson.dumps(doc, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY) + b"\n")
    logger.info(f"wrote {path}")
    return path


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    logger.info(f"wrote {path}")
    return path


# --- shared numerics ---

def _differentiate(objective, code: Code, fd: Union[FDConfig, float], threads: Optional[int]) -> GradientRecord:
    # a bare float is the step of a Richardson-extrapolated check gradient
    if isinstance(fd, FDConfig):
        return fd_gradient(objective, code, fd, threads)
    return extrapolated_gradient(objective, code, fd, threads)


def codeword_gradient_norms(
    code: Code,
    noise: QuantumChannel,
    rec: QuantumChannel,
    fspec: FidelitySpec,
    fd: Union[FDConfig, float],
    threads: Optional[int] = None,
) -> list:
    """
    Gradient norm for each codeword. Per-codeword fidelities are
    differentiated one word at a time; other kinds are differentiated once
    and the gradient is split by word.
    """
    if fspec.kind is FidelityKind.PER_CODEWORD:
        norms = []
        for k in range(code.k):
            spec = fspec.model_copy(update={"index": k})
            record = _differentiate(lambda c: fidelity(c, noise, rec, spec), code, fd, threads)
            norms.append(record.norm)
        return norms
    record = _differentiate(lambda c: fidelity(c, noise, rec, fspec), code, fd, threads)
    return [float(n) for n in record.per_word_norms()]


def _check(name: str, deviation: float, tol: float, gate: bool = True, below: bool = True) -> dict:
    passed = deviation <= tol if below else deviation > tol
    return {"check": name, "deviation": float(deviation), "tolerance": tol, "passed": bool(passed), "gate": gate}


def _finish(checks: list) -> int:
    failed = [c for c in checks if c["gate"] and not c["passed"]]
    for c in checks:
        if not c["passed"]:
            level = "symmetry check failed" if c["gate"] else "check not met"
            logger.warning(f"{level}: {c['check']} deviation {c['deviation']:.3e} (tolerance {c['tolerance']:.1e})")
    return EXIT_SYMMETRY if failed else 0


# --- commands ---

@app.command()
def sanity(
    config: Optional[Path] = typer.Option(None, "--config", help="Run config JSON"),
    preset: Optional[str] = typer.Option(None, "--preset", help="Shipped preset name"),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Single delta instead of the sweep"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Gradient workers, 0 = auto"),
):
    """Per-codeword gradient norms of XXX, ZZZ and their perturbed variants."""
    cfg = _settle(preset, config, {"out": out, "threads": threads, "deltas": None if delta is None else [delta]})
    out_dir = Path(cfg.out)
    try:
        # 1. Codes and noise
        noise = from_spec(cfg.channel, qubits=3)
        xxx, zzz = standard_code("XXX"), standard_code("ZZZ")
        codes = {
            "XXX": xxx,
            "ZZZ": zzz,
            "XXX+perturbed": perturb(xxx, cfg.perturbation),
            "ZZZ+perturbed": perturb(zzz, cfg.perturbation),
        }
        recoveries = {name: build_recovery(cfg.recovery, noise, code) for name, code in codes.items()}
        fspec = cfg.fidelity_spec()

        # 2. Delta sweep
        rows = []
        deltas = sorted(cfg.deltas, reverse=True)
        for name, code in codes.items():
            for d in deltas:
                fd = FDConfig(delta=d, scheme=cfg.fd.scheme)
                for word, norm in enumerate(codeword_gradient_norms(code, noise, recoveries[name], fspec, fd, cfg.threads)):
                    rows.append({"code": name, "word": word, "delta": d, "norm": norm})
        sweep = pd.DataFrame(rows)

        # 3. Symmetry checks on extrapolated central differences
        exact = {
            name: np.array(codeword_gradient_norms(code, noise, recoveries[name], fspec, cfg.check_delta, cfg.threads))
            for name, code in codes.items()
        }
    except QCodeGradError as exc:
        logger.error(f"sanity failed: {exc}")
        raise typer.Exit(EXIT_ERROR)

    checks = [
        _check("XXX |0_L> vs |1_L>", np.ptp(exact["XXX"]), cfg.symmetry_tol),
        _check("ZZZ |0_L> vs |1_L>", np.ptp(exact["ZZZ"]), cfg.symmetry_tol),
        _check("XXX vs ZZZ", np.max(np.abs(exact["XXX"] - exact["ZZZ"])), cfg.symmetry_tol),
        _check(
            "perturbed XXX vs ZZZ diverge",
            np.max(np.abs(exact["XXX+perturbed"] - exact["ZZZ+perturbed"])),
            DIVERGENCE_MIN,
            below=False,
        ),
    ]
    if len(deltas) >= 2:
        last, previous = sweep[sweep["delta"] == deltas[-1]], sweep[sweep["delta"] == deltas[-2]]
        drift = np.max(np.abs(last["norm"].to_numpy() - previous["norm"].to_numpy()))
        checks.append(_check(f"delta {deltas[-2]:g} -> {deltas[-1]:g} convergence", drift, CONVERGENCE_TOL, gate=False))

    endpoint = sweep[sweep["delta"] == deltas[-1]]
    table_rows = {name: endpoint[endpoint["code"] == name]["norm"].tolist() for name in codes}

    table = Table(title=f"Per-codeword gradient norms at delta={deltas[-1]:g}")
    table.add_column("code")
    table.add_column("||grad|| per codeword")
    for name, norms in table_rows.items():
        table.add_row(name, "[" + ", ".join(f"{n:.4f}" for n in norms) + "]")
    console.print(table)

    write_json(out_dir / "report.json", {
        "config": cfg.echo(),
        "channel": noise.label,
        "table": table_rows,
        "sweep": rows,
        "checks": checks,
    })
    write_csv(out_dir / "report.csv", sweep)
    plot_delta_convergence(sweep, out_dir / "plot.svg")
    raise typer.Exit(_finish(checks))


def _gradscan_channels(family: str, strength: float, qubits: int) -> list:
    iso = ChannelSpec(px=strength, py=strength, pz=strength, qubits=qubits)
    if family == "damping":
        return [("damping", ChannelSpec(kind="damping", gamma=strength, qubits=qubits)), ("isotropic", iso)]
    return [
        ("X", ChannelSpec(px=strength, qubits=qubits)),
        ("Y", ChannelSpec(py=strength, qubits=qubits)),
        ("Z", ChannelSpec(pz=strength, qubits=qubits)),
        ("isotropic", iso),
    ]


@app.command()
def gradscan(
    config: Optional[Path] = typer.Option(None, "--config", help="Run config JSON"),
    preset: Optional[str] = typer.Option(None, "--preset", help="Shipped preset name"),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Finite-difference step"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Gradient workers, 0 = auto"),
):
    """Gradient norms of one code across a grid of noise strengths."""
    cfg = _settle(preset, config, {"out": out, "threads": threads, "fd": None if delta is None else {"delta": delta}})
    out_dir = Path(cfg.out)
    fspec = cfg.fidelity_spec()
    rows, gradients, gate_norms = [], [], {}
    try:
        code = resolve_code(cfg.code)
        for strength in cfg.strengths:
            for name, spec in _gradscan_channels(cfg.family, strength, code.qubits):
                noise = from_spec(spec)
                rec = build_recovery(cfg.recovery, noise, code)
                objective = lambda c: fidelity(c, noise, rec, fspec)
                record = fd_gradient(objective, code, cfg.fd, cfg.threads)
                rows.append({
                    "strength": strength,
                    "channel": name,
                    "norm": record.norm,
                    "fidelity": record.objective_at_base,
                })
                gradients.append({"strength": strength, "channel": name, **record.to_dict()})
                if name in ("X", "Y", "Z"):
                    gate_norms.setdefault(strength, []).append(
                        extrapolated_gradient(objective, code, cfg.check_delta, cfg.threads).norm
                    )
                logger.info(f"strength {strength:g} {name}: ||grad||={record.norm:.10f}")
    except QCodeGradError as exc:
        logger.error(f"gradscan failed: {exc}")
        raise typer.Exit(EXIT_ERROR)

    frame = pd.DataFrame(rows)
    checks = [
        _check(f"X/Y/Z at strength {strength:g}", np.ptp(norms), cfg.symmetry_tol)
        for strength, norms in gate_norms.items()
    ]

    write_json(out_dir / "report.json", {"config": cfg.echo(), "code": code.label, "rows": rows, "checks": checks})
    write_json(out_dir / "gradients.json", gradients)
    write_csv(out_dir / "report.csv", frame)
    plot_gradscan(frame, out_dir / "plot.svg", offset=cfg.plot_offset)
    raise typer.Exit(_finish(checks))


@app.command()
def optimize(
    config: Optional[Path] = typer.Option(None, "--config", help="Run config JSON"),
    preset: Optional[str] = typer.Option(None, "--preset", help="Shipped preset name"),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Finite-difference step"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Gradient workers, 0 = auto"),
    steps: Optional[int] = typer.Option(None, "--steps", help="Gradient steps"),
    lr: Optional[float] = typer.Option(None, "--lr", help="Learning rate"),
):
    """Run plain or stabilized gradient descent and write the trajectory."""
    optimizer = {k: v for k, v in {"steps": steps, "learning_rate": lr}.items() if v is not None}
    cfg = _settle(preset, config, {
        "out": out,
        "threads": threads,
        "fd": None if delta is None else {"delta": delta},
        "optimizer": optimizer or None,
    })
    out_dir = Path(cfg.out)
    try:
        code = resolve_code(cfg.code)
        noise = from_spec(cfg.channel, qubits=code.qubits)
        traj = run_optimizer(code, noise, cfg.optimizer_config(), cfg.threads)
    except QCodeGradError as exc:
        logger.error(f"optimize failed: {exc}")
        raise typer.Exit(EXIT_ERROR)

    doc = traj.to_dict()
    doc["config"] = cfg.echo()
    write_json(out_dir / "report.json", doc)
    frame = traj.to_frame()
    if len(frame):
        write_csv(out_dir / "report.csv", frame)
        plot_trajectory(frame, out_dir / "plot.svg")
    save_code(traj.final_code, out_dir / "final_code.json")

    if traj.steps:
        first, last = traj.steps[0], traj.steps[-1]
        console.print(f"fidelity {first.fidelity:.6f} -> {last.fidelity:.6f} over {last.step} steps")
    if traj.error:
        logger.error(f"trajectory stopped early: {traj.error}")
        raise typer.Exit(EXIT_ERROR)


@app.command("eval")
def evaluate(
    config: Optional[Path] = typer.Option(None, "--config", help="Run config JSON"),
    preset: Optional[str] = typer.Option(None, "--preset", help="Shipped preset name"),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Shared option; eval takes no gradients"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Shared option; eval takes no gradients"),
    code: Optional[str] = typer.Option(None, "--code", help="Standard code, fixture name or code file"),
):
    """Print the loss breakdown of a code as JSON."""
    cfg = _settle(preset, config, {"out": out, "threads": threads, "code": code,
                                   "fd": None if delta is None else {"delta": delta}})
    try:
        target = resolve_code(cfg.code)
        noise = from_spec(cfg.channel, qubits=target.qubits)
        ocfg = cfg.optimizer_config()
        rec = build_recovery(ocfg.recovery, noise, target)
        breakdown = evaluate_code(target, noise, ocfg, recovery=rec)
        per_word = codeword_fidelities(target, noise, rec, raw=ocfg.fidelity.raw)
    except QCodeGradError as exc:
        logger.error(f"eval failed: {exc}")
        raise typer.Exit(EXIT_ERROR)

    doc = {
        "code": target.label,
        "channel": noise.label,
        "fidelity_kind": ocfg.fidelity.label(),
        **breakdown.to_dict(),
        "codeword_fidelities": [float(f) for f in per_word],
    }
    write_json(Path(cfg.out) / "report.json", doc)
    typer.echo(orjson.dumps(doc, option=orjson.OPT_INDENT_2).decode())


def _calibration_kinds() -> list:
    return [FidelitySpec.parse(kind, raw=raw) for kind in ("per:0", "avg", "entanglement") for raw in (True, False)]


def _isotropic(strength: float, convention: str, qubits: int) -> ChannelSpec:
    p = strength * STRENGTH_CONVENTIONS[convention]
    return ChannelSpec(px=p, py=p, pz=p, qubits=qubits)


def _closest(frame: pd.DataFrame, value_column: str, target: float) -> dict:
    errors = (frame[value_column] - target).abs()
    row = frame.loc[errors.idxmin()].to_dict()
    return {
        "target": target,
        "closest": row,
        "error": float(errors.min()),
        "matched": bool(errors.min() <= ANCHOR_TOL),
    }


@app.command()
def calibrate(
    config: Optional[Path] = typer.Option(None, "--config", help="Run config JSON"),
    preset: Optional[str] = typer.Option(None, "--preset", help="Shipped preset name"),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Finite-difference step"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Gradient workers, 0 = auto"),
):
    """Scan fidelity definitions, recoveries, strength conventions and strengths for the published anchors."""
    cfg = _settle(preset, config, {"out": out, "threads": threads, "fd": None if delta is None else {"delta": delta}})
    out_dir = Path(cfg.out)
    recoveries = [RecoverySpec(kind=RecoveryKind.IDENTITY), RecoverySpec(kind=RecoveryKind.PETZ)]
    fd = FDConfig(delta=cfg.fd.delta, scheme=FDScheme.FORWARD)

    rep_rows, five_rows = [], []
    try:
        # 1. Repetition-code gradient norm against the 0.917 anchor
        zzz = standard_code("ZZZ")
        for strength in cfg.calibration_grid:
            for convention in STRENGTH_CONVENTIONS:
                noise = from_spec(_isotropic(strength, convention, 3))
                for rspec in recoveries:
                    rec = build_recovery(rspec, noise, zzz)
                    for fspec in _calibration_kinds():
                        norm = codeword_gradient_norms(zzz, noise, rec, fspec, fd, cfg.threads)[0]
                        rep_rows.append({
                            "strength": strength,
                            "convention": convention,
                            "recovery": rspec.kind.value,
                            "fidelity": fspec.label(),
                            "raw": fspec.raw,
                            "norm": norm,
                            "error": abs(norm - REPETITION_TARGET),
                        })

        # 2. Five-qubit baseline and the stored optimized code against their fidelities
        codes = {"FIVE_QUBIT": standard_code("FIVE_QUBIT"), OPTIMIZED_FIXTURE: resolve_code(OPTIMIZED_FIXTURE)}
        for strength in FIVE_QUBIT_TARGETS:
            for convention in STRENGTH_CONVENTIONS:
                noise = from_spec(_isotropic(strength, convention, 5))
                for rspec in recoveries:
                    for name, code in codes.items():
                        rec = build_recovery(rspec, noise, code)
                        for fspec in _calibration_kinds():
                            five_rows.append({
                                "code": name,
                                "strength": strength,
                                "convention": convention,
                                "recovery": rspec.kind.value,
                                "fidelity": fspec.label(),
                                "raw": fspec.raw,
                                "value": fidelity(code, noise, rec, fspec),
                            })
    except QCodeGradError as exc:
        logger.error(f"calibrate failed: {exc}")
        raise typer.Exit(EXIT_ERROR)

    rep = pd.DataFrame(rep_rows).sort_values("error", kind="stable")
    five = pd.DataFrame(five_rows)
    keys = ["strength", "convention", "recovery", "fidelity", "raw"]
    gain = (
        five[five["code"] == "FIVE_QUBIT"]
        .merge(five[five["code"] == OPTIMIZED_FIXTURE], on=keys, suffixes=("_baseline", "_optimized"))
        .assign(ratio=lambda f: f["value_optimized"] / f["value_baseline"])
    )
    gain = gain[gain["strength"] == OPTIMIZED_TARGET[0]][keys + ["value_baseline", "value_optimized", "ratio"]]

    anchors = {"repetition_norm": _closest(rep, "norm", REPETITION_TARGET)}
    for strength, target in FIVE_QUBIT_TARGETS.items():
        subset = five[(five["code"] == "FIVE_QUBIT") & (five["strength"] == strength)]
        anchors[f"five_qubit@{strength:g}"] = _closest(subset, "value", target)
    subset = five[(five["code"] == OPTIMIZED_FIXTURE) & (five["strength"] == OPTIMIZED_TARGET[0])]
    anchors[f"{OPTIMIZED_FIXTURE}@{OPTIMIZED_TARGET[0]:g}"] = _closest(subset, "value", OPTIMIZED_TARGET[1])
    published_gain = OPTIMIZED_TARGET[1] / FIVE_QUBIT_TARGETS[OPTIMIZED_TARGET[0]]
    anchors["optimized_gain"] = _closest(gain, "ratio", published_gain)

    table = Table(title="Closest configuration per anchor")
    for column in ("anchor", "target", "closest", "configuration", "matched"):
        table.add_column(column)
    for name, anchor in anchors.items():
        row = anchor["closest"]
        found = next(row[c] for c in ("norm", "value", "ratio") if c in row)
        setup = ", ".join(f"{k}={row[k]}" for k in keys)
        table.add_row(name, f"{anchor['target']:.4f}", f"{found:.6f}", setup, str(anchor["matched"]))
    console.print(table)
    for name, anchor in anchors.items():
        if not anchor["matched"]:
            logger.warning(f"no scanned configuration reaches {name}={anchor['target']:g}; closest misses by {anchor['error']:.4f}")

    optimized = codes[OPTIMIZED_FIXTURE]
    write_json(out_dir / "report.json", {
        "config": cfg.echo(),
        "anchors": anchors,
        "optimized_norms_squared": [float(n) ** 2 for n in optimized.norms()],
        "gain": gain.to_dict(orient="records"),
        "five_qubit": five_rows,
    })
    write_csv(out_dir / "report.csv", pd.DataFrame(rep_rows))
