import os

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    """
    Process-wide numeric and logging settings.
    Read from QCODEGRAD_* environment variables (or a .env file); nothing is required.
    """

    model_config = SettingsConfigDict(env_prefix="QCODEGRAD_", extra="ignore")

    # largest qubit count any kron / channel lift may produce (2^10 = 1024 dims)
    max_qubits: int = Field(default=10, ge=1, le=14)
    # Kraus operators below this Frobenius norm are dropped
    prune_threshold: float = Field(default=1e-14, ge=0.0)
    # pseudo-inverse cutoff, relative to the largest eigenvalue
    pinv_rtol: float = Field(default=1e-12, gt=0.0)
    # gradient evaluation workers, 0 = one per CPU
    threads: int = Field(default=1, ge=0)

    log_level: str = "INFO"
    log_file: str = "qcodegrad.log"


settings = Settings()


def resolve_threads(threads: int | None) -> int:
    """Turn a thread request (None = settings, 0 = auto) into a worker count."""
    if threads is None:
        threads = settings.threads
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, threads)
