from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import dotenv_values
from pathlib import Path
from typing import Any, Dict, List, Optional

from dqeo.errors import ConfigurationError
from dqeo.models import GradFreeMethod, Mode, ReportFormat


class Settings(BaseSettings):
    """Application configuration settings"""

    # Application
    app_name: str = "D-QEO Hybrid Optimizer"
    env: str = "development"
    debug: bool = False

    # Logging
    log_dir: str = "logs"
    log_to_file: bool = True

    # Workers
    jobs: int = 1                                   # trial-level processes
    fragment_workers: int = 1                       # fragment threads inside one trial

    # Quantum preconditioner
    qubits: int = 5
    layers: int = 3
    shots: int = 1000
    alpha: float = 0.1
    budget: int = 200
    rho_begin: float = 0.5                          # radians; parameters are Ry angles
    rho_end: float = 1e-12                          # CVaR is shot-noisy; the budget should bind first
    gradfree_method: GradFreeMethod = GradFreeMethod.COBYLA

    # Seed box
    beta: float = 0.7
    delta_base: float = 0.5
    gamma: float = 2.0

    # Particle swarm (constriction constants)
    hybrid_particles: int = 256
    classical_particles: int = 10_000               # full-domain baseline; 1e5 at production scale
    pso_iterations: int = 200
    pso_inertia: float = 0.729
    pso_cognitive: float = 1.49445
    pso_social: float = 1.49445
    pso_velocity_clamp: float = 0.2

    # BFGS
    bfgs_tol: float = 1e-8
    bfgs_max_iter: int = 500
    bfgs_max_step: float = 0.25                     # inf-norm cap on the first trial step

    # Battery defaults
    seed: int = 0
    trials: int = 100
    repeats: int = 1
    out: str = "reports/battery"
    format: ReportFormat = ReportFormat.JSON

    model_config = SettingsConfigDict(
        env_prefix="DQEO_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()


def _split_list(v: Any) -> Any:
    """Accept comma-separated strings for list-valued keys"""
    if isinstance(v, str):
        return [part.strip() for part in v.split(",") if part.strip()]
    if isinstance(v, (int, float)):
        return [v]
    return v


class BatteryConfig(BaseModel):
    """One benchmark battery: the cells to run and every knob they use"""
    model_config = ConfigDict(extra="forbid")

    objective: str = "rastrigin"
    dims: List[int] = Field(default_factory=lambda: [2])
    qubits: int = Field(default_factory=lambda: settings.qubits, ge=1, le=20)
    layers: int = Field(default_factory=lambda: settings.layers, ge=1)
    budgets: List[int] = Field(default_factory=lambda: [settings.budget])
    trials: int = Field(default_factory=lambda: settings.trials, ge=0)
    repeats: int = Field(default_factory=lambda: settings.repeats, ge=1)
    modes: List[Mode] = Field(default_factory=lambda: [Mode.HYBRID])
    particles: int = Field(default_factory=lambda: settings.classical_particles, ge=1)
    hybrid_particles: int = Field(default_factory=lambda: settings.hybrid_particles, ge=1)
    pso_iterations: int = Field(default_factory=lambda: settings.pso_iterations, ge=0)
    beta: float = Field(default_factory=lambda: settings.beta, ge=0.0, le=1.0)
    delta_base: float = Field(default_factory=lambda: settings.delta_base, gt=0.0)
    gamma: float = Field(default_factory=lambda: settings.gamma, ge=0.0)
    alpha: float = Field(default_factory=lambda: settings.alpha, gt=0.0, le=1.0)
    shots: int = Field(default_factory=lambda: settings.shots, ge=1)
    rho_begin: float = Field(default_factory=lambda: settings.rho_begin, gt=0.0)
    rho_end: float = Field(default_factory=lambda: settings.rho_end, gt=0.0)
    gradfree_method: GradFreeMethod = Field(default_factory=lambda: settings.gradfree_method)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0)
    out: Optional[str] = None
    format: ReportFormat = Field(default_factory=lambda: settings.format)
    jobs: int = Field(default_factory=lambda: settings.jobs, ge=1)
    fragment_workers: int = Field(default_factory=lambda: settings.fragment_workers, ge=1)

    @field_validator("dims", "budgets", mode="before")
    @classmethod
    def split_int_list(cls, v):
        return _split_list(v)

    @field_validator("modes", mode="before")
    @classmethod
    def split_modes(cls, v):
        v = _split_list(v)
        if isinstance(v, list) and [str(m).lower() for m in v] == ["both"]:
            return [Mode.HYBRID, Mode.CLASSICAL]
        return [str(m).lower() if isinstance(m, str) else m for m in v]

    @field_validator("objective", mode="before")
    @classmethod
    def normalize_objective(cls, v):
        return str(v).strip().lower()

    @field_validator("dims")
    @classmethod
    def positive_dims(cls, v):
        if not v or any(d < 1 for d in v):
            raise ValueError("dims must be a non-empty list of positive integers")
        return v

    @field_validator("budgets")
    @classmethod
    def positive_budgets(cls, v):
        if not v or any(b < 1 for b in v):
            raise ValueError("budgets must be a non-empty list of positive integers")
        return v


def load_battery_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> BatteryConfig:
    """
    Build a BatteryConfig from a KEY=value file plus command-line overrides

    Args:
        path: Optional config file (dotenv syntax, comma-separated lists)
        overrides: Values from CLI flags; None entries are ignored

    Raises:
        ConfigurationError: Missing file or invalid values
    """
    values: Dict[str, Any] = {}
    if path:
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigurationError(f"Config file not found: {config_path}")
        for key, value in dotenv_values(config_path).items():
            if value is not None:
                values[key.strip().lower().replace("-", "_")] = value

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key.replace("-", "_")] = value

    try:
        return BatteryConfig(**values)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid battery configuration: {e}") from e
