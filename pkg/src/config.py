"""Process settings and the run-configuration schema.

Process-level knobs (log level, thread count, default seed) come from the
environment through ``Settings``.  Everything that shapes a computation lives
in a run configuration file::

    # desk.cfg
    [grid]
    dimension = 2
    half_width = 32.0
    points = 128

    [verify]
    lemma_beta = 1.5
    lemma_gammas = 0, 0.5, 1.5

which is parsed into ``RunConfig``.  Every section forbids unknown keys, so a
typo fails before any field is allocated.
"""

import configparser
import hashlib
import json
from pathlib import Path
from typing import Annotated, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigError


class Settings(BaseSettings):
    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: str = Field(default="", description="Optional rotating log file path")

    # Execution
    threads: int = Field(
        default=1,
        ge=1,
        description="FFT workers and concurrent suite checks; results never depend on it",
    )
    default_seed: int = Field(default=20240601, ge=0, description="Seed used when --seed is absent")
    output_dir: str = Field(default="runs", description="Default output directory")

    model_config = SettingsConfigDict(
        env_prefix="NSLAB_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


settings = Settings()


# --- Value coercion for the key = value format ---


def _split_csv(value):
    if isinstance(value, str):
        items = [item.strip() for item in value.split(",")]
        return [item for item in items if item]
    return value


def _strict_bool(value):
    if isinstance(value, str):
        lowered = value.strip()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
        raise ValueError("booleans must be written as true or false")
    return value


FloatList = Annotated[list[float], BeforeValidator(_split_csv)]
StrList = Annotated[list[str], BeforeValidator(_split_csv)]
StrictFlag = Annotated[bool, BeforeValidator(_strict_bool)]

CHECK_NAMES = (
    "beta_integrals",
    "weighted_young",
    "heat_estimate",
    "oseen_estimate",
    "kernel_audit",
    "initial_estimate",
    "solution_decay",
    "bootstrap",
    "picard_contraction",
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSection(_Section):
    dimension: int = 2
    half_width: float = 32.0
    points: int = 128


class SolverSection(_Section):
    t_min: float | None = None
    t_max: float | None = None
    slices: int = 16
    quadrature_order: int = 8
    max_iterations: int = 40
    tolerance: float = 1e-8
    delta: float | None = None
    safety_factor: float = 2.0
    bilinear_samples: int = 8
    data_kind: Literal["vortex", "curl-potential"] = "curl-potential"
    amplitude: float = 1.0
    core_radius: float | None = None
    smallness_variant: Literal["three_term", "two_term", "single_term"] = "three_term"


class WeightsSection(_Section):
    gamma: float = 0.5
    tilde_gamma: float = 0.5
    alpha: float = 0.25
    beta: float = 1.5
    tilde_beta: float = 1.5
    hat_beta: float | None = None


class VerifySection(_Section):
    checks: StrList = Field(default_factory=lambda: list(CHECK_NAMES))
    beta_draws: int = 20
    beta_times: FloatList = Field(default_factory=lambda: [0.5, 1.0, 7.0])
    lemma_points: int = 512
    lemma_half_width: float = 64.0
    lemma_t_min: float = 12.5
    lemma_t_max: float = 113.0
    lemma_samples: int = 10
    lemma_beta: float = 1.5
    lemma_gammas: FloatList = Field(default_factory=lambda: [0.0, 0.5, 1.5])
    young_alphas: FloatList = Field(default_factory=lambda: [1.25, 1.5])
    young_betas: FloatList = Field(default_factory=lambda: [1.25, 1.0])
    young_points: int = 512
    young_half_width: float = 32.0
    audit_points: int = 256
    audit_half_width: float = 32.0
    regularization_factor: float = 2.0
    mass_matched: StrictFlag = True
    bootstrap_alphas: FloatList = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    bootstrap_hat_betas: FloatList = Field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5])

    @model_validator(mode="after")
    def _known_checks(self):
        unknown = [name for name in self.checks if name not in CHECK_NAMES]
        if unknown:
            raise ValueError(f"unknown checks {unknown}; expected a subset of {list(CHECK_NAMES)}")
        if len(self.young_alphas) != len(self.young_betas):
            raise ValueError("young_alphas and young_betas must have the same length")
        return self


class OutputSection(_Section):
    directory: str | None = None
    run_name: str = "desk"
    write_json: StrictFlag = True
    write_csv: StrictFlag = True


class RunConfig(_Section):
    grid: GridSection = Field(default_factory=GridSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    weights: WeightsSection = Field(default_factory=WeightsSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    output: OutputSection = Field(default_factory=OutputSection)

    def config_hash(self) -> str:
        """Stable digest of the validated configuration."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_run_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse ``[section]`` / ``key = value`` text into a validated ``RunConfig``."""
    parser = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        delimiters=("=",),
    )
    parser.optionxform = str  # keys are case sensitive
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(source, f"malformed configuration: {exc}") from exc

    raw: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        raw[section] = dict(parser.items(section))

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ConfigError(path, first["msg"]) from exc


def load_run_config(path: str | Path) -> RunConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(str(path), "configuration file not found")
    return parse_run_config(path.read_text(encoding="utf-8"), source=str(path))
