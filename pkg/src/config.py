"""
Centralized Configuration Management.

All numerical defaults, tolerances and environment variables are managed here.
This follows the 12-factor app methodology for configuration.
"""

import os
from dataclasses import dataclass, field
from enum import Enum


# =============================================================================
# ENVIRONMENT DETECTION
# =============================================================================

def is_debug_mode() -> bool:
    """Check if debug mode is enabled."""
    return os.environ.get("DEBUG", "").lower() in ("true", "1", "yes")


def get_log_level() -> str:
    """Console log level, DEBUG when debug mode is on."""
    if is_debug_mode():
        return "DEBUG"
    return os.environ.get("QTIMING_LOG_LEVEL", "INFO").upper()


def get_log_dir():
    """Directory for the rotating file sink, or None to log to stderr only."""
    return os.environ.get("QTIMING_LOG_DIR") or None


def get_thread_count() -> int:
    """
    Worker cap for partitioned Monte Carlo runs.

    QTIMING_THREADS=0 (or unset) means one worker per CPU.
    """
    raw = os.environ.get("QTIMING_THREADS", "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        requested = 0
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


# =============================================================================
# ENUMS FOR TYPE SAFETY
# =============================================================================

class EnvelopeFamily(str, Enum):
    """Pulse envelope families."""
    GAUSSIAN = "gaussian"
    SECH = "sech"


class NoiseKind(str, Enum):
    """Noise sources accepted by the budget."""
    CEO_PHASE = "ceo_phase"
    REP_RATE_JITTER = "rep_rate_jitter"
    QUANTUM_FLOOR = "quantum_floor"


class LOModeKind(str, Enum):
    """Local-oscillator mode selectors."""
    W1 = "w1"
    IV0 = "iv0"
    V1 = "v1"
    MIX = "mix"


class OverlapMethod(str, Enum):
    """How the homodyne mean is evaluated."""
    ANALYTIC = "analytic"
    GRID = "grid"


class OutputFormat(str, Enum):
    """CLI output formats."""
    CSV = "csv"
    JSON = "json"


class SweepParameter(str, Enum):
    """Scenario parameters a 1-D sweep can vary."""
    POWER = "power"
    DURATION_FWHM = "duration_fwhm"
    WAVELENGTH = "wavelength"
    SQUEEZING_DB = "squeezing_db"


# =============================================================================
# DEFAULT VALUES (Magic Numbers centralized)
# =============================================================================

@dataclass(frozen=True)
class GridDefaults:
    """Time-grid discretization defaults."""

    GUARD_FACTOR: float = 40.0
    N_POINTS: int = 2 ** 16

    # Preconditions of make_grid
    MIN_GUARD_FACTOR: float = 20.0
    MIN_POINTS: int = 16


@dataclass(frozen=True)
class Tolerances:
    """Validation thresholds and tolerances."""

    # Mode normalization and orthogonality
    NORM_TOL: float = 1e-10
    ORTHOGONALITY_TOL: float = 1e-8

    # LO modes must live in span{v0, v1}
    SPAN_TOL: float = 1e-6

    # Spectral leakage: energy fraction allowed in the outer band of the window
    LEAKAGE_FRACTION: float = 1e-6
    LEAKAGE_BAND: float = 0.10

    # Shifts
    MAX_SHIFT_FRACTION_OF_WINDOW: float = 0.10
    MAX_FIRST_ORDER_FRACTION_OF_FWHM: float = 0.10
    # Relative slack so shifts landing on a bound count as reaching it
    BOUND_RTOL: float = 1e-12

    # Fast-path detection of the timing mode among LO coefficients
    TIMING_MODE_MATCH: float = 1e-9

    # Estimator inversion
    MIN_ESTIMATOR_COS: float = 1e-6

    # Slack on the uncertainty relation det(cov) >= 1
    UNCERTAINTY_SLACK: float = 1e-9

    # FieldState photon-number consistency
    PHOTON_NUMBER_RTOL: float = 1e-9


@dataclass(frozen=True)
class MonteCarloDefaults:
    """Reproducible Monte Carlo defaults."""

    SEED: int = 20070611
    N_TRIALS: int = 100_000

    # Trials per partition; partition k draws from SeedSequence(seed, spawn_key=(k,))
    CHUNK_SIZE: int = 65_536

    GENERATOR: str = "PCG64"

    # Local-oscillator photon number when a scenario does not set one
    N_LO: float = 1e18


@dataclass(frozen=True)
class ReferenceFigures:
    """Reference operating point and technical-noise quotes."""

    POWER_W: float = 10e-3
    DETECTION_TIME_S: float = 1.0
    WAVELENGTH_M: float = 810e-9
    DURATION_FWHM_S: float = 10e-15

    CEO_PHASE_ASD: float = 1e-5          # rad/sqrt(Hz)
    REP_RATE_JITTER_ASD: float = 1e-18   # s/sqrt(Hz)
    ANALYSIS_FREQUENCY_HZ: float = 1e5

    SQUEEZING_DB: float = 10.0

    # Figure quoted for the reference operating point; it matches sql_tof, not sql_combined
    QUOTED_SQL_S: float = 2e-23


@dataclass(frozen=True)
class OutputConfig:
    """Numeric output formatting."""

    # 17 significant digits in scientific notation
    FLOAT_FORMAT: str = "%.16e"
    SWEEP_POINTS: int = 25


# =============================================================================
# SINGLETON CONFIG INSTANCE
# =============================================================================

@dataclass
class AppConfig:
    """Main application configuration container."""

    # Runtime environment
    DEBUG: bool = field(default_factory=is_debug_mode)
    LOG_LEVEL: str = field(default_factory=get_log_level)

    # Sub-configurations
    grid: GridDefaults = field(default_factory=GridDefaults)
    tolerances: Tolerances = field(default_factory=Tolerances)
    monte_carlo: MonteCarloDefaults = field(default_factory=MonteCarloDefaults)
    reference: ReferenceFigures = field(default_factory=ReferenceFigures)
    output: OutputConfig = field(default_factory=OutputConfig)

    # Application info
    APP_NAME: str = "qtiming"
    APP_VERSION: str = "0.1.0"


# Global config instance
config = AppConfig()
