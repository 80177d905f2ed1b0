"""
qtiming Package.

Quantum-limited timing of femtosecond pulses: temporal modes, Gaussian states,
balanced homodyne statistics, Fisher information and noise budgets.
"""

__version__ = "0.1.0"
__author__ = "qtiming developers"
__description__ = "Quantum-limited pulsed time transfer with balanced homodyne detection"

# Core configuration
from .config import (
    config,
    EnvelopeFamily,
    NoiseKind,
    LOModeKind,
    OverlapMethod,
    OutputFormat,
    SweepParameter,
)

# Custom exceptions
from .exceptions import (
    TimingAnalyzerError,
    ModeError,
    GridError,
    QuantumStateError,
    HomodyneError,
    EstimationError,
    NoiseBudgetError,
    ScenarioError,
)

__all__ = [
    # Version info
    "__version__",
    "__author__",

    # Config
    "config",
    "EnvelopeFamily",
    "NoiseKind",
    "LOModeKind",
    "OverlapMethod",
    "OutputFormat",
    "SweepParameter",

    # Exceptions
    "TimingAnalyzerError",
    "ModeError",
    "GridError",
    "QuantumStateError",
    "HomodyneError",
    "EstimationError",
    "NoiseBudgetError",
    "ScenarioError",
]
