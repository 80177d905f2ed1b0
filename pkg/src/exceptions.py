"""
Custom Exceptions for the timing toolkit.

Define application-specific exceptions for better error handling and debugging.
"""

from typing import Optional


class TimingAnalyzerError(Exception):
    """Base exception for all timing toolkit errors."""

    def __init__(self, message: str, details: Optional[dict] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


# =============================================================================
# MODE LAB ERRORS
# =============================================================================

class ModeError(TimingAnalyzerError):
    """Error while building or manipulating sampled temporal modes."""
    pass


class GridError(ModeError):
    """Time grid cannot represent the requested pulse."""
    pass


class NonPowerOfTwoGridError(GridError):
    """Grid size is not a power of two."""

    def __init__(self, n_points: int):
        super().__init__(
            f"n_points must be a power of two >= 16, got {n_points}",
            {"n_points": n_points}
        )


class GuardFactorError(GridError):
    """Grid window is too short for the pulse."""

    def __init__(self, guard_factor: float, minimum: float):
        super().__init__(
            f"guard_factor {guard_factor:g} is below the minimum of {minimum:g} pulse durations",
            {"guard_factor": guard_factor, "minimum": minimum}
        )


class CarrierUndersampledError(GridError):
    """Grid step too coarse for the optical carrier (aliasing risk)."""

    def __init__(self, t_step: float, limit: float):
        super().__init__(
            f"Carrier undersampled: t_step={t_step:.3e} s must be below pi/omega0={limit:.3e} s",
            {"t_step": t_step, "limit": limit}
        )


class SpectralLeakageError(ModeError):
    """Mode spectrum reaches the edge of the frequency window."""

    def __init__(self, fraction: float, limit: float):
        super().__init__(
            f"Spectral leakage: {fraction:.3e} of the energy lies in the outer band (limit {limit:.1e})",
            {"fraction": fraction, "limit": limit}
        )


class ShiftOutOfRangeError(ModeError):
    """Shift would wrap around the periodic grid."""

    def __init__(self, delta_u: float, limit: float):
        super().__init__(
            f"Shift {delta_u:.3e} s exceeds the wraparound bound {limit:.3e} s",
            {"delta_u": delta_u, "limit": limit}
        )


class FirstOrderRegimeError(ModeError):
    """Shift too large for the first-order expansion."""

    def __init__(self, delta_u: float, limit: float):
        super().__init__(
            f"Shift {delta_u:.3e} s is outside the first-order regime (|delta_u| < {limit:.3e} s)",
            {"delta_u": delta_u, "limit": limit}
        )


# =============================================================================
# QUANTUM STATE ERRORS
# =============================================================================

class QuantumStateError(TimingAnalyzerError):
    """Invalid Gaussian state description."""
    pass


class InvalidPhotonBudgetError(QuantumStateError):
    """Photon budget inputs must be positive."""

    def __init__(self, name: str, value: float):
        super().__init__(
            f"{name} must be > 0, got {value!r}",
            {"field": name, "value": value}
        )


# =============================================================================
# HOMODYNE ERRORS
# =============================================================================

class HomodyneError(TimingAnalyzerError):
    """Error in homodyne statistics."""
    pass


class ModeSpanError(HomodyneError):
    """Local oscillator has weight outside span{v0, v1}."""

    def __init__(self, residual: float, limit: float):
        super().__init__(
            f"LO mode has norm {residual:.3e} outside span{{v0, v1}} (limit {limit:.1e})",
            {"residual": residual, "limit": limit}
        )


class WeakLocalOscillatorError(HomodyneError):
    """Only the strong-LO regime is modelled."""

    def __init__(self):
        super().__init__(
            "Variance is only defined in the strong local-oscillator regime (strong_lo=true)",
            {"strong_lo": False}
        )


# =============================================================================
# ESTIMATION ERRORS
# =============================================================================

class EstimationError(TimingAnalyzerError):
    """Error in Fisher information or Monte Carlo estimation."""
    pass


class EstimatorSingularError(EstimationError):
    """Timing term of the homodyne mean vanishes, inversion impossible."""

    def __init__(self, cos_value: float, limit: float):
        super().__init__(
            f"Estimator singular: |cos(theta - theta_lo)| = {cos_value:.3e} < {limit:.1e}",
            {"cos": cos_value, "limit": limit}
        )


# =============================================================================
# NOISE BUDGET ERRORS
# =============================================================================

class NoiseBudgetError(TimingAnalyzerError):
    """Error building a noise budget."""
    pass


class NoiseInputError(NoiseBudgetError):
    """Malformed noise-source input."""
    pass


# =============================================================================
# SCENARIO ERRORS
# =============================================================================

class ScenarioError(TimingAnalyzerError):
    """Scenario file could not be loaded."""
    pass


class UnknownKeyError(ScenarioError):
    """Scenario contains a key (or section) that is not part of the schema."""

    def __init__(self, section: str, key: Optional[str], line: Optional[int]):
        where = f"[{section}] {key}" if key else f"[{section}]"
        super().__init__(
            f"Unknown scenario entry {where}" + (f" at line {line}" if line else ""),
            {"section": section, "key": key, "line": line}
        )


class ScenarioValueError(ScenarioError):
    """Scenario value fails validation."""

    def __init__(self, section: str, key: Optional[str], line: Optional[int], reason: str):
        where = f"[{section}] {key}" if key else f"[{section}]"
        super().__init__(
            f"Invalid value for {where}" + (f" at line {line}" if line else "") + f": {reason}",
            {"section": section, "key": key, "line": line, "reason": reason}
        )
