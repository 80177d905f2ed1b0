"""
Data models and schemas for pulses, temporal modes, Gaussian states and reports.
"""

import math
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)
from scipy import constants
from scipy.fft import fftfreq

from ..config import (
    EnvelopeFamily,
    LOModeKind,
    NoiseKind,
    OverlapMethod,
    SweepParameter,
    config,
)


def is_power_of_two(n: int) -> bool:
    """True for 1, 2, 4, 8, ..."""
    return n > 0 and (n & (n - 1)) == 0


# =============================================================================
# MODE LAB TYPES
# =============================================================================

class TimeGrid(BaseModel):
    """Uniform sampling of the light-cone variable u."""
    model_config = ConfigDict(frozen=True)

    t_start: float = Field(..., description="First sample time (s)")
    t_step: float = Field(..., gt=0, description="Sample spacing (s)")
    n_points: int = Field(..., description="Number of samples, power of two")

    @field_validator("n_points")
    @classmethod
    def check_power_of_two(cls, v):
        if v < config.grid.MIN_POINTS or not is_power_of_two(v):
            raise ValueError(f"n_points must be a power of two >= {config.grid.MIN_POINTS}")
        return v

    @property
    def window(self) -> float:
        return self.t_step * self.n_points

    @property
    def center(self) -> float:
        return self.t_start + (self.n_points // 2) * self.t_step

    @property
    def times(self) -> np.ndarray:
        # integer offsets keep a centered grid exactly antisymmetric about u = 0
        offsets = np.arange(self.n_points) - self.n_points // 2
        return self.center + offsets * self.t_step

    @property
    def omega(self) -> np.ndarray:
        """
        Angular frequencies of the DFT bins in the physics convention
        v~[w] = integral v(u) exp(+i w u) du, so that exp(-i w0 u) sits at +w0.
        """
        return -2.0 * np.pi * fftfreq(self.n_points, d=self.t_step)

    @property
    def nyquist(self) -> float:
        return np.pi / self.t_step


class PulseSpec(BaseModel):
    """Physical description of the emitted pulse train."""
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "omega0": 2.3255e15,
                "envelope": "gaussian",
                "duration_fwhm": 1e-14,
                "photon_number": 4.08e16,
                "theta": 0.0
            }
        },
    )

    omega0: float = Field(..., gt=0, description="Carrier angular frequency (rad/s)")
    envelope: EnvelopeFamily = EnvelopeFamily.GAUSSIAN
    duration_fwhm: float = Field(..., gt=0, description="Intensity FWHM (s)")
    photon_number: float = Field(..., gt=0, description="Mean photons per detection window")
    theta: float = Field(default=0.0, description="Global phase (rad)")

    @classmethod
    def from_wavelength(cls, wavelength: float, **kwargs) -> "PulseSpec":
        """Build a spec from a vacuum wavelength in metres."""
        return cls(omega0=2.0 * np.pi * constants.c / wavelength, **kwargs)

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi * constants.c / self.omega0

    @property
    def carrier_cycles(self) -> float:
        """Carrier oscillations within the intensity FWHM."""
        return self.duration_fwhm * self.omega0 / (2.0 * np.pi)


class SampledMode(BaseModel):
    """Complex temporal mode amplitude on a uniform grid."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: TimeGrid
    amplitude: np.ndarray
    label: str = ""

    @field_validator("amplitude", mode="before")
    @classmethod
    def freeze_amplitude(cls, v):
        arr = np.array(v, dtype=np.complex128, copy=True)
        if arr.ndim != 1:
            raise ValueError("amplitude must be one-dimensional")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_length(self):
        if self.amplitude.shape[0] != self.grid.n_points:
            raise ValueError(
                f"amplitude has {self.amplitude.shape[0]} samples, grid has {self.grid.n_points}"
            )
        return self

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitude) ** 2) * self.grid.t_step))

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.amplitude)))

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


class ModeBasis(BaseModel):
    """The pair {v0, v1}, the timing mode w1 and the derived scales."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pulse: PulseSpec
    v0: SampledMode
    v1: SampledMode
    w1: SampledMode
    alpha: float = Field(..., gt=0, description="omega0 / delta_omega")
    u0: float = Field(..., gt=0, description="1/sqrt(omega0^2 + delta_omega^2) (s)")
    delta_omega: float = Field(..., gt=0, description="Envelope spectral width (rad/s)")

    @model_validator(mode="after")
    def check_invariants(self):
        tol = config.tolerances
        overlap = np.vdot(self.v0.amplitude, self.v1.amplitude) * self.v0.grid.t_step
        if abs(overlap) > tol.ORTHOGONALITY_TOL:
            raise ValueError(f"<v0|v1> = {abs(overlap):.3e} exceeds {tol.ORTHOGONALITY_TOL:.0e}")
        expected_u0 = 1.0 / math.hypot(self.pulse.omega0, self.delta_omega)
        if abs(self.u0 - expected_u0) > 1e-12 * expected_u0:
            raise ValueError("u0 inconsistent with omega0 and delta_omega")
        return self

    @property
    def omega0(self) -> float:
        return self.pulse.omega0

    @property
    def grid(self) -> TimeGrid:
        return self.v0.grid


# =============================================================================
# QUANTUM STATE TYPES
# =============================================================================

class QuadratureState(BaseModel):
    """
    Mean and covariance of the (Q, P) quadratures of one mode.

    Convention: vacuum has var_q = var_p = 1.
    """
    model_config = ConfigDict(frozen=True)

    mean_q: float = 0.0
    mean_p: float = 0.0
    var_q: float = Field(default=1.0, gt=0)
    var_p: float = Field(default=1.0, gt=0)
    cov_qp: float = 0.0

    @model_validator(mode="after")
    def check_uncertainty(self):
        det = self.var_q * self.var_p - self.cov_qp ** 2
        if det < 1.0 - config.tolerances.UNCERTAINTY_SLACK:
            raise ValueError(f"Uncertainty relation violated: det(cov) = {det:.6g} < 1")
        return self

    def covariance(self) -> np.ndarray:
        return np.array([[self.var_q, self.cov_qp], [self.cov_qp, self.var_p]])

    @classmethod
    def from_covariance(cls, mean_q: float, mean_p: float, cov: np.ndarray) -> "QuadratureState":
        return cls(
            mean_q=mean_q,
            mean_p=mean_p,
            var_q=float(cov[0, 0]),
            var_p=float(cov[1, 1]),
            cov_qp=float(0.5 * (cov[0, 1] + cov[1, 0])),
        )


class FieldState(BaseModel):
    """Gaussian state of the signal field on the tracked modes v0 and v1."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    basis: ModeBasis
    per_mode: Dict[str, QuadratureState]
    photon_number: float = Field(..., gt=0)
    theta: float = 0.0

    @model_validator(mode="after")
    def check_modes(self):
        if set(self.per_mode) != {"v0", "v1"}:
            raise ValueError("per_mode must track exactly the modes 'v0' and 'v1'")
        v1 = self.per_mode["v1"]
        if v1.mean_q != 0.0 or v1.mean_p != 0.0:
            raise ValueError("Coherent amplitude must live entirely in v0")
        v0 = self.per_mode["v0"]
        implied = (v0.mean_q ** 2 + v0.mean_p ** 2) / 4.0
        if abs(implied - self.photon_number) > config.tolerances.PHOTON_NUMBER_RTOL * self.photon_number:
            raise ValueError(
                f"photon_number {self.photon_number:.6g} inconsistent with v0 amplitude ({implied:.6g})"
            )
        return self

    @property
    def v0(self) -> QuadratureState:
        return self.per_mode["v0"]

    @property
    def v1(self) -> QuadratureState:
        return self.per_mode["v1"]


class SqueezingSpec(BaseModel):
    """Squeezing of the phase quadrature of v0 and the amplitude quadrature of v1."""
    model_config = ConfigDict(frozen=True)

    r_phase_v0: float = Field(default=0.0, ge=0)
    r_amp_v1: float = Field(default=0.0, ge=0)

    @classmethod
    def equal(cls, r: float) -> "SqueezingSpec":
        return cls(r_phase_v0=r, r_amp_v1=r)


# =============================================================================
# HOMODYNE TYPES
# =============================================================================

class HomodyneConfig(BaseModel):
    """Local oscillator: mode shape, phase, photon number, regime."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lo_mode: SampledMode
    theta_lo: float = 0.0
    n_lo: float = Field(default=config.monte_carlo.N_LO, gt=0)
    strong_lo: bool = True
    field_scale: float = Field(default=1.0, gt=0, description="|E|^2 detector-unit constant")

    @model_validator(mode="after")
    def check_lo_norm(self):
        norm = self.lo_mode.norm
        if abs(norm - 1.0) > config.tolerances.NORM_TOL:
            raise ValueError(f"lo_mode must have unit norm, got {norm:.12f}")
        return self


class HomodyneStats(BaseModel):
    """Mean and variance of the balanced homodyne signal."""
    model_config = ConfigDict(frozen=True)

    mean: float
    variance: float = Field(..., gt=0)

    @computed_field
    @property
    def snr(self) -> float:
        return abs(self.mean) / math.sqrt(self.variance)


# =============================================================================
# ESTIMATION TYPES
# =============================================================================

class FisherResult(BaseModel):
    """Fisher information of the homodyne outcome about delta_u."""
    model_config = ConfigDict(frozen=True)

    fisher_info: float = Field(..., ge=0, description="1/s^2")
    crb: float = Field(..., gt=0, description="Cramer-Rao bound (s)")
    lo_description: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_bound(self):
        if self.fisher_info > 0 and abs(self.crb * math.sqrt(self.fisher_info) - 1.0) > 1e-12:
            raise ValueError("crb must equal 1/sqrt(fisher_info)")
        if self.fisher_info == 0 and not math.isinf(self.crb):
            raise ValueError("crb must be infinite when fisher_info is zero")
        return self

    @classmethod
    def from_fisher(cls, fisher_info: float, **kwargs) -> "FisherResult":
        crb = 1.0 / math.sqrt(fisher_info) if fisher_info > 0 else math.inf
        return cls(fisher_info=fisher_info, crb=crb, **kwargs)


class MonteCarloReport(BaseModel):
    """Aggregated Monte Carlo estimation of delta_u."""
    model_config = ConfigDict(frozen=True)

    n_trials: int = Field(..., ge=2)
    true_delta_u: float
    estimator_mean: float
    estimator_std: float = Field(..., gt=0)
    analytic_bound: float = Field(..., gt=0)
    seed: int = Field(..., ge=0, lt=2 ** 64)
    generator: str = config.monte_carlo.GENERATOR
    photons_per_trial: float = Field(..., gt=0)

    @computed_field
    @property
    def std_to_bound(self) -> float:
        return self.estimator_std / self.analytic_bound

    @computed_field
    @property
    def standard_error(self) -> float:
        """Uncertainty of estimator_mean."""
        return self.estimator_std / math.sqrt(self.n_trials)


# =============================================================================
# NOISE BUDGET TYPES
# =============================================================================

NATIVE_UNITS = {
    NoiseKind.CEO_PHASE: "rad/rtHz",
    NoiseKind.REP_RATE_JITTER: "s/rtHz",
    NoiseKind.QUANTUM_FLOOR: "s/rtHz",
}


class NoiseSource(BaseModel):
    """A technical or quantum noise figure quoted at one Fourier frequency."""
    model_config = ConfigDict(frozen=True)

    kind: NoiseKind
    amplitude: float = Field(..., ge=0, description="rad/rtHz for phase, s/rtHz otherwise")
    at_frequency: float = Field(default=config.reference.ANALYSIS_FREQUENCY_HZ, ge=0, description="Hz")

    @property
    def units(self) -> str:
        return NATIVE_UNITS[self.kind]


class BudgetRow(BaseModel):
    """One converted line of the timing-noise budget."""
    model_config = ConfigDict(frozen=True)

    source: NoiseSource
    timing_asd: float = Field(..., ge=0, description="s/rtHz")
    ratio_to_quantum_floor: float
    dominant: bool = False


# =============================================================================
# SCENARIO (CLI CONFIGURATION)
# =============================================================================

def parse_lo_selector(value: str) -> Tuple[LOModeKind, Optional[float]]:
    """Parse 'w1', 'iv0', 'v1' or 'mix:<angle_rad>'."""
    text = value.strip().lower()
    if text.startswith("mix:"):
        try:
            chi = float(text[4:])
        except ValueError:
            raise ValueError(f"mix angle must be a number in radians, got {text[4:]!r}")
        return LOModeKind.MIX, chi
    try:
        return LOModeKind(text), None
    except ValueError:
        raise ValueError("mode must be one of w1, iv0, v1, mix:<angle_rad>")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PulseSection(_Section):
    """[pulse] section: defaults reproduce the reference operating point."""
    wavelength: float = Field(default=config.reference.WAVELENGTH_M, gt=0, description="Vacuum wavelength (m)")
    omega0: Optional[float] = Field(default=None, gt=0, description="Carrier (rad/s); overrides wavelength")
    envelope: EnvelopeFamily = Field(default=EnvelopeFamily.GAUSSIAN, description="gaussian | sech")
    duration_fwhm: float = Field(default=config.reference.DURATION_FWHM_S, gt=0, description="Intensity FWHM (s)")
    power: float = Field(default=config.reference.POWER_W, gt=0, description="Average power (W)")
    detection_time: float = Field(default=config.reference.DETECTION_TIME_S, gt=0, description="Detection window (s)")
    photon_number: Optional[float] = Field(default=None, gt=0, description="Overrides power * time / (hbar omega0)")
    theta: float = Field(default=0.0, description="Global phase (rad)")


class SqueezingSection(_Section):
    """[squeezing] section: r = 0 is coherent light."""
    r_phase_v0: float = Field(default=0.0, ge=0, description="Squeezing of the phase quadrature of v0")
    r_amp_v1: float = Field(default=0.0, ge=0, description="Squeezing of the amplitude quadrature of v1")


class LOSection(_Section):
    """[lo] section: local oscillator."""
    mode: str = Field(default="w1", description="w1 | iv0 | v1 | mix:<angle_rad>")
    theta_lo: Optional[float] = Field(default=None, description="LO phase (rad); defaults to the pulse phase")
    n_lo: float = Field(default=config.monte_carlo.N_LO, gt=0, description="LO photon number")
    strong_lo: bool = Field(default=True, description="Strong-LO regime")
    field_scale: float = Field(default=1.0, gt=0, description="|E|^2 detector-unit constant")

    @field_validator("mode")
    @classmethod
    def check_mode(cls, v):
        parse_lo_selector(v)
        return v.strip().lower()


class GridSection(_Section):
    """[grid] section: time discretization."""
    guard_factor: float = Field(default=config.grid.GUARD_FACTOR, ge=config.grid.MIN_GUARD_FACTOR,
                                description="Window / FWHM, >= 20")
    n_points: int = Field(default=config.grid.N_POINTS, description="Power of two >= 16")

    @field_validator("n_points")
    @classmethod
    def check_power_of_two(cls, v):
        if v < config.grid.MIN_POINTS or not is_power_of_two(v):
            raise ValueError(f"n_points must be a power of two >= {config.grid.MIN_POINTS}")
        return v


class RunSection(_Section):
    """[run] section: command-specific parameters."""
    n_trials: int = Field(default=config.monte_carlo.N_TRIALS, ge=2, description="Monte Carlo trials")
    seed: int = Field(default=config.monte_carlo.SEED, ge=0, lt=2 ** 64, description="64-bit seed")
    delta_u: float = Field(default=0.0, description="True timing offset for simulate (s)")
    split_budget: bool = Field(default=False, description="Divide N equally across trials")
    dump_outcomes: Optional[str] = Field(default=None, description="Binary float64 LE outcome dump path")
    overlap_method: OverlapMethod = Field(default=OverlapMethod.ANALYTIC, description="analytic | grid")
    n_angles: int = Field(default=256, ge=32, description="LO angles in the Fisher scan")
    noise_csv: Optional[str] = Field(default=None, description="Noise-source CSV for budget")
    asd_curve: Optional[str] = Field(default=None, description="ASD-curve CSV (frequency_hz, asd) for budget")
    asd_curve_kind: NoiseKind = Field(default=NoiseKind.CEO_PHASE, description="Noise kind of the ASD curve")
    asd_curve_frequency_hz: float = Field(default=config.reference.ANALYSIS_FREQUENCY_HZ, gt=0,
                                          description="Analysis frequency read off the ASD curve (Hz)")
    rss_total: bool = Field(default=False, description="Append a root-sum-square total row")
    sweep_param: SweepParameter = Field(default=SweepParameter.POWER, description="Swept parameter")
    sweep_start: Optional[float] = Field(default=None, description="Sweep start (SI units, dB for squeezing)")
    sweep_stop: Optional[float] = Field(default=None, description="Sweep stop")
    sweep_points: int = Field(default=config.output.SWEEP_POINTS, ge=2, description="Sweep samples")
    sweep_log: Optional[bool] = Field(default=None, description="Logarithmic spacing, parameter default when unset")


class Scenario(_Section):
    """A complete scenario file."""
    pulse: PulseSection = Field(default_factory=PulseSection)
    squeezing: SqueezingSection = Field(default_factory=SqueezingSection)
    lo: LOSection = Field(default_factory=LOSection)
    grid: GridSection = Field(default_factory=GridSection)
    run: RunSection = Field(default_factory=RunSection)
