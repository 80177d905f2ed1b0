"""
Mode Lab
Sampled temporal modes of a femtosecond pulse: envelope families, the optical
carrier, spectral width, the derivative mode v1, the timing mode w1 and
first-order shift decomposition.

All transforms use the physics sign convention v~[w] = integral v(u) e^{+i w u} du,
so the mean mode v0(u) = g0(u) e^{-i w0 u} has its spectrum centred on +w0.
"""

import math
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy.fft import fft, ifft

from ..config import EnvelopeFamily, config
from ..exceptions import (
    CarrierUndersampledError,
    FirstOrderRegimeError,
    GuardFactorError,
    ModeError,
    NonPowerOfTwoGridError,
    ShiftOutOfRangeError,
    SpectralLeakageError,
)
from ..models.schemas import ModeBasis, PulseSpec, SampledMode, TimeGrid, is_power_of_two


# Intensity FWHM in units of the envelope time constant tau (|g0|^2 = 1/2)
FWHM_OVER_TAU = {
    EnvelopeFamily.GAUSSIAN: 2.0 * math.sqrt(math.log(2.0)),
    EnvelopeFamily.SECH: 2.0 * math.acosh(math.sqrt(2.0)),
}


def envelope_tau(spec: PulseSpec) -> float:
    """Time constant tau of the envelope family for the requested FWHM."""
    return spec.duration_fwhm / FWHM_OVER_TAU[spec.envelope]


# =============================================================================
# GRID AND ENVELOPES
# =============================================================================

def make_grid(
    spec: PulseSpec,
    guard_factor: float = config.grid.GUARD_FACTOR,
    n_points: int = config.grid.N_POINTS,
) -> TimeGrid:
    """
    Build a grid centred on u = 0 spanning guard_factor pulse durations.

    Args:
        spec: Pulse description
        guard_factor: Window length in units of duration_fwhm (>= 20)
        n_points: Number of samples, a power of two >= 16

    Returns:
        TimeGrid with t_step = guard_factor * duration_fwhm / n_points
    """
    if n_points < config.grid.MIN_POINTS or not is_power_of_two(n_points):
        raise NonPowerOfTwoGridError(n_points)
    if guard_factor < config.grid.MIN_GUARD_FACTOR:
        raise GuardFactorError(guard_factor, config.grid.MIN_GUARD_FACTOR)

    window = guard_factor * spec.duration_fwhm
    t_step = window / n_points

    # at least two samples per carrier cycle
    limit = math.pi / spec.omega0
    if t_step >= limit:
        raise CarrierUndersampledError(t_step, limit)

    grid = TimeGrid(t_start=-(n_points // 2) * t_step, t_step=t_step, n_points=n_points)
    logger.debug(f"Grid: {n_points} points, step {t_step:.3e} s, window {window:.3e} s")
    return grid


def _envelope_profile(family: EnvelopeFamily, x: np.ndarray) -> np.ndarray:
    """Unnormalized envelope as a function of |u|/tau."""
    if family == EnvelopeFamily.GAUSSIAN:
        return np.exp(-0.5 * x ** 2)
    if family == EnvelopeFamily.SECH:
        # sech(x) written without cosh to stay finite for long windows
        decay = np.exp(-x)
        return 2.0 * decay / (1.0 + decay ** 2)
    raise ModeError(f"Unsupported envelope family: {family}", {"envelope": str(family)})


def make_envelope(spec: PulseSpec, grid: TimeGrid) -> SampledMode:
    """
    Sample the real, even, unit-norm envelope g0 of the pulse.

    The profile is evaluated on |u| so that g0(u) = g0(-u) holds exactly on
    the centred grid.
    """
    tau = envelope_tau(spec)
    x = np.abs(grid.times) / tau
    profile = _envelope_profile(spec.envelope, x)
    profile = profile / math.sqrt(np.sum(profile ** 2) * grid.t_step)
    return SampledMode(grid=grid, amplitude=profile, label="g0")


def apply_carrier(envelope: SampledMode, omega0: float, label: str = "") -> SampledMode:
    """Multiply an envelope by the propagation phase factor e^{-i w0 u}."""
    carrier = np.exp(-1j * omega0 * envelope.grid.times)
    return SampledMode(grid=envelope.grid, amplitude=envelope.amplitude * carrier,
                       label=label or envelope.label)


def envelope_of(mode: SampledMode, omega0: float, label: str = "") -> SampledMode:
    """Remove the carrier e^{-i w0 u} from a mode."""
    carrier = np.exp(1j * omega0 * mode.grid.times)
    return SampledMode(grid=mode.grid, amplitude=mode.amplitude * carrier,
                       label=label or f"env({mode.label})")


# =============================================================================
# SPECTRAL ANALYSIS
# =============================================================================

def inner_product(a: SampledMode, b: SampledMode) -> complex:
    """Grid quadrature of <a|b> = integral conj(a) b du."""
    if a.grid != b.grid:
        raise ModeError("Modes live on different grids", {"a": a.label, "b": b.label})
    return complex(np.vdot(a.amplitude, b.amplitude) * a.grid.t_step)


def _power_spectrum(mode: SampledMode):
    spectrum = fft(mode.amplitude)
    power = np.abs(spectrum) ** 2
    total = float(np.sum(power))
    if total <= 0.0:
        raise ModeError("Mode has no energy", {"label": mode.label})

    omega = mode.grid.omega
    band_edge = (1.0 - config.tolerances.LEAKAGE_BAND) * mode.grid.nyquist
    leakage = float(np.sum(power[np.abs(omega) >= band_edge])) / total
    if leakage > config.tolerances.LEAKAGE_FRACTION:
        raise SpectralLeakageError(leakage, config.tolerances.LEAKAGE_FRACTION)
    return omega, power / total


def mean_frequency(mode: SampledMode) -> float:
    """First moment of the spectrum (rad/s)."""
    omega, weights = _power_spectrum(mode)
    return float(np.sum(omega * weights))


def spectral_width(mode: SampledMode, center: float = 0.0) -> float:
    """
    Statistical frequency width of a mode.

    Delta_w^2 = integral dw/2pi (w - center)^2 |m~[w]|^2 with the spectrum
    normalized to unit integral. With center = 0 on the carrier-free envelope
    this is the g0 form; center = w0 on v0 gives the carrier-referenced form.

    Raises:
        SpectralLeakageError: if the spectrum reaches the outer band of the window
    """
    if abs(mode.norm - 1.0) > 1e-6:
        logger.warning(f"spectral_width: mode '{mode.label}' has norm {mode.norm:.6f}, renormalizing")
    omega, weights = _power_spectrum(mode)
    return float(np.sqrt(np.sum((omega - center) ** 2 * weights)))


def _derivative(amplitude: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Spectral derivative d/du (multiplication by -i w in the physics convention)."""
    factor = -1j * grid.omega
    factor[grid.n_points // 2] = 0.0  # Nyquist bin
    return ifft(fft(amplitude) * factor)


# =============================================================================
# MODE BASIS
# =============================================================================

def build_basis(spec: PulseSpec, grid: TimeGrid) -> ModeBasis:
    """
    Build v0, v1, w1 and the scales alpha, u0, delta_omega for a pulse.

    v1 is minus the normalized component of dv0/du orthogonal to v0. For the
    real even envelopes this is -(1/Delta_w) dg0/du e^{-i w0 u}.
    """
    logger.info(f"Building mode basis for {spec.envelope.value} pulse, FWHM {spec.duration_fwhm:.3e} s")

    g0 = make_envelope(spec, grid)
    delta_omega = spectral_width(g0)
    omega0 = spec.omega0
    dt = grid.t_step

    v0 = apply_carrier(g0, omega0, label="v0")
    carrier = np.exp(-1j * omega0 * grid.times)

    # g0 is real, so is its derivative
    dg0 = _derivative(g0.amplitude, grid).real
    dv0 = (dg0 - 1j * omega0 * g0.amplitude) * carrier

    # Gram-Schmidt against v0, applied twice
    residual = dv0
    for _ in range(2):
        residual = residual - (np.vdot(v0.amplitude, residual) * dt) * v0.amplitude
    residual_norm = math.sqrt(float(np.sum(np.abs(residual) ** 2)) * dt)
    v1 = SampledMode(grid=grid, amplitude=-residual / residual_norm, label="v1")

    alpha = omega0 / delta_omega
    u0 = 1.0 / math.hypot(omega0, delta_omega)
    w1 = SampledMode(
        grid=grid,
        amplitude=(1j * alpha * v0.amplitude + v1.amplitude) / math.sqrt(alpha ** 2 + 1.0),
        label="w1",
    )

    basis = ModeBasis(pulse=spec, v0=v0, v1=v1, w1=w1, alpha=alpha, u0=u0, delta_omega=delta_omega)
    logger.info(f"✓ Basis ready: delta_omega={delta_omega:.6e} rad/s, alpha={alpha:.4f}, u0={u0:.6e} s")
    return basis


def combine(basis: ModeBasis, c0: complex, c1: complex, label: str = "") -> SampledMode:
    """The superposition c0 v0 + c1 v1."""
    amplitude = c0 * basis.v0.amplitude + c1 * basis.v1.amplitude
    return SampledMode(grid=basis.grid, amplitude=amplitude, label=label)


# =============================================================================
# SHIFTS
# =============================================================================

def _reaches(delta_u: float, limit: float) -> bool:
    """|delta_u| at or beyond limit, with the bound itself included despite rounding."""
    return abs(delta_u) >= limit * (1.0 - config.tolerances.BOUND_RTOL)


def shift_mode(mode: SampledMode, delta_u: float) -> SampledMode:
    """
    Exact delay m(u) -> m(u - delta_u), by multiplication with e^{i w delta_u}
    in the full-field spectrum (carrier included).

    Raises:
        ShiftOutOfRangeError: if |delta_u| reaches 10% of the grid window
    """
    limit = config.tolerances.MAX_SHIFT_FRACTION_OF_WINDOW * mode.grid.window
    if _reaches(delta_u, limit):
        raise ShiftOutOfRangeError(delta_u, limit)
    if delta_u == 0.0:
        return mode

    phase = np.exp(1j * mode.grid.omega * delta_u)
    shifted = ifft(fft(mode.amplitude) * phase)
    return SampledMode(grid=mode.grid, amplitude=shifted, label=f"{mode.label}(u-{delta_u:.3e})")


def project_shift(basis: ModeBasis, delta_u: float) -> complex:
    """
    Component of the shift-induced change of v0 along the timing mode,
    <w1 | v0(. - delta_u) - v0>. Its real part equals delta_u/u0 to first order.

    Raises:
        FirstOrderRegimeError: if |delta_u| >= 10% of the pulse FWHM
    """
    limit = config.tolerances.MAX_FIRST_ORDER_FRACTION_OF_FWHM * basis.pulse.duration_fwhm
    if _reaches(delta_u, limit):
        raise FirstOrderRegimeError(delta_u, limit)

    shifted = shift_mode(basis.v0, delta_u)
    change = shifted.amplitude - basis.v0.amplitude
    return complex(np.vdot(basis.w1.amplitude, change) * basis.grid.t_step)


def expansion_residual(basis: ModeBasis, delta_u: float) -> float:
    """Norm of v0(. - delta_u) - v0 - (delta_u/u0) w1, second order in delta_u."""
    shifted = shift_mode(basis.v0, delta_u)
    residual = shifted.amplitude - basis.v0.amplitude - (delta_u / basis.u0) * basis.w1.amplitude
    return math.sqrt(float(np.sum(np.abs(residual) ** 2)) * basis.grid.t_step)


# =============================================================================
# DUMPS
# =============================================================================

def mode_to_frame(mode: SampledMode) -> pd.DataFrame:
    """Mode samples as a frame with columns t_seconds, re_amplitude, im_amplitude."""
    return pd.DataFrame({
        "t_seconds": mode.grid.times,
        "re_amplitude": mode.amplitude.real,
        "im_amplitude": mode.amplitude.imag,
    })


def write_mode_csv(mode: SampledMode, path: Union[str, Path]) -> Path:
    """Write the CSV dump of a mode."""
    path = Path(path)
    mode_to_frame(mode).to_csv(path, index=False, float_format=config.output.FLOAT_FORMAT)
    logger.debug(f"Wrote {mode.grid.n_points} samples of '{mode.label}' to {path}")
    return path


def write_mode_dumps(modes: Sequence[SampledMode], directory: Union[str, Path]) -> list:
    """Write one CSV per mode, named after the mode label."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [write_mode_csv(mode, directory / f"{mode.label}.csv") for mode in modes]
