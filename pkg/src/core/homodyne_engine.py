"""
Homodyne Engine
Strong-LO statistics of balanced homodyne detection of a shifted pulse:
mean signal, variance, SNR and the minimum resolvable delay, plus the
time-of-flight, phase, combined and squeezed quantum limits.
"""

import cmath
import math
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..config import LOModeKind, OverlapMethod, config
from ..exceptions import HomodyneError, ModeSpanError, WeakLocalOscillatorError
from ..models.schemas import (
    FieldState,
    HomodyneConfig,
    HomodyneStats,
    ModeBasis,
    SampledMode,
    parse_lo_selector,
)
from .mode_lab import combine, inner_product, shift_mode
from .quantum_state import rotated_variance


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise HomodyneError(f"{name} must be > 0, got {value!r}", {"field": name, "value": value})


# =============================================================================
# QUANTUM LIMITS
# =============================================================================

def sql_tof(photon_number: float, delta_omega: float) -> float:
    """Time-of-flight limit 1/(2 dw sqrt(N))."""
    _require_positive(photon_number=photon_number, delta_omega=delta_omega)
    return 1.0 / (2.0 * delta_omega * math.sqrt(photon_number))


def sql_phase(photon_number: float, omega0: float) -> float:
    """Carrier-phase limit 1/(2 w0 sqrt(N))."""
    _require_positive(photon_number=photon_number, omega0=omega0)
    return 1.0 / (2.0 * omega0 * math.sqrt(photon_number))


def sql_combined(photon_number: float, omega0: float, delta_omega: float) -> float:
    """Limit of the timing-mode measurement, 1/(2 sqrt(N) sqrt(w0^2 + dw^2))."""
    _require_positive(photon_number=photon_number, omega0=omega0, delta_omega=delta_omega)
    return 1.0 / (2.0 * math.sqrt(photon_number) * math.hypot(omega0, delta_omega))


def sql_squeezed(
    photon_number: float,
    omega0: float,
    delta_omega: float,
    r_phase_v0: float,
    r_amp_v1: Optional[float] = None,
) -> float:
    """
    Timing-mode limit with a phase-squeezed v0 and amplitude-squeezed v1.

    Equal squeezing r on both quadratures scales sql_combined by e^{-r}.
    """
    if r_amp_v1 is None:
        r_amp_v1 = r_phase_v0
    if r_phase_v0 < 0 or r_amp_v1 < 0:
        raise HomodyneError("Squeezing parameters must be >= 0",
                            {"r_phase_v0": r_phase_v0, "r_amp_v1": r_amp_v1})
    alpha = omega0 / delta_omega
    weight = (alpha ** 2 * math.exp(-2.0 * r_phase_v0) + math.exp(-2.0 * r_amp_v1)) / (1.0 + alpha ** 2)
    return sql_combined(photon_number, omega0, delta_omega) * math.sqrt(weight)


# =============================================================================
# LOCAL OSCILLATOR MODES
# =============================================================================

def timing_mode_angle(basis: ModeBasis) -> float:
    """Mixing angle chi of w1 in the family cos(chi) i v0 + sin(chi) v1."""
    return math.atan2(1.0, basis.alpha)


def mixed_mode(basis: ModeBasis, chi: float) -> SampledMode:
    """The LO mode cos(chi) i v0 + sin(chi) v1."""
    return combine(basis, 1j * math.cos(chi), math.sin(chi), label=f"mix:{chi:.12g}")


def local_oscillator(basis: ModeBasis, selector: str) -> SampledMode:
    """
    Build an LO mode from a selector string.

    Args:
        basis: Mode basis of the signal
        selector: 'w1', 'iv0', 'v1' or 'mix:<angle_rad>'
    """
    kind, chi = parse_lo_selector(selector)
    if kind == LOModeKind.W1:
        return basis.w1
    if kind == LOModeKind.V1:
        return basis.v1
    if kind == LOModeKind.IV0:
        return combine(basis, 1j, 0.0, label="iv0")
    return mixed_mode(basis, chi)


# =============================================================================
# ENGINE
# =============================================================================

class HomodyneEngine:
    """
    Balanced homodyne statistics for one signal state and one LO.

    The LO is decomposed on {v0, v1}; everything else follows from the two
    coefficients c_n = <v_n|lo> and the signal quadratures.
    """

    def __init__(self, signal: FieldState, cfg: HomodyneConfig):
        """
        Initialize the engine.

        Args:
            signal: Gaussian state of the signal
            cfg: Local oscillator configuration

        Raises:
            ModeSpanError: if the LO has weight outside span{v0, v1}
        """
        self.signal = signal
        self.cfg = cfg
        self.basis = signal.basis

        if cfg.lo_mode.grid != self.basis.grid:
            raise HomodyneError("LO mode is sampled on a different grid than the signal basis",
                                {"lo": cfg.lo_mode.label})

        self.c0, self.c1 = self.lo_coefficients()
        self.is_timing_mode = self._matches_timing_mode()
        logger.debug(
            f"HomodyneEngine: lo='{cfg.lo_mode.label}', c0={self.c0:.6g}, c1={self.c1:.6g}, "
            f"timing_mode={self.is_timing_mode}"
        )

    def lo_coefficients(self) -> Tuple[complex, complex]:
        """Projection (c0, c1) of the LO mode on v0 and v1."""
        lo = self.cfg.lo_mode
        c0 = inner_product(self.basis.v0, lo)
        c1 = inner_product(self.basis.v1, lo)

        residual = lo.amplitude - c0 * self.basis.v0.amplitude - c1 * self.basis.v1.amplitude
        residual_norm = math.sqrt(float(np.sum(np.abs(residual) ** 2)) * lo.grid.t_step)
        if residual_norm > config.tolerances.SPAN_TOL:
            raise ModeSpanError(residual_norm, config.tolerances.SPAN_TOL)
        return c0, c1

    def _matches_timing_mode(self) -> bool:
        alpha = self.basis.alpha
        scale = math.sqrt(alpha ** 2 + 1.0)
        tol = config.tolerances.TIMING_MODE_MATCH
        return abs(self.c0 - 1j * alpha / scale) < tol and abs(self.c1 - 1.0 / scale) < tol

    @property
    def amplitude_scale(self) -> float:
        """2 |E|^2 sqrt(N N_LO)."""
        return 2.0 * self.cfg.field_scale * math.sqrt(self.signal.photon_number * self.cfg.n_lo)

    @property
    def phase_offset(self) -> float:
        """theta - theta_LO."""
        return self.signal.theta - self.cfg.theta_lo

    def at_optimal_phase(self) -> "HomodyneEngine":
        """Engine with the LO phase locked to the signal phase."""
        if self.cfg.theta_lo == self.signal.theta:
            return self
        return HomodyneEngine(self.signal, self.cfg.model_copy(update={"theta_lo": self.signal.theta}))

    # -------------------------------------------------------------------------
    # Mean
    # -------------------------------------------------------------------------

    def overlap(self, delta_u: float, method: OverlapMethod = OverlapMethod.ANALYTIC) -> complex:
        """<lo | v0(. - delta_u)>, first order or from the shifted samples."""
        if method == OverlapMethod.GRID:
            return inner_product(self.cfg.lo_mode, shift_mode(self.basis.v0, delta_u))

        omega0 = self.basis.omega0
        return (self.c0.conjugate() * (1.0 + 1j * omega0 * delta_u)
                + self.c1.conjugate() * self.basis.delta_omega * delta_u)

    def mean_signal(self, delta_u: float = 0.0, method: OverlapMethod = OverlapMethod.ANALYTIC) -> float:
        """
        Mean homodyne difference signal for a timing offset delta_u.

        With the timing-mode LO the analytic path uses the closed form
        2|E|^2 sqrt(N N_LO) [(du/u0) cos(theta - theta_LO) + alpha/sqrt(alpha^2+1) sin(theta - theta_LO)].
        """
        phi = self.phase_offset
        if method == OverlapMethod.ANALYTIC and self.is_timing_mode:
            alpha = self.basis.alpha
            return self.amplitude_scale * (
                (delta_u / self.basis.u0) * math.cos(phi)
                + alpha / math.sqrt(alpha ** 2 + 1.0) * math.sin(phi)
            )
        return self.amplitude_scale * (cmath.exp(1j * phi) * self.overlap(delta_u, method)).real

    def signal_slope(self) -> float:
        """d<D>/d(delta_u) at delta_u = 0."""
        derivative = (self.c0.conjugate() * 1j * self.basis.omega0
                      + self.c1.conjugate() * self.basis.delta_omega)
        return self.amplitude_scale * (cmath.exp(1j * self.phase_offset) * derivative).real

    # -------------------------------------------------------------------------
    # Variance
    # -------------------------------------------------------------------------

    def _variance_terms(self) -> Dict[str, float]:
        if not self.cfg.strong_lo:
            raise WeakLocalOscillatorError()

        prefactor = self.cfg.field_scale ** 2 * self.cfg.n_lo
        terms = {}
        for name, coefficient in (("v0", self.c0), ("v1", self.c1)):
            weight = abs(coefficient) ** 2
            if weight == 0.0:
                terms[name] = 0.0
                continue
            angle = self.cfg.theta_lo + cmath.phase(coefficient)
            terms[name] = prefactor * weight * rotated_variance(self.signal.per_mode[name], angle)
        return terms

    def variance_signal(self) -> float:
        """
        Variance of the difference signal in the strong-LO regime.

        Each tracked mode contributes |c_n|^2 times the variance of the signal
        quadrature selected by the LO phase theta_LO + arg(c_n).

        Raises:
            WeakLocalOscillatorError: if strong_lo is false
        """
        terms = self._variance_terms()
        return terms["v0"] + terms["v1"]

    def variance_breakdown(self) -> Dict[str, float]:
        """The v0 (phase) and v1 (amplitude) contributions to the variance."""
        terms = self._variance_terms()
        total = terms["v0"] + terms["v1"]
        return {
            "v0_term": terms["v0"],
            "v1_term": terms["v1"],
            "v0_fraction": terms["v0"] / total,
            "v1_fraction": terms["v1"] / total,
            "dominant": "v0" if terms["v0"] >= terms["v1"] else "v1",
        }

    def stats(self, delta_u: float = 0.0, method: OverlapMethod = OverlapMethod.ANALYTIC) -> HomodyneStats:
        return HomodyneStats(mean=self.mean_signal(delta_u, method), variance=self.variance_signal())

    # -------------------------------------------------------------------------
    # Sensitivity
    # -------------------------------------------------------------------------

    def min_resolvable_delay(self) -> float:
        """
        Delay giving unit SNR, evaluated with theta_LO locked to theta.

        Reduces to sql_combined for coherent light and the timing-mode LO.
        """
        engine = self.at_optimal_phase()
        return delay_at_unit_snr(engine.signal_slope(), engine.variance_signal())

    def snr_at(self, delta_u: float, method: OverlapMethod = OverlapMethod.ANALYTIC) -> float:
        """Background-subtracted SNR |<D>(du) - <D>(0)| / sigma at the configured LO phase."""
        signal = self.mean_signal(delta_u, method) - self.mean_signal(0.0, method)
        return abs(signal) / math.sqrt(self.variance_signal())


def delay_at_unit_snr(slope: float, variance: float) -> float:
    """sigma / |slope|; infinite when the signal carries no timing information."""
    if slope == 0.0:
        logger.warning("Homodyne signal has zero slope in delta_u; delay is unresolvable")
        return math.inf
    return math.sqrt(variance) / abs(slope)


# =============================================================================
# MODULE-LEVEL OPERATIONS
# =============================================================================

def mean_signal(signal: FieldState, cfg: HomodyneConfig, delta_u: float,
                method: OverlapMethod = OverlapMethod.ANALYTIC) -> float:
    return HomodyneEngine(signal, cfg).mean_signal(delta_u, method)


def variance_signal(signal: FieldState, cfg: HomodyneConfig) -> float:
    return HomodyneEngine(signal, cfg).variance_signal()


def min_resolvable_delay(signal: FieldState, cfg: HomodyneConfig) -> float:
    return HomodyneEngine(signal, cfg).min_resolvable_delay()


def snr_at(signal: FieldState, cfg: HomodyneConfig, delta_u: float,
           method: OverlapMethod = OverlapMethod.ANALYTIC) -> float:
    return HomodyneEngine(signal, cfg).snr_at(delta_u, method)


def sweep_min_delay(
    param: str,
    values: Iterable[float],
    build_point: Callable[[float], Tuple[FieldState, HomodyneConfig]],
) -> pd.DataFrame:
    """
    Minimum resolvable delay along a 1-D parameter sweep.

    Args:
        param: Name of the swept parameter (first CSV column)
        values: Parameter values
        build_point: Maps a value to the (signal, LO config) pair to evaluate

    Returns:
        DataFrame with columns param, value, delta_u_min_seconds
    """
    rows = []
    for value in values:
        signal, cfg = build_point(float(value))
        rows.append({
            "param": param,
            "value": float(value),
            "delta_u_min_seconds": min_resolvable_delay(signal, cfg),
        })
    logger.info(f"✓ Sweep of {param} finished ({len(rows)} points)")
    return pd.DataFrame(rows, columns=["param", "value", "delta_u_min_seconds"])
