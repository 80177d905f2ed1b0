"""
Quantum State Module
Moment-level Gaussian description of the signal field on the modes v0 and v1.

Quadrature convention: vacuum variance 1, coherent amplitude |mean| = 2 sqrt(N),
Q_phi = Q cos(phi) + P sin(phi).
"""

import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from loguru import logger
from scipy import constants

from ..config import config
from ..exceptions import InvalidPhotonBudgetError, QuantumStateError
from ..models.schemas import FieldState, ModeBasis, QuadratureState, SqueezingSpec


TRACKED_MODES = ("v0", "v1")


# =============================================================================
# PHOTON BUDGET
# =============================================================================

def photons_from_power(power: float, detection_time: float, omega0: float) -> float:
    """
    Mean photon number collected in one detection window.

    N = P T / (hbar w0), with CODATA hbar from scipy.constants.
    """
    for name, value in (("power", power), ("detection_time", detection_time), ("omega0", omega0)):
        if not value > 0:
            raise InvalidPhotonBudgetError(name, value)
    return power * detection_time / (constants.hbar * omega0)


def squeezing_from_db(db: float) -> float:
    """Squeezing parameter r with e^{-2r} = 10^{-db/10}."""
    if db < 0:
        raise QuantumStateError(f"Squeezing in dB must be >= 0, got {db}", {"db": db})
    return db * math.log(10.0) / 20.0


def squeezing_to_db(r: float) -> float:
    """Variance reduction 10 log10(e^{2r}) in dB."""
    return 20.0 * r / math.log(10.0)


# =============================================================================
# STATES
# =============================================================================

def coherent_state(basis: ModeBasis, photon_number: float, theta: float = 0.0) -> FieldState:
    """
    Coherent pulse in v0 with vacuum in v1.

    Args:
        basis: Mode basis of the pulse
        photon_number: Mean photon number N
        theta: Global phase of the pulse (rad)
    """
    if not photon_number > 0:
        raise InvalidPhotonBudgetError("photon_number", photon_number)

    amplitude = 2.0 * math.sqrt(photon_number)
    per_mode = {
        "v0": QuadratureState(mean_q=amplitude * math.cos(theta), mean_p=amplitude * math.sin(theta)),
        "v1": QuadratureState(),
    }
    logger.debug(f"Coherent state: N={photon_number:.6e}, theta={theta:.6f} rad")
    return FieldState(basis=basis, per_mode=per_mode, photon_number=photon_number, theta=theta)


def _frame_rotation(angle: float) -> np.ndarray:
    # (Q, P) -> (amplitude, phase) quadratures relative to the reference angle
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]])


def _squeeze_quadratures(quad: QuadratureState, angle: float, r_amp: float, r_phase: float) -> QuadratureState:
    """Scale the amplitude/phase quadratures referenced to `angle` by e^{-r}."""
    if r_amp == 0.0 and r_phase == 0.0:
        return quad
    rotation = _frame_rotation(angle)
    scale = np.diag([math.exp(-r_amp), math.exp(-r_phase)])
    local = rotation @ quad.covariance() @ rotation.T
    squeezed = rotation.T @ (scale @ local @ scale) @ rotation
    return QuadratureState.from_covariance(quad.mean_q, quad.mean_p, squeezed)


def apply_squeezing(
    state: FieldState,
    spec: SqueezingSpec,
    theta_lo: Optional[float] = None,
    inverse: bool = False,
) -> FieldState:
    """
    Squeeze the phase quadrature of v0 and the amplitude quadrature of v1.

    Quadratures are referenced to the LO phase theta_lo (defaults to the
    signal phase). The conjugate quadratures are anti-squeezed so the
    uncertainty product is preserved. Means are unchanged.

    Args:
        state: Input field state
        spec: Squeezing parameters (r >= 0)
        theta_lo: Reference phase of the squeezing frame
        inverse: Apply the formal inverse (quadrature roles swapped)
    """
    angle = state.theta if theta_lo is None else theta_lo
    sign = -1.0 if inverse else 1.0

    per_mode = {
        "v0": _squeeze_quadratures(state.v0, angle, r_amp=-sign * spec.r_phase_v0, r_phase=sign * spec.r_phase_v0),
        "v1": _squeeze_quadratures(state.v1, angle, r_amp=sign * spec.r_amp_v1, r_phase=-sign * spec.r_amp_v1),
    }
    logger.debug(
        f"Squeezing (inverse={inverse}): r_phase_v0={spec.r_phase_v0:.4f} "
        f"({squeezing_to_db(spec.r_phase_v0):.2f} dB), r_amp_v1={spec.r_amp_v1:.4f}"
    )
    return FieldState(basis=state.basis, per_mode=per_mode,
                      photon_number=state.photon_number, theta=state.theta)


def with_photon_number(state: FieldState, photon_number: float) -> FieldState:
    """Rescale the coherent amplitude to a new photon number, keeping the noise."""
    if not photon_number > 0:
        raise InvalidPhotonBudgetError("photon_number", photon_number)

    factor = math.sqrt(photon_number / state.photon_number)
    v0 = state.v0
    rescaled = QuadratureState(
        mean_q=v0.mean_q * factor, mean_p=v0.mean_p * factor,
        var_q=v0.var_q, var_p=v0.var_p, cov_qp=v0.cov_qp,
    )
    return FieldState(basis=state.basis, per_mode={"v0": rescaled, "v1": state.v1},
                      photon_number=photon_number, theta=state.theta)


def rotated_variance(quad: QuadratureState, angle: float) -> float:
    """Variance of Q cos(angle) + P sin(angle)."""
    c, s = math.cos(angle), math.sin(angle)
    return c * c * quad.var_q + s * s * quad.var_p + 2.0 * c * s * quad.cov_qp


def uncertainty_product(quad: QuadratureState) -> float:
    """det of the quadrature covariance (1 for pure Gaussian states)."""
    return quad.var_q * quad.var_p - quad.cov_qp ** 2


# =============================================================================
# DUMPS
# =============================================================================

def state_records(state: FieldState) -> List[Dict[str, Union[str, float]]]:
    """One record per tracked mode: mode, mean_q, mean_p, var_q, var_p, cov_qp."""
    records = []
    for mode in TRACKED_MODES:
        quad = state.per_mode[mode]
        records.append({
            "mode": mode,
            "mean_q": quad.mean_q,
            "mean_p": quad.mean_p,
            "var_q": quad.var_q,
            "var_p": quad.var_p,
            "cov_qp": quad.cov_qp,
        })
    return records


def write_state_json(state: FieldState, path: Union[str, Path]) -> Path:
    """Write the state records as a JSON array."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(state_records(state), f, indent=2)
    logger.debug(f"Wrote state dump to {path}")
    return path
