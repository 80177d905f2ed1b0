"""
Shared fixtures: the reference 810 nm / 10 fs / 10 mW operating point.
"""

import math

import pytest

from src.config import EnvelopeFamily, config
from src.core.mode_lab import build_basis, make_grid
from src.core.quantum_state import apply_squeezing, coherent_state, photons_from_power
from src.models.schemas import HomodyneConfig, PulseSpec, SqueezingSpec


@pytest.fixture(scope="session")
def reference_spec():
    """Gaussian 10 fs pulse at 810 nm carrying 10 mW for 1 s."""
    omega0 = 2.0 * math.pi * 299792458.0 / 810e-9
    photons = photons_from_power(10e-3, 1.0, omega0)
    return PulseSpec(
        omega0=omega0,
        envelope=EnvelopeFamily.GAUSSIAN,
        duration_fwhm=10e-15,
        photon_number=photons,
    )


@pytest.fixture(scope="session")
def reference_grid(reference_spec):
    return make_grid(reference_spec)


@pytest.fixture(scope="session")
def reference_basis(reference_spec, reference_grid):
    return build_basis(reference_spec, reference_grid)


@pytest.fixture(scope="session")
def sech_basis(reference_spec):
    spec = reference_spec.model_copy(update={"envelope": EnvelopeFamily.SECH})
    return build_basis(spec, make_grid(spec))


@pytest.fixture(scope="session")
def coherent(reference_basis, reference_spec):
    return coherent_state(reference_basis, reference_spec.photon_number, 0.0)


@pytest.fixture(scope="session")
def squeezed_10db(coherent):
    """Both quadratures squeezed by 10 dB (e^{-2r} = 0.1)."""
    r = 0.5 * math.log(10.0)
    return apply_squeezing(coherent, SqueezingSpec.equal(r))


@pytest.fixture
def lo_config(reference_basis):
    """Factory for LO configurations on the reference basis."""
    def make(mode=None, theta_lo=0.0, **kwargs):
        return HomodyneConfig(
            lo_mode=mode if mode is not None else reference_basis.w1,
            theta_lo=theta_lo,
            n_lo=kwargs.pop("n_lo", config.monte_carlo.N_LO),
            **kwargs,
        )
    return make
