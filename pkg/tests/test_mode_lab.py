"""
Unit tests for the mode lab: grids, envelopes, spectral width, the basis and shifts.
"""

import math

import numpy as np
import pandas as pd
import pytest

from src.config import EnvelopeFamily
from src.core.mode_lab import (
    build_basis,
    envelope_of,
    envelope_tau,
    expansion_residual,
    inner_product,
    make_envelope,
    make_grid,
    mean_frequency,
    mode_to_frame,
    project_shift,
    shift_mode,
    spectral_width,
    write_mode_dumps,
)
from src.exceptions import (
    CarrierUndersampledError,
    FirstOrderRegimeError,
    GuardFactorError,
    ModeError,
    NonPowerOfTwoGridError,
    ShiftOutOfRangeError,
    SpectralLeakageError,
)
from src.models.schemas import SampledMode


@pytest.fixture(scope="module")
def small_basis(reference_spec):
    """Coarse 4096-point basis, enough for file dumps."""
    return build_basis(reference_spec, make_grid(reference_spec, guard_factor=20, n_points=2 ** 12))


class TestGrid:
    """Test cases for make_grid."""

    def test_reference_grid(self, reference_grid):
        """Test the default grid spans 40 pulse durations with 2^16 points."""
        assert reference_grid.n_points == 2 ** 16
        assert reference_grid.window == pytest.approx(400e-15, rel=1e-12)
        assert reference_grid.center == 0.0

    def test_times_antisymmetric(self, reference_grid):
        """Test sample times are exactly antisymmetric about u = 0."""
        t = reference_grid.times
        half = reference_grid.n_points // 2
        assert t[half] == 0.0
        np.testing.assert_array_equal(t[half + 1:], -t[half - 1:0:-1])

    def test_non_power_of_two(self, reference_spec):
        """Test grids that are not a power of two are rejected."""
        with pytest.raises(NonPowerOfTwoGridError):
            make_grid(reference_spec, n_points=1000)

    def test_too_few_points(self, reference_spec):
        """Test grids below 16 points are rejected."""
        with pytest.raises(NonPowerOfTwoGridError):
            make_grid(reference_spec, n_points=8)

    def test_short_window(self, reference_spec):
        """Test a guard factor below 20 is rejected."""
        with pytest.raises(GuardFactorError):
            make_grid(reference_spec, guard_factor=10)

    def test_carrier_undersampled(self, reference_spec):
        """Test 256 points over 400 fs cannot carry an 810 nm carrier."""
        with pytest.raises(CarrierUndersampledError):
            make_grid(reference_spec, guard_factor=40, n_points=256)


class TestEnvelope:
    """Test cases for envelope sampling."""

    def test_unit_norm(self, reference_spec, reference_grid):
        """Test g0 is normalized on the grid."""
        g0 = make_envelope(reference_spec, reference_grid)
        assert g0.norm == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("family", [EnvelopeFamily.GAUSSIAN, EnvelopeFamily.SECH])
    def test_even(self, reference_spec, reference_grid, family):
        """Test g0(u) = g0(-u) holds exactly for every family."""
        spec = reference_spec.model_copy(update={"envelope": family})
        g0 = make_envelope(spec, reference_grid).amplitude
        half = reference_grid.n_points // 2
        np.testing.assert_array_equal(g0[half + 1:], g0[half - 1:0:-1])
        assert np.all(g0.imag == 0.0)

    @pytest.mark.parametrize("family", [EnvelopeFamily.GAUSSIAN, EnvelopeFamily.SECH])
    def test_fwhm(self, reference_spec, reference_grid, family):
        """Test the sampled intensity FWHM matches the requested duration."""
        spec = reference_spec.model_copy(update={"envelope": family})
        intensity = np.abs(make_envelope(spec, reference_grid).amplitude) ** 2
        above = np.count_nonzero(intensity >= 0.5 * intensity.max())
        assert abs(above * reference_grid.t_step - spec.duration_fwhm) <= 2 * reference_grid.t_step

    def test_tau(self, reference_spec):
        """Test the Gaussian time constant."""
        tau = envelope_tau(reference_spec)
        assert tau == pytest.approx(10e-15 / (2.0 * math.sqrt(math.log(2.0))), rel=1e-14)


class TestSpectralWidth:
    """Test cases for spectral moments."""

    def test_gaussian_width(self, reference_spec, reference_basis):
        """Test Delta_w = 1/(tau sqrt 2) for a Gaussian envelope."""
        tau = envelope_tau(reference_spec)
        assert reference_basis.delta_omega == pytest.approx(1.0 / (tau * math.sqrt(2.0)), rel=1e-9)
        assert reference_basis.delta_omega == pytest.approx(1.17741e14, rel=1e-5)

    def test_sech_width(self, reference_spec, sech_basis):
        """Test Delta_w = 1/(tau sqrt 3) for a sech envelope."""
        spec = reference_spec.model_copy(update={"envelope": EnvelopeFamily.SECH})
        tau = envelope_tau(spec)
        assert sech_basis.delta_omega == pytest.approx(1.0 / (tau * math.sqrt(3.0)), rel=1e-6)

    def test_mean_frequency_of_v0(self, reference_basis):
        """Test the spectrum of v0 is centred on +omega0."""
        assert mean_frequency(reference_basis.v0) == pytest.approx(reference_basis.omega0, rel=1e-9)

    def test_carrier_referenced_width(self, reference_basis):
        """Test the width of v0 about omega0 equals the envelope width."""
        width = spectral_width(reference_basis.v0, center=reference_basis.omega0)
        assert width == pytest.approx(reference_basis.delta_omega, rel=1e-6)

    def test_translation_invariant(self, reference_spec, reference_grid):
        """Test delaying the envelope leaves its width unchanged."""
        g0 = make_envelope(reference_spec, reference_grid)
        delayed = SampledMode(grid=reference_grid, amplitude=np.roll(g0.amplitude, 1500), label="g0 delayed")
        assert spectral_width(delayed) == pytest.approx(spectral_width(g0), rel=1e-12)

    @pytest.mark.parametrize("family", [EnvelopeFamily.GAUSSIAN, EnvelopeFamily.SECH])
    def test_stretch_halves_width(self, reference_spec, reference_grid, family):
        """Test doubling the duration halves Delta_w."""
        spec = reference_spec.model_copy(update={"envelope": family})
        stretched = spec.model_copy(update={"duration_fwhm": 2.0 * spec.duration_fwhm})
        width = spectral_width(make_envelope(spec, reference_grid))
        assert spectral_width(make_envelope(stretched, reference_grid)) == pytest.approx(0.5 * width, rel=1e-10)

    def test_leakage(self, reference_grid):
        """Test white noise fills the band edge and is rejected."""
        rng = np.random.default_rng(3)
        noise = rng.standard_normal(reference_grid.n_points) + 1j * rng.standard_normal(reference_grid.n_points)
        noise /= math.sqrt(np.sum(np.abs(noise) ** 2) * reference_grid.t_step)
        with pytest.raises(SpectralLeakageError):
            mean_frequency(SampledMode(grid=reference_grid, amplitude=noise, label="noise"))

    def test_grid_doubling(self, reference_spec, reference_basis):
        """Test Delta_w is converged with respect to the number of points."""
        coarse = build_basis(reference_spec, make_grid(reference_spec, n_points=2 ** 15))
        assert coarse.delta_omega == pytest.approx(reference_basis.delta_omega, rel=1e-9)


class TestModeBasis:
    """Test cases for build_basis."""

    def test_reference_scales(self, reference_basis):
        """Test alpha and u0 at the reference operating point."""
        assert reference_basis.omega0 == pytest.approx(2.32549e15, rel=1e-5)
        assert reference_basis.alpha == pytest.approx(19.75, rel=1e-3)
        assert reference_basis.u0 == pytest.approx(4.2946e-16, rel=1e-4)

    def test_orthonormal(self, reference_basis):
        """Test v0, v1 and w1 are normalized and v0, v1 orthogonal."""
        for mode in (reference_basis.v0, reference_basis.v1, reference_basis.w1):
            assert mode.norm == pytest.approx(1.0, abs=1e-10)
        assert abs(inner_product(reference_basis.v0, reference_basis.v1)) < 1e-10

    def test_w1_coefficients(self, reference_basis):
        """Test w1 = (i alpha v0 + v1) / sqrt(alpha^2 + 1)."""
        alpha = reference_basis.alpha
        scale = math.sqrt(alpha ** 2 + 1.0)
        c0 = inner_product(reference_basis.v0, reference_basis.w1)
        c1 = inner_product(reference_basis.v1, reference_basis.w1)
        assert c0 == pytest.approx(1j * alpha / scale, abs=1e-10)
        assert c1 == pytest.approx(1.0 / scale, abs=1e-10)

    def test_v1_odd_envelope(self, reference_basis):
        """Test the envelope of v1 is real and odd."""
        env = envelope_of(reference_basis.v1, reference_basis.omega0).amplitude
        half = reference_basis.grid.n_points // 2
        peak = np.max(np.abs(env))
        assert np.max(np.abs(env.imag)) < 1e-9 * peak
        assert np.max(np.abs(env[half + 1:] + env[half - 1:0:-1])) < 1e-9 * peak

    def test_v1_analytic_form(self, reference_spec, reference_basis):
        """Test v1 = -(1/Delta_w) dg0/du e^{-i w0 u} = sqrt(2) (u/tau) g0 e^{-i w0 u}."""
        tau = envelope_tau(reference_spec)
        u = reference_basis.grid.times
        g0 = make_envelope(reference_spec, reference_basis.grid).amplitude
        expected = math.sqrt(2.0) * (u / tau) * g0
        env = envelope_of(reference_basis.v1, reference_basis.omega0).amplitude
        assert np.max(np.abs(env - expected)) < 1e-8 * np.max(np.abs(expected))

    def test_inner_product_grid_mismatch(self, reference_basis, small_basis):
        """Test modes on different grids cannot be compared."""
        with pytest.raises(ModeError):
            inner_product(reference_basis.v0, small_basis.v0)


class TestShifts:
    """Test cases for shift_mode and project_shift."""

    def test_integer_shift_is_roll(self, reference_basis):
        """Test a shift by whole samples equals a circular roll."""
        k = 37
        shifted = shift_mode(reference_basis.v0, k * reference_basis.grid.t_step)
        expected = np.roll(reference_basis.v0.amplitude, k)
        np.testing.assert_allclose(shifted.amplitude, expected, rtol=0, atol=1e-12 * reference_basis.v0.peak)

    def test_norm_preserved(self, reference_basis):
        """Test shifting preserves the mode norm."""
        shifted = shift_mode(reference_basis.v0, 3.3e-17)
        assert shifted.norm == pytest.approx(1.0, abs=1e-12)

    def test_zero_shift(self, reference_basis):
        """Test a zero shift returns the mode unchanged."""
        assert shift_mode(reference_basis.v0, 0.0) is reference_basis.v0

    def test_wraparound_rejected(self, reference_basis):
        """Test shifts reaching 10% of the window are rejected."""
        with pytest.raises(ShiftOutOfRangeError):
            shift_mode(reference_basis.v0, 40e-15)

    def test_just_inside_window_bound(self, reference_basis):
        """Test shifts just short of 10% of the window are applied."""
        shifted = shift_mode(reference_basis.v0, 0.999 * 40e-15)
        assert shifted.norm == pytest.approx(1.0, abs=1e-10)

    def test_first_order_boundary(self, reference_basis):
        """Test a projection at exactly 10% of the FWHM is rejected."""
        with pytest.raises(FirstOrderRegimeError):
            project_shift(reference_basis, 0.1 * 10e-15)

    def test_first_order_limit(self, reference_basis):
        """Test projections beyond 10% of the FWHM are rejected."""
        with pytest.raises(FirstOrderRegimeError):
            project_shift(reference_basis, 1e-15)

    def test_projection(self, reference_basis):
        """Test Re<w1|v0(u - du) - v0> = du/u0 to first order."""
        delta_u = 1e-18
        projection = project_shift(reference_basis, delta_u)
        assert projection.real == pytest.approx(delta_u / reference_basis.u0, rel=1e-4)

    def test_residual_is_second_order(self, reference_basis):
        """Test the expansion residual grows as delta_u squared."""
        shifts = np.geomspace(1e-19, 1e-17, 7)
        residuals = [expansion_residual(reference_basis, du) for du in shifts]
        slope = np.polyfit(np.log(shifts), np.log(residuals), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.05)


class TestDumps:
    """Test cases for mode CSV dumps."""

    def test_frame_columns(self, small_basis):
        """Test the frame layout of a mode dump."""
        frame = mode_to_frame(small_basis.v0)
        assert list(frame.columns) == ["t_seconds", "re_amplitude", "im_amplitude"]
        assert len(frame) == small_basis.grid.n_points

    def test_write_dumps(self, small_basis, tmp_path):
        """Test one CSV per mode is written and reads back."""
        paths = write_mode_dumps([small_basis.v0, small_basis.v1, small_basis.w1], tmp_path / "modes")
        assert sorted(p.name for p in paths) == ["v0.csv", "v1.csv", "w1.csv"]
        frame = pd.read_csv(tmp_path / "modes" / "w1.csv")
        restored = frame["re_amplitude"].to_numpy() + 1j * frame["im_amplitude"].to_numpy()
        np.testing.assert_allclose(restored, small_basis.w1.amplitude, rtol=1e-12, atol=1e-6)
