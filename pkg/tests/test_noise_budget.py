"""
Unit tests for the timing-noise budget.
"""

from pathlib import Path

import pandas as pd
import pytest

from src.config import NoiseKind
from src.core.noise_budget import (
    BUDGET_COLUMNS,
    budget_to_frame,
    build_budget,
    dominant_row,
    load_noise_sources,
    phase_to_timing,
    quantum_floor_asd,
    read_asd_curve,
    reference_sources,
    rss_total,
    source_from_asd_curve,
    sources_from_frame,
    timing_to_phase,
    with_curve_source,
    write_budget,
)
from src.exceptions import NoiseBudgetError, NoiseInputError
from src.models.schemas import NoiseSource

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

OMEGA0 = 2.32549e15
FLOOR = 1.0634e-24


@pytest.fixture
def reference_rows():
    """Budget of the reference comb against the coherent quantum floor."""
    return build_budget(reference_sources(), FLOOR, OMEGA0)


class TestConversions:
    """Test cases for unit conversions."""

    def test_phase_to_timing(self):
        """Test 1e-5 rad/rtHz of CEO phase at 810 nm is about 4.3e-21 s/rtHz."""
        assert phase_to_timing(1e-5, OMEGA0) == pytest.approx(4.3002e-21, rel=1e-4)

    def test_inverse(self):
        """Test the phase and timing conversions are inverses."""
        assert timing_to_phase(phase_to_timing(3e-6, OMEGA0), OMEGA0) == pytest.approx(3e-6, rel=1e-14)

    @pytest.mark.parametrize("omega0", [0.0, -1.0])
    def test_invalid_carrier(self, omega0):
        """Test a non-positive carrier is rejected."""
        with pytest.raises(NoiseInputError):
            phase_to_timing(1e-5, omega0)

    def test_negative_asd(self):
        """Test negative amplitudes are rejected."""
        with pytest.raises(NoiseInputError):
            timing_to_phase(-1e-18, OMEGA0)

    def test_quantum_floor(self):
        """Test the floor of a 1 s window equals the limit itself."""
        assert quantum_floor_asd(FLOOR, 1.0) == FLOOR
        assert quantum_floor_asd(FLOOR, 4.0) == pytest.approx(2.0 * FLOOR)


class TestBudget:
    """Test cases for build_budget."""

    def test_reference_budget(self, reference_rows):
        """Test the reference comb is dominated by repetition-rate jitter."""
        kinds = [row.source.kind for row in reference_rows]
        assert kinds == [NoiseKind.CEO_PHASE, NoiseKind.REP_RATE_JITTER, NoiseKind.QUANTUM_FLOOR]
        assert reference_rows[0].timing_asd == pytest.approx(4.3002e-21, rel=1e-4)
        assert dominant_row(reference_rows).source.kind == NoiseKind.REP_RATE_JITTER
        assert reference_rows[1].ratio_to_quantum_floor == pytest.approx(1e-18 / FLOOR)
        assert reference_rows[2].ratio_to_quantum_floor == 1.0

    def test_single_dominant(self, reference_rows):
        """Test exactly one row is marked dominant."""
        assert sum(row.dominant for row in reference_rows) == 1

    def test_tie_goes_to_first(self):
        """Test the first listed source wins a tie."""
        sources = [
            NoiseSource(kind=NoiseKind.REP_RATE_JITTER, amplitude=1e-18),
            NoiseSource(kind=NoiseKind.CEO_PHASE, amplitude=2e-18),
        ]
        rows = build_budget(sources, FLOOR, 2.0)
        assert rows[0].dominant
        assert not rows[1].dominant

    def test_listed_floor_not_duplicated(self):
        """Test an explicit quantum floor row is kept as given."""
        sources = [NoiseSource(kind=NoiseKind.QUANTUM_FLOOR, amplitude=FLOOR)]
        rows = build_budget(sources, FLOOR, OMEGA0)
        assert len(rows) == 1
        assert rows[0].dominant

    def test_quantum_limited(self):
        """Test a quiet comb leaves the quantum floor dominant."""
        sources = [NoiseSource(kind=NoiseKind.REP_RATE_JITTER, amplitude=1e-26)]
        rows = build_budget(sources, FLOOR, OMEGA0)
        assert dominant_row(rows).source.kind == NoiseKind.QUANTUM_FLOOR

    def test_empty(self):
        """Test an empty source list is rejected."""
        with pytest.raises(NoiseBudgetError):
            build_budget([], FLOOR, OMEGA0)

    def test_invalid_floor(self):
        """Test a non-positive floor is rejected."""
        with pytest.raises(NoiseBudgetError):
            build_budget(reference_sources(), 0.0, OMEGA0)

    def test_frame_with_rss(self, reference_rows):
        """Test the optional root-sum-square row."""
        frame = budget_to_frame(reference_rows, include_rss=True)
        assert list(frame.columns) == BUDGET_COLUMNS
        assert frame["kind"].tolist()[-1] == "rss_total"
        total = rss_total(reference_rows)
        assert frame["timing_asd_s_per_rtHz"].iloc[-1] == pytest.approx(total)
        assert frame["ratio_to_quantum_floor"].iloc[-1] == pytest.approx(total / FLOOR)
        assert not frame["dominant"].iloc[-1]

    def test_write(self, reference_rows, tmp_path):
        """Test the budget CSV reads back."""
        path = write_budget(reference_rows, tmp_path / "budget.csv")
        frame = pd.read_csv(path)
        assert frame["kind"].tolist() == ["ceo_phase", "rep_rate_jitter", "quantum_floor"]
        assert frame["dominant"].tolist() == [False, True, False]


class TestInputs:
    """Test cases for noise-source input files."""

    def test_reference_csv(self):
        """Test the shipped reference CSV matches the built-in quotes."""
        assert load_noise_sources(SCENARIOS / "reference_noise.csv") == reference_sources()

    def test_unit_aliases(self):
        """Test alternative spellings of the native units."""
        frame = pd.DataFrame({
            "kind": ["ceo_phase"], "amplitude": [1e-5], "units": ["rad/sqrt(Hz)"], "at_frequency_hz": [1e5],
        })
        assert sources_from_frame(frame)[0].kind == NoiseKind.CEO_PHASE

    def test_wrong_units(self):
        """Test a phase source given in seconds is rejected with its line."""
        frame = pd.DataFrame({
            "kind": ["rep_rate_jitter", "ceo_phase"], "amplitude": [1e-18, 1e-5],
            "units": ["s/rtHz", "s/rtHz"], "at_frequency_hz": [1e5, 1e5],
        })
        with pytest.raises(NoiseInputError) as excinfo:
            sources_from_frame(frame)
        assert excinfo.value.details["line"] == 3

    def test_unknown_kind(self):
        """Test an unknown noise kind is rejected."""
        frame = pd.DataFrame({
            "kind": ["thermal"], "amplitude": [1.0], "units": ["s/rtHz"], "at_frequency_hz": [1e5],
        })
        with pytest.raises(NoiseInputError) as excinfo:
            sources_from_frame(frame)
        assert excinfo.value.details["line"] == 2

    def test_missing_columns(self):
        """Test frames without the required columns are rejected."""
        with pytest.raises(NoiseInputError):
            sources_from_frame(pd.DataFrame({"kind": ["ceo_phase"], "amplitude": [1e-5]}))

    def test_missing_file(self, tmp_path):
        """Test a missing CSV is reported."""
        with pytest.raises(NoiseInputError):
            load_noise_sources(tmp_path / "absent.csv")

    def test_empty_file(self, tmp_path):
        """Test an empty CSV is reported as a noise input error."""
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(NoiseInputError):
            load_noise_sources(path)

    def test_undecodable_file(self, tmp_path):
        """Test a CSV that is not UTF-8 is reported as a noise input error."""
        path = tmp_path / "binary.csv"
        path.write_bytes(b"kind,amplitude,units,at_frequency_hz\nceo_phase,1e-5,rad\xff\xfe,1e5\n")
        with pytest.raises(NoiseInputError):
            load_noise_sources(path)


class TestASDCurve:
    """Test cases for reading sources off ASD curves."""

    @pytest.fixture
    def curve(self):
        """1/f curve, 1e-3 / f rad/rtHz."""
        frequency = [1e2, 1e4, 1e6]
        return pd.DataFrame({"frequency_hz": frequency, "asd": [1e-3 / f for f in frequency]})

    def test_log_log_interpolation(self, curve):
        """Test power laws are interpolated exactly."""
        source = source_from_asd_curve(curve, NoiseKind.CEO_PHASE, 1e5)
        assert source.amplitude == pytest.approx(1e-8, rel=1e-12)
        assert source.at_frequency == 1e5

    def test_out_of_range(self, curve):
        """Test frequencies outside the curve are rejected."""
        with pytest.raises(NoiseInputError):
            source_from_asd_curve(curve, NoiseKind.CEO_PHASE, 1e7)

    def test_non_positive_values(self):
        """Test log-log interpolation needs positive samples."""
        frame = pd.DataFrame({"frequency_hz": [0.0, 1e3], "asd": [1.0, 1.0]})
        with pytest.raises(NoiseInputError):
            source_from_asd_curve(frame, NoiseKind.CEO_PHASE, 1e2)

    def test_read_file(self, curve, tmp_path):
        """Test curves are read from CSV files."""
        path = tmp_path / "curve.csv"
        curve.to_csv(path, index=False)
        source = read_asd_curve(path, NoiseKind.REP_RATE_JITTER, 1e3)
        assert source.amplitude == pytest.approx(1e-6, rel=1e-12)

    def test_too_few_samples(self):
        """Test a single-point curve cannot be interpolated."""
        frame = pd.DataFrame({"frequency_hz": [1e3], "asd": [1e-6]})
        with pytest.raises(NoiseInputError):
            source_from_asd_curve(frame, NoiseKind.CEO_PHASE, 1e3)

    def test_missing_values(self):
        """Test blank amplitudes are rejected rather than interpolated."""
        frame = pd.DataFrame({"frequency_hz": [1e2, 1e4], "asd": [1e-5, float("nan")]})
        with pytest.raises(NoiseInputError):
            source_from_asd_curve(frame, NoiseKind.CEO_PHASE, 1e3)

    def test_curve_replaces_quote(self, curve):
        """Test a curve-derived source takes the place of the listed source of its kind."""
        source = source_from_asd_curve(curve, NoiseKind.CEO_PHASE, 1e5)
        merged = with_curve_source(reference_sources(), source)
        assert [s.kind for s in merged] == [NoiseKind.CEO_PHASE, NoiseKind.REP_RATE_JITTER]
        assert merged[0].amplitude == pytest.approx(1e-8, rel=1e-12)

    def test_curve_appended(self, curve):
        """Test a curve of an unlisted kind is appended."""
        source = source_from_asd_curve(curve, NoiseKind.REP_RATE_JITTER, 1e5)
        merged = with_curve_source(reference_sources()[:1], source)
        assert [s.kind for s in merged] == [NoiseKind.CEO_PHASE, NoiseKind.REP_RATE_JITTER]
