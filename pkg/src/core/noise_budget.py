"""
Noise Budget
Converts technical noise figures (carrier-envelope phase noise, repetition-rate
jitter) into timing amplitude spectral densities and ranks them against the
quantum floor.
"""

import math
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from ..config import NoiseKind, config
from ..exceptions import NoiseBudgetError, NoiseInputError
from ..models.schemas import NATIVE_UNITS, BudgetRow, NoiseSource


SOURCE_COLUMNS = ["kind", "amplitude", "units", "at_frequency_hz"]
BUDGET_COLUMNS = ["kind", "timing_asd_s_per_rtHz", "ratio_to_quantum_floor", "dominant"]
CURVE_COLUMNS = ["frequency_hz", "asd"]

# Accepted spellings of the native units, compared case-insensitively
UNIT_ALIASES = {
    "rad/rthz": "rad/rtHz",
    "rad/sqrt(hz)": "rad/rtHz",
    "rad/√hz": "rad/rtHz",
    "s/rthz": "s/rtHz",
    "s/sqrt(hz)": "s/rtHz",
    "s/√hz": "s/rtHz",
}


# =============================================================================
# CONVERSIONS
# =============================================================================

def phase_to_timing(phase_asd: float, omega0: float) -> float:
    """Timing ASD (s/rtHz) equivalent to a carrier phase ASD (rad/rtHz)."""
    if not omega0 > 0:
        raise NoiseInputError(f"omega0 must be > 0, got {omega0!r}", {"omega0": omega0})
    if phase_asd < 0:
        raise NoiseInputError(f"phase_asd must be >= 0, got {phase_asd!r}", {"phase_asd": phase_asd})
    return phase_asd / omega0


def timing_to_phase(timing_asd: float, omega0: float) -> float:
    """Carrier phase ASD (rad/rtHz) equivalent to a timing ASD."""
    if not omega0 > 0:
        raise NoiseInputError(f"omega0 must be > 0, got {omega0!r}", {"omega0": omega0})
    if timing_asd < 0:
        raise NoiseInputError(f"timing_asd must be >= 0, got {timing_asd!r}", {"timing_asd": timing_asd})
    return timing_asd * omega0


def quantum_floor_asd(delta_u_min: float, detection_time: float) -> float:
    """
    Quantum floor in s/rtHz.

    The limit of a detection window T is read as the ASD at 1 Hz bandwidth
    after scaling to a 1 s window: delta_u_min * sqrt(T / 1 s).
    """
    if not delta_u_min > 0 or not detection_time > 0:
        raise NoiseInputError("delta_u_min and detection_time must be > 0",
                              {"delta_u_min": delta_u_min, "detection_time": detection_time})
    return delta_u_min * math.sqrt(detection_time)


def to_timing(source: NoiseSource, omega0: float) -> float:
    """Timing ASD of one source."""
    if source.kind == NoiseKind.CEO_PHASE:
        return phase_to_timing(source.amplitude, omega0)
    return source.amplitude


# =============================================================================
# BUDGET
# =============================================================================

def reference_sources() -> List[NoiseSource]:
    """Technical noise quotes of the reference frequency comb."""
    figures = config.reference
    return [
        NoiseSource(kind=NoiseKind.CEO_PHASE, amplitude=figures.CEO_PHASE_ASD,
                    at_frequency=figures.ANALYSIS_FREQUENCY_HZ),
        NoiseSource(kind=NoiseKind.REP_RATE_JITTER, amplitude=figures.REP_RATE_JITTER_ASD,
                    at_frequency=figures.ANALYSIS_FREQUENCY_HZ),
    ]


def build_budget(sources: List[NoiseSource], quantum_floor: float, omega0: float) -> List[BudgetRow]:
    """
    Convert sources to timing ASD and rank them.

    A quantum_floor row is appended when none is listed. The largest timing
    ASD is marked dominant, the first listed winning ties.

    Args:
        sources: Noise sources in native units
        quantum_floor: Quantum floor (s/rtHz)
        omega0: Carrier angular frequency for phase conversion

    Returns:
        One BudgetRow per source, in listing order
    """
    if not sources:
        raise NoiseBudgetError("At least one noise source is required")
    if not quantum_floor > 0:
        raise NoiseBudgetError(f"quantum_floor must be > 0, got {quantum_floor!r}",
                               {"quantum_floor": quantum_floor})

    sources = list(sources)
    if not any(source.kind == NoiseKind.QUANTUM_FLOOR for source in sources):
        at_frequency = sources[0].at_frequency
        sources.append(NoiseSource(kind=NoiseKind.QUANTUM_FLOOR, amplitude=quantum_floor,
                                   at_frequency=at_frequency))

    timing = np.array([to_timing(source, omega0) for source in sources])
    dominant = int(np.argmax(timing))

    rows = [
        BudgetRow(
            source=source,
            timing_asd=float(value),
            ratio_to_quantum_floor=float(value) / quantum_floor,
            dominant=(i == dominant),
        )
        for i, (source, value) in enumerate(zip(sources, timing))
    ]
    logger.info(f"✓ Budget: {len(rows)} rows, dominant source {rows[dominant].source.kind.value} "
                f"({rows[dominant].timing_asd:.3e} s/rtHz)")
    return rows


def rss_total(rows: List[BudgetRow]) -> float:
    """Root-sum-square of the timing ASDs."""
    return math.sqrt(sum(row.timing_asd ** 2 for row in rows))


def dominant_row(rows: List[BudgetRow]) -> BudgetRow:
    return next(row for row in rows if row.dominant)


def budget_to_frame(rows: List[BudgetRow], include_rss: bool = False) -> pd.DataFrame:
    """Budget as kind, timing_asd_s_per_rtHz, ratio_to_quantum_floor, dominant."""
    records = [
        {
            "kind": row.source.kind.value,
            "timing_asd_s_per_rtHz": row.timing_asd,
            "ratio_to_quantum_floor": row.ratio_to_quantum_floor,
            "dominant": row.dominant,
        }
        for row in rows
    ]
    if include_rss:
        floor = next(row for row in rows if row.source.kind == NoiseKind.QUANTUM_FLOOR)
        total = rss_total(rows)
        records.append({
            "kind": "rss_total",
            "timing_asd_s_per_rtHz": total,
            "ratio_to_quantum_floor": total / floor.timing_asd * floor.ratio_to_quantum_floor,
            "dominant": False,
        })
    return pd.DataFrame(records, columns=BUDGET_COLUMNS)


def write_budget(rows: List[BudgetRow], path: Union[str, Path], include_rss: bool = False) -> Path:
    path = Path(path)
    budget_to_frame(rows, include_rss).to_csv(path, index=False, float_format=config.output.FLOAT_FORMAT)
    return path


# =============================================================================
# INPUTS
# =============================================================================

def _read_csv(path: Path, **kwargs) -> pd.DataFrame:
    try:
        return pd.read_csv(path, **kwargs)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise NoiseInputError(f"Cannot parse {path}: {e}", {"path": str(path)})


def _normalize_units(units: str) -> Optional[str]:
    return UNIT_ALIASES.get(str(units).strip().lower())


def sources_from_frame(frame: pd.DataFrame) -> List[NoiseSource]:
    """Parse a frame with columns kind, amplitude, units, at_frequency_hz."""
    missing = [column for column in SOURCE_COLUMNS if column not in frame.columns]
    if missing:
        raise NoiseInputError(f"Noise CSV is missing columns: {', '.join(missing)}",
                              {"missing": missing, "expected": SOURCE_COLUMNS})

    sources = []
    for index, record in frame.iterrows():
        row_number = int(index) + 2  # header is line 1
        try:
            source = NoiseSource(
                kind=str(record["kind"]).strip(),
                amplitude=float(record["amplitude"]),
                at_frequency=float(record["at_frequency_hz"]),
            )
        except (ValidationError, ValueError) as e:
            raise NoiseInputError(f"Invalid noise source on line {row_number}: {e}",
                                  {"line": row_number})

        units = _normalize_units(record["units"])
        if units != NATIVE_UNITS[source.kind]:
            raise NoiseInputError(
                f"Line {row_number}: {source.kind.value} must be given in {NATIVE_UNITS[source.kind]}, "
                f"got {record['units']!r}",
                {"line": row_number, "units": str(record["units"])},
            )
        sources.append(source)
    return sources


def load_noise_sources(path: Union[str, Path]) -> List[NoiseSource]:
    """Read noise sources from CSV."""
    path = Path(path)
    if not path.exists():
        raise NoiseInputError(f"Noise CSV not found: {path}", {"path": str(path)})
    frame = _read_csv(path, comment="#", skipinitialspace=True)
    sources = sources_from_frame(frame)
    logger.debug(f"Loaded {len(sources)} noise sources from {path}")
    return sources


def source_from_asd_curve(frame: pd.DataFrame, kind: NoiseKind, at_frequency: float) -> NoiseSource:
    """
    Read a noise source off an ASD curve by log-log interpolation.

    Args:
        frame: Columns frequency_hz, asd (native units of `kind`)
        kind: Noise kind the curve describes
        at_frequency: Analysis frequency (Hz), inside the curve's range
    """
    missing = [column for column in CURVE_COLUMNS if column not in frame.columns]
    if missing:
        raise NoiseInputError(f"ASD curve is missing columns: {', '.join(missing)}", {"missing": missing})

    try:
        curve = frame[CURVE_COLUMNS].astype(float).sort_values("frequency_hz")
    except ValueError as e:
        raise NoiseInputError(f"ASD curve has non-numeric values: {e}")
    frequency = curve["frequency_hz"].to_numpy()
    asd = curve["asd"].to_numpy()
    if len(frequency) < 2:
        raise NoiseInputError("ASD curves need at least two samples", {"samples": len(frequency)})
    if not (np.all(frequency > 0) and np.all(asd > 0)):
        raise NoiseInputError("ASD curves need positive frequencies and amplitudes for log-log interpolation")
    if not frequency[0] <= at_frequency <= frequency[-1]:
        raise NoiseInputError(
            f"Analysis frequency {at_frequency:g} Hz outside curve range [{frequency[0]:g}, {frequency[-1]:g}] Hz",
            {"at_frequency": at_frequency},
        )

    value = float(np.exp(np.interp(np.log(at_frequency), np.log(frequency), np.log(asd))))
    return NoiseSource(kind=kind, amplitude=value, at_frequency=at_frequency)


def read_asd_curve(path: Union[str, Path], kind: NoiseKind, at_frequency: float) -> NoiseSource:
    path = Path(path)
    if not path.exists():
        raise NoiseInputError(f"ASD curve not found: {path}", {"path": str(path)})
    return source_from_asd_curve(_read_csv(path, comment="#"), kind, at_frequency)


def with_curve_source(sources: List[NoiseSource], curve_source: NoiseSource) -> List[NoiseSource]:
    """Replace the listed source of the same kind with one read off a curve, or append it."""
    kept = [source for source in sources if source.kind != curve_source.kind]
    if len(kept) == len(sources):
        return kept + [curve_source]
    position = next(i for i, source in enumerate(sources) if source.kind == curve_source.kind)
    logger.debug(f"{curve_source.kind.value} taken from ASD curve: {curve_source.amplitude:.3e}")
    return kept[:position] + [curve_source] + kept[position:]
