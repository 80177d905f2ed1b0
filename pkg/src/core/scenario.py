"""
Scenario Loader
Reads bracketed key = value scenario files into validated models and turns
them into ready-to-use bases, states and LO configurations.
"""

import configparser
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError
from scipy import constants

from ..config import SweepParameter
from ..exceptions import ScenarioError, ScenarioValueError, UnknownKeyError
from ..models.schemas import (
    FieldState,
    GridSection,
    HomodyneConfig,
    LOSection,
    ModeBasis,
    PulseSection,
    PulseSpec,
    RunSection,
    Scenario,
    SqueezingSection,
    SqueezingSpec,
)
from .homodyne_engine import local_oscillator
from .mode_lab import build_basis, make_grid
from .quantum_state import apply_squeezing, coherent_state, photons_from_power, squeezing_from_db


SECTION_MODELS = {
    "pulse": PulseSection,
    "squeezing": SqueezingSection,
    "lo": LOSection,
    "grid": GridSection,
    "run": RunSection,
}

_SECTION_RE = re.compile(r"^\[(?P<name>[^\]]+)\]")

# Default sweep ranges: (start, stop, log spacing)
SWEEP_DEFAULTS = {
    SweepParameter.POWER: (1e-4, 1.0, True),
    SweepParameter.DURATION_FWHM: (5e-15, 100e-15, True),
    SweepParameter.WAVELENGTH: (400e-9, 1600e-9, False),
    SweepParameter.SQUEEZING_DB: (0.0, 15.0, False),
}


# =============================================================================
# PARSING
# =============================================================================

def _index_lines(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """Line number of every section header and key."""
    index = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        match = _SECTION_RE.match(line)
        if match:
            section = match.group("name").strip()
            index.setdefault((section, None), lineno)
        elif section is not None and ("=" in line or ":" in line):
            key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
            index.setdefault((section, key), lineno)
    return index


def _read_sections(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None,
        inline_comment_prefixes=("#",),
        strict=True,
        empty_lines_in_values=False,
    )
    try:
        parser.read_string(text, source=source)
    except configparser.DuplicateSectionError as e:
        raise ScenarioValueError(e.section, None, e.lineno, "duplicate section")
    except configparser.DuplicateOptionError as e:
        raise ScenarioValueError(e.section, e.option, e.lineno, "duplicate key")
    except configparser.MissingSectionHeaderError as e:
        raise ScenarioValueError("(none)", None, e.lineno, "entry before the first [section] header")
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ScenarioValueError("(none)", None, lineno, "malformed line, expected key = value")
    except configparser.Error as e:
        raise ScenarioError(f"Cannot parse scenario {source}: {e}", {"source": source})
    return parser


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    """
    Parse scenario text.

    Raises:
        UnknownKeyError: for sections or keys outside the schema
        ScenarioValueError: for values failing validation (with line number)
    """
    lines = _index_lines(text)
    parser = _read_sections(text, source)

    data = {}
    for section in parser.sections():
        if section not in SECTION_MODELS:
            raise UnknownKeyError(section, None, lines.get((section, None)))
        data[section] = {key: value for key, value in parser.items(section)}

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        loc = [str(part) for part in error["loc"]]
        section = loc[0] if loc else "(none)"
        key = loc[1] if len(loc) > 1 else None
        line = lines.get((section, key), lines.get((section, None)))
        if error["type"] == "extra_forbidden":
            raise UnknownKeyError(section, key, line)
        raise ScenarioValueError(section, key, line, error["msg"])

    logger.debug(f"Loaded scenario from {source}: sections {sorted(data)}")
    return scenario


def load_scenario(path: Union[str, Path, None] = None) -> Scenario:
    """Load a scenario file, or the default scenario when path is None."""
    if path is None:
        return Scenario()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario file {path}: {e}", {"path": str(path)})
    except UnicodeDecodeError as e:
        raise ScenarioError(f"Scenario file {path} is not valid UTF-8: {e.reason} at byte {e.start}",
                            {"path": str(path), "byte": e.start})
    return loads_scenario(text, source=str(path))


def describe_schema() -> str:
    """Every section and key with its default and description."""
    lines = []
    for name, model in SECTION_MODELS.items():
        lines.append(f"[{name}]")
        for key, field in model.model_fields.items():
            default = field.default
            if hasattr(default, "value"):
                default = default.value
            lines.append(f"  {key} = {default}    # {field.description or ''}")
        lines.append("")
    return "\n".join(lines)


# =============================================================================
# SETUP
# =============================================================================

@dataclass(frozen=True)
class ScenarioSetup:
    """Everything the commands need, built once from a scenario."""
    scenario: Scenario
    pulse: PulseSpec
    basis: ModeBasis
    coherent: FieldState
    signal: FieldState
    homodyne: HomodyneConfig

    @property
    def squeezing(self) -> SqueezingSpec:
        return SqueezingSpec(r_phase_v0=self.scenario.squeezing.r_phase_v0,
                             r_amp_v1=self.scenario.squeezing.r_amp_v1)


def pulse_spec(scenario: Scenario) -> PulseSpec:
    """PulseSpec from the [pulse] section; omega0 and photon_number win over wavelength and power."""
    section = scenario.pulse
    omega0 = section.omega0
    if omega0 is None:
        omega0 = 2.0 * math.pi * constants.c / section.wavelength
    photon_number = section.photon_number
    if photon_number is None:
        photon_number = photons_from_power(section.power, section.detection_time, omega0)
    return PulseSpec(
        omega0=omega0,
        envelope=section.envelope,
        duration_fwhm=section.duration_fwhm,
        photon_number=photon_number,
        theta=section.theta,
    )


def prepare(scenario: Scenario) -> ScenarioSetup:
    """Build basis, coherent and squeezed states and the LO config."""
    spec = pulse_spec(scenario)
    grid = make_grid(spec, scenario.grid.guard_factor, scenario.grid.n_points)
    basis = build_basis(spec, grid)

    theta_lo = scenario.lo.theta_lo if scenario.lo.theta_lo is not None else spec.theta
    coherent = coherent_state(basis, spec.photon_number, spec.theta)
    squeezing = SqueezingSpec(r_phase_v0=scenario.squeezing.r_phase_v0, r_amp_v1=scenario.squeezing.r_amp_v1)
    signal = apply_squeezing(coherent, squeezing, theta_lo=theta_lo)

    homodyne = HomodyneConfig(
        lo_mode=local_oscillator(basis, scenario.lo.mode),
        theta_lo=theta_lo,
        n_lo=scenario.lo.n_lo,
        strong_lo=scenario.lo.strong_lo,
        field_scale=scenario.lo.field_scale,
    )
    return ScenarioSetup(scenario=scenario, pulse=spec, basis=basis,
                         coherent=coherent, signal=signal, homodyne=homodyne)


# =============================================================================
# SWEEPS
# =============================================================================

def with_override(scenario: Scenario, param: SweepParameter, value: float) -> Scenario:
    """Copy of the scenario with one swept parameter replaced."""
    data = scenario.model_dump()
    if param == SweepParameter.POWER:
        data["pulse"].update(power=value, photon_number=None)
    elif param == SweepParameter.DURATION_FWHM:
        data["pulse"]["duration_fwhm"] = value
    elif param == SweepParameter.WAVELENGTH:
        data["pulse"].update(wavelength=value, omega0=None)
    elif param == SweepParameter.SQUEEZING_DB:
        r = squeezing_from_db(value)
        data["squeezing"].update(r_phase_v0=r, r_amp_v1=r)
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioValueError("run", "sweep_param", None, f"{param.value}={value!r}: {e.errors()[0]['msg']}")


def sweep_values(scenario: Scenario) -> np.ndarray:
    """Sample points of the configured sweep."""
    run = scenario.run
    default_start, default_stop, default_log = SWEEP_DEFAULTS[run.sweep_param]
    start = run.sweep_start if run.sweep_start is not None else default_start
    stop = run.sweep_stop if run.sweep_stop is not None else default_stop
    log = default_log if run.sweep_log is None else run.sweep_log
    if log and (start <= 0 or stop <= 0):
        raise ScenarioValueError("run", "sweep_log", None, "logarithmic sweeps need positive start and stop")
    if log:
        return np.geomspace(start, stop, run.sweep_points)
    return np.linspace(start, stop, run.sweep_points)


def sweep_point_builder(scenario: Scenario) -> Callable[[float], Tuple[FieldState, HomodyneConfig]]:
    """Maps a swept value to the (signal, LO config) pair of the modified scenario."""
    param = scenario.run.sweep_param

    def build(value: float) -> Tuple[FieldState, HomodyneConfig]:
        setup = prepare(with_override(scenario, param, value))
        return setup.signal, setup.homodyne

    return build
