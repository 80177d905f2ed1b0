"""
Command-line front end.

Commands: sql, modes, fisher, simulate, budget, sweep. Results go to stdout
(or --out) as JSON or CSV; failures go to stderr as one JSON object.
"""

import argparse
import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from .config import OutputFormat, config, get_log_dir
from .core.estimation import MonteCarloHarness, fisher_info, lo_optimality_scan, scan_to_frame
from .core.homodyne_engine import (
    HomodyneEngine,
    sql_combined,
    sql_phase,
    sql_squeezed,
    sql_tof,
    sweep_min_delay,
    timing_mode_angle,
)
from .core.mode_lab import envelope_of, inner_product, write_mode_dumps
from .core.noise_budget import (
    BUDGET_COLUMNS,
    CURVE_COLUMNS,
    SOURCE_COLUMNS,
    budget_to_frame,
    build_budget,
    dominant_row,
    load_noise_sources,
    quantum_floor_asd,
    read_asd_curve,
    reference_sources,
    with_curve_source,
)
from .core.quantum_state import squeezing_to_db
from .core.scenario import (
    ScenarioSetup,
    describe_schema,
    load_scenario,
    prepare,
    sweep_point_builder,
    sweep_values,
)
from .exceptions import ScenarioError, TimingAnalyzerError
from .models.schemas import HomodyneConfig, Scenario


COMMANDS = ("sql", "modes", "fisher", "simulate", "budget", "sweep")

DEFAULT_FORMATS = {
    "sql": OutputFormat.JSON,
    "modes": OutputFormat.JSON,
    "fisher": OutputFormat.CSV,
    "simulate": OutputFormat.JSON,
    "budget": OutputFormat.CSV,
    "sweep": OutputFormat.CSV,
}

CSV_COLUMNS = {
    "modes (v0.csv, v1.csv, w1.csv)": "t_seconds,re_amplitude,im_amplitude",
    "fisher": "lo,chi_rad,theta_lo_rad,fisher_info_per_s2,crb_seconds",
    "budget input (--noise)": ",".join(SOURCE_COLUMNS),
    "budget output": ",".join(BUDGET_COLUMNS),
    "budget ASD curve ([run] asd_curve)": ",".join(CURVE_COLUMNS),
    "sweep": "param,value,delta_u_min_seconds",
    "simulate --dump": "raw little-endian float64 outcomes, no header",
}

COMBINED_LIMIT_NOTE = (
    "The quoted reference figure of 2e-23 s for 10 mW, 1 s, 810 nm and 10 fs matches sql_tof, "
    "the envelope-only time-of-flight limit. The timing-mode limit sql_combined is lower by "
    "sqrt(1 + alpha^2). Both values are reported; the discrepancy is left unresolved."
)


# =============================================================================
# LOGGING
# =============================================================================

def setup_logging(level: str = config.LOG_LEVEL) -> None:
    """Configure loguru sinks: stderr always, a rotating file when QTIMING_LOG_DIR is set."""
    logger.remove()
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>",
        level=level,
    )
    log_dir = get_log_dir()
    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        logger.add(
            str(Path(log_dir) / "qtiming_{time}.log"),
            rotation="10 MB",
            retention="30 days",
            level="DEBUG",
        )


# =============================================================================
# FORMATTING
# =============================================================================

def to_json(value: Any) -> str:
    """JSON text with every float in scientific notation, 17 significant digits."""
    if isinstance(value, dict):
        items = ", ".join(f"{json.dumps(str(key))}: {to_json(item)}" for key, item in value.items())
        return "{" + items + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(to_json(item) for item in value) + "]"
    if value is None or isinstance(value, (bool, np.bool_)):
        return json.dumps(None if value is None else bool(value))
    if isinstance(value, Enum):
        return json.dumps(value.value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return "null"
        return config.output.FLOAT_FORMAT % value
    return json.dumps(str(value))


def frame_records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return [{key: _plain(item) for key, item in row.items()} for row in frame.to_dict(orient="records")]


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    return value


def emit(payload: Union[Dict[str, Any], pd.DataFrame], fmt: OutputFormat, out: Optional[str]) -> None:
    """Write a record or table to --out, or stdout."""
    if fmt == OutputFormat.CSV:
        frame = payload if isinstance(payload, pd.DataFrame) else pd.DataFrame([_flatten(payload)])
        text = frame.to_csv(index=False, float_format=config.output.FLOAT_FORMAT)
    else:
        record = {"rows": frame_records(payload)} if isinstance(payload, pd.DataFrame) else payload
        text = to_json(record) + "\n"

    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"✓ Wrote {fmt.value.upper()} to {out}")
    else:
        sys.stdout.write(text)


def _flatten(record: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


def emit_error(error: Exception) -> None:
    """One JSON object on stderr describing the failure."""
    if isinstance(error, TimingAnalyzerError):
        payload = {"error": type(error).__name__, "message": error.message, "details": error.details}
    elif isinstance(error, ValidationError):
        payload = {
            "error": "ValidationError",
            "message": str(error),
            "details": {"errors": [
                {"loc": ".".join(str(part) for part in item["loc"]), "msg": item["msg"]}
                for item in error.errors()
            ]},
        }
    else:
        payload = {"error": type(error).__name__, "message": str(error), "details": {}}
    sys.stderr.write(to_json(payload) + "\n")


# =============================================================================
# COMMANDS
# =============================================================================

def _optimal_engine(setup: ScenarioSetup) -> HomodyneEngine:
    return HomodyneEngine(setup.signal, setup.homodyne).at_optimal_phase()


def cmd_sql(setup: ScenarioSetup) -> Dict[str, Any]:
    """Quantum limits of the scenario's pulse as one record."""
    basis = setup.basis
    n = setup.pulse.photon_number
    squeezing = setup.squeezing
    delta_u_min = HomodyneEngine(setup.signal, setup.homodyne).min_resolvable_delay()

    return {
        "photon_number": n,
        "omega0_rad_per_s": basis.omega0,
        "delta_omega_rad_per_s": basis.delta_omega,
        "alpha": basis.alpha,
        "u0_seconds": basis.u0,
        "carrier_cycles_fwhm": setup.pulse.carrier_cycles,
        "sql_tof_seconds": sql_tof(n, basis.delta_omega),
        "sql_phase_seconds": sql_phase(n, basis.omega0),
        "sql_combined_seconds": sql_combined(n, basis.omega0, basis.delta_omega),
        "sql_squeezed_seconds": sql_squeezed(n, basis.omega0, basis.delta_omega,
                                             squeezing.r_phase_v0, squeezing.r_amp_v1),
        "r_phase_v0": squeezing.r_phase_v0,
        "r_amp_v1": squeezing.r_amp_v1,
        "squeezing_db_v0": squeezing_to_db(squeezing.r_phase_v0),
        "lo_mode": setup.scenario.lo.mode,
        "delta_u_min_seconds": delta_u_min,
        "quantum_floor_s_per_rtHz": quantum_floor_asd(delta_u_min, setup.scenario.pulse.detection_time),
        "quoted_reference_seconds": config.reference.QUOTED_SQL_S,
        "notes": COMBINED_LIMIT_NOTE,
    }


def cmd_modes(setup: ScenarioSetup, out_dir: Optional[str]) -> Dict[str, Any]:
    """Dump v0, v1, w1 as CSV and summarize the basis checks."""
    basis = setup.basis
    directory = Path(out_dir or "modes")
    paths = write_mode_dumps([basis.v0, basis.v1, basis.w1], directory)

    alpha = basis.alpha
    reconstructed = (1j * alpha * basis.v0.amplitude + basis.v1.amplitude) / math.sqrt(alpha ** 2 + 1.0)
    w1_residual = float(np.max(np.abs(basis.w1.amplitude - reconstructed))) / basis.w1.peak

    envelope = envelope_of(basis.v1, basis.omega0).amplitude
    half = basis.grid.n_points // 2
    j = np.arange(1, half)
    parity_residual = float(np.max(np.abs(envelope[half + j] + envelope[half - j]))) / basis.v1.peak

    return {
        "directory": str(directory),
        "files": [str(path) for path in paths],
        "n_points": basis.grid.n_points,
        "t_step_seconds": basis.grid.t_step,
        "norm_v0": basis.v0.norm,
        "norm_v1": basis.v1.norm,
        "norm_w1": basis.w1.norm,
        "overlap_v0_v1": abs(inner_product(basis.v0, basis.v1)),
        "w1_reconstruction_residual": w1_residual,
        "v1_parity_residual": parity_residual,
        "alpha": alpha,
        "u0_seconds": basis.u0,
        "delta_omega_rad_per_s": basis.delta_omega,
    }


def cmd_fisher(setup: ScenarioSetup) -> pd.DataFrame:
    """LO optimality scan plus the timing-mode row."""
    lo = setup.scenario.lo
    results = lo_optimality_scan(setup.signal, setup.scenario.run.n_angles,
                                 n_lo=lo.n_lo, field_scale=lo.field_scale)

    w1_cfg = HomodyneConfig(lo_mode=setup.basis.w1, theta_lo=setup.signal.theta,
                            n_lo=lo.n_lo, field_scale=lo.field_scale)
    w1_result = fisher_info(setup.signal, w1_cfg, lo_description={"chi": timing_mode_angle(setup.basis)})

    labels = ["mix"] * len(results) + ["w1"]
    return scan_to_frame(results + [w1_result], labels)


def cmd_simulate(setup: ScenarioSetup, dump: Optional[str]) -> Dict[str, Any]:
    """Monte Carlo estimation of delta_u."""
    run = setup.scenario.run
    harness = MonteCarloHarness(
        setup.signal,
        setup.homodyne,
        seed=run.seed,
        split_budget=run.split_budget,
        method=run.overlap_method,
    )
    outcomes = harness.simulate_shots(run.delta_u, run.n_trials)
    dump = dump or run.dump_outcomes
    if dump:
        harness.write_outcomes(outcomes, dump)
    report = harness.estimate_delay(outcomes, true_delta_u=run.delta_u)
    return report.model_dump()


def cmd_budget(setup: ScenarioSetup, noise: Optional[str]) -> Dict[str, Any]:
    """Timing-noise budget against the quantum floor, with the homodyne-variance view."""
    run = setup.scenario.run
    noise = noise or run.noise_csv
    sources = load_noise_sources(noise) if noise else reference_sources()
    if run.asd_curve:
        sources = with_curve_source(sources, read_asd_curve(run.asd_curve, run.asd_curve_kind,
                                                            run.asd_curve_frequency_hz))

    engine = _optimal_engine(setup)
    floor = quantum_floor_asd(engine.min_resolvable_delay(), setup.scenario.pulse.detection_time)
    rows = build_budget(sources, floor, setup.basis.omega0)

    return {
        "frame": budget_to_frame(rows, include_rss=run.rss_total),
        "dominant": dominant_row(rows).source.kind.value,
        "quantum_floor_s_per_rtHz": floor,
        "homodyne_variance": engine.variance_breakdown(),
    }


def cmd_sweep(scenario: Scenario) -> pd.DataFrame:
    """Minimum resolvable delay along the configured sweep."""
    param = scenario.run.sweep_param
    return sweep_min_delay(param.value, sweep_values(scenario), sweep_point_builder(scenario))


# =============================================================================
# ARGUMENTS
# =============================================================================

class _JsonArgumentParser(argparse.ArgumentParser):
    """Usage errors are reported as JSON like every other failure."""

    def error(self, message):
        sys.stderr.write(to_json({"error": "UsageError", "message": message, "details": {}}) + "\n")
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _JsonArgumentParser(
        prog=config.APP_NAME,
        description="Quantum-limited timing of femtosecond pulses with balanced homodyne detection",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Analysis to run")
    parser.add_argument("--config", help="Scenario file ([pulse], [squeezing], [lo], [grid], [run])")
    parser.add_argument("--out", help="Output file (directory for modes)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], help="csv or json")
    parser.add_argument("--seed", type=int, help="64-bit seed, overrides [run] seed")
    parser.add_argument("--noise", help="Noise-source CSV for budget")
    parser.add_argument("--dump", help="Binary outcome dump for simulate")
    parser.add_argument("--schema", action="store_true", help="Print scenario keys and CSV columns")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="Console log level")
    return parser


def schema_text() -> str:
    lines = ["# Scenario keys (defaults reproduce the reference operating point)", "", describe_schema(),
             "# CSV columns"]
    lines += [f"  {name}: {columns}" for name, columns in CSV_COLUMNS.items()]
    return "\n".join(lines) + "\n"


def _with_seed(scenario: Scenario, seed: Optional[int]) -> Scenario:
    if seed is None:
        return scenario
    data = scenario.model_dump()
    data["run"]["seed"] = seed
    return Scenario.model_validate(data)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch, and return the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level.upper())

    if args.schema:
        sys.stdout.write(schema_text())
        return 0
    if args.command is None:
        parser.error("a command is required unless --schema is given")

    fmt = OutputFormat(args.format) if args.format else DEFAULT_FORMATS[args.command]
    try:
        scenario = _with_seed(load_scenario(args.config), args.seed)
        logger.info(f"Running '{args.command}'")

        if args.command == "sweep":
            emit(cmd_sweep(scenario), fmt, args.out)
            return 0

        setup = prepare(scenario)
        if args.command == "sql":
            emit(cmd_sql(setup), fmt, args.out)
        elif args.command == "modes":
            emit(cmd_modes(setup, args.out), OutputFormat.JSON, None)
        elif args.command == "fisher":
            emit(cmd_fisher(setup), fmt, args.out)
        elif args.command == "simulate":
            emit(cmd_simulate(setup, args.dump), fmt, args.out)
        elif args.command == "budget":
            result = cmd_budget(setup, args.noise)
            if fmt == OutputFormat.CSV:
                emit(result["frame"], fmt, args.out)
            else:
                result["rows"] = frame_records(result.pop("frame"))
                emit(result, fmt, args.out)
        return 0

    except (ScenarioError, ValidationError) as e:
        emit_error(e)
        return 2
    except TimingAnalyzerError as e:
        emit_error(e)
        return 1
    except OSError as e:
        emit_error(e)
        return 1
