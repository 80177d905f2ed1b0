"""
Estimation Module
Fisher information and Cramer-Rao bound of the Gaussian homodyne outcome,
LO-mode optimality scans and a seeded Monte Carlo estimation harness.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger
from numpy.random import PCG64, Generator, SeedSequence

from ..config import OverlapMethod, config, get_thread_count
from ..exceptions import EstimationError, EstimatorSingularError
from ..models.schemas import FieldState, FisherResult, HomodyneConfig, MonteCarloReport
from .homodyne_engine import HomodyneEngine, mixed_mode
from .quantum_state import with_photon_number


# =============================================================================
# FISHER INFORMATION
# =============================================================================

def fisher_info(
    signal: FieldState,
    cfg: HomodyneConfig,
    delta_u: float = 0.0,
    lo_description: Optional[Dict[str, float]] = None,
) -> FisherResult:
    """
    Fisher information of a Gaussian outcome with mean linear in delta_u
    and delta_u-independent variance: F = (d mu / d delta_u)^2 / sigma^2.

    The linearized model makes F the same at every delta_u.
    """
    engine = HomodyneEngine(signal, cfg)
    slope = engine.signal_slope()
    variance = engine.variance_signal()

    description = {"theta_lo": cfg.theta_lo}
    description.update(lo_description or {})
    return FisherResult.from_fisher(slope ** 2 / variance, lo_description=description)


def lo_optimality_scan(
    signal: FieldState,
    n_angles: int = 256,
    n_lo: float = config.monte_carlo.N_LO,
    field_scale: float = 1.0,
) -> List[FisherResult]:
    """
    Scan LO modes cos(chi) i v0 + sin(chi) v1 over chi in [0, pi/2] at theta_LO = theta.

    chi = 0 is the pure phase measurement, chi = pi/2 the pure time-of-flight
    measurement; the timing mode sits at tan(chi) = 1/alpha.

    Args:
        signal: Signal state
        n_angles: Number of scanned angles (>= 32)
        n_lo: LO photon number
        field_scale: |E|^2 detector-unit constant

    Returns:
        One FisherResult per angle, lo_description = {chi, theta_lo}
    """
    if n_angles < 32:
        raise EstimationError(f"n_angles must be >= 32, got {n_angles}", {"n_angles": n_angles})

    logger.info(f"Scanning {n_angles} LO mixing angles...")
    results = []
    for chi in np.linspace(0.0, 0.5 * math.pi, n_angles):
        cfg = HomodyneConfig(
            lo_mode=mixed_mode(signal.basis, float(chi)),
            theta_lo=signal.theta,
            n_lo=n_lo,
            field_scale=field_scale,
        )
        results.append(fisher_info(signal, cfg, lo_description={"chi": float(chi)}))

    best = max(range(len(results)), key=lambda i: results[i].fisher_info)
    logger.info(f"✓ Scan finished: best chi={results[best].lo_description['chi']:.6f} rad, "
                f"CRB={results[best].crb:.6e} s")
    return results


def scan_to_frame(results: List[FisherResult], labels: Optional[List[str]] = None) -> pd.DataFrame:
    """Scan rows as lo, chi_rad, theta_lo_rad, fisher_info_per_s2, crb_seconds."""
    labels = labels or ["mix"] * len(results)
    rows = []
    for label, result in zip(labels, results):
        chi = result.lo_description.get("chi")
        rows.append({
            "lo": label,
            "chi_rad": chi if chi is not None else math.nan,
            "theta_lo_rad": result.lo_description.get("theta_lo", math.nan),
            "fisher_info_per_s2": result.fisher_info,
            "crb_seconds": result.crb,
        })
    return pd.DataFrame(rows, columns=["lo", "chi_rad", "theta_lo_rad", "fisher_info_per_s2", "crb_seconds"])


# =============================================================================
# MONTE CARLO HARNESS
# =============================================================================

def chunk_generator(seed: int, chunk_index: int) -> Generator:
    """Independent stream for one partition, derived from (seed, partition index)."""
    return Generator(PCG64(SeedSequence(seed, spawn_key=(chunk_index,))))


class MonteCarloHarness:
    """
    Shot-by-shot simulation of homodyne records and linear inversion for delta_u.

    Trials are split into fixed-size partitions, each drawing from its own
    substream, so outcomes do not depend on the number of workers.
    """

    def __init__(
        self,
        signal: FieldState,
        cfg: HomodyneConfig,
        seed: int = config.monte_carlo.SEED,
        n_workers: Optional[int] = None,
        split_budget: bool = False,
        chunk_size: int = config.monte_carlo.CHUNK_SIZE,
        method: OverlapMethod = OverlapMethod.ANALYTIC,
    ):
        """
        Initialize the harness.

        Args:
            signal: Signal state (N is the photon number of the whole run)
            cfg: Local oscillator configuration (strong LO)
            seed: 64-bit seed
            n_workers: Thread cap, QTIMING_THREADS when None
            split_budget: Divide N equally across trials
            chunk_size: Trials per partition
            method: How the mean signal is evaluated
        """
        if not 0 <= seed < 2 ** 64:
            raise EstimationError(f"seed must be a 64-bit unsigned integer, got {seed}", {"seed": seed})
        if chunk_size < 1:
            raise EstimationError("chunk_size must be >= 1", {"chunk_size": chunk_size})

        self.signal = signal
        self.cfg = cfg
        self.seed = seed
        self.n_workers = n_workers or get_thread_count()
        self.split_budget = split_budget
        self.chunk_size = chunk_size
        self.method = method

    def _trial_engine(self, n_trials: int) -> HomodyneEngine:
        state = self.signal
        if self.split_budget:
            state = with_photon_number(self.signal, self.signal.photon_number / n_trials)
        return HomodyneEngine(state, self.cfg)

    def _draw(self, chunk_index: int, size: int) -> np.ndarray:
        return chunk_generator(self.seed, chunk_index).standard_normal(size)

    def simulate_shots(self, delta_u: float, n_trials: int) -> np.ndarray:
        """
        Draw n_trials i.i.d. homodyne outcomes with mean mean_signal(delta_u)
        and variance variance_signal.
        """
        if n_trials < 1:
            raise EstimationError(f"n_trials must be >= 1, got {n_trials}", {"n_trials": n_trials})

        engine = self._trial_engine(n_trials)
        mean = engine.mean_signal(delta_u, self.method)
        sigma = math.sqrt(engine.variance_signal())

        sizes = [min(self.chunk_size, n_trials - start) for start in range(0, n_trials, self.chunk_size)]
        workers = max(1, min(self.n_workers, len(sizes)))
        logger.debug(f"Simulating {n_trials} shots in {len(sizes)} partitions on {workers} workers")

        if workers == 1:
            draws = [self._draw(k, size) for k, size in enumerate(sizes)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                draws = list(pool.map(self._draw, range(len(sizes)), sizes))

        return mean + sigma * np.concatenate(draws)

    def estimate_delay(self, outcomes: np.ndarray, true_delta_u: float = 0.0) -> MonteCarloReport:
        """
        Invert the linear mean, delta_u_hat = (D - <D>(0)) / slope, shot by shot.

        Raises:
            EstimatorSingularError: if |cos(theta - theta_LO)| is below 1e-6
        """
        outcomes = np.asarray(outcomes, dtype=np.float64)
        n_trials = outcomes.shape[0]
        if n_trials < 2:
            raise EstimationError("At least two outcomes are needed", {"n_trials": n_trials})

        engine = self._trial_engine(n_trials)
        cos_value = abs(math.cos(engine.phase_offset))
        if cos_value < config.tolerances.MIN_ESTIMATOR_COS:
            raise EstimatorSingularError(cos_value, config.tolerances.MIN_ESTIMATOR_COS)

        offset = engine.mean_signal(0.0, self.method)
        estimates = (outcomes - offset) / engine.signal_slope()

        report = MonteCarloReport(
            n_trials=n_trials,
            true_delta_u=true_delta_u,
            estimator_mean=float(np.mean(estimates)),
            estimator_std=float(np.std(estimates, ddof=1)),
            analytic_bound=engine.min_resolvable_delay(),
            seed=self.seed,
            generator=config.monte_carlo.GENERATOR,
            photons_per_trial=engine.signal.photon_number,
        )
        logger.info(f"✓ Monte Carlo: {n_trials} trials, std/bound = {report.std_to_bound:.4f}")
        return report

    def run(self, delta_u: float = 0.0, n_trials: int = config.monte_carlo.N_TRIALS) -> MonteCarloReport:
        """Simulate and estimate in one call."""
        outcomes = self.simulate_shots(delta_u, n_trials)
        return self.estimate_delay(outcomes, true_delta_u=delta_u)

    @staticmethod
    def write_outcomes(outcomes: np.ndarray, path: Union[str, Path]) -> Path:
        """Raw outcome stream as little-endian float64."""
        path = Path(path)
        np.asarray(outcomes).astype("<f8").tofile(path)
        logger.debug(f"Wrote {len(outcomes)} outcomes to {path}")
        return path
