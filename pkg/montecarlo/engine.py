"""
Error-counting Monte Carlo over channel realizations.

Realization r uses the channel stream of its Scenario and a bit/noise
stream (seed, "noise", N_T, N_R, r, ebn0_index); blocks inside a
realization are drawn in order from that stream. Realizations are merged
in index order, and early stopping looks only at the ordered prefix, so
the result is the same for any worker count.
"""
import logging
import math
import multiprocessing
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from analysis.sinr import BerEstimate
from detectors import DetectorKind, make_detector
from link.channel import ChannelRealization, link_budget
from link.modem import random_block, transmit_freq
from link.scenario import Scenario
from montecarlo.counters import ErrorCounter
from utils.errors import LabError, SimulationError
from utils.numerics import SeededRng

LOGGER = logging.getLogger(__name__)


class TrialPlan(BaseModel):
    """How many trials one BER point may spend."""

    realizations: int = Field(500, ge=1)
    blocks_per_realization: int = Field(1, ge=1)
    stop_at_errors: Optional[int] = Field(400, ge=1)


@dataclass(frozen=True, eq=False)
class McResult:
    """
    Counted errors of one BER point.

    bit_errors is (iterations, N_T); bits_simulated counts every
    antenna's bits once (the same for every iteration).
    """

    bit_errors: np.ndarray
    bits_simulated: int
    realizations_used: int
    reached_target: bool = False

    @property
    def iterations(self) -> int:
        return self.bit_errors.shape[0]

    @property
    def N_T(self) -> int:
        return self.bit_errors.shape[1]

    def _row(self, iteration) -> np.ndarray:
        p = self.iterations if iteration is None else iteration
        if not 1 <= p <= self.iterations:
            raise SimulationError(f"iteration {p} outside 1..{self.iterations}")
        return self.bit_errors[p - 1]

    def errors(self, iteration: int = None) -> int:
        return int(self._row(iteration).sum())

    def ber(self, iteration: int = None) -> float:
        if self.bits_simulated == 0:
            return float("nan")
        return self.errors(iteration) / self.bits_simulated

    def per_antenna_ber(self, iteration: int = None) -> np.ndarray:
        return self._row(iteration) / (self.bits_simulated / self.N_T)

    def std_error(self, iteration: int = None) -> float:
        """Binomial standard error sqrt(p (1 - p) / n)."""
        p = self.ber(iteration)
        return math.sqrt(p * (1.0 - p) / self.bits_simulated)

    @property
    def ber_point(self) -> float:
        return self.ber()


@dataclass(frozen=True)
class Comparison:
    ber_semi: float
    ber_mc: float
    abs_gap: float
    rel_gap: float
    gap_std_errors: float
    agree: bool


def noise_rng(scenario: Scenario, realization: int, ebn0_index: int) -> SeededRng:
    return SeededRng(scenario.seed).child("noise", scenario.N_T, scenario.N_R, realization, ebn0_index)


def _simulate_realization(realization: int, scenario: Scenario, kind: DetectorKind, ebn0_db: float,
                          ebn0_index: int, p_max: int, blocks: int,
                          channel: ChannelRealization = None) -> ErrorCounter:
    rng = noise_rng(scenario, realization, ebn0_index)
    try:
        H = channel if channel is not None else scenario.channel(realization)
        budget = link_budget(scenario.sigma_s2, scenario.N, scenario.L_s, H.pdp, ebn0_db)
        detector = make_detector(kind, p_max)
        counter = ErrorCounter(p_max if kind is DetectorKind.IDF else 1, H.N_T)
        for _ in range(blocks):
            bits, block = random_block(H.N_T, H.N, scenario.sigma_s2, rng)
            Y = transmit_freq(block, H, budget.N0, rng)
            result = detector.detect(Y, H, budget.alpha, scenario.sigma_s2)
            counter.add(bits, [step.bits for step in result.history])
    except (LabError, np.linalg.LinAlgError) as e:
        raise SimulationError(
            f"{type(e).__name__}: {e}",
            realization=realization,
            stream_id=rng.stream_id,
            coordinates={"detector": kind.value, "nt": scenario.N_T, "nr": scenario.N_R, "ebn0_db": ebn0_db},
        ) from e
    return counter


def run_mc(plan: TrialPlan, scenario: Scenario, kind, ebn0_db: float, ebn0_index: int = 0,
           p_max: int = 4, workers: int = 1, channel: ChannelRealization = None) -> McResult:
    """
    Count bit errors at one (detector, N_T, N_R, Eb/N0) point.

    Each trial samples a channel, draws bits, maps them, passes the
    frequency-domain chain, detects with perfect CSI and counts errors
    per antenna (and per iteration for iterative DF).

    Args:
        plan: realization / block budget and early-stop target
        scenario: geometry, seed and channel streams
        kind: detector kind or name
        ebn0_db: operating point
        ebn0_index: position of the point in its grid, part of the noise stream key
        p_max: iterations for iterative DF
        workers: processes to fan realizations out to
        channel: fixed realization used for every trial instead of random draws

    Returns:
        McResult with errors counted over the realizations actually used
    """
    kind = DetectorKind(kind)
    if kind is DetectorKind.IDF and p_max < 1:
        raise SimulationError(f"p_max must be >= 1, got {p_max}")
    job = partial(
        _simulate_realization, scenario=scenario, kind=kind, ebn0_db=ebn0_db, ebn0_index=ebn0_index,
        p_max=p_max, blocks=plan.blocks_per_realization, channel=channel,
    )
    total = ErrorCounter(p_max if kind is DetectorKind.IDF else 1, scenario.N_T if channel is None else channel.N_T)
    used = 0
    reached = False

    def consume(counters):
        nonlocal used, reached
        for counter in counters:
            total.merge(counter)
            used += 1
            if plan.stop_at_errors is not None and total.total_errors() >= plan.stop_at_errors:
                reached = True
                return

    if workers > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            consume(pool.imap(job, range(plan.realizations)))
    else:
        consume(job(r) for r in range(plan.realizations))

    if plan.stop_at_errors is not None and not reached:
        LOGGER.warning(
            "%s N_T=%d N_R=%d at %.2f dB: only %d errors after %d realizations (target %d)",
            kind.value, total.N_T, scenario.N_R, ebn0_db, total.total_errors(), used, plan.stop_at_errors,
        )
    LOGGER.debug("%s at %.2f dB: %d errors / %d bits", kind.value, ebn0_db, total.total_errors(),
                 total.bits_simulated)
    return McResult(total.bit_errors.copy(), total.bits_simulated, used, reached)


def compare_points(ber_semi: float, ber_mc: float, std_error: float, threshold: float = 3.0) -> Comparison:
    """Gap between a semi-analytic and a counted BER, also in MC standard errors."""
    gap = abs(ber_semi - ber_mc)
    if ber_mc > 0:
        rel = gap / ber_mc
    else:
        rel = 0.0 if gap == 0 else math.inf
    if std_error > 0:
        in_std = gap / std_error
    else:
        in_std = 0.0 if gap == 0 else math.inf
    return Comparison(ber_semi, ber_mc, gap, rel, in_std, in_std <= threshold)


def compare_semi_vs_mc(semi: BerEstimate, mc: McResult, iteration: int = None,
                       threshold: float = 3.0) -> Comparison:
    if np.size(semi.per_antenna_ber) != mc.N_T:
        raise SimulationError(
            f"semi-analytic estimate covers {np.size(semi.per_antenna_ber)} antennas, Monte Carlo {mc.N_T}"
        )
    return compare_points(semi.mean_ber, mc.ber(iteration), mc.std_error(iteration), threshold)
