"""
SIMO (1 x N_R) performance bounds and massive-MIMO asymptotics.

Bounds, from loosest to tightest reference:
    SIMO_LDB       single-user MMSE linear detection on the same N_R
    SIMO_MFB       matched filter with all ISI removed
    SIMO_AWGN_MFB  single-path (non-fading) channel, 2 eta N_R Eb/N0
"""
import logging
from dataclasses import replace
from enum import Enum

import numpy as np

from analysis.sinr import average_ber, semi_analytic_ber
from detectors import MMSEDetector
from link.channel import ChannelRealization
from link.scenario import Scenario
from utils.errors import AnalysisError
from utils.numerics import db_to_linear, qfunc

LOGGER = logging.getLogger(__name__)


class BoundKind(str, Enum):
    SIMO_LDB = "simo_ldb"
    SIMO_MFB = "simo_mfb"
    SIMO_AWGN_MFB = "simo_awgn_mfb"


def _combined_gain(H: ChannelRealization) -> np.ndarray:
    """x_k = sum_i |H_k^(i,1)|^2 for a single-TX-antenna channel."""
    if H.N_T != 1:
        raise AnalysisError(f"SIMO bounds need a channel with exactly one TX antenna, got N_T={H.N_T}")
    return np.sum(np.abs(H.cfr[:, :, 0]) ** 2, axis=1)


def simo_bound_sinr(H: ChannelRealization, kind, alpha: float = None, eta: float = None,
                    ebn0: float = None, N_R: int = None) -> float:
    """
    SINR of one SIMO bound.

    Args:
        H: 1 x N_R realization (may be None for SIMO_AWGN_MFB if N_R is given)
        kind: BoundKind or its name
        alpha: N0 / sigma_s^2, needed by LDB and MFB
        eta: CP efficiency, needed by AWGN_MFB
        ebn0: linear Eb/N0, needed by AWGN_MFB
        N_R: RX antenna count for AWGN_MFB when H is None
    """
    kind = BoundKind(kind)
    if kind is BoundKind.SIMO_AWGN_MFB:
        if eta is None or ebn0 is None:
            raise AnalysisError("SIMO_AWGN_MFB needs eta and Eb/N0")
        if N_R is None:
            if H is None:
                raise AnalysisError("SIMO_AWGN_MFB needs N_R or a channel")
            N_R = H.N_R
        return massive_mimo_asymptote(eta, N_R, ebn0)

    if H is None:
        raise AnalysisError(f"{kind.value} needs a channel realization")
    if alpha is None or not alpha > 0:
        raise AnalysisError(f"{kind.value} needs alpha > 0, got {alpha}")
    x = _combined_gain(H)
    if kind is BoundKind.SIMO_MFB:
        return float(np.sum(x) / (alpha * H.N))
    w = 1.0 / (alpha + x)
    return float(np.sum(x * w) / (alpha * np.sum(w)))


def massive_mimo_asymptote(eta: float, N_R: int, ebn0: float) -> float:
    """SINR_j -> 2 eta N_R Eb/N0 when N_R >> N_T with MF detection."""
    if N_R < 1:
        raise AnalysisError(f"N_R must be >= 1, got {N_R}")
    return 2.0 * eta * N_R * ebn0


def awgn_mfb_ber(eta: float, N_R: int, ebn0_db) -> np.ndarray:
    """BER = Q(sqrt(2 eta N_R Eb/N0)) on a dB grid."""
    return qfunc(np.sqrt(2.0 * eta * N_R * db_to_linear(ebn0_db)))


def mmse_mf_equivalence_gap(H: ChannelRealization, alpha: float, reduce: str = "max") -> float:
    """
    Relative distance between MMSE matrices and the scaled MF beta H_k^H.

    beta = 1 / (alpha + N_R P_Sigma). Per subchannel the gap is
    ||D_k - beta H_k^H||_F / ||D_k||_F; `reduce` is "max" (worst
    subchannel) or "mean".
    """
    if not alpha > 0:
        raise AnalysisError(f"alpha must be positive, got {alpha}")
    D = MMSEDetector().build(H, alpha).matrices
    beta = 1.0 / (alpha + H.N_R * H.P_sigma)
    mf = beta * np.conj(np.transpose(H.cfr, (0, 2, 1)))
    gaps = np.linalg.norm(D - mf, axis=(1, 2)) / np.linalg.norm(D, axis=(1, 2))
    if reduce == "max":
        return float(np.max(gaps))
    if reduce == "mean":
        return float(np.mean(gaps))
    raise AnalysisError(f"unknown reduction {reduce!r}, expected 'max' or 'mean'")


def required_ebn0_db(ebn0_db_grid, ber_curve, target: float):
    """
    Eb/N0 (dB) at which a decreasing BER curve reaches `target`.

    Interpolates log10(BER) linearly between the two bracketing grid
    points. Returns None when the curve does not cross the target
    inside the grid.
    """
    grid = np.asarray(ebn0_db_grid, dtype=np.float64)
    ber = np.asarray(ber_curve, dtype=np.float64)
    if grid.shape != ber.shape or grid.size < 2:
        raise AnalysisError("grid and BER curve must have the same length (>= 2)")
    below = np.flatnonzero(ber <= target)
    if below.size == 0 or below[0] == 0:
        return None
    i = below[0]
    lo, hi = np.log10(ber[i - 1]), np.log10(max(ber[i], np.finfo(float).tiny))
    t = (lo - np.log10(target)) / (lo - hi)
    return float(grid[i - 1] + t * (grid[i] - grid[i - 1]))


def antennas_needed(scenario: Scenario, candidates, ebn0_db: float, target_ber: float,
                    kind="mf", p_max: int = 4, realizations: int = 50):
    """
    Smallest N_R from `candidates` whose averaged semi-analytic BER at
    `ebn0_db` is at most `target_ber`; None if none qualifies.

    For iterative DF the last iteration counts.
    """
    for N_R in sorted(candidates):
        sc = replace(scenario, N_R=N_R)
        if kind in ("mmse", "zf") and sc.N_T > N_R:
            continue
        alpha = sc.budget(ebn0_db).alpha
        ber = average_ber(semi_analytic_ber(sc.channel(r), alpha, kind, p_max)[-1]
                          for r in range(realizations)).mean_ber
        LOGGER.debug("N_R=%d: BER %.3e at %.1f dB", N_R, ber, ebn0_db)
        if ber <= target_ber:
            return N_R
    return None
