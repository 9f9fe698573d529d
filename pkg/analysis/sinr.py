"""
Semi-analytical BER: conditional SINR per channel realization, then
BER_j ~ Q(sqrt(SINR_j)) under a quasi-Gaussian interference model.

Averaging order: per realization the BER is computed per antenna and
averaged over antennas, then averaged over realizations. Averaging the
SINR first is not equivalent.
"""
import logging
from dataclasses import dataclass

import numpy as np

from detectors import DetectorKind, DetectorMatrixSet, GammaSet, MFDetector, build_detector, gamma_of
from link.channel import ChannelRealization
from utils.errors import AnalysisError
from utils.numerics import qfunc

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SinrReport:
    per_antenna_sinr: np.ndarray
    iteration: int = 1
    detector_kind: DetectorKind = DetectorKind.MF


@dataclass(frozen=True, eq=False)
class BerEstimate:
    per_antenna_ber: np.ndarray
    mean_ber: float
    realizations_averaged: int = 1


@dataclass(frozen=True, eq=False)
class SinrTerms:
    """
    Numerator and denominator pieces of the linear-detection SINR.

    signal:      N |gamma^(j)|^2
    beta_own:    sum_k |Gamma_k^(j,j) - gamma^(j)|^2          (ISI)
    beta_cross:  [j, l] = sum_k |Gamma_k^(j,l)|^2, zero diagonal (MUI/MSI)
    noise:       alpha sum_i sum_k |D_k^(j,i)|^2
    """

    signal: np.ndarray
    beta_own: np.ndarray
    beta_cross: np.ndarray
    noise: np.ndarray


def sinr_terms(D: DetectorMatrixSet, gamma_set: GammaSet, alpha: float) -> SinrTerms:
    N = D.N
    gamma = gamma_set.gamma_diag
    own = np.diagonal(gamma_set.Gamma, axis1=1, axis2=2)
    beta_own = np.sum(np.abs(own - gamma[None, :]) ** 2, axis=0)
    beta_cross = np.sum(np.abs(gamma_set.Gamma) ** 2, axis=0)
    np.fill_diagonal(beta_cross, 0.0)
    noise = alpha * np.sum(np.abs(D.matrices) ** 2, axis=(0, 2))
    return SinrTerms(N * np.abs(gamma) ** 2, beta_own, beta_cross, noise)


def _ratio(terms: SinrTerms, own_weight, cross_weight) -> np.ndarray:
    denom = own_weight * terms.beta_own + terms.beta_cross @ cross_weight + terms.noise
    if np.any(~np.isfinite(denom)) or np.any(denom <= 0):
        raise AnalysisError(f"degenerate SINR denominator: {denom}")
    return terms.signal / denom


def sinr_linear(H: ChannelRealization, D: DetectorMatrixSet, alpha: float) -> SinrReport:
    """Per-antenna SINR of linear frequency-domain detection on realization H."""
    if not alpha > 0:
        raise AnalysisError(f"alpha must be positive, got {alpha}")
    terms = sinr_terms(D, gamma_of(D, H), alpha)
    ones = np.ones(H.N_T)
    return SinrReport(_ratio(terms, 1.0, ones), 1, D.kind)


def sinr_df_step(terms: SinrTerms, previous_sinr) -> np.ndarray:
    """
    One step of the DF recursion.

    The ISI of antenna j is scaled by 4Q(sqrt(SINR_j(p-1))) and the
    interference from antenna l by 4Q(sqrt(SINR_l(p-1))): the mean
    squared error of a hard 4-QAM decision is 4 sigma_s^2 BER.
    """
    residual = 4.0 * qfunc(np.sqrt(np.asarray(previous_sinr, dtype=np.float64)))
    return _ratio(terms, residual, residual)


def sinr_iterative(H: ChannelRealization, alpha: float, p_max: int) -> list:
    """
    SINR_j(p), p = 1..p_max, for iterative DF with an MF inner detector.

    Assumes perfect channel estimation. Runs exactly p_max iterations.
    """
    if p_max < 1:
        raise AnalysisError(f"p_max must be >= 1, got {p_max}")
    if not alpha > 0:
        raise AnalysisError(f"alpha must be positive, got {alpha}")
    D = MFDetector().build(H, alpha)
    terms = sinr_terms(D, gamma_of(D, H), alpha)
    reports = [SinrReport(_ratio(terms, 1.0, np.ones(H.N_T)), 1, DetectorKind.IDF)]
    for p in range(2, p_max + 1):
        reports.append(SinrReport(sinr_df_step(terms, reports[-1].per_antenna_sinr), p, DetectorKind.IDF))
    return reports


def mmse_sinr_closed_form(gamma_set: GammaSet) -> SinrReport:
    """SINR_j = gamma^(j) / (1 - gamma^(j)), valid for MMSE with perfect CSI."""
    gamma = np.real(gamma_set.gamma_diag)
    return SinrReport(gamma / (1.0 - gamma), 1, DetectorKind.MMSE)


def ber_from_sinr(report: SinrReport) -> BerEstimate:
    sinr = np.asarray(report.per_antenna_sinr, dtype=np.float64)
    if np.any(sinr < 0) or np.any(np.isnan(sinr)):
        raise AnalysisError(f"SINR values must be >= 0, got {sinr}")
    ber = np.clip(qfunc(np.sqrt(sinr)), 0.0, 0.5)
    return BerEstimate(np.atleast_1d(ber), float(np.mean(ber)), 1)


def average_ber(per_realization) -> BerEstimate:
    """Arithmetic mean over realizations of the per-antenna and overall BER."""
    estimates = list(per_realization)
    if not estimates:
        raise AnalysisError("cannot average an empty set of BER estimates")
    per_antenna = np.mean([e.per_antenna_ber for e in estimates], axis=0)
    return BerEstimate(
        per_antenna,
        float(np.mean([e.mean_ber for e in estimates])),
        sum(e.realizations_averaged for e in estimates),
    )


def semi_analytic_ber(H: ChannelRealization, alpha: float, kind, p_max: int = 4) -> list:
    """
    Conditional BER estimates on one realization.

    Returns one BerEstimate per iteration: a single entry for linear
    detectors, p_max entries for iterative DF.
    """
    kind = DetectorKind(kind)
    if kind is DetectorKind.IDF:
        return [ber_from_sinr(r) for r in sinr_iterative(H, alpha, p_max)]
    D = build_detector(H, kind, alpha)
    return [ber_from_sinr(sinr_linear(H, D, alpha))]
