"""
Shared types and frequency-domain operations for all detectors.

Layout: D.matrices (N, N_T, N_R), Gamma (N, N_T, N_T), per-subchannel
detector outputs (N, N_T), time-domain soft outputs (N_T, N).
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from link.channel import ChannelRealization
from link.modem import ReceivedBlock, demap_4qam
from utils.errors import DetectorError
from utils.numerics import idft


class DetectorKind(str, Enum):
    MF = "mf"
    MMSE = "mmse"
    ZF = "zf"
    IDF = "idf"


@dataclass(frozen=True, eq=False)
class DetectorMatrixSet:
    """Per-subchannel detection matrices D_k = A_k^-1 Hhat_k^H."""

    matrices: np.ndarray
    kind: DetectorKind
    alpha: float = None

    @property
    def N(self) -> int:
        return self.matrices.shape[0]

    @property
    def N_T(self) -> int:
        return self.matrices.shape[1]

    @property
    def N_R(self) -> int:
        return self.matrices.shape[2]


@dataclass(frozen=True, eq=False)
class GammaSet:
    """Gamma_k = D_k H_k and its subchannel-averaged diagonal gamma^(j)."""

    Gamma: np.ndarray
    gamma_diag: np.ndarray

    @property
    def N_T(self) -> int:
        return self.gamma_diag.size


@dataclass(frozen=True, eq=False)
class IterationOutput:
    iteration: int
    soft: np.ndarray
    bits: np.ndarray


@dataclass(eq=False)
class DetectionResult:
    """
    Time-domain soft outputs y~^(j) (N_T, N) and hard bits (N_T, 2N).

    `history` holds one IterationOutput per iteration (a single entry for
    linear detection); `soft` and `bits` are those of the last one.
    """

    soft: np.ndarray
    bits: np.ndarray
    freq_outputs: np.ndarray
    kind: DetectorKind
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.bits.shape != self.soft.shape[:-1] + (2 * self.soft.shape[-1],):
            raise DetectorError(f"soft outputs {self.soft.shape} and decisions {self.bits.shape} disagree")

    @property
    def iterations(self) -> int:
        return len(self.history)


@dataclass(frozen=True, eq=False)
class OutputTerms:
    """The four additive parts of each Y~_k^(j): signal, ISI, MUI/MSI, noise."""

    signal: np.ndarray
    isi: np.ndarray
    mui: np.ndarray
    noise: np.ndarray

    def total(self) -> np.ndarray:
        return self.signal + self.isi + self.mui + self.noise


def gamma_of(D: DetectorMatrixSet, H: ChannelRealization) -> GammaSet:
    """Gamma_k = D_k H_k; gamma^(j) = (1/N) sum_k Gamma_k^(j,j)."""
    if D.N != H.N or D.N_R != H.N_R or D.N_T != H.N_T:
        raise DetectorError(
            f"detector (N={D.N}, N_T={D.N_T}, N_R={D.N_R}) does not match channel {H.dims}"
        )
    Gamma = D.matrices @ H.cfr
    gamma = np.diagonal(Gamma, axis1=1, axis2=2).mean(axis=0)
    return GammaSet(Gamma, gamma)


def _check_observation(Y: ReceivedBlock, D: DetectorMatrixSet):
    if Y.N != D.N or Y.N_R != D.N_R:
        raise DetectorError(f"observation (N={Y.N}, N_R={Y.N_R}) does not match detector (N={D.N}, N_R={D.N_R})")


def apply_detector(Y: ReceivedBlock, D: DetectorMatrixSet) -> np.ndarray:
    """Y~_k = D_k Y_k for every k, shape (N, N_T)."""
    _check_observation(Y, D)
    return np.einsum("kji,ki->kj", D.matrices, Y.freq_obs)


def to_time_domain(freq_outputs: np.ndarray):
    """IDFT of each antenna's Y~^(j) followed by the hard slicer."""
    soft = idft(freq_outputs.T, axis=-1)
    return soft, demap_4qam(soft)


def linear_detect(Y: ReceivedBlock, D: DetectorMatrixSet) -> DetectionResult:
    Ytilde = apply_detector(Y, D)
    soft, bits = to_time_domain(Ytilde)
    return DetectionResult(soft, bits, Ytilde, D.kind, [IterationOutput(1, soft, bits)])


def cancel_interference(Ytilde: np.ndarray, gamma_set: GammaSet, S_hat: np.ndarray) -> np.ndarray:
    """
    Y~'_k = Y~_k + [gamma - Gamma_k] S^_k.

    Args:
        Ytilde: (N, N_T) detector outputs
        gamma_set: Gamma_k and gamma of the detector in use
        S_hat: (N, N_T) frequency-domain image of the fed-back decisions
    """
    if S_hat.shape != Ytilde.shape:
        raise DetectorError(f"feedback shape {S_hat.shape} does not match outputs {Ytilde.shape}")
    reconstructed = np.einsum("kjl,kl->kj", gamma_set.Gamma, S_hat)
    return Ytilde + gamma_set.gamma_diag[None, :] * S_hat - reconstructed


def decompose_output(D: DetectorMatrixSet, H: ChannelRealization, S: np.ndarray,
                     noise: np.ndarray) -> OutputTerms:
    """
    Split D_k (H_k S_k + N_k) into its signal, ISI, MUI/MSI and noise parts.

    Args:
        S: (N, N_T) transmitted frequency-domain symbols
        noise: (N, N_R) noise realization N_k
    """
    gs = gamma_of(D, H)
    own = np.diagonal(gs.Gamma, axis1=1, axis2=2)
    signal = gs.gamma_diag[None, :] * S
    isi = (own - gs.gamma_diag[None, :]) * S
    mui = np.einsum("kjl,kl->kj", gs.Gamma, S) - own * S
    noise_term = np.einsum("kji,ki->kj", D.matrices, noise)
    return OutputTerms(signal, isi, mui, noise_term)
