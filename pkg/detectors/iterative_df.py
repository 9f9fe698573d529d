"""
Low-complexity iterative decision-feedback detection.

Iteration 1 is plain MF detection. Each later iteration re-uses the MF
outputs Y~_k and cancels the residual ISI and MUI/MSI rebuilt from the
previous iteration's hard decisions:

    Y~'_k(p) = Y~_k + [gamma^(p) - Gamma^_k(p)] S^_k(p-1)

No matrix is ever inverted.
"""
import logging

import numpy as np

from detectors.common import (
    DetectionResult,
    DetectorKind,
    IterationOutput,
    apply_detector,
    cancel_interference,
    gamma_of,
    to_time_domain,
)
from detectors.mf import MFDetector
from link.channel import ChannelRealization
from link.modem import ReceivedBlock, gray_4qam_symbols
from utils.errors import DetectorError
from utils.numerics import dft

LOGGER = logging.getLogger(__name__)


class IterativeDFDetector:
    """Hard-decision feedback around an MF inner detector, `p_max` iterations."""

    kind = DetectorKind.IDF

    def __init__(self, p_max: int = 4, inner=None):
        if p_max < 1:
            raise DetectorError(f"p_max must be >= 1, got {p_max}")
        self.p_max = p_max
        self.inner = inner or MFDetector()

    def build(self, Hhat: ChannelRealization, alpha: float = None):
        return self.inner.build(Hhat, alpha)

    def detect(self, Y: ReceivedBlock, Hhat: ChannelRealization, alpha: float = None,
               sigma_s2: float = 1.0) -> DetectionResult:
        D = self.build(Hhat, alpha)
        Ytilde = apply_detector(Y, D)
        soft, bits = to_time_domain(Ytilde)
        history = [IterationOutput(1, soft, bits)]
        outputs = Ytilde
        gamma_set = gamma_of(D, Hhat) if self.p_max > 1 else None

        for p in range(2, self.p_max + 1):
            s_hat = gray_4qam_symbols(bits, sigma_s2)
            S_hat = dft(s_hat, axis=-1).T
            outputs = cancel_interference(Ytilde, gamma_set, S_hat)
            soft, bits = to_time_domain(outputs)
            history.append(IterationOutput(p, soft, bits))
            LOGGER.debug("DF iteration %d: %d decisions changed", p,
                         int(np.count_nonzero(history[-1].bits != history[-2].bits)))

        return DetectionResult(soft, bits, outputs, self.kind, history)


def iterative_df_detect(Y: ReceivedBlock, Hhat: ChannelRealization, p_max: int,
                        sigma_s2: float = 1.0) -> DetectionResult:
    return IterativeDFDetector(p_max).detect(Y, Hhat, sigma_s2=sigma_s2)
