import numpy as np

from detectors.common import DetectorKind, DetectorMatrixSet, linear_detect
from link.channel import ChannelRealization


class MFDetector:
    """Matched-filter detection, D_k = Hhat_k^H (A_k = I, no inversion)."""

    kind = DetectorKind.MF

    def build(self, Hhat: ChannelRealization, alpha: float = None) -> DetectorMatrixSet:
        D = np.conj(np.transpose(Hhat.cfr, (0, 2, 1)))
        return DetectorMatrixSet(np.ascontiguousarray(D), self.kind, alpha)

    def detect(self, Y, Hhat: ChannelRealization, alpha: float = None, sigma_s2: float = 1.0):
        return linear_detect(Y, self.build(Hhat, alpha))
