
import numpy as np

from detectors.common import DetectorKind, DetectorMatrixSet, linear_detect
from link.channel import ChannelRealization
from utils.errors import DetectorError, NumericsError
from utils.numerics import hermitian_solve


def gram(Hhat: ChannelRealization):
    """Hhat_k^H Hhat_k (N, N_T, N_T) and Hhat_k^H (N, N_T, N_R) for every subchannel."""
    Hh = np.conj(np.transpose(Hhat.cfr, (0, 2, 1)))
    return Hh @ Hhat.cfr, Hh


class MMSEDetector:
    """
    Optimum linear detection, D_k = (Hhat_k^H Hhat_k + alpha I)^-1 Hhat_k^H.

    alpha = N0 / sigma_s^2 must be positive so every A_k is Hermitian
    positive definite.
    """

    kind = DetectorKind.MMSE

    def build(self, Hhat: ChannelRealization, alpha: float) -> DetectorMatrixSet:
        if alpha is None or not alpha > 0:
            raise DetectorError(f"MMSE detection needs alpha > 0, got {alpha}")
        G, Hh = gram(Hhat)
        A = G + alpha * np.eye(Hhat.N_T)[None, :, :]
        try:
            D = hermitian_solve(A, Hh)
        except NumericsError as e:
            raise DetectorError(f"MMSE system not positive definite at subchannel k={e.index}") from e
        return DetectorMatrixSet(D, self.kind, float(alpha))

    def detect(self, Y, Hhat: ChannelRealization, alpha: float, sigma_s2: float = 1.0):
        return linear_detect(Y, self.build(Hhat, alpha))
