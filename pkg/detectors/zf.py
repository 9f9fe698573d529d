import numpy as np

from detectors.common import DetectorKind, DetectorMatrixSet, linear_detect
from detectors.mmse import gram
from link.channel import ChannelRealization
from utils.errors import DetectorError, NumericsError
from utils.numerics import hermitian_solve

# Relative eigenvalue floor below which Hhat_k^H Hhat_k counts as singular.
SINGULAR_RTOL = 1e-12


class ZFDetector:
    """Zero-forcing detection, D_k = (Hhat_k^H Hhat_k)^-1 Hhat_k^H (alpha = 0)."""

    kind = DetectorKind.ZF

    def build(self, Hhat: ChannelRealization, alpha: float = None) -> DetectorMatrixSet:
        if Hhat.N_T > Hhat.N_R:
            raise DetectorError(f"ZF needs N_T <= N_R, got N_T={Hhat.N_T}, N_R={Hhat.N_R}")
        G, Hh = gram(Hhat)
        eig = np.linalg.eigvalsh(G)
        bad = np.flatnonzero(eig[:, 0] <= SINGULAR_RTOL * np.maximum(eig[:, -1], np.finfo(float).tiny))
        if bad.size:
            raise DetectorError(f"ZF system singular at subchannel k={int(bad[0])}")
        try:
            D = hermitian_solve(G, Hh)
        except NumericsError as e:
            raise DetectorError(f"ZF system singular at subchannel k={e.index}") from e
        return DetectorMatrixSet(D, self.kind, alpha)

    def detect(self, Y, Hhat: ChannelRealization, alpha: float = None, sigma_s2: float = 1.0):
        return linear_detect(Y, self.build(Hhat, alpha))
