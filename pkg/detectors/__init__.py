from detectors.common import (
    DetectionResult,
    DetectorKind,
    DetectorMatrixSet,
    GammaSet,
    OutputTerms,
    cancel_interference,
    decompose_output,
    gamma_of,
    linear_detect,
)
from detectors.iterative_df import IterativeDFDetector, iterative_df_detect
from detectors.mf import MFDetector
from detectors.mmse import MMSEDetector
from detectors.zf import ZFDetector
from link.channel import ChannelRealization
from utils.errors import DetectorError

DETECTORS = {
    DetectorKind.MF: MFDetector,
    DetectorKind.MMSE: MMSEDetector,
    DetectorKind.ZF: ZFDetector,
    DetectorKind.IDF: IterativeDFDetector,
}


def make_detector(kind, p_max: int = 4):
    """Instantiate the detector registered under `kind` (enum or name)."""
    try:
        kind = DetectorKind(kind)
    except ValueError:
        raise DetectorError(f"Unknown detector: {kind}. Valid: {', '.join(k.value for k in DetectorKind)}") from None
    if kind is DetectorKind.IDF:
        return IterativeDFDetector(p_max)
    return DETECTORS[kind]()


def build_detector(Hhat: ChannelRealization, kind, alpha: float = None) -> DetectorMatrixSet:
    """
    Per-subchannel detection matrices for a linear detector.

    For IDF this is the inner (MF) detector's matrix set.
    """
    return make_detector(kind).build(Hhat, alpha)
