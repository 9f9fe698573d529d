"""
MU-MIMO uncorrelated Rayleigh channels and the link energy budget.

Array layout:
    cir: (N_R, N_T, N)   time-domain impulse responses h^(i,j)
    cfr: (N, N_R, N_T)   one N_R x N_T matrix H_k per subchannel
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from utils.errors import ChannelError
from utils.numerics import SeededRng, db_to_linear, dft

LOGGER = logging.getLogger(__name__)

DEFAULT_TAPS = 64


@dataclass(frozen=True, eq=False)
class PowerDelayProfile:
    """Per-tap variances P_n of the channel impulse response (linear power)."""

    tap_variances: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.tap_variances, dtype=np.float64).ravel()
        if taps.size == 0:
            raise ChannelError("power-delay profile needs at least one tap")
        if np.any(~np.isfinite(taps)) or np.any(taps < 0):
            raise ChannelError("tap variances must be finite and non-negative")
        if not np.any(taps > 0):
            raise ChannelError("at least one tap variance must be positive")
        taps.setflags(write=False)
        object.__setattr__(self, "tap_variances", taps)

    @property
    def n_taps(self) -> int:
        return self.tap_variances.size

    @property
    def memory(self) -> int:
        """Index of the last tap with non-zero variance."""
        return int(np.flatnonzero(self.tap_variances)[-1])

    def total_power(self) -> float:
        return math.fsum(self.tap_variances.tolist())

    def padded(self, N: int) -> np.ndarray:
        if N < self.n_taps:
            raise ChannelError(f"block length N={N} shorter than the profile ({self.n_taps} taps)")
        out = np.zeros(N)
        out[:self.n_taps] = self.tap_variances
        return out

    def scaled(self, c: float) -> "PowerDelayProfile":
        if c <= 0:
            raise ChannelError(f"scale factor must be positive, got {c}")
        return PowerDelayProfile(self.tap_variances * c)

    def normalized(self) -> "PowerDelayProfile":
        """Same shape with P_Sigma = 1."""
        return self.scaled(1.0 / self.total_power())


def triangular_pdp() -> PowerDelayProfile:
    """Triangular 64-tap profile P_n = 1 - n/63, n = 0..63."""
    n = np.arange(DEFAULT_TAPS)
    return PowerDelayProfile((63 - n) / 63.0)


def exponential_pdp(n_taps: int, decay: float) -> PowerDelayProfile:
    """P_n = exp(-n / decay), n = 0..n_taps-1."""
    if n_taps < 1 or decay <= 0:
        raise ChannelError(f"invalid exponential profile (n_taps={n_taps}, decay={decay})")
    return PowerDelayProfile(np.exp(-np.arange(n_taps) / decay))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """
    One block-fading MU-MIMO channel draw.

    The CFR is computed once at construction and cached; instances are
    immutable and safe to share between threads and processes.
    """

    cir: np.ndarray
    pdp: PowerDelayProfile
    cfr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cir = np.asarray(self.cir, dtype=np.complex128)
        if cir.ndim != 3:
            raise ChannelError(f"cir must be (N_R, N_T, N), got shape {cir.shape}")
        cir.setflags(write=False)
        cfr = np.ascontiguousarray(np.transpose(dft(cir, axis=-1), (2, 0, 1)))
        cfr.setflags(write=False)
        object.__setattr__(self, "cir", cir)
        object.__setattr__(self, "cfr", cfr)

    @property
    def N(self) -> int:
        return self.cir.shape[2]

    @property
    def N_T(self) -> int:
        return self.cir.shape[1]

    @property
    def N_R(self) -> int:
        return self.cir.shape[0]

    @property
    def dims(self) -> tuple:
        return self.N, self.N_T, self.N_R

    @property
    def memory(self) -> int:
        """Largest tap index carrying energy in any antenna pair (0 for an all-zero channel)."""
        nz = np.flatnonzero(np.any(self.cir != 0, axis=(0, 1)))
        return int(nz[-1]) if nz.size else 0

    @property
    def P_sigma(self) -> float:
        return self.pdp.total_power()

    def restrict_to(self, j: int) -> "ChannelRealization":
        """The 1 x N_R SIMO channel seen by TX antenna j."""
        if not 0 <= j < self.N_T:
            raise ChannelError(f"TX antenna index {j} out of range for N_T={self.N_T}")
        return ChannelRealization(self.cir[:, j:j + 1, :], self.pdp)


def sample_channel(pdp: PowerDelayProfile, N: int, N_T: int, N_R: int,
                   rng: SeededRng) -> ChannelRealization:
    """
    Draw independent taps h_n^(i,j) ~ CN(0, P_n) for every antenna pair.

    Taps beyond the profile length are exactly zero.
    """
    if N_T < 1 or N_R < 1:
        raise ChannelError(f"antenna counts must be >= 1 (N_T={N_T}, N_R={N_R})")
    if N < pdp.n_taps:
        raise ChannelError(f"block length N={N} shorter than the profile ({pdp.n_taps} taps)")
    taps = rng.cgauss(pdp.tap_variances, size=(N_R, N_T, pdp.n_taps))
    cir = np.zeros((N_R, N_T, N), dtype=np.complex128)
    cir[:, :, :pdp.n_taps] = taps
    return ChannelRealization(cir, pdp)


def flat_channel(h, N: int) -> ChannelRealization:
    """
    Single-path channel with tap matrix `h` (N_R x N_T) at delay 0.

    Every H_k equals `h`. The attached profile is a single tap carrying
    the mean per-pair power so that P_Sigma matches E|H_k^(i,j)|^2.
    """
    h = np.atleast_2d(np.asarray(h, dtype=np.complex128))
    if N < 1:
        raise ChannelError(f"block length must be >= 1, got {N}")
    cir = np.zeros(h.shape + (N,), dtype=np.complex128)
    cir[:, :, 0] = h
    power = float(np.mean(np.abs(h) ** 2))
    return ChannelRealization(cir, PowerDelayProfile([power if power > 0 else 1.0]))


@dataclass(frozen=True)
class LinkBudget:
    """Energy accounting tying symbol variance, CP overhead and Eb/N0 together."""

    sigma_s2: float
    N: int
    L_s: int
    eta: float
    P_sigma: float
    Eb: float
    N0: float
    alpha: float
    ebn0_db: float

    @property
    def sigma_N2(self) -> float:
        """Frequency-domain noise variance per subchannel and RX antenna."""
        return self.N0 * self.N

    @property
    def ebn0(self) -> float:
        return float(db_to_linear(self.ebn0_db))


def link_budget(sigma_s2: float, N: int, L_s: int, pdp: PowerDelayProfile,
                ebn0_db: float) -> LinkBudget:
    """
    Eb = sigma_s^2 P_Sigma / (2 eta), eta = N / (N + L_s); N0 follows from Eb/N0.
    """
    if not sigma_s2 > 0:
        raise ChannelError(f"sigma_s2 must be positive, got {sigma_s2}")
    if N < 1 or L_s < 0:
        raise ChannelError(f"invalid block geometry (N={N}, L_s={L_s})")
    if not math.isfinite(ebn0_db):
        raise ChannelError(f"Eb/N0 must be finite, got {ebn0_db}")
    eta = N / (N + L_s)
    p_sigma = pdp.total_power()
    eb = sigma_s2 * p_sigma / (2.0 * eta)
    n0 = eb / float(db_to_linear(ebn0_db))
    return LinkBudget(
        sigma_s2=float(sigma_s2), N=int(N), L_s=int(L_s), eta=eta, P_sigma=p_sigma,
        Eb=eb, N0=n0, alpha=n0 / sigma_s2, ebn0_db=float(ebn0_db),
    )


def dump_realization(ch: ChannelRealization, path) -> None:
    """
    Write the impulse responses as plain text.

    Format: header `# N N_T N_R n_taps`, then one line per antenna pair
    (i, j) in row-major order holding `n_taps` whitespace-separated
    `re,im` pairs (repr precision).
    """
    n_taps = ch.memory + 1
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# {ch.N} {ch.N_T} {ch.N_R} {n_taps}\n")
            for i in range(ch.N_R):
                for j in range(ch.N_T):
                    taps = ch.cir[i, j, :n_taps]
                    f.write(" ".join(f"{z.real!r},{z.imag!r}" for z in taps) + "\n")
    except OSError as e:
        raise ChannelError(f"cannot write channel dump to {path}: {e}") from e
    LOGGER.debug("Dumped %dx%d channel (%d taps) to %s", ch.N_R, ch.N_T, n_taps, path)


def load_realization(path, pdp: PowerDelayProfile = None) -> ChannelRealization:
    """Read a file written by `dump_realization`."""
    try:
        with open(path, encoding="utf-8") as f:
            header = f.readline().lstrip("#").split()
            N, N_T, N_R, n_taps = (int(v) for v in header)
            cir = np.zeros((N_R, N_T, N), dtype=np.complex128)
            for i in range(N_R):
                for j in range(N_T):
                    pairs = f.readline().split()
                    if len(pairs) != n_taps:
                        raise ChannelError(f"{path}: pair ({i},{j}) has {len(pairs)} taps, expected {n_taps}")
                    for n, pair in enumerate(pairs):
                        re, im = pair.split(",")
                        cir[i, j, n] = complex(float(re), float(im))
    except (OSError, ValueError) as e:
        raise ChannelError(f"cannot read channel dump {path}: {e}") from e
    if pdp is None:
        pdp = PowerDelayProfile(np.mean(np.abs(cir[:, :, :n_taps]) ** 2, axis=(0, 1)))
    return ChannelRealization(cir, pdp)
