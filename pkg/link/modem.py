"""
4-QAM Gray modem and the SC/FDE transmit chains.

Gray labelling: bit pair (b0, b1) -> (I, Q) = (a(1 - 2 b0), a(1 - 2 b1)),
a = sigma_s / sqrt(2). So (0, 0) -> (+a, +a) and neighbouring points
differ in one bit. The slicer decides each component by its sign; an
exact zero goes to the positive side (bit 0).
"""
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from link.channel import ChannelRealization
from utils.errors import ModemError
from utils.numerics import SeededRng, dft


def gray_4qam_symbols(bits, sigma_s2: float) -> np.ndarray:
    """
    Map bits (..., 2N) to complex symbols (..., N) with |s|^2 = sigma_s2.
    """
    bits = np.asarray(bits)
    if bits.ndim == 0 or bits.shape[-1] % 2:
        raise ModemError(f"bit count must be even, got shape {bits.shape}")
    if sigma_s2 <= 0:
        raise ModemError(f"sigma_s2 must be positive, got {sigma_s2}")
    if np.any((bits != 0) & (bits != 1)):
        raise ModemError("bits must be 0 or 1")
    a = np.sqrt(sigma_s2 / 2.0)
    pairs = bits.reshape(bits.shape[:-1] + (-1, 2)).astype(np.float64)
    return a * ((1.0 - 2.0 * pairs[..., 0]) + 1j * (1.0 - 2.0 * pairs[..., 1]))


@dataclass(frozen=True, eq=False)
class SymbolBlock:
    """Per-antenna time-domain 4-QAM blocks s^(j) and their DFTs S^(j)."""

    time_symbols: np.ndarray
    freq_symbols: np.ndarray
    sigma_s2: float

    @classmethod
    def from_symbols(cls, time_symbols, sigma_s2: float) -> "SymbolBlock":
        s = np.atleast_2d(np.asarray(time_symbols, dtype=np.complex128))
        return cls(s, dft(s, axis=-1), float(sigma_s2))

    @classmethod
    def from_bits(cls, bits, sigma_s2: float) -> "SymbolBlock":
        return cls.from_symbols(gray_4qam_symbols(bits, sigma_s2), sigma_s2)

    @property
    def N_T(self) -> int:
        return self.time_symbols.shape[0]

    @property
    def N(self) -> int:
        return self.time_symbols.shape[1]


@dataclass(frozen=True, eq=False)
class ReceivedBlock:
    """
    Frequency-domain observations, freq_obs[k] = Y_k (length N_R).

    `noise` keeps the N_k realization that was added, for decomposition
    checks; it is None when unknown.
    """

    freq_obs: np.ndarray
    noise: np.ndarray = None

    @property
    def N(self) -> int:
        return self.freq_obs.shape[0]

    @property
    def N_R(self) -> int:
        return self.freq_obs.shape[1]


def map_4qam(bits, sigma_s2: float) -> SymbolBlock:
    """
    Gray-map a bit block.

    Args:
        bits: length-2N bits for one antenna, or (N_T, 2N) for several
        sigma_s2: symbol energy

    Returns:
        SymbolBlock with one row per antenna
    """
    return SymbolBlock.from_bits(np.atleast_2d(bits), sigma_s2)


def demap_4qam(symbols) -> np.ndarray:
    """Hard slicer: (..., N) symbols -> (..., 2N) bits."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    out = np.empty(symbols.shape + (2,), dtype=np.uint8)
    out[..., 0] = symbols.real < 0
    out[..., 1] = symbols.imag < 0
    return out.reshape(symbols.shape[:-1] + (-1,)) if symbols.ndim else out.ravel()


def random_block(N_T: int, N: int, sigma_s2: float, rng: SeededRng):
    """Uniform random bits for every antenna and the block they map to."""
    bits = rng.bits((N_T, 2 * N))
    return bits, SymbolBlock.from_bits(bits, sigma_s2)


def _check_dims(sym: SymbolBlock, ch: ChannelRealization, N0: float):
    if N0 < 0:
        raise ModemError(f"N0 must be >= 0, got {N0}")
    if sym.N_T != ch.N_T or sym.N != ch.N:
        raise ModemError(
            f"symbol block (N_T={sym.N_T}, N={sym.N}) does not match channel (N_T={ch.N_T}, N={ch.N})"
        )


def transmit_freq(sym: SymbolBlock, ch: ChannelRealization, N0: float,
                  rng: SeededRng) -> ReceivedBlock:
    """Y_k = H_k S_k + N_k with E|N_k^(i)|^2 = N0 * N."""
    _check_dims(sym, ch, N0)
    signal = np.einsum("kij,jk->ki", ch.cfr, sym.freq_symbols)
    noise = rng.cgauss(N0 * ch.N, size=signal.shape)
    return ReceivedBlock(signal + noise, noise)


def transmit_time_with_cp(sym: SymbolBlock, ch: ChannelRealization, N0: float,
                          rng: SeededRng, L_s: int) -> ReceivedBlock:
    """
    Physical chain: CP insertion, linear convolution, noise, CP removal, DFT.

    Time-domain noise has variance N0 per sample, hence N0 * N per bin
    after the unnormalized DFT. Noiseless output matches `transmit_freq`.
    """
    _check_dims(sym, ch, N0)
    if not 0 <= L_s <= sym.N:
        raise ModemError(f"cyclic prefix L_s={L_s} must lie in 0..N={sym.N}")
    if L_s < ch.memory:
        raise ModemError(f"cyclic prefix L_s={L_s} shorter than channel memory {ch.memory}")
    N = sym.N
    taps = ch.cir[:, :, :ch.memory + 1]
    tx = np.concatenate([sym.time_symbols[:, N - L_s:], sym.time_symbols], axis=1)
    rx = np.zeros((ch.N_R, N + L_s), dtype=np.complex128)
    for i in range(ch.N_R):
        for j in range(ch.N_T):
            rx[i] += lfilter(taps[i, j], [1.0], tx[j])
    noise = rng.cgauss(N0, size=rx.shape)
    rx = rx + noise
    Y = dft(rx[:, L_s:], axis=-1).T
    return ReceivedBlock(np.ascontiguousarray(Y), dft(noise[:, L_s:], axis=-1).T)
