"""
Complex-valued numerical kernel shared by every other module.

DFT convention: the forward transform is UNNORMALIZED,
    X_k = sum_n x_n exp(-j 2 pi k n / N),
and the inverse carries the 1/N factor. Hence a block with per-sample
variance sigma_s^2 has per-bin variance sigma_S^2 = N sigma_s^2, and a
time-domain noise sample of variance N_0 becomes a frequency-domain
sample of variance N_0 N. Every SINR formula in `analysis` relies on it.
"""
import hashlib
import math

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import erfc

from utils.errors import NumericsError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_length(x: np.ndarray, axis: int) -> int:
    if x.ndim == 0:
        raise NumericsError("DFT input must have at least one axis")
    n = x.shape[axis]
    if n < 1:
        raise NumericsError("DFT length must be >= 1")
    return n


def direct_dft(x, axis: int = -1, inverse: bool = False) -> np.ndarray:
    """
    O(N^2) transform by explicit twiddle matrix.

    Reference path for lengths that are not a power of two, and the
    oracle the FFT path is tested against.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = _check_length(x, axis)
    k = np.arange(n)
    sign = 1.0 if inverse else -1.0
    twiddle = np.exp(sign * 2j * np.pi * np.outer(k, k) / n)
    moved = np.moveaxis(x, axis, -1)
    out = moved @ twiddle.T
    if inverse:
        out = out / n
    return np.moveaxis(out, -1, axis)


def dft(x, axis: int = -1) -> np.ndarray:
    """
    Unnormalized forward DFT along `axis`.

    Args:
        x: Array-like of complex samples (any leading shape)
        axis: Axis holding the length-N block

    Returns:
        complex128 array of the same shape
    """
    x = np.asarray(x, dtype=np.complex128)
    n = _check_length(x, axis)
    if _is_power_of_two(n):
        return np.fft.fft(x, axis=axis)
    return direct_dft(x, axis=axis)


def idft(X, axis: int = -1) -> np.ndarray:
    """Inverse of `dft` (carries the 1/N factor)."""
    X = np.asarray(X, dtype=np.complex128)
    n = _check_length(X, axis)
    if _is_power_of_two(n):
        return np.fft.ifft(X, axis=axis)
    return direct_dft(X, axis=axis, inverse=True)


def qfunc(x):
    """
    Gaussian tail probability Q(x) = P(Z > x), Z ~ N(0, 1).

    Computed as 0.5 * erfc(x / sqrt(2)), which keeps full relative
    precision deep in the tail where 1 - Phi(x) would cancel.
    """
    result = 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))
    if np.ndim(result) == 0:
        return float(result)
    return result


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=np.float64) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=np.float64))


def stream_id_for(*keys) -> int:
    """
    Stable 63-bit stream id for a tuple of keys.

    Same keys give the same id on every platform and Python run
    (no reliance on the salted builtin hash).
    """
    digest = hashlib.blake2b(repr(keys).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") & (2 ** 63 - 1)


class SeededRng:
    """
    Reproducible random stream addressed by (master_seed, stream_id).

    Identical pairs produce identical sequences; distinct stream ids map
    to independent numpy SeedSequence children.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        if not 0 <= int(master_seed) < 2 ** 64:
            raise NumericsError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        if int(stream_id) < 0:
            raise NumericsError(f"stream_id must be non-negative, got {stream_id}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id,))
        self.generator = np.random.default_rng(seq)

    def child(self, *keys) -> "SeededRng":
        """Derive an independent sub-stream identified by `keys`."""
        return SeededRng(self.master_seed, stream_id_for(self.stream_id, *keys))

    def cgauss(self, variance: float, size=None):
        """
        Circularly-symmetric complex Gaussian draws.

        Real and imaginary parts are independent, each with variance
        `variance` / 2. A zero variance returns exact zeros.
        """
        variance = np.asarray(variance, dtype=np.float64)
        if np.any(variance < 0):
            raise NumericsError(f"variance must be >= 0, got {variance}")
        scale = np.sqrt(variance / 2.0)
        shape = size if size is not None else variance.shape
        re = self.generator.standard_normal(shape)
        im = self.generator.standard_normal(shape)
        z = scale * (re + 1j * im)
        if np.ndim(z) == 0:
            return complex(z)
        return z

    def bits(self, size) -> np.ndarray:
        return self.generator.integers(0, 2, size=size, dtype=np.uint8)

    def __repr__(self):
        return f"SeededRng(master_seed={self.master_seed}, stream_id={self.stream_id})"


def sample_cgauss(rng: SeededRng, variance: float) -> complex:
    """One circularly-symmetric complex Gaussian sample."""
    if variance < 0:
        raise NumericsError(f"variance must be >= 0, got {variance}")
    return rng.cgauss(variance)


def _check_hermitian(a: np.ndarray, index=None):
    where = f" at index {index}" if index is not None else ""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericsError(f"matrix must be square{where}, got shape {a.shape}", index=index)
    scale = max(np.abs(a).max(), 1.0)
    if not np.allclose(a, a.conj().T, rtol=0.0, atol=1e-10 * scale):
        raise NumericsError(f"matrix is not Hermitian{where}", index=index)


def _solve_one(a: np.ndarray, b: np.ndarray, index=None) -> np.ndarray:
    _check_hermitian(a, index)
    if b.shape[0] != a.shape[0]:
        raise NumericsError(
            f"right-hand side has {b.shape[0]} rows, matrix is {a.shape[0]}x{a.shape[0]}",
            index=index,
        )
    try:
        factor = cho_factor(a, lower=True, check_finite=True)
    except LinAlgError as e:
        where = f" at index {index}" if index is not None else ""
        raise NumericsError(f"Cholesky factorization failed{where}: matrix is not positive definite ({e})",
                            index=index) from e
    return cho_solve(factor, b)


def hermitian_solve(A, B) -> np.ndarray:
    """
    Solve A X = B for Hermitian positive-definite A.

    Uses a Cholesky factorization; no inverse is ever formed.

    Args:
        A: (n, n) matrix, or a (K, n, n) stack solved slice by slice
        B: (n, m) / (n,) right-hand side, or a (K, n, m) stack

    Returns:
        X with the shape of B

    Raises:
        NumericsError: A not square, not Hermitian or not positive
            definite; for stacks `index` holds the failing slice.
    """
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    if A.ndim == 2:
        return _solve_one(A, B)
    if A.ndim != 3 or B.ndim < 2 or B.shape[0] != A.shape[0]:
        raise NumericsError(f"incompatible stacked shapes {A.shape} and {B.shape}")
    out = np.empty(B.shape, dtype=np.complex128)
    for k in range(A.shape[0]):
        out[k] = _solve_one(A[k], B[k], index=k)
    return out
