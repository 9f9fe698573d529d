import numpy as np

from utils.errors import SimulationError


class ErrorCounter:
    """Bit-error bookkeeping per detector iteration and TX antenna."""

    def __init__(self, iterations: int, N_T: int):
        """
        Initialize an empty counter.

        Args:
            iterations: number of detector iterations tracked (1 for linear detection)
            N_T: number of transmit antennas
        """
        if iterations < 1 or N_T < 1:
            raise SimulationError(f"counter needs iterations >= 1 and N_T >= 1, got {iterations}, {N_T}")
        self.iterations = iterations
        self.N_T = N_T
        self.reset()

    def reset(self):
        self.bit_errors = np.zeros((self.iterations, self.N_T), dtype=np.int64)
        self.bits_per_antenna = 0
        self.blocks = 0

    def add(self, sent_bits: np.ndarray, decided_bits) -> np.ndarray:
        """
        Count the errors of one block.

        Args:
            sent_bits: (N_T, 2N) transmitted bits
            decided_bits: one (N_T, 2N) array per iteration

        Returns:
            (iterations, N_T) errors of this block
        """
        if len(decided_bits) != self.iterations:
            raise SimulationError(f"expected {self.iterations} decision sets, got {len(decided_bits)}")
        errors = np.empty((self.iterations, self.N_T), dtype=np.int64)
        for p, bits in enumerate(decided_bits):
            if bits.shape != sent_bits.shape:
                raise SimulationError(f"decisions {bits.shape} do not match sent bits {sent_bits.shape}")
            errors[p] = np.count_nonzero(bits != sent_bits, axis=1)
        self.bit_errors += errors
        self.bits_per_antenna += sent_bits.shape[1]
        self.blocks += 1
        return errors

    def merge(self, other: "ErrorCounter") -> "ErrorCounter":
        """Fold another counter of the same shape into this one."""
        if (other.iterations, other.N_T) != (self.iterations, self.N_T):
            raise SimulationError(
                f"cannot merge counter {other.iterations}x{other.N_T} into {self.iterations}x{self.N_T}"
            )
        self.bit_errors += other.bit_errors
        self.bits_per_antenna += other.bits_per_antenna
        self.blocks += other.blocks
        return self

    def total_errors(self, iteration: int = None) -> int:
        """Errors summed over antennas for one iteration (1-based; last if omitted)."""
        p = self.iterations if iteration is None else iteration
        if not 1 <= p <= self.iterations:
            raise SimulationError(f"iteration {p} outside 1..{self.iterations}")
        return int(self.bit_errors[p - 1].sum())

    @property
    def bits_simulated(self) -> int:
        return self.bits_per_antenna * self.N_T
