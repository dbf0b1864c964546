"""
Seeded pseudo-random streams for reproducible experiments.

The generator is the splitmix64 construction: a 64-bit counter advanced by
the golden-ratio increment, whitened by two xor-shift-multiply rounds. The
stream depends only on the seed, so runs replay bit-for-bit on any platform.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULTIPLIER_1 = 0xBF58476D1CE4E5B9
MIX_MULTIPLIER_2 = 0x94D049BB133111EB

# 2^-52: maps a 53-bit integer onto [0, 2)
_UNIT_SCALE = 1.0 / (1 << 52)


class SeededGenerator:
    """Splitmix64 generator with helpers for uniform and bell-shaped draws."""

    def __init__(self, seed):
        self.seed = int(seed) & MASK64
        self.state = self.seed

    def next_u64(self):
        """Returns the next raw 64-bit output."""
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX_MULTIPLIER_1) & MASK64
        z = ((z ^ (z >> 27)) * MIX_MULTIPLIER_2) & MASK64
        return z ^ (z >> 31)

    def uniform_symmetric(self):
        """Returns a float in [-1, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * _UNIT_SCALE - 1.0

    def uniform_symmetric_array(self, size):
        return np.array([self.uniform_symmetric() for _ in range(size)])

    def bell(self):
        """Sum of four uniforms on [0, 1) minus 2: a cheap bell-shaped draw."""
        return sum((self.uniform_symmetric() + 1.0) / 2.0 for _ in range(4)) - 2.0

    def bell_array(self, size):
        return np.array([self.bell() for _ in range(size)])

    def complex_vector(self, dim):
        """Complex vector with bell-shaped real and imaginary parts."""
        parts = self.bell_array(2 * dim)
        return parts[0::2] + 1j * parts[1::2]


# 2L generator outputs, paired into complex amplitudes and normalised
def random_initial_state(length, seed):
    """
    Random normalised state of dimension `length`.
    input: int:length, int:seed
    output: complex ndarray
    """
    if length < 2:
        raise ValueError(f"state length must be at least 2, got {length}")
    gen = SeededGenerator(seed)
    draws = gen.uniform_symmetric_array(2 * length)
    amps = draws[0::2] + 1j * draws[1::2]
    return amps / np.linalg.norm(amps)


def random_unit_vector(dim, gen):
    vec = gen.complex_vector(dim)
    return vec / np.linalg.norm(vec)


def random_hermitian(dim, gen):
    """Dense Hermitian matrix with bell-shaped entries."""
    raw = gen.complex_vector(dim * dim).reshape(dim, dim)
    return (raw + raw.conj().T) / 2.0
