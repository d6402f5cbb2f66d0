"""Counter-based deterministic random numbers.

Sweep sampling must replicate bit-for-bit across runs, worker counts and even
across reimplementations in other languages, so instead of a stateful
generator we use a pure function of (seed, counter): one round of splitmix64.
The full algorithm (also documented in docs/formats.md):

    state  = (seed + (counter + 1) * 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z = (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    z =  z XOR (z >> 31)
    uniform01 = (z >> 11) * 2^-53

uniform01 is the standard 53-bit mapping to [0, 1).
"""

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(seed: int, counter: int) -> int:
    """Return the 64-bit splitmix64 output for stream `seed` at `counter`."""
    z = (seed + (counter + 1) * _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def uniform01(seed: int, counter: int) -> float:
    """Deterministic uniform double in [0, 1) for (seed, counter)."""
    return (splitmix64(seed, counter) >> 11) * 2.0 ** -53


def uniform(seed: int, counter: int, lo: float, hi: float) -> float:
    """Deterministic uniform double in [lo, hi)."""
    return lo + (hi - lo) * uniform01(seed, counter)


def randint(seed: int, counter: int, n: int) -> int:
    """Deterministic integer in [0, n).  Mild modulo bias is irrelevant for
    n up to ~1e6 against a 64-bit state and is accepted for replicability."""
    return splitmix64(seed, counter) % n
