"""Reproducible per-trial seeding.

Trial ``i`` of a run seeded with ``s`` draws from
``numpy.random.default_rng(trial_seed(s, i))`` where::

    trial_seed(s, i) = splitmix64((s + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64)

and ``splitmix64`` is the finaliser of Steele, Lea & Flood's SplitMix64
generator. Seeds depend only on ``(s, i)``, never on scheduling, so runs are
reproducible at any level of parallelism.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
# "PILOT" in ASCII; pilot (calibration) streams are keyed off a salted base seed
PILOT_SALT = 0x50494C4F54


def splitmix64(x):
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(seed, trial_index):
    """64-bit seed for one trial; see module docstring for the formula."""
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    return splitmix64((int(seed) + (int(trial_index) + 1) * GOLDEN_GAMMA) & MASK64)


def pilot_base_seed(seed):
    """Base seed for calibration pilots, disjoint from the evaluation stream."""
    return splitmix64((int(seed) ^ PILOT_SALT) & MASK64)


def make_rng(seed):
    return np.random.default_rng(int(seed) & MASK64)
