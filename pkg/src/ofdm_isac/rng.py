"""Random number generation helpers.

All randomness flows through numpy's Philox bit generator (counter-based,
64-bit) so that results are reproducible across platforms and trials can be
split into independent streams with ``numpy.random.SeedSequence.spawn``.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed) -> np.random.Generator:
    """Create a Philox-backed generator from an int, tuple, or SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def as_generator(rng):
    """Normalize a seed-like argument to a Generator.

    Returns ``(generator, seed_record)`` where ``seed_record`` is the original
    integer seed when one was given (useful for reproducibility metadata) and
    None when an already-constructed generator or SeedSequence was passed.
    """
    if isinstance(rng, np.random.Generator):
        return rng, None
    if isinstance(rng, np.random.SeedSequence):
        return make_rng(rng), None
    return make_rng(rng), rng
