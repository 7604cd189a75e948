"""The single place where the pseudorandom generator is chosen.

Streams are keyed by ``(seed, *path)`` through ``numpy.random.SeedSequence``,
so work split into fixed-size blocks gets the same numbers no matter how the
blocks are scheduled across workers.
"""

import numpy as np

GENERATOR_ID = f"numpy-{np.__version__}/PCG64/SeedSequence"
GAUSSIAN_METHOD = "numpy Generator.standard_normal (ziggurat)"


def make_rng(seed: int, *path: int) -> np.random.Generator:
    if int(seed) < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, path)])))


def metadata(seed: int) -> dict:
    return {"seed": int(seed), "generator": GENERATOR_ID, "gaussian": GAUSSIAN_METHOD}
