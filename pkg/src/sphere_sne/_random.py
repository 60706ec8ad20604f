"""Seeded random streams.

Every random operation takes a ``seed`` that is either an int or a tuple of
ints. It is turned into a PCG64 generator through ``SeedSequence`` with the
operation's stream tag appended, so two operations given the same seed never
share a stream. Child streams (per cluster, per bench cell) are derived by
extending the tuple, never by drawing from a parent generator.
"""

import numpy as np

# Stream tags. Changing any of these changes every seeded output.
STREAM_VMF = 11
STREAM_UNIFORM = 12
STREAM_CENTERS = 21
STREAM_CLUSTER = 22
STREAM_VMF_INIT = 31
STREAM_VMF_STEP = 32
STREAM_TSNE_INIT = 41
STREAM_BENCH = 51


def seed_key(seed, *extra):
    if isinstance(seed, (int, np.integer)):
        key = (int(seed),)
    else:
        key = tuple(int(s) for s in seed)
    if any(k < 0 for k in key):
        raise ValueError(f"seeds must be non-negative, got {key}")
    return key + tuple(int(e) for e in extra)


def make_rng(seed, stream):
    """Generator for ``stream`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed_key(seed, stream))))


def derive_seed(seed, *extra):
    """A 32-bit integer seed for a child job, e.g. one bench cell."""
    return int(np.random.SeedSequence(seed_key(seed, *extra)).generate_state(1)[0])
