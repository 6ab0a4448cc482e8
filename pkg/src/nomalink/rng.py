"""Deterministic random streams.

Every stochastic quantity in the package (fading draws, noise, estimation
error, weight init, training data) is drawn from its own counter-based
stream so that runs are reproducible and sub-streams are independent by
construction.  Streams are Philox generators keyed by

    key = seed * 2**64 + user * 2**40 + purpose * 2**32 + block

where ``seed`` is the experiment seed, ``user`` selects the link
(0 = near, 1 = far), ``purpose`` is one of the constants below and
``block`` is a free running index (fading block, sweep cell, ...).
"""

import numpy as np

USER_NEAR = 0
USER_FAR = 1

# purpose codes
FADING = 1
EST_ERROR = 2
NOISE = 3
WEIGHT_INIT = 4
TRAIN_DATA = 5
SOURCE = 6
TRAIN_NOISE = 7
TRAIN_FADING = 8

_MAX_BLOCK = 2**32
_MAX_PURPOSE = 2**8


def stream_key(seed: int, user: int = 0, purpose: int = 0, block: int = 0) -> int:
    if seed < 0 or user < 0 or purpose < 0 or block < 0:
        raise ValueError("stream key parts must be non-negative")
    if block >= _MAX_BLOCK or purpose >= _MAX_PURPOSE:
        raise ValueError("stream key part out of range")
    return (seed << 64) + (user << 40) + (purpose << 32) + block


def stream_rng(seed: int, user: int = 0, purpose: int = 0, block: int = 0) -> np.random.Generator:
    """Generator for one (seed, user, purpose, block) sub-stream."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, user, purpose, block)))
