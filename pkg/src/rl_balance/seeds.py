"""Named, reproducible random streams.

Every random quantity in a run comes from its own PCG64 stream keyed by
(seed, stream id), so consuming one stream can never shift another.
Streams in use:

    ARRIVAL  inter-arrival gaps / per-interval arrival placement
    SIZE     task service demands
    BURST    dwell durations of the bursty modulating state
    EXPLORE  epsilon-greedy exploration draws of the learning agent

``derive_seed`` maps a master seed plus an integer tag onto an independent
child seed; the harness uses it to keep training and evaluation traces on
disjoint streams. SeedSequence/PCG64 are stable across platforms, so a
(seed, config) pair reproduces bit-identical runs anywhere.
"""

import numpy as np

ARRIVAL = 0
SIZE = 1
BURST = 2
EXPLORE = 3

# child-seed tags used by the CLI harness
TAG_EVAL_TRACE = 101
TAG_TRAIN_TRACE = 102


def stream(seed: int, stream_id: int) -> np.random.Generator:
    """PCG64 generator for one named stream of a run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), stream_id))))


def derive_seed(master_seed: int, tag: int) -> int:
    """Deterministic child seed for a sub-experiment (e.g. training trace)."""
    words = np.random.SeedSequence((int(master_seed), int(tag))).generate_state(2, np.uint64)
    return int(words[0])
