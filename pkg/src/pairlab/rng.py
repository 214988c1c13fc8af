"""Counter-based derivation of independent random substreams.

Every replicate draws from ``substream(seed, cell_index, replicate_index)``,
so results do not depend on scheduling: serial and parallel runs of the same
config and seed produce identical streams.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator keyed by (seed, key...); same arguments, same stream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
