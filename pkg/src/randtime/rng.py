"""Counter-based random streams keyed by ``(seed, stream_id)``.

Monte Carlo replicates are grouped in fixed-size blocks; block ``b`` always
draws from the Philox stream keyed by ``(seed, b)``.  Results are
therefore identical for any split of the work and any prefix of the
replicates.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["BLOCK_SIZE", "stream", "check_seed", "block_ranges"]

#: replicates per random stream
BLOCK_SIZE = 1024


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise DomainError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not (0 <= seed < 2**64):
        raise DomainError("seed must be a 64-bit unsigned integer")
    return seed


def stream(seed: int, stream_id: int) -> np.random.Generator:
    """Independent generator for ``(seed, stream_id)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([check_seed(seed), int(stream_id)])))


def block_ranges(n: int) -> list[tuple[int, int, int]]:
    """``(block_id, start, stop)`` triples covering ``range(n)``."""
    if n < 0:
        raise DomainError("number of replicates must be >= 0")
    out = []
    for b, start in enumerate(range(0, n, BLOCK_SIZE)):
        out.append((b, start, min(start + BLOCK_SIZE, n)))
    return out
