"""Deterministic random-stream derivation.

All randomness in the library flows through :func:`rng_stream`. A stream is
identified by a root seed plus a tuple of context tags (strings or ints), so
any component can rebuild exactly the stream it used without threading
generator objects through every call. Streams for distinct contexts are
independent by SeedSequence construction, and nothing ever seeds from the
wall clock.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _entropy_word(tag: str | int) -> int:
    if isinstance(tag, bool):  # bool is an int subclass; reject to avoid silent surprises
        raise TypeError("stream tags must be str or int, not bool")
    if isinstance(tag, int):
        return tag & _MASK64
    if isinstance(tag, str):
        digest = hashlib.sha256(tag.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"stream tags must be str or int, got {type(tag).__name__}")


def rng_stream(seed: int, *context: str | int) -> np.random.Generator:
    """Return a Generator for the stream identified by (seed, *context).

    The same (seed, context) always yields a generator producing identical
    draws; different contexts yield statistically independent streams.
    """
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise TypeError("seed must be an integer")
    words = [int(seed) & _MASK64] + [_entropy_word(tag) for tag in context]
    return np.random.default_rng(np.random.SeedSequence(words))
