"""Deterministic named random streams derived from one master seed.

Every random quantity in a sampling run comes from its own named substream:
``substream(seed, "latents")`` for latent positions, then
``substream(seed, "edges", mechanism, ...)`` for edge draws. Streams are
keyed by a stable hash of the name path, so

* the same seed reproduces every draw bit-for-bit,
* different mechanisms under the same seed share identical latents, and
* edge draws are independent of iteration order: the bit generator is
  counter-based (Philox) and each edge consumes a fixed-width block of the
  counter space at its canonical pair index, so any evaluation schedule that
  respects the indexing yields the same sample.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import ValidityError

__all__ = ["substream", "check_seed"]

_SEED_BITS = 64


def check_seed(seed) -> int:
    """Validate a master seed (unsigned 64-bit integer)."""
    if not isinstance(seed, (int, np.integer)):
        raise ValidityError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2**_SEED_BITS:
        raise ValidityError(f"seed must lie in [0, 2^{_SEED_BITS}), got {seed}")
    return seed


def _path_entropy(path: tuple) -> list[int]:
    # repr of the stringified tuple is unambiguous w.r.t. part boundaries
    token = repr(tuple(str(p) for p in path)).encode()
    digest = hashlib.sha256(token).digest()
    return [int.from_bytes(digest[i : i + 8], "little") for i in range(0, 32, 8)]


def substream(seed, *path) -> np.random.Generator:
    """Generator for the substream named by `path` under a master seed."""
    entropy = [check_seed(seed)]
    if path:
        entropy.extend(_path_entropy(path))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
