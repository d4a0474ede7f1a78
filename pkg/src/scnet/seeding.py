"""Sub-seed derivation.

Every random stream in the package comes from one master seed.  A stream is
identified by ``(master, purpose_tag, index)``; the tag is hashed with CRC-32
and the triple is fed to :class:`numpy.random.SeedSequence`, which mixes it
into a 128-bit state.  Streams with different tags or indices are
statistically independent and do not depend on how work is split across
processes.
"""
import zlib

import numpy as np


def derive_seed_sequence(master: int, tag: str, index: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master), zlib.crc32(tag.encode("utf-8")), int(index)])


def derive_rng(master: int, tag: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed_sequence(master, tag, index))
