"""Child-seed derivation.

``child_seed(master, *indices)`` hashes the master seed and the indices with
BLAKE2b (8-byte digest, personalization ``b"uavudn-seed"``) over their
64-bit two's-complement little-endian encodings and returns the digest as an
unsigned integer. Child seeds can therefore be fed back in as masters. Generators are numpy PCG64
instances built with ``numpy.random.default_rng(child_seed)``.
"""

import hashlib
import struct

import numpy as np

_MASK = 2 ** 64 - 1


def child_seed(master: int, *indices: int) -> int:
    h = hashlib.blake2b(digest_size=8, person=b"uavudn-seed")
    for v in (master, *indices):
        v = int(v)
        if not -2 ** 63 <= v < 2 ** 64:
            raise ValueError(f"seed component {v} does not fit in 64 bits")
        h.update(struct.pack("<Q", v & _MASK))
    return int.from_bytes(h.digest(), "little")


def child_rng(master: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, *indices))
