"""Pure-Python/numpy kernel implementations.

Fallback backend used when the compiled extension is unavailable.  Results
are bit-identical to the compiled backend: the sequential recursions use
the same IEEE-754 double operations in the same order, and the bit/byte
kernels are integer-exact.
"""

import math

import numpy as np

BACKEND_NAME = "pure"


def _build_crc_table() -> list[int]:
    table = []
    for n in range(256):
        c = n
        for _ in range(8):
            c = (c >> 1) ^ 0xEDB88320 if c & 1 else c >> 1
        table.append(c)
    return table


_CRC_TABLE = _build_crc_table()

# Position to flip for each Hamming(7,4) syndrome value s1*4 + s2*2 + s3;
# 0 means clean, handled separately.
_FLIP_POS = np.array([0, 6, 5, 2, 4, 1, 0, 3], dtype=np.int64)


def ar1_path(latent: float, rho: float, z: np.ndarray) -> tuple[np.ndarray, float]:
    """Advance a unit-variance AR(1) recursion through the innovations `z`.

    Returns the state after each step and the final state.
    """
    c = math.sqrt(1.0 - rho * rho)
    out = np.empty(len(z), dtype=np.float64)
    s = float(latent)
    for i, zi in enumerate(z.tolist()):
        s = rho * s + c * zi
        out[i] = s
    return out, s


def crc32_update(data, crc: int) -> int:
    """Advance a reflected CRC-32 register (poly 0xEDB88320) over `data`."""
    table = _CRC_TABLE
    for b in bytes(data):
        crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8)
    return crc


def hamming74_encode(bits: np.ndarray) -> np.ndarray:
    """Encode data bits (length divisible by 4) into (7,4) codewords."""
    d = bits.reshape(-1, 4)
    out = np.empty((d.shape[0], 7), dtype=np.uint8)
    out[:, :4] = d
    out[:, 4] = d[:, 0] ^ d[:, 1] ^ d[:, 3]
    out[:, 5] = d[:, 0] ^ d[:, 2] ^ d[:, 3]
    out[:, 6] = d[:, 1] ^ d[:, 2] ^ d[:, 3]
    return out.reshape(-1)


def hamming74_decode(code: np.ndarray) -> tuple[np.ndarray, int]:
    """Syndrome-decode (7,4) codewords, correcting one bit error each.

    Returns the decoded data bits and the number of codewords whose
    syndrome was nonzero.
    """
    w = code.reshape(-1, 7).copy()
    s1 = w[:, 4] ^ w[:, 0] ^ w[:, 1] ^ w[:, 3]
    s2 = w[:, 5] ^ w[:, 0] ^ w[:, 2] ^ w[:, 3]
    s3 = w[:, 6] ^ w[:, 1] ^ w[:, 2] ^ w[:, 3]
    synd = (s1.astype(np.int64) << 2) | (s2.astype(np.int64) << 1) | s3
    bad = np.nonzero(synd)[0]
    w[bad, _FLIP_POS[synd[bad]]] ^= 1
    return w[:, :4].reshape(-1).copy(), int(len(bad))
