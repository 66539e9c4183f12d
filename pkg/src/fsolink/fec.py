"""Forward error correction and block interleaving.

Pluggable bit-level codes — none, odd-repetition with majority vote, and
Hamming(7,4) with single-error syndrome correction — plus a rows x cols
block interleaver (write row-major, read column-major) that spreads short
error bursts across codewords.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._kernels import hamming74_decode, hamming74_encode

SCHEME_CHOICES = ("none", "repetition", "hamming74")


@dataclass(frozen=True)
class FecScheme:
    kind: str = "hamming74"
    repeat: int = 3

    def __post_init__(self):
        if self.kind not in SCHEME_CHOICES:
            raise ValueError(f"fec kind must be one of {SCHEME_CHOICES}")
        if self.kind == "repetition" and (self.repeat < 3 or self.repeat % 2 == 0):
            raise ValueError("repetition factor must be an odd integer >= 3")

    @property
    def rate(self) -> Fraction:
        if self.kind == "none":
            return Fraction(1)
        if self.kind == "repetition":
            return Fraction(1, self.repeat)
        return Fraction(4, 7)

    @property
    def data_block(self) -> int:
        """Input bits per codeword."""
        return 4 if self.kind == "hamming74" else 1

    @property
    def coded_block(self) -> int:
        """Output bits per codeword."""
        if self.kind == "none":
            return 1
        if self.kind == "repetition":
            return self.repeat
        return 7

    def coded_length(self, data_bits: int) -> int:
        return data_bits * self.coded_block // self.data_block


@dataclass(frozen=True)
class Interleaver:
    """rows x cols block permutation; rows=1 (or cols=1) is the identity."""

    rows: int = 64
    cols: int = 7

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("interleaver dims must be positive")

    @property
    def block(self) -> int:
        return self.rows * self.cols


def fec_encode(scheme: FecScheme, bits: np.ndarray) -> np.ndarray:
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    if scheme.kind == "none":
        return bits.copy()
    if scheme.kind == "repetition":
        return np.repeat(bits, scheme.repeat)
    if len(bits) % 4 != 0:
        raise ValueError("hamming74 input length must be divisible by 4")
    return hamming74_encode(bits)


def fec_decode(scheme: FecScheme, coded: np.ndarray) -> tuple[np.ndarray, int]:
    """Decode, returning (data bits, count of codewords that saw correction)."""
    coded = np.ascontiguousarray(coded, dtype=np.uint8)
    if scheme.kind == "none":
        return coded.copy(), 0
    if scheme.kind == "repetition":
        r = scheme.repeat
        if len(coded) % r != 0:
            raise ValueError(f"repetition input length must be divisible by {r}")
        groups = coded.reshape(-1, r)
        ones = groups.sum(axis=1, dtype=np.int64)
        bits = (ones > r // 2).astype(np.uint8)
        corrected = int(np.count_nonzero((ones > 0) & (ones < r)))
        return bits, corrected
    if len(coded) % 7 != 0:
        raise ValueError("hamming74 input length must be divisible by 7")
    return hamming74_decode(coded)


def interleave(il: Interleaver, bits: np.ndarray) -> np.ndarray:
    """Per block: write row-major into rows x cols, read column-major."""
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) % il.block != 0:
        raise ValueError(f"length must be a multiple of the {il.block}-bit block")
    return bits.reshape(-1, il.rows, il.cols).transpose(0, 2, 1).reshape(-1).copy()


def deinterleave(il: Interleaver, bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) % il.block != 0:
        raise ValueError(f"length must be a multiple of the {il.block}-bit block")
    return bits.reshape(-1, il.cols, il.rows).transpose(0, 2, 1).reshape(-1).copy()


def pad_to_block(bits: np.ndarray, block: int) -> tuple[np.ndarray, int]:
    """Zero-pad to a multiple of `block`; returns (padded, pad length)."""
    pad = (-len(bits)) % block
    if pad == 0:
        return np.asarray(bits, dtype=np.uint8), 0
    return np.concatenate([bits, np.zeros(pad, dtype=np.uint8)]), pad
