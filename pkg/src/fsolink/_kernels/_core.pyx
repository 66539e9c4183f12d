# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot inner loops.

Must stay bit-identical to ``_pure``: same operation order for the float
recursion (built with -ffp-contract=off so no FMA contraction), integer
exact elsewhere.
"""

from libc.math cimport sqrt

import numpy as np


cdef unsigned int[256] _CRC_TABLE

cdef void _init_crc_table() noexcept:
    cdef unsigned int c
    cdef int n, k
    for n in range(256):
        c = <unsigned int> n
        for k in range(8):
            if c & 1u:
                c = (c >> 1) ^ 0xEDB88320u
            else:
                c = c >> 1
        _CRC_TABLE[n] = c

_init_crc_table()

# Position to flip for Hamming(7,4) syndrome s1*4 + s2*2 + s3 (0 = clean).
cdef int[8] _FLIP_POS
_FLIP_POS[:] = [0, 6, 5, 2, 4, 1, 0, 3]

BACKEND_NAME = "compiled"


def ar1_path(double latent, double rho, z):
    """Advance a unit-variance AR(1) recursion through the innovations `z`."""
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double c = sqrt(1.0 - rho * rho)
    cdef double s = latent
    cdef Py_ssize_t i
    for i in range(n):
        s = rho * s + c * zv[i]
        out[i] = s
    return out_arr, s


def crc32_update(data, crc):
    """Advance a reflected CRC-32 register (poly 0xEDB88320) over `data`."""
    cdef const unsigned char[::1] buf = bytes(data)
    cdef unsigned int c = <unsigned int> crc
    cdef Py_ssize_t i
    for i in range(buf.shape[0]):
        c = _CRC_TABLE[(c ^ buf[i]) & 0xFFu] ^ (c >> 8)
    return c


def hamming74_encode(bits):
    """Encode data bits (length divisible by 4) into (7,4) codewords."""
    cdef const unsigned char[::1] d = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef Py_ssize_t groups = d.shape[0] // 4
    out_arr = np.empty(groups * 7, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t g, i, o
    cdef unsigned char d1, d2, d3, d4
    for g in range(groups):
        i = g * 4
        o = g * 7
        d1 = d[i]; d2 = d[i + 1]; d3 = d[i + 2]; d4 = d[i + 3]
        out[o] = d1; out[o + 1] = d2; out[o + 2] = d3; out[o + 3] = d4
        out[o + 4] = d1 ^ d2 ^ d4
        out[o + 5] = d1 ^ d3 ^ d4
        out[o + 6] = d2 ^ d3 ^ d4
    return out_arr


def hamming74_decode(code):
    """Syndrome-decode (7,4) codewords, correcting one bit error each."""
    cdef const unsigned char[::1] r = np.ascontiguousarray(code, dtype=np.uint8)
    cdef Py_ssize_t groups = r.shape[0] // 7
    out_arr = np.empty(groups * 4, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef unsigned char[7] w
    cdef Py_ssize_t g, i, j
    cdef int s, corrected = 0
    for g in range(groups):
        i = g * 7
        for j in range(7):
            w[j] = r[i + j]
        s = ((w[4] ^ w[0] ^ w[1] ^ w[3]) << 2) \
            | ((w[5] ^ w[0] ^ w[2] ^ w[3]) << 1) \
            | (w[6] ^ w[1] ^ w[2] ^ w[3])
        if s != 0:
            w[_FLIP_POS[s]] ^= 1
            corrected += 1
        j = g * 4
        out[j] = w[0]; out[j + 1] = w[1]; out[j + 2] = w[2]; out[j + 3] = w[3]
    return out_arr, corrected
