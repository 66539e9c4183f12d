"""Kernel backend selection.

The hot inner loops (AR(1) fading recursion, CRC-32 byte loop, Hamming(7,4)
codeword loops) exist twice: a compiled Cython extension (``_core``) and a
pure-Python/numpy fallback (``_pure``).  The compiled backend is preferred
when importable; set FSOLINK_BACKEND=pure or =compiled to force one.
Both backends produce bit-identical results (see tests/test_kernels.py);
``benchmarks/bench_backends.py`` compares their speed.
"""

import os

from . import _pure

_requested = os.environ.get("FSOLINK_BACKEND", "").strip().lower()

if _requested not in ("", "pure", "compiled"):
    raise ImportError(
        f"FSOLINK_BACKEND={_requested!r} not understood (use 'pure' or 'compiled')"
    )

if _requested == "pure":
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "FSOLINK_BACKEND=compiled but the extension is not built; "
                "run `python setup.py build_ext --inplace`"
            ) from None
        _impl = _pure

BACKEND = _impl.BACKEND_NAME

ar1_path = _impl.ar1_path
crc32_update = _impl.crc32_update
hamming74_encode = _impl.hamming74_encode
hamming74_decode = _impl.hamming74_decode


def get_backend(name: str):
    """Return the named backend module ('pure' or 'compiled'), for benchmarks."""
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
