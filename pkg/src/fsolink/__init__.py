"""fsolink: deterministic free-space optical link emulator.

Turbulent-atmosphere channel statistics, an OOK IM/DD physical layer,
pluggable FEC with framing, raw-frame video transport, and a tick-driven
end-to-end engine with live-tunable parameters and a control API.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
