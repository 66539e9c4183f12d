"""Intensity-modulation / direct-detection physical layer.

On-off keying over a multiplicative fading channel with additive Gaussian
receiver noise: y = h * x + n.  Detection is a threshold at h * A / 2 using
genie channel knowledge (or a fixed A / 2 threshold when csi is disabled),
with the closed-form OOK error rate Q(h * A / (2 * sigma)) as reference.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

_SQRT2 = math.sqrt(2.0)


@dataclass
class PhyParams:
    """Transmit amplitude, receiver noise level and line rate.

    Units are arbitrary linear intensity (detector responsivity is folded
    into amplitude).  Default bit_rate is the demo clip's combined
    200 + 48 kb/s figure; scenario files override it to whatever the
    configured source actually needs.
    """

    amplitude: float = 1.0
    noise_sigma: float = 0.02
    bit_rate: float = 248_000.0
    csi: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be > 0")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")
        if not self.bit_rate > 0:
            raise ValueError("bit_rate must be > 0")


def modulate_ook(bits: np.ndarray, amplitude: float) -> np.ndarray:
    """Map bits to intensities: 1 -> amplitude, 0 -> 0."""
    return np.asarray(bits, dtype=np.float64) * amplitude


def apply_channel(
    symbols: np.ndarray,
    gains,
    noise_sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """y_i = h_i * x_i + n_i with n ~ Normal(0, noise_sigma^2).

    `gains` may be a scalar (block fading within a tick) or a per-symbol
    array.  The noise stream is always consumed, so a noise_sigma update
    never shifts later draws.
    """
    symbols = np.asarray(symbols, dtype=np.float64)
    g = np.asarray(gains, dtype=np.float64)
    if g.ndim and g.shape != symbols.shape:
        raise ValueError(f"gains shape {g.shape} != symbols shape {symbols.shape}")
    noise = rng.normal(0.0, noise_sigma, symbols.shape)
    return g * symbols + noise


def demodulate_ook(samples: np.ndarray, gains, amplitude: float) -> np.ndarray:
    """Threshold detection: 1 iff y > h * A / 2 (exact ties decide 0)."""
    samples = np.asarray(samples, dtype=np.float64)
    g = np.asarray(gains, dtype=np.float64)
    if g.ndim and g.shape != samples.shape:
        raise ValueError(f"gains shape {g.shape} != samples shape {samples.shape}")
    return (samples > g * (amplitude / 2.0)).astype(np.uint8)


def demodulate_fixed(samples: np.ndarray, amplitude: float) -> np.ndarray:
    """CSI-free variant: fixed threshold A / 2, exposing fading floors."""
    samples = np.asarray(samples, dtype=np.float64)
    return (samples > amplitude / 2.0).astype(np.uint8)


def q_function(x):
    """Gaussian tail probability Q(x) = 0.5 * erfc(x / sqrt(2))."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / _SQRT2)


def theoretical_ber_ook(h: float, amplitude: float, noise_sigma: float) -> float:
    """Closed-form OOK error rate at gain h: Q(h * A / (2 * sigma))."""
    if h <= 0:
        raise ValueError("h must be > 0")
    if amplitude <= 0:
        raise ValueError("amplitude must be > 0")
    if noise_sigma == 0:
        return 0.0
    return float(q_function(h * amplitude / (2.0 * noise_sigma)))
