"""Statistical model of the turbulent free-space optical channel.

The received optical gain is multiplicative, h = h_l * h_a * h_p:

* h_l — deterministic path loss from atmospheric attenuation (Beer-Lambert
  expressed in dB/km),
* h_a — turbulence-induced scintillation, a unit-mean fading process whose
  marginal depends on turbulence strength (Rytov variance) and whose
  temporal correlation depends on wind speed (frozen-flow hypothesis),
* h_p — pointing loss from Rayleigh-distributed radial jitter of a
  Gaussian beam over a circular aperture.

Fading is generated with a Gaussian copula: a latent standard-normal AR(1)
state advances once per tick and is mapped through the marginal's quantile
function, so wind speed only affects the correlation and the marginal only
affects the amplitude statistics.
"""

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from . import seeds
from ._kernels import ar1_path

# Gains below this floor are clamped before entering the PHY so log-domain
# diagnostics cannot underflow.
GAIN_FLOOR = 1e-12

# Both alpha and beta diverge as turbulence vanishes; cap to avoid overflow.
GG_PARAM_CAP = 1e6

# Quantile-table defaults: 2^16 probability points built from 2^20 samples.
TABLE_RESOLUTION = 65536
TABLE_SAMPLES = 1 << 20

MODEL_CHOICES = ("auto", "lognormal", "gammagamma", "none")


@dataclass
class ChannelParams:
    """Full atmospheric and link-geometry description.

    Units: cn2 in m^(-2/3), wavelength/distance/beam geometry in meters,
    attenuation in dB/km, wind speed in m/s, tick_interval in seconds.
    """

    cn2: float = 1e-15
    wavelength: float = 1550e-9
    distance: float = 1000.0
    attenuation_db_per_km: float = 3.0
    wind_speed: float = 1.0
    pointing_jitter_sigma: float = 0.01
    beam_waist: float = 0.025
    aperture_radius: float = 0.05
    tick_interval: float = 1e-3
    model_override: str = "auto"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.cn2 >= 0:
            raise ValueError("cn2 must be >= 0")
        if not 100e-9 < self.wavelength < 20e-6:
            raise ValueError("wavelength must lie in (100 nm, 20 um)")
        if not self.distance > 0:
            raise ValueError("distance must be > 0")
        if not self.attenuation_db_per_km >= 0:
            raise ValueError("attenuation_db_per_km must be >= 0")
        if not self.wind_speed > 0:
            raise ValueError("wind_speed must be > 0")
        if not self.pointing_jitter_sigma >= 0:
            raise ValueError("pointing_jitter_sigma must be >= 0")
        if not self.beam_waist > 0:
            raise ValueError("beam_waist must be > 0")
        if not self.aperture_radius > 0:
            raise ValueError("aperture_radius must be > 0")
        if not self.tick_interval > 0:
            raise ValueError("tick_interval must be > 0")
        if self.model_override not in MODEL_CHOICES:
            raise ValueError(f"model_override must be one of {MODEL_CHOICES}")


@dataclass
class TurbulenceMarginal:
    """Unit-mean marginal distribution of the scintillation gain h_a.

    kind is one of 'unity', 'lognormal', 'gammagamma'.  Log-normal uses the
    mean-one convention ln(h_a) ~ Normal(-sigma_ln_sq/2, sigma_ln_sq);
    Gamma-Gamma carries an empirical quantile table evaluated at the
    midpoint probabilities (i + 0.5) / resolution.
    """

    kind: str
    sigma_ln_sq: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    quantile_table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("unity", "lognormal", "gammagamma"):
            raise ValueError(f"unknown marginal kind {self.kind!r}")
        if self.kind == "lognormal" and not self.sigma_ln_sq >= 0:
            raise ValueError("sigma_ln_sq must be >= 0")
        if self.kind == "gammagamma":
            if not (self.alpha > 0 and self.beta > 0):
                raise ValueError("alpha and beta must be > 0")
            if self.quantile_table is None:
                raise ValueError("gammagamma marginal requires a quantile table")
            if np.any(np.diff(self.quantile_table) < 0):
                raise ValueError("quantile table must be nondecreasing")


def rytov_variance(cn2: float, wavelength: float, distance: float) -> float:
    """Plane-wave Rytov variance 1.23 * Cn2 * k^(7/6) * L^(11/6)."""
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    if distance <= 0:
        raise ValueError("distance must be > 0")
    if cn2 < 0:
        raise ValueError("cn2 must be >= 0")
    k = 2.0 * math.pi / wavelength
    return 1.23 * cn2 * k ** (7.0 / 6.0) * distance ** (11.0 / 6.0)


def gamma_gamma_params(sigma_r_sq: float) -> tuple[float, float]:
    """Plane-wave Gamma-Gamma (alpha, beta) for a given Rytov variance.

    Large- and small-scale log-variances follow the standard expressions in
    sigma_R^(12/5) = (sigma_R^2)^(6/5); both parameters are capped at 1e6
    as turbulence vanishes.
    """
    if sigma_r_sq <= 0:
        raise ValueError("sigma_r_sq must be > 0 (use unity/lognormal instead)")
    s65 = sigma_r_sq ** 1.2
    alpha = 1.0 / (math.exp(0.49 * sigma_r_sq / (1.0 + 1.11 * s65) ** (7.0 / 6.0)) - 1.0)
    beta = 1.0 / (math.exp(0.51 * sigma_r_sq / (1.0 + 0.69 * s65) ** (5.0 / 6.0)) - 1.0)
    return min(alpha, GG_PARAM_CAP), min(beta, GG_PARAM_CAP)


def scintillation_index(marginal: TurbulenceMarginal) -> float:
    """Normalized intensity variance sigma_I^2 = Var[h_a] / E[h_a]^2."""
    if marginal.kind == "unity":
        return 0.0
    if marginal.kind == "lognormal":
        return math.exp(marginal.sigma_ln_sq) - 1.0
    a, b = marginal.alpha, marginal.beta
    return 1.0 / a + 1.0 / b + 1.0 / (a * b)


def gg_quantile_table(
    alpha: float,
    beta: float,
    resolution: int = TABLE_RESOLUTION,
    seed: int = seeds.TABLE_SEED,
    samples: int = TABLE_SAMPLES,
) -> np.ndarray:
    """Empirical quantile function of the Gamma-Gamma product I = X * Y.

    X ~ Gamma(alpha, 1/alpha), Y ~ Gamma(beta, 1/beta); the table holds the
    sorted-sample quantiles at probabilities (i + 0.5) / resolution.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be > 0")
    if resolution < 1024:
        raise ValueError("resolution must be >= 1024")
    if samples < 1_000_000:
        raise ValueError("table needs at least 1e6 samples")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.gamma(alpha, 1.0 / alpha, samples)
    y = rng.gamma(beta, 1.0 / beta, samples)
    prod = np.sort(x * y)
    probs = (np.arange(resolution, dtype=np.float64) + 0.5) / resolution
    idx = np.minimum((probs * samples).astype(np.int64), samples - 1)
    return prod[idx].copy()


def table_probs(resolution: int) -> np.ndarray:
    """Midpoint probabilities the quantile table is evaluated at."""
    return (np.arange(resolution, dtype=np.float64) + 0.5) / resolution


def write_quantile_table(path, table: np.ndarray) -> None:
    """Serialize a table as little-endian float64, u64-length-prefixed."""
    data = np.asarray(table, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(data)))
        fh.write(data.tobytes())


def read_quantile_table(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<Q", fh.read(8))
        raw = fh.read(8 * n)
    if len(raw) != 8 * n:
        raise ValueError(f"truncated quantile table file {path}")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64)


def table_cache_name(alpha: float, beta: float, resolution: int, seed: int) -> str:
    """Stable file name for a cached table keyed by its parameters."""
    return f"ggtab_a{alpha:.9e}_b{beta:.9e}_r{resolution}_s{seed:x}.bin"


# In-memory cache so live cn2 updates that toggle the marginal back and
# forth do not rebuild tables.
_table_cache: dict[tuple[float, float, int, int], np.ndarray] = {}


def _cached_table(alpha, beta, resolution, seed, cache_dir=None) -> np.ndarray:
    key = (alpha, beta, resolution, seed)
    if key in _table_cache:
        return _table_cache[key]
    table = None
    path = None
    if cache_dir is not None:
        import os

        path = os.path.join(cache_dir, table_cache_name(alpha, beta, resolution, seed))
        if os.path.exists(path):
            table = read_quantile_table(path)
    if table is None:
        table = gg_quantile_table(alpha, beta, resolution, seed)
        if path is not None:
            write_quantile_table(path, table)
    _table_cache[key] = table
    return table


def build_marginal(params: ChannelParams, table_cache_dir=None) -> TurbulenceMarginal:
    """Select and construct the fading marginal for the given link.

    Auto rule: sigma_R^2 = 0 -> unity; below 1 -> log-normal with
    sigma_ln^2 = ln(1 + sigma_R^2); at or above 1 -> Gamma-Gamma.
    """
    override = params.model_override
    srs = rytov_variance(params.cn2, params.wavelength, params.distance)
    if override == "none":
        return TurbulenceMarginal(kind="unity")
    if override == "lognormal" or (override == "auto" and 0.0 < srs < 1.0):
        return TurbulenceMarginal(kind="lognormal", sigma_ln_sq=math.log1p(srs))
    if override == "gammagamma" or (override == "auto" and srs >= 1.0):
        alpha, beta = gamma_gamma_params(srs)
        table = _cached_table(
            alpha, beta, TABLE_RESOLUTION, seeds.TABLE_SEED, table_cache_dir
        )
        return TurbulenceMarginal(
            kind="gammagamma", alpha=alpha, beta=beta, quantile_table=table
        )
    return TurbulenceMarginal(kind="unity")  # auto with sigma_R^2 == 0


def coherence_time(wind_speed: float, wavelength: float, distance: float) -> float:
    """Frozen-flow coherence time: Fresnel scale sqrt(lambda*L) over wind."""
    if wind_speed <= 0:
        raise ValueError("wind_speed must be > 0")
    return math.sqrt(wavelength * distance) / wind_speed


def ar1_coefficient(tick_interval: float, tau_c: float) -> float:
    """Per-tick AR(1) coefficient rho = exp(-tick / tau_c)."""
    return math.exp(-tick_interval / tau_c)


@dataclass
class FadingProcess:
    """Stateful correlated scintillation generator (Gaussian copula).

    Single-owner mutable state: advance it from one logical thread only.
    Identical seeds and parameters give bitwise-identical sample paths.
    """

    rho: float
    marginal: TurbulenceMarginal
    rng: np.random.Generator
    latent: float = 0.0

    @classmethod
    def from_params(
        cls, params: ChannelParams, master_seed: int, table_cache_dir=None
    ) -> "FadingProcess":
        marginal = build_marginal(params, table_cache_dir)
        rho = ar1_coefficient(
            params.tick_interval,
            coherence_time(params.wind_speed, params.wavelength, params.distance),
        )
        return cls(
            rho=rho,
            marginal=marginal,
            rng=seeds.make_stream(master_seed, seeds.STREAM_FADING),
        )

    def retune(self, params: ChannelParams, table_cache_dir=None) -> None:
        """Recompute marginal and rho for updated params, keeping the latent."""
        self.marginal = build_marginal(params, table_cache_dir)
        self.rho = ar1_coefficient(
            params.tick_interval,
            coherence_time(params.wind_speed, params.wavelength, params.distance),
        )

    def next_gains(self, n: int) -> np.ndarray:
        """Draw the next `n` per-tick gains h_a, advancing the state."""
        z = self.rng.standard_normal(n)
        latents, self.latent = ar1_path(self.latent, self.rho, z)
        return gains_from_latents(latents, self.marginal)

    def next_gain(self) -> float:
        """Draw the next tick's gain h_a."""
        return float(self.next_gains(1)[0])


def gains_from_latents(latents: np.ndarray, marginal: TurbulenceMarginal) -> np.ndarray:
    """Map latent normals through the marginal quantile function.

    Nondecreasing in the latent for every marginal; always positive.
    """
    if marginal.kind == "unity":
        return np.ones(len(latents), dtype=np.float64)
    if marginal.kind == "lognormal":
        s = math.sqrt(marginal.sigma_ln_sq)
        return np.exp(-0.5 * marginal.sigma_ln_sq + s * latents)
    table = marginal.quantile_table
    res = len(table)
    probs = table_probs(res)
    u = ndtr(latents)
    j = np.searchsorted(probs, u)
    jlo = np.clip(j - 1, 0, res - 1)
    jhi = np.clip(j, 0, res - 1)
    plo = probs[jlo]
    span = probs[jhi] - plo
    w = np.clip((u - plo) / np.where(span > 0, span, 1.0), 0.0, 1.0)
    return table[jlo] + (table[jhi] - table[jlo]) * w


def path_loss(attenuation_db_per_km: float, distance: float) -> float:
    """Deterministic gain h_l = 10^(-attenuation * km / 10), in (0, 1]."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    if attenuation_db_per_km < 0:
        raise ValueError("attenuation must be >= 0")
    return 10.0 ** (-attenuation_db_per_km * (distance / 1000.0) / 10.0)


@dataclass(frozen=True)
class PointingGeometry:
    """Derived Gaussian-beam/aperture quantities for the pointing model.

    a0 is the peak (zero-displacement) collection fraction; w_eq_sq the
    equivalent beam width squared.
    """

    a0: float
    w_eq_sq: float

    @classmethod
    def from_params(cls, params: ChannelParams) -> "PointingGeometry":
        nu = math.sqrt(math.pi) * params.aperture_radius / (math.sqrt(2.0) * params.beam_waist)
        erf_nu = math.erf(nu)
        a0 = erf_nu * erf_nu
        w_eq_sq = (
            params.beam_waist ** 2
            * math.sqrt(math.pi)
            * erf_nu
            / (2.0 * nu * math.exp(-nu * nu))
        )
        return cls(a0=a0, w_eq_sq=w_eq_sq)


def pointing_loss_samples(
    params: ChannelParams, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Draw `n` pointing gains h_p = A0 * exp(-2 r^2 / w_eq^2), r Rayleigh."""
    geom = PointingGeometry.from_params(params)
    r = rng.rayleigh(params.pointing_jitter_sigma, n)
    return geom.a0 * np.exp(-2.0 * r * r / geom.w_eq_sq)


def pointing_loss_sample(params: ChannelParams, rng: np.random.Generator) -> float:
    return float(pointing_loss_samples(params, rng, 1)[0])


def pointing_mean(params: ChannelParams) -> float:
    """Closed-form E[h_p] = A0 * g^2 / (g^2 + 1), g = w_eq / (2 sigma_s)."""
    geom = PointingGeometry.from_params(params)
    if params.pointing_jitter_sigma == 0:
        return geom.a0
    g_sq = geom.w_eq_sq / (4.0 * params.pointing_jitter_sigma ** 2)
    return geom.a0 * g_sq / (g_sq + 1.0)


def composite_gain(h_l: float, h_a, h_p):
    """Total multiplicative channel gain h = h_l * h_a * h_p."""
    return h_l * h_a * h_p
