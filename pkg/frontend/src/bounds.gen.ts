// Generated by scripts/gen_bounds.py from the engine's tuning ranges.
// Do not edit by hand.

export const PARAM_BOUNDS = {
    cn2: { min: 1e-17, max: 1e-12 },
    wind_speed: { min: 0.1, max: 20.0 },
    attenuation_db_per_km: { min: 0.0, max: 20.0 },
    pointing_jitter_sigma: { min: 0.0, max: 0.1 },
    noise_sigma: { min: 0.0, max: 1.0 },
} as const;

export type TunableParam = keyof typeof PARAM_BOUNDS;
