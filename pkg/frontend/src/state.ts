// Dashboard state and its pure transition functions.  Rendering is a pure
// function of this object, so every transition returns a fresh state.

import { PARAM_BOUNDS, TunableParam } from "./bounds.gen.js";
import { MetricsRecord, ParamUpdate } from "./protocol.js";

export type ConnectionState = "disconnected" | "connecting" | "live";

export const METRICS_WINDOW = 600;

export interface SliderState {
    /** value currently shown on the control */
    value: number;
    /** last engine-acknowledged value, for revert on rejection */
    committed: number;
    /** a send is in flight */
    pending: boolean;
}

export interface UiState {
    connection: ConnectionState;
    sliders: Record<TunableParam, SliderState>;
    metricsWindow: MetricsRecord[];
    latestFrameUrl: string | null;
    notice: string | null;
}

export const SLIDER_DEFAULTS: Record<TunableParam, number> = {
    cn2: 1e-15,
    wind_speed: 1.0,
    attenuation_db_per_km: 3.0,
    pointing_jitter_sigma: 0.01,
    noise_sigma: 0.02,
};

export function newUiState(): UiState {
    const sliders = {} as Record<TunableParam, SliderState>;
    for (const name of Object.keys(PARAM_BOUNDS) as TunableParam[]) {
        const value = SLIDER_DEFAULTS[name];
        sliders[name] = { value, committed: value, pending: false };
    }
    return {
        connection: "disconnected",
        sliders,
        metricsWindow: [],
        latestFrameUrl: null,
        notice: null,
    };
}

export function withConnection(state: UiState, connection: ConnectionState): UiState {
    return { ...state, connection };
}

/** Append a record keeping the window ordered by t and capped. */
export function appendRecord(state: UiState, record: MetricsRecord): UiState {
    let window = [...state.metricsWindow, record];
    if (window.length > 1 && record.t < window[window.length - 2].t) {
        window = window.sort((a, b) => a.t - b.t);
    }
    if (window.length > METRICS_WINDOW) {
        window = window.slice(window.length - METRICS_WINDOW);
    }
    return { ...state, metricsWindow: window };
}

export function clampToBounds(name: TunableParam, value: number): number {
    const { min, max } = PARAM_BOUNDS[name];
    return Math.min(max, Math.max(min, value));
}

export function isWithinBounds(name: TunableParam, value: number): boolean {
    const { min, max } = PARAM_BOUNDS[name];
    return isFinite(value) && value >= min && value <= max;
}

export function withSliderValue(state: UiState, name: TunableParam, value: number): UiState {
    const sliders = { ...state.sliders, [name]: { ...state.sliders[name], value } };
    return { ...state, sliders };
}

export function withSendPending(state: UiState, name: TunableParam): UiState {
    const sliders = { ...state.sliders, [name]: { ...state.sliders[name], pending: true } };
    return { ...state, sliders };
}

/** Engine acknowledged: lock the slider in. */
export function withSendAccepted(state: UiState, update: ParamUpdate): UiState {
    const sliders = { ...state.sliders };
    for (const [name, value] of Object.entries(update) as [TunableParam, number][]) {
        sliders[name] = { value, committed: value, pending: false };
    }
    return { ...state, sliders, notice: null };
}

/** Engine rejected (or timeout): revert to the last committed value. */
export function withSendRejected(state: UiState, name: TunableParam, reason: string): UiState {
    const slider = state.sliders[name];
    const sliders = {
        ...state.sliders,
        [name]: { ...slider, value: slider.committed, pending: false },
    };
    return { ...state, sliders, notice: reason };
}

export function withLatestFrame(state: UiState, url: string | null): UiState {
    return { ...state, latestFrameUrl: url };
}

export function withNotice(state: UiState, notice: string | null): UiState {
    return { ...state, notice };
}

/** Cumulative/tile values derived from the record window. */
export function tileStats(state: UiState) {
    const window = state.metricsWindow;
    const last = window.length ? window[window.length - 1] : null;
    let packetsOk = 0;
    let packetsLost = 0;
    for (const rec of window) {
        packetsOk += rec.packets_ok;
        packetsLost += rec.packets_lost;
    }
    return {
        packetsOk,
        packetsLost,
        framesDelivered: last ? last.frames_delivered : 0,
        framesConcealed: last ? last.frames_concealed : 0,
        lastPsnr: last ? last.psnr_db : null,
        t: last ? last.t : null,
    };
}
