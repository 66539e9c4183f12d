import { describe, expect, it } from "vitest";

import { MetricsRecord } from "../src/protocol.js";
import {
    appendRecord,
    clampToBounds,
    isWithinBounds,
    METRICS_WINDOW,
    newUiState,
    tileStats,
    withSendAccepted,
    withSendPending,
    withSendRejected,
    withSliderValue,
} from "../src/state.js";

function record(t: number, extra: Partial<MetricsRecord> = {}): MetricsRecord {
    return {
        t, h_mean: 0.5, h_min: 0.4, ber_pre_fec: 0, ber_post_fec: 0,
        packets_ok: 2, packets_lost: 1, frames_delivered: 4, frames_concealed: 1,
        psnr_db: "inf",
        params_in_effect: {
            cn2: 1e-15, wind_speed: 1, attenuation_db_per_km: 3,
            pointing_jitter_sigma: 0.01, noise_sigma: 0.02,
        },
        ...extra,
    };
}

describe("metrics window", () => {
    it("appends in order", () => {
        let state = newUiState();
        for (const t of [0.5, 1.0, 1.5]) state = appendRecord(state, record(t));
        expect(state.metricsWindow.map((r) => r.t)).toEqual([0.5, 1.0, 1.5]);
    });

    it("restores order for a late arrival", () => {
        let state = newUiState();
        for (const t of [0.5, 1.5, 1.0]) state = appendRecord(state, record(t));
        expect(state.metricsWindow.map((r) => r.t)).toEqual([0.5, 1.0, 1.5]);
    });

    it("caps the ring buffer", () => {
        let state = newUiState();
        for (let i = 0; i < METRICS_WINDOW + 50; i++) {
            state = appendRecord(state, record(i * 0.5));
        }
        expect(state.metricsWindow).toHaveLength(METRICS_WINDOW);
        expect(state.metricsWindow[0].t).toBe(50 * 0.5);
    });
});

describe("slider transitions", () => {
    it("locks in on acceptance", () => {
        let state = newUiState();
        state = withSendPending(withSliderValue(state, "wind_speed", 6), "wind_speed");
        expect(state.sliders.wind_speed.pending).toBe(true);
        state = withSendAccepted(state, { wind_speed: 6 });
        expect(state.sliders.wind_speed).toEqual({ value: 6, committed: 6, pending: false });
    });

    it("reverts on rejection with the reason visible", () => {
        let state = newUiState();
        const before = state.sliders.cn2.committed;
        state = withSendPending(withSliderValue(state, "cn2", 9e-13), "cn2");
        state = withSendRejected(state, "cn2", "cn2 must be >= 0");
        expect(state.sliders.cn2.value).toBe(before);
        expect(state.sliders.cn2.pending).toBe(false);
        expect(state.notice).toBe("cn2 must be >= 0");
    });
});

describe("bounds", () => {
    it("matches the engine-generated limits", () => {
        expect(isWithinBounds("wind_speed", 0.1)).toBe(true);
        expect(isWithinBounds("wind_speed", 20)).toBe(true);
        expect(isWithinBounds("wind_speed", 0.05)).toBe(false);
        expect(isWithinBounds("cn2", 1e-11)).toBe(false);
        expect(clampToBounds("wind_speed", 99)).toBe(20);
        expect(clampToBounds("noise_sigma", -2)).toBe(0);
    });
});

describe("tiles", () => {
    it("sums packets over the window but takes frame totals from the last record", () => {
        let state = newUiState();
        state = appendRecord(state, record(0.5, { frames_delivered: 10, frames_concealed: 2 }));
        state = appendRecord(state, record(1.0, { frames_delivered: 25, frames_concealed: 3 }));
        const stats = tileStats(state);
        expect(stats.packetsOk).toBe(4);
        expect(stats.packetsLost).toBe(2);
        expect(stats.framesDelivered).toBe(25);
        expect(stats.framesConcealed).toBe(3);
    });

    it("is safe on the empty window", () => {
        const stats = tileStats(newUiState());
        expect(stats.packetsOk).toBe(0);
        expect(stats.lastPsnr).toBe(null);
    });
});
