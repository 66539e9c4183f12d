// renderHtml(state) -> markup string.  Pure: no DOM access, no clock, no
// randomness; main.ts mounts the result and wires events by delegation.

import { PARAM_BOUNDS, TunableParam } from "./bounds.gen.js";
import { chartSvg } from "./charts.js";
import { formatBer, formatPsnr, formatSi } from "./protocol.js";
import { tileStats, UiState } from "./state.js";

const SLIDER_LABELS: Record<TunableParam, string> = {
    cn2: "turbulence Cn² (m⁻²ᐟ³)",
    wind_speed: "wind speed (m/s)",
    attenuation_db_per_km: "attenuation (dB/km)",
    pointing_jitter_sigma: "pointing jitter σ (m)",
    noise_sigma: "receiver noise σ",
};

// cn2 spans five decades, so its slider works in log10 space
export function sliderScale(name: TunableParam, value: number): number {
    return name === "cn2" ? Math.log10(value) : value;
}

export function sliderUnscale(name: TunableParam, raw: number): number {
    return name === "cn2" ? Math.pow(10, raw) : raw;
}

export function renderHtml(state: UiState): string {
    return [
        header(state),
        `<main>`,
        slidersPanel(state),
        chartsPanel(state),
        sidePanel(state),
        `</main>`,
        state.notice ? `<div class="notice" role="alert">${escapeHtml(state.notice)}</div>` : "",
    ].join("\n");
}

function header(state: UiState): string {
    const cls = { disconnected: "bad", connecting: "warn", live: "ok" }[state.connection];
    return (
        `<header><h1>FSO link console</h1>` +
        `<span class="conn ${cls}" data-conn="${state.connection}">${state.connection}</span></header>`
    );
}

function slidersPanel(state: UiState): string {
    const rows = (Object.keys(PARAM_BOUNDS) as TunableParam[]).map((name) => {
        const bounds = PARAM_BOUNDS[name];
        const slider = state.sliders[name];
        const lo = sliderScale(name, bounds.min);
        const hi = sliderScale(name, bounds.max);
        const pos = sliderScale(name, slider.value);
        const step = (hi - lo) / 200;
        return (
            `<label class="param${slider.pending ? " pending" : ""}">` +
            `<span>${SLIDER_LABELS[name]}</span>` +
            `<input type="range" data-param="${name}" min="${lo}" max="${hi}" ` +
            `step="${step}" value="${pos}"/>` +
            `<output>${formatSi(slider.value)}</output></label>`
        );
    });
    return `<section class="panel sliders"><h2>channel controls</h2>${rows.join("")}</section>`;
}

function chartsPanel(state: UiState): string {
    const window = state.metricsWindow;
    const size = { width: 520, height: 130 };
    const hChart = chartSvg(
        [{ label: "h_mean", color: "#4ad", points: window.map((r) => ({ t: r.t, v: r.h_mean })) }],
        { ...size, logY: true },
    );
    const berChart = chartSvg(
        [
            { label: "pre-FEC", color: "#e66", points: window.map((r) => ({ t: r.t, v: r.ber_pre_fec })) },
            { label: "post-FEC", color: "#6c6", points: window.map((r) => ({ t: r.t, v: r.ber_post_fec })) },
        ],
        { ...size, logY: true, floor: 1e-9 },
    );
    const psnrChart = chartSvg(
        [{
            label: "psnr",
            color: "#fa4",
            points: window
                .filter((r) => typeof r.psnr_db === "number")
                .map((r) => ({ t: r.t, v: r.psnr_db as number })),
        }],
        { ...size, logY: false },
    );
    return (
        `<section class="panel charts">` +
        `<h2>mean gain h (log)</h2>${hChart}` +
        `<h2>BER pre/post FEC (log)</h2>${berChart}` +
        `<h2>PSNR (dB)</h2>${psnrChart}` +
        `</section>`
    );
}

function sidePanel(state: UiState): string {
    const stats = tileStats(state);
    const frame = state.latestFrameUrl
        ? `<img alt="latest received frame" src="${state.latestFrameUrl}"/>`
        : `<div class="placeholder">no frame yet</div>`;
    return (
        `<section class="panel side">` +
        `<h2>received frame</h2>${frame}` +
        `<h2>totals</h2><div class="tiles">` +
        tile("packets ok", String(stats.packetsOk)) +
        tile("packets lost", String(stats.packetsLost)) +
        tile("frames delivered", String(stats.framesDelivered)) +
        tile("frames concealed", String(stats.framesConcealed)) +
        tile("last PSNR", formatPsnr(stats.lastPsnr)) +
        tile("ber (last)", lastBer(state)) +
        `</div></section>`
    );
}

function lastBer(state: UiState): string {
    const window = state.metricsWindow;
    if (!window.length) return "—";
    return formatBer(window[window.length - 1].ber_post_fec);
}

function tile(label: string, value: string): string {
    return `<div class="tile"><span class="value">${value}</span><span class="label">${label}</span></div>`;
}

export function escapeHtml(text: string): string {
    return text.replace(/[&<>"']/g, (c) =>
        ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;" }[c] as string));
}
