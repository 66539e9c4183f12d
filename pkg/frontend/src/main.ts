// Browser bootstrap: owns the UiState, mounts renderHtml output, and wires
// slider/connection events.  All engine mutation goes through ParamUpdate
// messages; everything else is read-only.

import { TunableParam } from "./bounds.gen.js";
import { EngineConnection } from "./connection.js";
import { parsePgm } from "./pgm.js";
import { renderHtml, sliderUnscale } from "./render.js";
import {
    appendRecord,
    clampToBounds,
    isWithinBounds,
    newUiState,
    UiState,
    withConnection,
    withLatestFrame,
    withNotice,
    withSendAccepted,
    withSendPending,
    withSendRejected,
    withSliderValue,
} from "./state.js";

function engineEndpoint(): string {
    const qs = new URLSearchParams(window.location.search).get("engine");
    if (qs) return qs.replace(/\/$/, "");
    return `${window.location.protocol}//${window.location.host}`;
}

let state: UiState = newUiState();
const root = document.getElementById("app") as HTMLElement;
const endpoint = engineEndpoint();

function setState(next: UiState): void {
    state = next;
    root.innerHTML = renderHtml(state);
}

const connection = new EngineConnection(endpoint, {
    onState: (conn) => setState(withConnection(state, conn)),
    onRecord: (record) => setState(appendRecord(state, record)),
});

root.addEventListener("input", (ev) => {
    const target = ev.target as HTMLInputElement;
    const name = target.dataset.param as TunableParam | undefined;
    if (!name) return;
    const value = sliderUnscale(name, Number(target.value));
    // update the numeric display without a full re-render while dragging
    const output = target.parentElement?.querySelector("output");
    if (output) output.textContent = value.toPrecision(3);
    state = withSliderValue(state, name, value);
});

root.addEventListener("change", async (ev) => {
    const target = ev.target as HTMLInputElement;
    const name = target.dataset.param as TunableParam | undefined;
    if (!name) return;
    const value = clampToBounds(name, sliderUnscale(name, Number(target.value)));
    if (!isWithinBounds(name, value)) {
        setState(withSendRejected(state, name, `${name} outside allowed range`));
        return;
    }
    setState(withSendPending(withSliderValue(state, name, value), name));
    const ack = await connection.sendParamUpdate({ [name]: value });
    if (ack.ok) {
        setState(withSendAccepted(state, ack.applied ?? { [name]: value }));
    } else {
        setState(withSendRejected(state, name, ack.error ?? "update rejected"));
    }
});

async function pollFrame(): Promise<void> {
    try {
        const resp = await fetch(`${endpoint}/frame/latest`);
        if (!resp.ok) return;
        const image = parsePgm(new Uint8Array(await resp.arrayBuffer()));
        const canvas = document.createElement("canvas");
        canvas.width = image.width;
        canvas.height = image.height;
        const ctx = canvas.getContext("2d");
        if (!ctx) return;
        const rgba = ctx.createImageData(image.width, image.height);
        for (let i = 0; i < image.pixels.length; i++) {
            const v = image.pixels[i];
            rgba.data[4 * i] = v;
            rgba.data[4 * i + 1] = v;
            rgba.data[4 * i + 2] = v;
            rgba.data[4 * i + 3] = 255;
        }
        ctx.putImageData(rgba, 0, 0);
        setState(withLatestFrame(state, canvas.toDataURL()));
    } catch {
        // frame endpoint missing: placeholder stays, charts unaffected
    }
}

async function start(): Promise<void> {
    setState(state);
    connection.connect();
    let cadenceMs = 500;
    try {
        const cfg = await (await fetch(`${endpoint}/config`)).json();
        cadenceMs = Math.max(100, cfg.report_interval * 1000);
    } catch {
        setState(withNotice(state, `engine unreachable at ${endpoint}`));
    }
    setInterval(pollFrame, cadenceMs);
}

start();
