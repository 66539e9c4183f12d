// Engine connectivity: WebSocket subscription with exponential backoff and
// ParamUpdate sending over POST /params.  Transports are injectable so the
// logic is testable without a browser or a live engine.

import { MetricsRecord, ParamUpdate, UpdateAck } from "./protocol.js";

export interface WsLike {
    onopen: ((ev?: unknown) => void) | null;
    onmessage: ((ev: { data: string }) => void) | null;
    onclose: ((ev?: unknown) => void) | null;
    onerror: ((ev?: unknown) => void) | null;
    close(): void;
}

export interface ConnectionHooks {
    wsFactory?: (url: string) => WsLike;
    fetchFn?: typeof fetch;
    setTimer?: (fn: () => void, ms: number) => unknown;
    onState?: (state: "disconnected" | "connecting" | "live") => void;
    onRecord?: (record: MetricsRecord) => void;
}

export const BACKOFF_BASE_MS = 1000;
export const BACKOFF_CAP_MS = 30_000;
export const SEND_TIMEOUT_MS = 5_000;

/** Exponential backoff: 1 s, 2 s, 4 s, ... capped at 30 s. */
export function backoffMs(attempt: number): number {
    return Math.min(BACKOFF_CAP_MS, BACKOFF_BASE_MS * Math.pow(2, attempt));
}

export function wsUrl(endpoint: string): string {
    return endpoint.replace(/^http/, "ws").replace(/\/$/, "") + "/ws";
}

export class EngineConnection {
    private attempt = 0;
    private ws: WsLike | null = null;
    private closed = false;

    constructor(private endpoint: string, private hooks: ConnectionHooks = {}) {}

    connect(): void {
        if (this.closed) return;
        const factory = this.hooks.wsFactory
            ?? ((url: string) => new WebSocket(url) as unknown as WsLike);
        this.hooks.onState?.("connecting");
        let ws: WsLike;
        try {
            ws = factory(wsUrl(this.endpoint));
        } catch {
            this.scheduleReconnect();
            return;
        }
        this.ws = ws;
        ws.onopen = () => {
            this.attempt = 0;
            this.hooks.onState?.("live");
        };
        ws.onmessage = (ev) => {
            let data: unknown;
            try {
                data = JSON.parse(ev.data);
            } catch {
                return;
            }
            // acks to inbound WS updates carry "ok"; everything else is a record
            if (data && typeof data === "object" && !("ok" in (data as object))) {
                this.hooks.onRecord?.(data as MetricsRecord);
            }
        };
        ws.onerror = () => undefined;
        ws.onclose = () => {
            this.ws = null;
            if (!this.closed) this.scheduleReconnect();
        };
    }

    private scheduleReconnect(): void {
        this.hooks.onState?.("connecting");
        const wait = backoffMs(this.attempt);
        this.attempt += 1;
        const timer = this.hooks.setTimer ?? ((fn: () => void, ms: number) => setTimeout(fn, ms));
        timer(() => this.connect(), wait);
    }

    close(): void {
        this.closed = true;
        this.ws?.close();
        this.hooks.onState?.("disconnected");
    }

    /** POST a ParamUpdate; never throws. */
    async sendParamUpdate(update: ParamUpdate): Promise<UpdateAck> {
        const fetchFn = this.hooks.fetchFn ?? fetch;
        const controller = typeof AbortController !== "undefined" ? new AbortController() : null;
        const timer = controller
            ? setTimeout(() => controller.abort(), SEND_TIMEOUT_MS)
            : null;
        try {
            const resp = await fetchFn(`${this.endpoint}/params`, {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify(update),
                signal: controller?.signal ?? null,
            });
            const body = await resp.json().catch(() => ({}));
            if (resp.ok) {
                return { ok: true, applied: (body as { applied?: ParamUpdate }).applied ?? update };
            }
            return { ok: false, error: (body as { error?: string }).error ?? `HTTP ${resp.status}` };
        } catch {
            return { ok: false, error: "update timed out" };
        } finally {
            if (timer !== null) clearTimeout(timer);
        }
    }
}
