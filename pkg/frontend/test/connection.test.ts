import { describe, expect, it } from "vitest";

import {
    backoffMs,
    EngineConnection,
    WsLike,
    wsUrl,
} from "../src/connection.js";

class FakeWs implements WsLike {
    onopen: ((ev?: unknown) => void) | null = null;
    onmessage: ((ev: { data: string }) => void) | null = null;
    onclose: ((ev?: unknown) => void) | null = null;
    onerror: ((ev?: unknown) => void) | null = null;
    closed = false;
    constructor(public url: string) {}
    close() { this.closed = true; }
}

function harness() {
    const sockets: FakeWs[] = [];
    const timers: { fn: () => void; ms: number }[] = [];
    const states: string[] = [];
    const records: unknown[] = [];
    const conn = new EngineConnection("http://engine:8080", {
        wsFactory: (url) => {
            const ws = new FakeWs(url);
            sockets.push(ws);
            return ws;
        },
        setTimer: (fn, ms) => timers.push({ fn, ms }),
        onState: (s) => states.push(s),
        onRecord: (r) => records.push(r),
    });
    return { conn, sockets, timers, states, records };
}

describe("connect", () => {
    it("transitions disconnected -> connecting -> live", () => {
        const h = harness();
        h.conn.connect();
        expect(h.sockets[0].url).toBe("ws://engine:8080/ws");
        expect(h.states).toEqual(["connecting"]);
        h.sockets[0].onopen?.();
        expect(h.states).toEqual(["connecting", "live"]);
    });

    it("parses records and ignores acks", () => {
        const h = harness();
        h.conn.connect();
        h.sockets[0].onopen?.();
        h.sockets[0].onmessage?.({ data: '{"t": 0.5, "params_in_effect": {}}' });
        h.sockets[0].onmessage?.({ data: '{"ok": true, "applied": {}}' });
        h.sockets[0].onmessage?.({ data: "garbage" });
        expect(h.records).toHaveLength(1);
    });

    it("reconnects with exponential backoff capped at 30 s", () => {
        const h = harness();
        h.conn.connect();
        const expected = [1000, 2000, 4000, 8000, 16000, 30000, 30000];
        for (const ms of expected) {
            h.sockets[h.sockets.length - 1].onclose?.();
            expect(h.timers[h.timers.length - 1].ms).toBe(ms);
            h.timers[h.timers.length - 1].fn();
        }
        expect(h.sockets.length).toBe(expected.length + 1);
        expect(h.states.filter((s) => s === "connecting").length).toBeGreaterThan(expected.length);
    });

    it("resets the backoff after a successful open", () => {
        const h = harness();
        h.conn.connect();
        h.sockets[0].onclose?.();
        h.timers[0].fn();
        h.sockets[1].onopen?.();
        h.sockets[1].onclose?.();
        expect(h.timers[1].ms).toBe(1000);
    });

    it("stops reconnecting after close()", () => {
        const h = harness();
        h.conn.connect();
        h.conn.close();
        h.sockets[0].onclose?.();
        expect(h.timers).toHaveLength(0);
        expect(h.states[h.states.length - 1]).toBe("disconnected");
    });
});

describe("backoffMs", () => {
    it("doubles from one second and caps", () => {
        expect([0, 1, 2, 3, 4, 5, 9].map(backoffMs)).toEqual(
            [1000, 2000, 4000, 8000, 16000, 30000, 30000]);
    });
});

describe("sendParamUpdate", () => {
    const mkFetch = (status: number, body: unknown) =>
        (async () => ({
            ok: status >= 200 && status < 300,
            status,
            json: async () => body,
        })) as unknown as typeof fetch;

    it("locks in on 200", async () => {
        const conn = new EngineConnection("http://engine:8080", {
            fetchFn: mkFetch(200, { applied: { wind_speed: 6 } }),
        });
        const ack = await conn.sendParamUpdate({ wind_speed: 6 });
        expect(ack).toEqual({ ok: true, applied: { wind_speed: 6 } });
    });

    it("surfaces the 422 reason", async () => {
        const conn = new EngineConnection("http://engine:8080", {
            fetchFn: mkFetch(422, { error: "cn2 must be >= 0" }),
        });
        const ack = await conn.sendParamUpdate({ cn2: -1 });
        expect(ack).toEqual({ ok: false, error: "cn2 must be >= 0" });
    });

    it("maps transport failure to a timeout notice", async () => {
        const failing = (async () => { throw new Error("boom"); }) as unknown as typeof fetch;
        const conn = new EngineConnection("http://engine:8080", { fetchFn: failing });
        const ack = await conn.sendParamUpdate({ wind_speed: 2 });
        expect(ack.ok).toBe(false);
        expect(ack.error).toBe("update timed out");
    });
});

describe("wsUrl", () => {
    it("maps http(s) endpoints to ws(s)", () => {
        expect(wsUrl("http://x:1/")).toBe("ws://x:1/ws");
        expect(wsUrl("https://x")).toBe("wss://x/ws");
    });
});
