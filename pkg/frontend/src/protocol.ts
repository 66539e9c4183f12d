// Wire types for the engine's control API: newline-delimited MetricsRecord
// JSON on GET /metrics and the WebSocket, ParamUpdate JSON inbound.

export interface ParamsInEffect {
    cn2: number;
    wind_speed: number;
    attenuation_db_per_km: number;
    pointing_jitter_sigma: number;
    noise_sigma: number;
}

export interface MetricsRecord {
    t: number;
    h_mean: number;
    h_min: number;
    ber_pre_fec: number;
    ber_post_fec: number;
    packets_ok: number;
    packets_lost: number;
    frames_delivered: number;
    frames_concealed: number;
    /** dB; "inf" is the engine's lossless sentinel; null when no frame
     * finalized in the interval. */
    psnr_db: number | "inf" | null;
    params_in_effect: ParamsInEffect;
}

export type ParamUpdate = Partial<Record<keyof ParamsInEffect, number>>;

export interface UpdateAck {
    ok: boolean;
    applied?: ParamUpdate;
    error?: string;
}

export function parseRecord(line: string): MetricsRecord {
    const data = JSON.parse(line);
    if (typeof data.t !== "number" || typeof data.params_in_effect !== "object") {
        throw new Error(`not a metrics record: ${line.slice(0, 80)}`);
    }
    return data as MetricsRecord;
}

/** Parse every complete record out of an NDJSON buffer; returns records and
 * the unconsumed tail (a partial trailing line). */
export function parseNdjsonChunk(buffer: string): { records: MetricsRecord[]; rest: string } {
    const parts = buffer.split("\n");
    const rest = parts.pop() ?? "";
    const records: MetricsRecord[] = [];
    for (const part of parts) {
        if (part.trim().length === 0) continue;
        records.push(parseRecord(part));
    }
    return { records, rest };
}

export function formatPsnr(value: MetricsRecord["psnr_db"]): string {
    if (value === "inf") return "∞ (lossless)";
    if (value === null) return "—";
    return `${value.toFixed(1)} dB`;
}

export function formatBer(value: number): string {
    if (value === 0) return "0";
    return value.toExponential(2);
}

export function formatSi(value: number, digits = 3): string {
    if (!isFinite(value)) return "—";
    if (value !== 0 && (Math.abs(value) < 1e-3 || Math.abs(value) >= 1e4)) {
        return value.toExponential(digits - 1);
    }
    return value.toPrecision(digits);
}
