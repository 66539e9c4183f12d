// Tiny dependency-free SVG line charts.  Pure string generation so render
// output is snapshot-testable.

export interface Point {
    t: number;
    v: number;
}

export interface ChartOptions {
    width: number;
    height: number;
    logY: boolean;
    /** time gaps larger than this break the line (shows dropouts) */
    gapThreshold?: number;
    floor?: number; // smallest value representable on a log axis
}

const PAD = { left: 46, right: 8, top: 8, bottom: 18 };

export function chartSvg(series: { label: string; color: string; points: Point[] }[],
                         opts: ChartOptions): string {
    const inner = {
        w: opts.width - PAD.left - PAD.right,
        h: opts.height - PAD.top - PAD.bottom,
    };
    const all = series.flatMap((s) => s.points).filter((p) => usable(p, opts));
    if (all.length === 0) {
        return `<svg class="chart" viewBox="0 0 ${opts.width} ${opts.height}">` +
            `<text class="empty" x="${opts.width / 2}" y="${opts.height / 2}">no data</text></svg>`;
    }
    const t0 = Math.min(...all.map((p) => p.t));
    const t1 = Math.max(...all.map((p) => p.t));
    const yRange = yBounds(all, opts);
    const toX = (t: number) =>
        PAD.left + (t1 > t0 ? ((t - t0) / (t1 - t0)) * inner.w : inner.w / 2);
    const toY = (v: number) => {
        const y = opts.logY ? Math.log10(Math.max(v, opts.floor ?? 1e-12)) : v;
        const frac = (y - yRange.lo) / (yRange.hi - yRange.lo || 1);
        return PAD.top + (1 - frac) * inner.h;
    };
    const parts = [
        `<svg class="chart" viewBox="0 0 ${opts.width} ${opts.height}">`,
        axisLabels(yRange, opts, inner),
    ];
    for (const s of series) {
        const path = seriesPath(s.points, opts, toX, toY);
        if (path) parts.push(`<path class="line" stroke="${s.color}" d="${path}"/>`);
    }
    parts.push("</svg>");
    return parts.join("");
}

function usable(p: Point, opts: ChartOptions): boolean {
    if (!isFinite(p.t) || !isFinite(p.v)) return false;
    return !opts.logY || p.v > 0;
}

function yBounds(points: Point[], opts: ChartOptions) {
    const ys = points.map((p) =>
        opts.logY ? Math.log10(Math.max(p.v, opts.floor ?? 1e-12)) : p.v);
    let lo = Math.min(...ys);
    let hi = Math.max(...ys);
    if (lo === hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    return { lo, hi };
}

/** Build the path, breaking segments at dropouts and unplottable values. */
export function seriesPath(points: Point[], opts: ChartOptions,
                           toX: (t: number) => number, toY: (v: number) => number): string {
    const gap = opts.gapThreshold ?? inferGap(points);
    let path = "";
    let pen = false;
    let prevT: number | null = null;
    for (const p of points) {
        if (!usable(p, opts)) {
            pen = false;
            prevT = p.t;
            continue;
        }
        const broken = prevT !== null && gap > 0 && p.t - prevT > gap;
        const cmd = pen && !broken ? "L" : "M";
        path += `${cmd}${toX(p.t).toFixed(1)} ${toY(p.v).toFixed(1)}`;
        pen = true;
        prevT = p.t;
    }
    return path;
}

/** A dropout is any step over twice the median reporting interval. */
export function inferGap(points: Point[]): number {
    const deltas: number[] = [];
    for (let i = 1; i < points.length; i++) {
        const d = points[i].t - points[i - 1].t;
        if (d > 0) deltas.push(d);
    }
    if (deltas.length === 0) return 0;
    deltas.sort((a, b) => a - b);
    return 2.0 * deltas[Math.floor(deltas.length / 2)];
}

function axisLabels(yRange: { lo: number; hi: number }, opts: ChartOptions,
                    inner: { w: number; h: number }): string {
    const fmt = (y: number) => (opts.logY ? `1e${y.toFixed(0)}` : trim(y));
    return (
        `<text class="tick" x="2" y="${PAD.top + 10}">${fmt(yRange.hi)}</text>` +
        `<text class="tick" x="2" y="${PAD.top + inner.h}">${fmt(yRange.lo)}</text>`
    );
}

function trim(v: number): string {
    if (v === 0) return "0";
    if (Math.abs(v) >= 100) return v.toFixed(0);
    if (Math.abs(v) >= 1) return v.toFixed(1);
    return v.toPrecision(2);
}
