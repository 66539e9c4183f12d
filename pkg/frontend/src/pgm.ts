// Minimal binary PGM (P5, maxval 255) parsing for the frame preview.

export interface GrayImage {
    width: number;
    height: number;
    pixels: Uint8Array;
}

export function parsePgm(data: Uint8Array): GrayImage {
    if (data[0] !== 0x50 || data[1] !== 0x35) {
        throw new Error("not a P5 PGM");
    }
    let pos = 2;
    const fields: number[] = [];
    while (fields.length < 3) {
        if (pos >= data.length) throw new Error("truncated PGM header");
        const c = data[pos];
        if (c === 0x23) {
            while (pos < data.length && data[pos] !== 0x0a) pos++;
        } else if (c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d) {
            pos++;
        } else if (c >= 0x30 && c <= 0x39) {
            let value = 0;
            while (pos < data.length && data[pos] >= 0x30 && data[pos] <= 0x39) {
                value = value * 10 + (data[pos] - 0x30);
                pos++;
            }
            fields.push(value);
        } else {
            throw new Error("unexpected byte in PGM header");
        }
    }
    pos++; // single whitespace before the raster
    const [width, height, maxval] = fields;
    if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
    const pixels = data.slice(pos, pos + width * height);
    if (pixels.length !== width * height) throw new Error("truncated PGM raster");
    return { width, height, pixels };
}
