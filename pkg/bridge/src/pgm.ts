/** Binary PGM (P5) decoding for caption requests. */

export class PgmError extends Error {}

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major intensities, one byte per pixel. */
  pixels: Uint8Array;
}

const WHITESPACE = new Set([0x20, 0x09, 0x0a, 0x0d, 0x0b, 0x0c]);

/**
 * Read the next header token, skipping whitespace and `#` comments.
 * Returns the token and the offset of the byte after it.
 */
function nextToken(data: Uint8Array, offset: number): [string, number] {
  while (offset < data.length) {
    if (WHITESPACE.has(data[offset])) {
      offset += 1;
    } else if (data[offset] === 0x23 /* '#' */) {
      while (offset < data.length && data[offset] !== 0x0a) offset += 1;
    } else {
      break;
    }
  }
  const start = offset;
  while (offset < data.length && !WHITESPACE.has(data[offset])) offset += 1;
  if (start === offset) throw new PgmError("truncated header");
  return [Buffer.from(data.subarray(start, offset)).toString("ascii"), offset];
}

function headerInt(token: string, field: string): number {
  if (!/^\d+$/.test(token)) throw new PgmError(`bad ${field}: ${token}`);
  return parseInt(token, 10);
}

export function decodePgm(data: Uint8Array): GrayImage {
  let offset: number;
  let token: string;
  [token, offset] = nextToken(data, 0);
  if (token !== "P5") throw new PgmError(`not a binary PGM (magic ${token})`);
  let width: number, height: number, maxval: number;
  [token, offset] = nextToken(data, offset);
  width = headerInt(token, "width");
  [token, offset] = nextToken(data, offset);
  height = headerInt(token, "height");
  [token, offset] = nextToken(data, offset);
  maxval = headerInt(token, "maxval");
  if (width < 1 || height < 1) throw new PgmError(`empty image ${width}x${height}`);
  if (maxval < 1 || maxval > 255) throw new PgmError(`unsupported maxval ${maxval}`);
  offset += 1; // exactly one whitespace byte separates the header from pixels
  const expected = width * height;
  if (data.length - offset < expected) {
    throw new PgmError(`expected ${expected} pixels, got ${data.length - offset}`);
  }
  return { width, height, pixels: data.subarray(offset, offset + expected) };
}
