/**
 * Deterministic caption and refine models.
 *
 * Both run greedy/rule-based decoding so a repeated request always yields the
 * same bytes; the served model ids are declared in the hello message.
 */

import { GrayImage } from "./pgm.js";

export const CAPTIONER_ID = "gray-stat-captioner-v1";
export const REFINER_ID = "rule-refiner-v1";

export const TASKS = ["summarize", "translate_passthrough"] as const;
export type RefineTaskName = (typeof TASKS)[number];

export class UnsupportedTask extends Error {}
export class EmptyCaptionList extends Error {}

/** FNV-1a over the pixel bytes; short stable fingerprint per image. */
function fingerprint(pixels: Uint8Array): string {
  let hash = 0x811c9dc5;
  for (const byte of pixels) {
    hash ^= byte;
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, "0").slice(0, 6);
}

export function captionImage(image: GrayImage): string {
  const { width, height, pixels } = image;
  let sum = 0;
  for (const byte of pixels) sum += byte;
  const mean = sum / pixels.length;
  let edgeSum = 0;
  for (let row = 0; row < height; row++) {
    const base = row * width;
    for (let col = 1; col < width; col++) {
      edgeSum += Math.abs(pixels[base + col] - pixels[base + col - 1]);
    }
  }
  const edges = width > 1 ? edgeSum / (height * (width - 1)) : 0;
  const tone = mean < 85 ? "low-light" : mean < 170 ? "overcast" : "sunlit";
  const texture = edges > 16 ? "busy" : "calm";
  return `${tone} ${texture} roadway, ${width}x${height} [${fingerprint(pixels)}]`;
}

function collapseRuns(captions: string[]): string[] {
  const out: string[] = [];
  for (const caption of captions) {
    if (out.length === 0 || out[out.length - 1] !== caption) out.push(caption);
  }
  return out;
}

export function refineCaptions(task: string, captions: string[]): string {
  if (!(TASKS as readonly string[]).includes(task)) {
    throw new UnsupportedTask(`unsupported task ${JSON.stringify(task)}`);
  }
  if (captions.length === 0) throw new EmptyCaptionList("nothing to refine");
  if (task === "summarize") {
    const runs = collapseRuns(captions);
    return `across ${captions.length} frames: ${runs.join("; ")}`;
  }
  return captions.join("; ");
}
