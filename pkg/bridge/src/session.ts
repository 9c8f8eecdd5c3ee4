/**
 * One NDJSON protocol session: hello first, then one response per request id.
 *
 * Every response is emitted as a single write of one complete line, so two
 * responses can never interleave bytes even when requests finish out of
 * order. Caption requests hop through the macrotask queue (the image work is
 * the "slow model" here) while refine requests answer inline; a caption
 * followed immediately by a refine therefore completes after it, which
 * exercises clients' out-of-order correlation.
 */

import {
  CAPTIONER_ID,
  REFINER_ID,
  EmptyCaptionList,
  UnsupportedTask,
  captionImage,
  refineCaptions,
} from "./models.js";
import { PgmError, decodePgm } from "./pgm.js";

export const PROTOCOL_VERSION = 1;

export type ErrCode = "model_unavailable" | "bad_request" | "internal";

export type WriteLine = (line: string) => void;

export interface SessionOptions {
  /** Capabilities to withhold, for serving with a model deliberately absent. */
  disable?: string[];
}

const ALL_CAPABILITIES = ["caption", "refine"] as const;

function nextMacrotask(): Promise<void> {
  return new Promise((resolve) => setImmediate(resolve));
}

export class Session {
  private readonly write: WriteLine;
  private readonly capabilities: string[];

  constructor(write: WriteLine, options: SessionOptions = {}) {
    this.write = write;
    const disabled = new Set(options.disable ?? []);
    this.capabilities = ALL_CAPABILITIES.filter((c) => !disabled.has(c));
  }

  private send(message: Record<string, unknown>): void {
    this.write(JSON.stringify({ v: PROTOCOL_VERSION, ...message }));
  }

  private sendErr(id: unknown, code: ErrCode, message: string): void {
    this.send({ type: "err", id: id === undefined ? null : id, code, message });
  }

  /** Announce capabilities and model identity; must be the first line out. */
  hello(): void {
    const models: Record<string, string> = {};
    if (this.capabilities.includes("caption")) models.captioner = CAPTIONER_ID;
    if (this.capabilities.includes("refine")) models.refiner = REFINER_ID;
    this.send({
      type: "hello",
      capabilities: this.capabilities,
      models,
      deterministic: true,
    });
  }

  /**
   * Handle one request line. Never rejects: protocol faults become err
   * frames. The returned promise resolves once the response has been written.
   */
  async handleLine(line: string): Promise<void> {
    if (line.trim() === "") return;
    let message: unknown;
    try {
      message = JSON.parse(line);
    } catch {
      this.sendErr(null, "bad_request", "unparseable line");
      return;
    }
    if (typeof message !== "object" || message === null || Array.isArray(message)) {
      this.sendErr(null, "bad_request", "request must be a JSON object");
      return;
    }
    const request = message as Record<string, unknown>;
    const id = request.id;
    if (id === undefined || id === null) {
      this.sendErr(null, "bad_request", "missing request id");
      return;
    }
    if (request.v !== undefined && request.v !== PROTOCOL_VERSION) {
      this.sendErr(id, "bad_request", `unsupported protocol version ${request.v}`);
      return;
    }
    switch (request.type) {
      case "caption_req":
        await this.handleCaption(id, request);
        return;
      case "refine_req":
        this.handleRefine(id, request);
        return;
      default:
        this.sendErr(id, "bad_request", `unknown request type ${JSON.stringify(request.type)}`);
    }
  }

  private async handleCaption(id: unknown, request: Record<string, unknown>): Promise<void> {
    if (!this.capabilities.includes("caption")) {
      this.sendErr(id, "model_unavailable", "no captioner is loaded");
      return;
    }
    const encoded = request.image_pgm_b64;
    if (typeof encoded !== "string" || encoded === "") {
      this.sendErr(id, "bad_request", "image_pgm_b64 must be a non-empty string");
      return;
    }
    await nextMacrotask();
    try {
      const image = decodePgm(Buffer.from(encoded, "base64"));
      this.send({ type: "caption_res", id, caption: captionImage(image) });
    } catch (error) {
      if (error instanceof PgmError) {
        this.sendErr(id, "bad_request", `bad image payload: ${error.message}`);
      } else {
        this.sendErr(id, "internal", String(error));
      }
    }
  }

  private handleRefine(id: unknown, request: Record<string, unknown>): void {
    if (!this.capabilities.includes("refine")) {
      this.sendErr(id, "model_unavailable", "no refiner is loaded");
      return;
    }
    const { task, captions } = request;
    if (typeof task !== "string") {
      this.sendErr(id, "bad_request", "task must be a string");
      return;
    }
    if (!Array.isArray(captions) || !captions.every((c) => typeof c === "string")) {
      this.sendErr(id, "bad_request", "captions must be a list of strings");
      return;
    }
    try {
      this.send({ type: "refine_res", id, text: refineCaptions(task, captions) });
    } catch (error) {
      if (error instanceof UnsupportedTask || error instanceof EmptyCaptionList) {
        this.sendErr(id, "bad_request", error.message);
      } else {
        this.sendErr(id, "internal", String(error));
      }
    }
  }
}
