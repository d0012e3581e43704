/** Server-sent-events telemetry client built on fetch streaming. */

import type { TelemetryFrame } from "./types.js";

/**
 * Incremental SSE frame splitter. Feed raw text chunks in arrival order;
 * each call returns the data payloads of any events completed by that
 * chunk. Comment lines (keepalives) are dropped.
 */
export class SseParser {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk.replace(/\r\n/g, "\n");
    const out: string[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n\n")) >= 0) {
      const block = this.buffer.slice(0, idx);
      this.buffer = this.buffer.slice(idx + 2);
      const data = block
        .split("\n")
        .filter((line) => line.startsWith("data:"))
        .map((line) => line.slice(5).replace(/^ /, ""))
        .join("\n");
      if (data) out.push(data);
    }
    return out;
  }
}

export type StreamStatus = "connecting" | "open" | "closed" | "error";

export interface TelemetryStreamOptions {
  onFrame: (frame: TelemetryFrame) => void;
  onStatus?: (status: StreamStatus) => void;
  /** Reconnect delay in ms; 0 disables reconnection. */
  retryMs?: number;
}

/**
 * Reads the gateway's telemetry stream and hands decoded frames to the
 * caller. Reconnects after drops until stop() is called.
 */
export class TelemetryStream {
  private abort: AbortController | null = null;
  private stopped = true;

  constructor(
    private url: string,
    private opts: TelemetryStreamOptions,
  ) {}

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.abort?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      this.abort = new AbortController();
      this.opts.onStatus?.("connecting");
      try {
        const resp = await fetch(this.url, {
          signal: this.abort.signal,
          headers: { Accept: "text/event-stream" },
        });
        if (!resp.ok || !resp.body) {
          throw new Error(`stream returned ${resp.status}`);
        }
        this.opts.onStatus?.("open");
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SseParser();
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          for (const data of parser.push(decoder.decode(value, { stream: true }))) {
            this.opts.onFrame(JSON.parse(data) as TelemetryFrame);
          }
        }
      } catch {
        if (!this.stopped) this.opts.onStatus?.("error");
      }
      const retry = this.opts.retryMs ?? 2000;
      if (this.stopped || retry <= 0) break;
      await new Promise((resolve) => setTimeout(resolve, retry));
    }
    this.opts.onStatus?.("closed");
  }
}
