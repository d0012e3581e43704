import { afterEach, describe, expect, it, vi } from "vitest";

import { SseParser, TelemetryStream, type StreamStatus } from "../src/sse.js";
import type { TelemetryFrame } from "../src/types.js";

describe("SseParser", () => {
  it("yields the payload of a complete event", () => {
    const parser = new SseParser();
    expect(parser.push('data: {"seq": 1}\n\n')).toEqual(['{"seq": 1}']);
  });

  it("reassembles events split across chunks", () => {
    const parser = new SseParser();
    expect(parser.push("da")).toEqual([]);
    expect(parser.push('ta: {"seq"')).toEqual([]);
    expect(parser.push(': 2}\n')).toEqual([]);
    expect(parser.push("\n")).toEqual(['{"seq": 2}']);
  });

  it("returns multiple events arriving in one chunk", () => {
    const parser = new SseParser();
    const out = parser.push("data: a\n\ndata: b\n\n");
    expect(out).toEqual(["a", "b"]);
  });

  it("ignores keepalive comments", () => {
    const parser = new SseParser();
    expect(parser.push(": keepalive\n\n: keepalive\n\ndata: x\n\n")).toEqual(["x"]);
  });

  it("normalizes CRLF line endings", () => {
    const parser = new SseParser();
    expect(parser.push("data: y\r\n\r\n")).toEqual(["y"]);
  });

  it("joins multi-line data fields with newlines", () => {
    const parser = new SseParser();
    expect(parser.push("data: a\ndata: b\n\n")).toEqual(["a\nb"]);
  });
});

function frameDoc(seq: number, extra: Partial<TelemetryFrame> = {}): string {
  const frame: TelemetryFrame = {
    seq,
    t: seq * 0.1,
    phase: "Exposure",
    phase_index: 0,
    pending_fms: false,
    complete: false,
    position: [0, 0, 0],
    heading: [1, 0, 0, 0],
    fov: 110,
    opacity: 0,
    coins_collected: 0,
    recent_events: [],
    ...extra,
  };
  return `data: ${JSON.stringify(frame)}\n\n`;
}

function streamResponse(chunks: string[], close = true): Response {
  const encoder = new TextEncoder();
  const body = new ReadableStream<Uint8Array>({
    start(controller) {
      for (const chunk of chunks) controller.enqueue(encoder.encode(chunk));
      if (close) controller.close();
    },
  });
  return new Response(body, {
    status: 200,
    headers: { "Content-Type": "text/event-stream" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("TelemetryStream", () => {
  it("decodes frames and reports open then closed without retry", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => streamResponse([frameDoc(1), ": keepalive\n\n" + frameDoc(2)])),
    );
    const frames: TelemetryFrame[] = [];
    const statuses: StreamStatus[] = [];
    const stream = new TelemetryStream("/events", {
      onFrame: (f) => frames.push(f),
      onStatus: (s) => statuses.push(s),
      retryMs: 0,
    });
    stream.start();
    await vi.waitFor(() => {
      expect(statuses).toContain("closed");
    });
    expect(frames.map((f) => f.seq)).toEqual([1, 2]);
    expect(statuses).toEqual(["connecting", "open", "closed"]);
  });

  it("reports an error for a failed connection and stops when retry is off", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => new Response("no", { status: 503 })),
    );
    const statuses: StreamStatus[] = [];
    const stream = new TelemetryStream("/events", {
      onFrame: () => {},
      onStatus: (s) => statuses.push(s),
      retryMs: 0,
    });
    stream.start();
    await vi.waitFor(() => {
      expect(statuses).toContain("closed");
    });
    expect(statuses).toEqual(["connecting", "error", "closed"]);
  });

  it("stop() aborts an open never-ending stream without an error status", async () => {
    let abortSignal: AbortSignal | undefined;
    vi.stubGlobal(
      "fetch",
      vi.fn(async (_url: string, init?: RequestInit) => {
        abortSignal = init?.signal ?? undefined;
        const body = new ReadableStream<Uint8Array>({
          start(controller) {
            controller.enqueue(new TextEncoder().encode(frameDoc(1)));
            init?.signal?.addEventListener("abort", () => {
              controller.error(new Error("aborted"));
            });
          },
        });
        return new Response(body, { status: 200 });
      }),
    );
    const frames: TelemetryFrame[] = [];
    const statuses: StreamStatus[] = [];
    const stream = new TelemetryStream("/events", {
      onFrame: (f) => frames.push(f),
      onStatus: (s) => statuses.push(s),
    });
    stream.start();
    await vi.waitFor(() => {
      expect(frames).toHaveLength(1);
    });
    stream.stop();
    await vi.waitFor(() => {
      expect(statuses).toContain("closed");
    });
    expect(abortSignal?.aborted).toBe(true);
    expect(statuses).not.toContain("error");
  });

  it("reconnects after the stream ends when retry is configured", async () => {
    let connections = 0;
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        connections += 1;
        return streamResponse([frameDoc(connections)]);
      }),
    );
    const frames: TelemetryFrame[] = [];
    const stream = new TelemetryStream("/events", {
      onFrame: (f) => frames.push(f),
      retryMs: 5,
    });
    stream.start();
    await vi.waitFor(() => {
      expect(frames.length).toBeGreaterThanOrEqual(2);
    });
    stream.stop();
    expect(connections).toBeGreaterThanOrEqual(2);
  });
});
